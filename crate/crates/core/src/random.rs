//! Seeded generators for clopens, homeomorphisms, automorphisms and
//! embeddings.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::AutGroup;
use crate::automorphism::{AutLabeling, PowerAutomorphism};
use crate::cantor::{orbit_witness, piecewise_glue, Clopen, EPHomeo, PointContext, TailClopen, TailMap, Tree, Word};
use crate::error::{Error, Result};
use crate::fraisse::{BPEmbedding, Coord};
use crate::power::PowerContext;

pub type Rand = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rand {
    ChaCha8Rng::seed_from_u64(seed)
}

const ATTEMPTS: usize = 1000;

/// Random thresholds up to 2, tail words of period up to 3, and an
/// exceptional part refined at most one level below the region's prefixes.
pub fn tail_clopen(ctx: &Arc<PointContext>, rng: &mut Rand) -> Result<TailClopen> {
    let n = ctx.n();
    let thresholds: Vec<usize> = (0..n).map(|_| rng.gen_range(0..=2)).collect();
    let tails: Vec<Vec<bool>> = (0..n)
        .map(|_| {
            let p = rng.gen_range(1..=3);
            (0..p).map(|_| rng.gen_bool(0.5)).collect()
        })
        .collect();
    let mut inside = Vec::new();
    for w in ctx.exceptional_region(&thresholds).prefixes() {
        match rng.gen_range(0..4) {
            0 => inside.push(w),
            1 => {}
            _ => {
                for b in 0..2 {
                    if rng.gen_bool(0.5) {
                        inside.push(w.child(b));
                    }
                }
            }
        }
    }
    TailClopen::from_tails(ctx, thresholds, tails, &Clopen::from_prefixes(&inside))
}

/// A clopen that is neither empty nor all of `X°`.
pub fn proper_tail_clopen(ctx: &Arc<PointContext>, rng: &mut Rand) -> Result<TailClopen> {
    for _ in 0..ATTEMPTS {
        let c = tail_clopen(ctx, rng)?;
        if !c.is_empty() && !c.is_full() {
            return Ok(c);
        }
    }
    Err(Error::SearchBudgetExceeded(ATTEMPTS))
}

/// Two proper clopens of the same type.
pub fn equal_type_pair(ctx: &Arc<PointContext>, rng: &mut Rand) -> Result<(TailClopen, TailClopen)> {
    let c1 = proper_tail_clopen(ctx, rng)?;
    let t = c1.type_of()?;
    for _ in 0..ATTEMPTS {
        let c2 = proper_tail_clopen(ctx, rng)?;
        if c2.type_of()? == t {
            return Ok((c1, c2));
        }
    }
    Err(Error::SearchBudgetExceeded(ATTEMPTS))
}

/// Two proper clopens whose types differ.
pub fn mismatched_pair(ctx: &Arc<PointContext>, rng: &mut Rand) -> Result<(TailClopen, TailClopen)> {
    let c1 = proper_tail_clopen(ctx, rng)?;
    let t = c1.type_of()?;
    for _ in 0..ATTEMPTS {
        let c2 = proper_tail_clopen(ctx, rng)?;
        if c2.type_of()? != t {
            return Ok((c1, c2));
        }
    }
    Err(Error::SearchBudgetExceeded(ATTEMPTS))
}

/// A product of `steps` orbit witnesses between random equal-type pairs.
pub fn point_fixing_homeo(ctx: &Arc<PointContext>, rng: &mut Rand, steps: usize) -> Result<EPHomeo> {
    let mut h = EPHomeo::identity(ctx);
    for _ in 0..steps {
        let (c1, c2) = equal_type_pair(ctx, rng)?;
        h = orbit_witness(&c1, &c2)?.compose(&h)?;
    }
    Ok(h)
}

fn pick(rng: &mut Rand, from: &[u16]) -> u16 {
    *from.choose(rng).expect("nonempty stabilizer")
}

/// A labeling with body labels in all of `Aut A` and tail labels in the
/// stabilizers of the filters.
pub fn labeling(ctx: &Arc<PowerContext>, rng: &mut Rand) -> Result<AutLabeling> {
    let auts = ctx.auts();
    let all: Vec<u16> = (0..auts.len() as u16).collect();
    let n = ctx.n();
    let thresholds: Vec<usize> = (0..n).map(|_| rng.gen_range(0..=2)).collect();
    let tails: Vec<Vec<u16>> = (0..n)
        .map(|i| {
            let stab = auts.stabilizer(ctx.filters()[i]);
            let p = rng.gen_range(1..=2);
            (0..p).map(|_| pick(rng, &stab)).collect()
        })
        .collect();
    let depth = ctx.points().exceptional_region(&thresholds).depth() + 1;
    let parts = Word::all_of_length(depth).into_iter().map(|w| (w, Tree::Leaf(pick(rng, &all)))).collect();
    TailMap::from_parts(ctx.points(), thresholds, tails, Tree::from_parts(parts).expect("complete code"))
}

pub fn automorphism(ctx: &Arc<PowerContext>, rng: &mut Rand, steps: usize) -> Result<PowerAutomorphism> {
    let h = point_fixing_homeo(ctx.points(), rng, steps)?;
    let k = labeling(ctx, rng)?;
    PowerAutomorphism::new(ctx, h, k)
}

/// `m = n + 2` blocks: the depth-`d` cylinder of each point, then the
/// remaining depth-`d` cylinders split into two nonempty blocks.
pub fn block_family(ctx: &PowerContext, depth: usize) -> Result<Vec<Clopen>> {
    let pts = ctx.points();
    let n = ctx.n();
    let mut blocks: Vec<Clopen> = (0..n).map(|i| Clopen::cylinder(&pts.point(i).prefix(depth))).collect();
    let rest: Vec<Word> = Word::all_of_length(depth).into_iter().filter(|w| !blocks.iter().any(|b| b.contains_cylinder(w))).collect();
    if blocks.iter().enumerate().any(|(i, b)| (0..n).any(|j| j != i && b.contains_point(&pts.point(j)))) || rest.len() < 2 {
        return Err(Error::BadContext(format!("depth {depth} is too shallow for the blocks")));
    }
    let half = rest.len() / 2;
    blocks.push(Clopen::from_prefixes(&rest[..half]));
    blocks.push(Clopen::from_prefixes(&rest[half..]));
    Ok(blocks)
}

/// A homeomorphism exchanging two disjoint equal-type clopens inside `b`.
fn swap_inside(ctx: &Arc<PointContext>, b: &TailClopen, rng: &mut Rand) -> Result<Option<EPHomeo>> {
    for _ in 0..50 {
        let x = tail_clopen(ctx, rng)?.intersect(b)?;
        let y = tail_clopen(ctx, rng)?.intersect(b)?.difference(&x)?;
        if x.is_empty() || y.is_empty() || x.type_of()? != y.type_of()? {
            continue;
        }
        let h = orbit_witness(&x, &y)?;
        return Ok(Some(piecewise_glue(ctx, &[(x, h.clone()), (y, h.inverse())])?));
    }
    Ok(None)
}

/// An automorphism fixing every member of the block family: a product of
/// swaps inside blocks, with labels in the stabilizer of `e_i` on the
/// `i`-th point block and the identity on the extra blocks.
pub fn block_automorphism(ctx: &Arc<PowerContext>, blocks: &[Clopen], rng: &mut Rand) -> Result<PowerAutomorphism> {
    let pts = ctx.points();
    let auts = ctx.auts();
    let n = ctx.n();
    let mut h = EPHomeo::identity(pts);
    for b in blocks {
        let tb = TailClopen::from_clopen(pts, b);
        if rng.gen_bool(0.7) {
            if let Some(s) = swap_inside(pts, &tb, rng)? {
                h = s.compose(&h)?;
            }
        }
    }
    let block_depth = blocks.iter().map(Clopen::depth).max().unwrap_or(0);
    let thresholds: Vec<usize> = (0..n).map(|_| block_depth + rng.gen_range(0..=2)).collect();
    let stabs: Vec<Vec<u16>> = (0..n).map(|i| auts.stabilizer(ctx.filters()[i])).collect();
    let tails: Vec<Vec<u16>> = (0..n).map(|i| (0..rng.gen_range(1..=2)).map(|_| pick(rng, &stabs[i])).collect()).collect();
    let depth = block_depth.max(pts.exceptional_region(&thresholds).depth()) + 1;
    let parts = Word::all_of_length(depth)
        .into_iter()
        .map(|w| {
            let k = blocks.iter().position(|b| b.contains_cylinder(&w)).expect("blocks cover");
            let label = if k < n { pick(rng, &stabs[k]) } else { AutGroup::IDENTITY };
            (w, Tree::Leaf(label))
        })
        .collect();
    let k = TailMap::from_parts(pts, thresholds, tails, Tree::from_parts(parts).expect("complete code"))?;
    PowerAutomorphism::new(ctx, h, k)
}

/// A block automorphism spoiled by moving material between the two extra
/// blocks or by a nontrivial label on one of them.
pub fn non_block_automorphism(ctx: &Arc<PowerContext>, blocks: &[Clopen], rng: &mut Rand) -> Result<PowerAutomorphism> {
    let base = block_automorphism(ctx, blocks, rng)?;
    let pts = ctx.points();
    let m = blocks.len();
    let (x, y) = (&blocks[m - 2], &blocks[m - 1]);
    let nontrivial: Vec<u16> = (1..ctx.auts().len() as u16).collect();
    let spoil = if nontrivial.is_empty() || rng.gen_bool(0.5) {
        let cx = x.prefixes()[0].clone();
        let cy = y.prefixes()[0].clone();
        let (a, b) = (TailClopen::cylinder(pts, &cx), TailClopen::cylinder(pts, &cy));
        let h = orbit_witness(&a, &b)?;
        PowerAutomorphism::from_homeo(ctx, piecewise_glue(pts, &[(a, h.clone()), (b, h.inverse())])?)?
    } else {
        let alpha = pick(rng, &nontrivial);
        let c = TailClopen::from_clopen(pts, &Clopen::cylinder(&y.prefixes()[0]));
        crate::automorphism::characteristic(ctx, &c, alpha)?
    };
    spoil.compose(&base)
}

/// A random embedding `A^u → D`: the free cells at a random depth past the
/// first separating one carry random automorphisms of random source
/// coordinates, every coordinate used at least once.
pub fn bp_embedding(ctx: &Arc<PowerContext>, u: usize, rng: &mut Rand) -> Result<BPEmbedding> {
    let pts = ctx.points();
    let n = ctx.n();
    let separates = |d: usize| {
        let mut ps: Vec<Word> = (0..n).map(|i| pts.point(i).prefix(d)).collect();
        ps.sort();
        ps.dedup();
        ps.len() == n && (1usize << d) >= n + u
    };
    let d0 = (1..).find(|&d| separates(d)).expect("points are distinct");
    let depth = d0 + rng.gen_range(0..=1);
    let words = Word::all_of_length(depth);
    let owner = |w: &Word| (0..n).find(|&i| pts.point(i).starts_with(w));
    let free: Vec<usize> = (0..words.len()).filter(|&k| owner(&words[k]).is_none()).collect();
    let mut srcs: Vec<usize> = (0..u).collect();
    while srcs.len() < free.len() {
        srcs.push(rng.gen_range(0..u));
    }
    srcs.shuffle(rng);
    let mut parts = Vec::new();
    let mut next = 0;
    for w in &words {
        let leaf = match owner(w) {
            Some(i) => Coord::Idem(ctx.filters()[i]),
            None => {
                next += 1;
                Coord::Aut { aut: rng.gen_range(0..ctx.auts().len() as u16), src: srcs[next - 1] }
            }
        };
        parts.push((w.clone(), Tree::Leaf(leaf)));
    }
    BPEmbedding::new(ctx, u, Tree::from_parts(parts).expect("complete code"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::builtin::{gf2_idempotent_reduct, gf4_idempotent_reduct};
    use crate::automorphism::{verify_stabilizer_containment, StabilizerOutcome};

    #[test]
    fn generators_are_deterministic() {
        let ctx = Arc::new(PointContext::standard(2));
        let a = point_fixing_homeo(&ctx, &mut seeded(7), 2).unwrap();
        let b = point_fixing_homeo(&ctx, &mut seeded(7), 2).unwrap();
        assert_eq!(a, b);
        assert!(a.fixes_points() && a.extends_to_x());
    }

    #[test]
    fn block_automorphisms() {
        let alg = Arc::new(gf4_idempotent_reduct());
        let ctx = PowerContext::standard(&alg, &[0, 1]).unwrap();
        let blocks = block_family(&ctx, 3).unwrap();
        let mut rng = seeded(3);
        for _ in 0..3 {
            let phi = block_automorphism(&ctx, &blocks, &mut rng).unwrap();
            assert!(matches!(verify_stabilizer_containment(&phi, &blocks).unwrap(), StabilizerOutcome::Decomposition { .. }));
            let bad = non_block_automorphism(&ctx, &blocks, &mut rng).unwrap();
            assert!(matches!(verify_stabilizer_containment(&bad, &blocks).unwrap(), StabilizerOutcome::Violated { .. }));
        }
    }

    #[test]
    fn embeddings_respect_filters() {
        let alg = Arc::new(gf2_idempotent_reduct());
        let ctx = PowerContext::standard(&alg, &[0, 1]).unwrap();
        let mut rng = seeded(11);
        for u in 1..=3 {
            let psi = bp_embedding(&ctx, u, &mut rng).unwrap();
            assert_eq!(psi.u(), u);
        }
    }
}
