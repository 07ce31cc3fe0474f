//! Good partitions, three-factor decompositions of point-fixing
//! homeomorphisms, and word-ball growth in finite actions.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use serde::Serialize;

use crate::automorphism::PowerAutomorphism;
use crate::cantor::{orbit_witness, piecewise_glue, Clopen, EPHomeo, PointContext, TailClopen, Word};
use crate::error::{Error, Result};
use crate::power::{PowerContext, PowerElement};

/// A partition of `X°` into `n + 2` good clopens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoodPartition {
    pub ctx: Arc<PointContext>,
    pub blocks: Vec<TailClopen>,
}

/// Block `t` takes the tail cells `j ≡ t + 1 (mod n + 2)` of every branch;
/// the off-branch region joins the first block.
pub fn good_partition(ctx: &Arc<PointContext>) -> Result<GoodPartition> {
    let n = ctx.n();
    if n == 0 {
        return Err(Error::NoPoints);
    }
    let m = n + 2;
    let off = ctx.off_branch();
    let blocks = (0..m)
        .map(|t| {
            let tails = vec![(0..m).map(|r| r == t).collect(); n];
            let exc = if t == 0 { off.clone() } else { Clopen::empty() };
            TailClopen::from_tails(ctx, vec![0; n], tails, &exc)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GoodPartition { ctx: ctx.clone(), blocks })
}

impl GoodPartition {
    /// Blocks are good, pairwise disjoint and cover `X°`.
    pub fn is_valid(&self) -> Result<bool> {
        let mut union = TailClopen::empty(&self.ctx);
        for (a, b) in self.blocks.iter().enumerate() {
            if !b.is_good() {
                return Ok(false);
            }
            for c in &self.blocks[a + 1..] {
                if !b.is_disjoint(c)? {
                    return Ok(false);
                }
            }
            union = union.union(b)?;
        }
        Ok(self.blocks.len() == self.ctx.n() + 2 && union.is_full())
    }
}

/// `σ = σ₃ ∘ σ₂ ∘ σ₁` with `σ₁, σ₃` fixing `b` and `σ₂` fixing `c` pointwise.
#[derive(Debug, Clone)]
pub struct ThreeFactors {
    pub sigma1: EPHomeo,
    pub sigma2: EPHomeo,
    pub sigma3: EPHomeo,
}

impl ThreeFactors {
    pub fn product(&self) -> Result<EPHomeo> {
        self.sigma3.compose(&self.sigma2)?.compose(&self.sigma1)
    }
}

/// A clopen `f ⊆ d` with the same type as `p` and `d ∖ f` good: the first
/// half of `d` cut down to the limit points of `p`.
fn carve_inside(d: &TailClopen, p: &TailClopen) -> Result<TailClopen> {
    let ctx = d.ctx();
    if p.is_empty() {
        return Ok(TailClopen::empty(ctx));
    }
    let (half, _) = d.split_good()?;
    let limit = p.limit_points();
    let n = ctx.n();
    let mask_tails = (0..n).map(|i| vec![limit.contains(&i)]).collect();
    let mask = TailClopen::from_tails(ctx, vec![0; n], mask_tails, &Clopen::empty())?;
    let f = half.intersect(&mask)?;
    if !f.is_empty() {
        return Ok(f);
    }
    if let Some(w) = half.exceptional().prefixes().into_iter().next() {
        return Ok(TailClopen::cylinder(ctx, &w));
    }
    let th = half.0.thresholds();
    let i = (0..n).find(|&i| half.0.tails()[i].contains(&true)).expect("good clopen");
    let mut j = th[i] + 1;
    while !half.0.tail_value(i, j) {
        j += 1;
    }
    Ok(TailClopen::cylinder(ctx, &ctx.cell(i, j)))
}

fn check_sigma(sigma: &EPHomeo, ctx: &Arc<PointContext>) -> Result<()> {
    if sigma.src_ctx() != ctx || sigma.dst_ctx() != ctx {
        return Err(Error::ContextMismatch);
    }
    if !sigma.extends_to_x() {
        return Err(Error::NotExtendable);
    }
    if !sigma.fixes_points() {
        return Err(Error::PointNotFixed);
    }
    Ok(())
}

/// A homeomorphism carrying `from` onto `to`, which must share a type.
fn witness(from: &TailClopen, to: &TailClopen, what: &str) -> Result<EPHomeo> {
    orbit_witness(from, to).map_err(|e| Error::TypeWitnessFailure(format!("{what}: {e}")))
}

fn glue(ctx: &Arc<PointContext>, pieces: Vec<(TailClopen, EPHomeo)>) -> Result<EPHomeo> {
    let pieces: Vec<_> = pieces.into_iter().filter(|(d, _)| !d.is_empty()).collect();
    piecewise_glue(ctx, &pieces)
}

/// Writes `σ` as `σ₃ σ₂ σ₁` with `σ₁, σ₃ ∈ G_b` and `σ₂ ∈ G_c`.
pub fn claim_gbgcgb(sigma: &EPHomeo, b: &TailClopen, c: &TailClopen, d: &TailClopen) -> Result<ThreeFactors> {
    let ctx = b.ctx().clone();
    check_sigma(sigma, &ctx)?;
    for (name, x) in [("b", b), ("c", c), ("d", d)] {
        if !x.is_good() {
            return Err(Error::PreconditionNotGood(name));
        }
    }
    if !b.is_disjoint(c)? || !b.is_disjoint(d)? || !c.is_disjoint(d)? || !b.union(c)?.union(d)?.is_full() {
        return Err(Error::BadContext("b, c, d must partition the punctured space".into()));
    }
    let sigma_inv = sigma.inverse();
    let pre_b = sigma_inv.apply_tail_clopen(b)?;
    if !d.difference(&pre_b)?.is_good() {
        return Err(Error::PreconditionNotGood("d ∖ σ⁻¹(b)"));
    }
    let cd = c.union(d)?;
    let to_b = cd.intersect(&pre_b)?;
    let f = carve_inside(d, &to_b)?;
    let tau1 = witness(&to_b, &f, "τ₁")?;
    let stay = cd.difference(&pre_b)?;
    let tau2 = witness(&stay, &cd.difference(&f)?, "τ₂")?;
    let b_out = b.difference(&pre_b)?;
    let d_rest = d.difference(&f)?;
    let tau3_dom = b_out.union(&d_rest)?;
    let tau3 = witness(&tau3_dom, d, "τ₃")?;

    let sigma1 = glue(&ctx, vec![(to_b.clone(), tau1.clone()), (stay.clone(), tau2.clone())])?;
    let sigma2 = glue(&ctx, vec![(f.clone(), sigma.compose(&tau1.inverse())?), (b.intersect(&pre_b)?, sigma.clone()), (tau3_dom.clone(), tau3.clone())])?;
    let tau2_inv = tau2.inverse();
    let tau3_inv = tau3.inverse();
    let sigma3 = glue(
        &ctx,
        vec![
            (c.clone(), sigma.compose(&tau2_inv)?),
            (tau3.apply_tail_clopen(&b_out)?, sigma.compose(&tau3_inv)?),
            (tau3.apply_tail_clopen(&d_rest)?, sigma.compose(&tau2_inv)?.compose(&tau3_inv)?),
        ],
    )?;
    Ok(ThreeFactors { sigma1, sigma2, sigma3 })
}

/// Checks the stabilizer memberships and the product of a factorization.
pub fn verify_factors(sigma: &EPHomeo, b: &TailClopen, c: &TailClopen, f: &ThreeFactors) -> Result<bool> {
    Ok(f.sigma1.fixes_pointwise(b)? && f.sigma3.fixes_pointwise(b)? && f.sigma2.fixes_pointwise(c)? && f.product()?.same_map(sigma)?)
}

/// Result of the pigeonhole factorization over a good partition.
#[derive(Debug, Clone)]
pub struct Pigeonhole {
    /// 0-based block indices: factors lie in `G_{b_i} G_{b_j} G_{b_i}`.
    pub i: usize,
    pub j: usize,
    /// For each point, the blocks `b_i` (`i ≤ n`) for which it is not a limit
    /// point of `b_{n+2} ∖ σ⁻¹(b_i)`.
    pub failures: Vec<Vec<usize>>,
    pub factors: ThreeFactors,
}

/// Finds `i` with `b_{n+2} ∖ σ⁻¹(b_i)` good and factors `σ` through it.
pub fn pigeonhole_factor(sigma: &EPHomeo, part: &GoodPartition) -> Result<Pigeonhole> {
    let ctx = &part.ctx;
    check_sigma(sigma, ctx)?;
    let n = ctx.n();
    let last = &part.blocks[n + 1];
    let sigma_inv = sigma.inverse();
    let mut failures = vec![Vec::new(); n];
    let mut good = None;
    for (i, block) in part.blocks[..=n].iter().enumerate() {
        let rest = last.difference(&sigma_inv.apply_tail_clopen(block)?)?;
        let limits = rest.limit_points();
        for (k, fail) in failures.iter_mut().enumerate() {
            if !limits.contains(&k) {
                fail.push(i);
            }
        }
        if good.is_none() && rest.is_good() {
            good = Some(i);
        }
    }
    if failures.iter().any(|f| f.len() > 1) {
        return Err(Error::BadContext("a point fails for two blocks".into()));
    }
    let i = good.ok_or_else(|| Error::BadContext("no block passes".into()))?;
    let j = (0..=n).find(|&j| j != i).expect("n ≥ 1");
    let mut c = TailClopen::empty(ctx);
    for (t, block) in part.blocks[..=n].iter().enumerate() {
        if t != i {
            c = c.union(block)?;
        }
    }
    let factors = claim_gbgcgb(sigma, &part.blocks[i], &c, last)?;
    Ok(Pigeonhole { i, j, failures, factors })
}

/// Sizes of the word balls `E^1 ⊆ E^2 ⊆ …` of a permutation action.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Growth {
    pub degree: usize,
    pub generators: usize,
    pub sizes: Vec<usize>,
    /// First `t` with `E^t = E^{t+1}`, if reached.
    pub stabilized_at: Option<usize>,
    pub group_order: usize,
}

/// Word-ball growth of the symmetric set `E = gens ∪ gens⁻¹ ∪ {id}`.
pub fn bergman_growth(gens: &[Vec<usize>], steps: usize) -> Result<Growth> {
    let first = gens.first().ok_or(Error::EmptyGeneratorSet)?;
    let degree = first.len();
    let mut e: Vec<Vec<usize>> = vec![(0..degree).collect()];
    for g in gens {
        if g.len() != degree || g.iter().copied().collect::<HashSet<_>>().len() != degree || g.iter().any(|&x| x >= degree) {
            return Err(Error::NotBijective("generator is not a permutation".into()));
        }
        let mut inv = vec![0; degree];
        for (x, &y) in g.iter().enumerate() {
            inv[y] = x;
        }
        e.push(g.clone());
        e.push(inv);
    }
    e.sort();
    e.dedup();
    let mut ball: HashSet<Vec<usize>> = e.iter().cloned().collect();
    let mut frontier: Vec<Vec<usize>> = e.clone();
    let mut sizes = vec![ball.len()];
    let mut stabilized_at = None;
    for t in 1..steps.max(1) {
        let mut next = Vec::new();
        for g in &frontier {
            for h in &e {
                let gh: Vec<usize> = h.iter().map(|&x| g[x]).collect();
                if ball.insert(gh.clone()) {
                    next.push(gh);
                }
            }
        }
        if next.is_empty() && stabilized_at.is_none() {
            stabilized_at = Some(t);
        }
        frontier = next;
        sizes.push(ball.len());
    }
    let group_order = if stabilized_at.is_some() { ball.len() } else { closure_size(&e) };
    Ok(Growth { degree, generators: e.len(), sizes, stabilized_at, group_order })
}

fn closure_size(e: &[Vec<usize>]) -> usize {
    let mut seen: HashSet<Vec<usize>> = e.iter().cloned().collect();
    let mut stack: Vec<Vec<usize>> = e.to_vec();
    while let Some(g) = stack.pop() {
        for h in e {
            let gh: Vec<usize> = h.iter().map(|&x| g[x]).collect();
            if seen.insert(gh.clone()) {
                stack.push(gh);
            }
        }
    }
    seen.len()
}

/// The permutation a homeomorphism induces on the cylinders of length `depth`.
pub fn cell_action(h: &EPHomeo, depth: usize) -> Result<Vec<usize>> {
    let ctx = h.src_ctx();
    let cells = Word::all_of_length(depth);
    let index: HashMap<TailClopen, usize> = cells.iter().enumerate().map(|(k, w)| (TailClopen::cylinder(ctx, w), k)).collect();
    cells
        .iter()
        .map(|w| {
            let img = h.apply_tail_clopen(&TailClopen::cylinder(ctx, w))?;
            index.get(&img).copied().ok_or(Error::NotLevelPreserving(depth))
        })
        .collect()
}

/// The permutation an automorphism induces on the elements of depth `depth`.
pub fn element_action(phi: &PowerAutomorphism, depth: usize, budget: usize) -> Result<Vec<usize>> {
    let elems = phi.ctx().elements_at_depth(depth, budget)?;
    let index: HashMap<&PowerElement, usize> = elems.iter().enumerate().map(|(k, f)| (f, k)).collect();
    elems.iter().map(|f| index.get(&phi.apply(f)?).copied().ok_or(Error::NotLevelPreserving(depth))).collect()
}

/// Depth-`depth` elements of `ctx`, for labelling an element action.
pub fn action_domain(ctx: &Arc<PowerContext>, depth: usize, budget: usize) -> Result<Vec<PowerElement>> {
    ctx.elements_at_depth(depth, budget)
}
