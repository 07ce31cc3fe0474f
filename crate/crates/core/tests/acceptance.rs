//! Acceptance suite: one PASS/FAIL line per criterion, each within its time
//! limit. Runs without the libtest harness so the lines are always shown.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;
use std::time::{Duration, Instant};

use fbp::algebra::{builtin, tuples, AutGroup, FiniteAlgebra};
use fbp::automorphism::{
    characteristic, decompose_k, generate_kprime_factor, in_w, verify_stabilizer_containment, KprimeCase, PowerAutomorphism, StabilizerOutcome,
};
use fbp::cantor::{example_2_3_report, orbit_witness, Clopen, EPHomeo, PointContext, TailClopen, TailMap, Tree, Word};
use fbp::factor::{good_partition, pigeonhole_factor, verify_factors};
use fbp::fraisse::{extend_weak_homogeneity, Coord, PowerClass, PowerEmbedding};
use fbp::free::{loop_ring_split, pattern_context, theta_class_is_power_truncation, verify_fk_decomposition, FreeData};
use fbp::power::{generated_subalgebra, principal_congruence, reduce_idempotents, PowerContext, PowerElement, ProductIso};
use fbp::random;

type Outcome = Result<(), String>;
type BoxedOp<'a> = (usize, Box<dyn Fn(&[usize]) -> usize + 'a>);
type OpRef<'a> = (usize, &'a dyn Fn(&[usize]) -> usize);

fn ensure(cond: bool, what: impl FnOnce() -> String) -> Outcome {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

fn err<E: std::fmt::Debug>(e: E) -> String {
    format!("{e:?}")
}

/// Congruence generated by `pairs` on `0..n` under the given operations,
/// by closing the merged pairs under one-step translations.
fn brute_congruence(n: usize, ops: &[OpRef<'_>], pairs: &[(usize, usize)]) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let next = p[y];
            p[y] = r;
            y = next;
        }
        r
    }
    let mut queue: Vec<(usize, usize)> = Vec::new();
    let union = |p: &mut Vec<usize>, q: &mut Vec<(usize, usize)>, a: usize, b: usize| {
        let (ra, rb) = (find(p, a), find(p, b));
        if ra != rb {
            p[ra] = rb;
            q.push((a, b));
        }
    };
    for &(a, b) in pairs {
        union(&mut parent, &mut queue, a, b);
    }
    while let Some((a, b)) = queue.pop() {
        for (arity, f) in ops {
            for pos in 0..*arity {
                for rest in tuples(n, arity - 1) {
                    let mut xs = rest.clone();
                    xs.insert(pos, a);
                    let mut ys = rest;
                    ys.insert(pos, b);
                    let (x, y) = (f(&xs), f(&ys));
                    union(&mut parent, &mut queue, x, y);
                }
            }
        }
    }
    (0..n).map(|x| find(&mut parent, x)).collect()
}

fn same_partition(a: &[usize], b: &[usize]) -> bool {
    a.len() == b.len() && (0..a.len()).all(|i| (0..a.len()).all(|j| (a[i] == a[j]) == (b[i] == b[j])))
}

fn alg_ops(alg: &FiniteAlgebra) -> Vec<BoxedOp<'_>> {
    (0..alg.ops().len()).map(|op| (alg.ops()[op].arity, Box::new(move |a: &[usize]| alg.apply(op, a)) as Box<dyn Fn(&[usize]) -> usize>)).collect()
}

fn criterion_1() -> Outcome {
    let alg = builtin::gf2_idempotent_reduct();
    ensure(alg.is_simple(), || "not simple".into())?;
    ensure(!alg.is_abelian().map_err(err)?, || "abelian".into())?;
    ensure(alg.idempotents() == vec![0, 1], || format!("idempotents {:?}", alg.idempotents()))?;
    let auts: Vec<_> = alg.automorphisms(1 << 16).map_err(err)?.into_iter().filter(|e| e.is_automorphism).collect();
    ensure(auts.len() == 1, || format!("|Aut| = {}", auts.len()))?;
    ensure(alg.proper_subalgebras(1 << 16).map_err(err)? == vec![vec![0], vec![1]], || "proper subalgebras".into())?;

    let n = alg.size();
    let ops = alg_ops(&alg);
    let refs: Vec<OpRef<'_>> = ops.iter().map(|(a, f)| (*a, f.as_ref())).collect();
    for a in 0..n {
        for b in 0..a {
            let c = brute_congruence(n, &refs, &[(a, b)]);
            ensure(c.iter().all(|&x| x == c[0]), || format!("Cg({a},{b}) is not full"))?;
        }
    }
    let pair = |x: usize, y: usize| x * n + y;
    let sq_ops: Vec<BoxedOp<'_>> = (0..alg.ops().len())
        .map(|op| {
            let alg = &alg;
            let f = move |a: &[usize]| {
                let l: Vec<usize> = a.iter().map(|&p| p / n).collect();
                let r: Vec<usize> = a.iter().map(|&p| p % n).collect();
                alg.apply(op, &l) * n + alg.apply(op, &r)
            };
            (alg.ops()[op].arity, Box::new(f) as Box<dyn Fn(&[usize]) -> usize>)
        })
        .collect();
    let sq_refs: Vec<OpRef<'_>> = sq_ops.iter().map(|(a, f)| (*a, f.as_ref())).collect();
    let gens: Vec<(usize, usize)> = (0..n).flat_map(|a| (0..n).map(move |b| (pair(a, a), pair(b, b)))).collect();
    let c = brute_congruence(n * n, &sq_refs, &gens);
    let diag_block = c[pair(0, 0)];
    let diagonal_is_block = (0..n * n).all(|p| (c[p] == diag_block) == (p / n == p % n));
    ensure(!diagonal_is_block, || "diagonal is a block of the square".into())
}

fn criterion_2() -> Outcome {
    let alg = Arc::new(builtin::gf2_idempotent_reduct());
    let mut checked = 0;
    for filters in [vec![0], vec![1], vec![0, 1]] {
        let ctx = PowerContext::standard(&alg, &filters).map_err(err)?;
        let mut elems = Vec::new();
        for d in 0..=2 {
            if let Ok(es) = ctx.elements_at_depth(d, 1 << 12) {
                elems.extend(es);
            }
        }
        for f in &elems {
            for g in &elems {
                let theta = principal_congruence(f, g).map_err(err)?;
                let sub = generated_subalgebra(&[f.clone(), g.clone()], 1 << 12).map_err(err)?;
                let members: Vec<PowerElement> = sub
                    .tuples
                    .iter()
                    .map(|t| PowerElement::new(&ctx, sub.cells.iter().cloned().zip(t.iter().copied()).collect()))
                    .collect::<fbp::Result<_>>()
                    .map_err(err)?;
                let index: HashMap<&Vec<usize>, usize> = sub.tuples.iter().enumerate().map(|(i, t)| (t, i)).collect();
                let ops: Vec<BoxedOp<'_>> = (0..alg.ops().len())
                    .map(|op| {
                        let (alg, sub, index) = (&alg, &sub, &index);
                        let h = move |a: &[usize]| {
                            let t: Vec<usize> = (0..sub.cells.len()).map(|c| alg.apply(op, &a.iter().map(|&i| sub.tuples[i][c]).collect::<Vec<_>>())).collect();
                            index[&t]
                        };
                        (alg.ops()[op].arity, Box::new(h) as Box<dyn Fn(&[usize]) -> usize>)
                    })
                    .collect();
                let refs: Vec<OpRef<'_>> = ops.iter().map(|(a, h)| (*a, h.as_ref())).collect();
                let oracle = brute_congruence(members.len(), &refs, &[(sub.generators[0], sub.generators[1])]);
                let mut labels = vec![usize::MAX; members.len()];
                for i in 0..members.len() {
                    if labels[i] != usize::MAX {
                        continue;
                    }
                    for j in i..members.len() {
                        if theta.related(&members[i], &members[j]).map_err(err)? {
                            labels[j] = i;
                        }
                    }
                }
                ensure(same_partition(&labels, &oracle), || format!("partition mismatch for {:?} / {:?}", f.cells(), g.cells()))?;
                checked += 1;
            }
        }
    }
    ensure(checked > 0, || "no pairs".into())
}

fn eval(auts: &AutGroup, phi: &PowerEmbedding, a: &[usize]) -> Vec<usize> {
    phi.coords()
        .iter()
        .map(|c| match *c {
            Coord::Aut { aut, src } => auts.act(aut, a[src]),
            Coord::Idem(e) => e,
        })
        .collect()
}

fn criterion_3() -> Outcome {
    let class = PowerClass::new(Arc::new(builtin::gf2_idempotent_reduct())).map_err(err)?;
    let size = class.alg().size();
    let mut pairs = 0;
    for u in 1..=3 {
        let sides: Vec<Vec<PowerEmbedding>> = (u..=3).map(|v| class.all_embeddings(u, v)).collect();
        let all: Vec<&PowerEmbedding> = sides.iter().flatten().collect();
        for phi in &all {
            for psi in &all {
                let am = class.amalgamate(phi, psi).map_err(err)?;
                for a in tuples(size, u) {
                    let left = eval(class.auts(), &am.phi_prime, &eval(class.auts(), phi, &a));
                    let right = eval(class.auts(), &am.psi_prime, &eval(class.auts(), psi, &a));
                    ensure(left == right, || format!("square fails for {phi:?} and {psi:?} at {a:?}"))?;
                    ensure(left.len() == am.m, || "wrong amalgam rank".into())?;
                }
                pairs += 1;
            }
        }
    }
    ensure(pairs > 0, || "no pairs".into())
}

fn criterion_4() -> Outcome {
    let alg = Arc::new(builtin::gf2_idempotent_reduct());
    let class = PowerClass::new(alg.clone()).map_err(err)?;
    let ctx = PowerContext::standard(&alg, &[0, 1]).map_err(err)?;
    let mut rng = random::seeded(4);
    for u in 1..=3 {
        for v in u..=3 {
            for phi in class.all_embeddings(u, v) {
                for _ in 0..20 {
                    let psi = random::bp_embedding(&ctx, u, &mut rng).map_err(err)?;
                    let ext = extend_weak_homogeneity(&class, &phi, &psi).map_err(err)?;
                    for a in tuples(alg.size(), u) {
                        let lhs = ext.apply(&eval(class.auts(), &phi, &a)).map_err(err)?;
                        let rhs = psi.apply(&a).map_err(err)?;
                        ensure(lhs == rhs, || format!("extension fails for {phi:?} at {a:?}"))?;
                    }
                }
            }
        }
    }
    Ok(())
}

/// A kernel labeling constant on the cylinders of length 2.
fn shallow_labeling(ctx: &Arc<PowerContext>, rng: &mut random::Rand) -> fbp::Result<TailMap<u16>> {
    use rand::Rng;
    let pts = ctx.points();
    let auts = ctx.auts();
    let parts = Word::all_of_length(2)
        .into_iter()
        .map(|w| {
            let owner = (0..ctx.n()).find(|&i| pts.point(i).starts_with(&w));
            let choices: Vec<u16> = match owner {
                Some(i) => auts.stabilizer(ctx.filters()[i]),
                None => (0..auts.len() as u16).collect(),
            };
            (w, Tree::Leaf(choices[rng.gen_range(0..choices.len())]))
        })
        .collect();
    Ok(TailMap::from_tree(pts, &Tree::from_parts(parts).expect("complete code")))
}

fn criterion_5() -> Outcome {
    let alg = Arc::new(builtin::gf4_idempotent_reduct());
    let ctx = PowerContext::standard(&alg, &[0]).map_err(err)?;
    let auts = ctx.auts();
    let mut rng = random::seeded(5);
    let id = PowerAutomorphism::identity(&ctx);
    let depth2 = ctx.elements_at_depth(2, 1 << 12).map_err(err)?;
    for t in 0..100 {
        let a = random::automorphism(&ctx, &mut rng, 2).map_err(err)?;
        let b = random::automorphism(&ctx, &mut rng, 2).map_err(err)?;
        let c = random::automorphism(&ctx, &mut rng, 2).map_err(err)?;
        let ab_c = a.compose(&b).map_err(err)?.compose(&c).map_err(err)?;
        let a_bc = a.compose(&b.compose(&c).map_err(err)?).map_err(err)?;
        ensure(ab_c == a_bc, || format!("associativity fails on triple {t}"))?;
        let inv = a.inverse().map_err(err)?;
        ensure(a.compose(&inv).map_err(err)? == id && inv.compose(&a).map_err(err)? == id, || format!("inverse law fails on {t}"))?;
        ensure(a.compose(&id).map_err(err)? == a, || "identity law".into())?;
        let g = PowerAutomorphism::from_homeo(&ctx, a.homeo().clone()).map_err(err)?;
        ensure(g.homeo().same_map(a.homeo()).map_err(err)?, || "section identity".into())?;
        let hab = a.compose(&b).map_err(err)?.homeo().clone();
        ensure(hab.same_map(&a.homeo().compose(b.homeo()).map_err(err)?).map_err(err)?, || "h is not a homomorphism".into())?;
        if t < 10 {
            for f in &depth2 {
                let lhs = a.compose(&b).map_err(err)?.apply(f).map_err(err)?;
                let rhs = a.apply(&b.apply(f).map_err(err)?).map_err(err)?;
                ensure(lhs == rhs, || "composition does not act as composition".into())?;
            }
        }
    }

    let depth3 = ctx.elements_at_depth(3, 1 << 16).map_err(err)?;
    for t in 0..30 {
        let k1 = shallow_labeling(&ctx, &mut rng).map_err(err)?;
        let k2 = shallow_labeling(&ctx, &mut rng).map_err(err)?;
        let x = PowerAutomorphism::from_labeling(&ctx, k1.clone()).map_err(err)?;
        let y = PowerAutomorphism::from_labeling(&ctx, k2.clone()).map_err(err)?;
        let product = k1.zip_with(&k2, |p, q| auts.mul(p, q)).map_err(err)?;
        ensure(x.compose(&y).map_err(err)?.labeling() == &product, || format!("p is not a homomorphism on {t}"))?;
        if k1 != k2 {
            let mut separated = false;
            for f in &depth3 {
                if x.apply(f).map_err(err)? != y.apply(f).map_err(err)? {
                    separated = true;
                    break;
                }
            }
            ensure(separated, || format!("labelings {t} act alike at depth 3"))?;
        }
    }

    let ctx = PowerContext::standard(&alg, &[0, 1]).map_err(err)?;
    let depth2 = ctx.elements_at_depth(2, 1 << 12).map_err(err)?;
    let index: HashMap<&PowerElement, usize> = depth2.iter().enumerate().map(|(i, f)| (f, i)).collect();
    let mut results: Vec<(usize, Vec<usize>, usize)> = Vec::new();
    for (op, o) in alg.ops().iter().enumerate() {
        for args in tuples(depth2.len(), o.arity) {
            let refs: Vec<&PowerElement> = args.iter().map(|&i| &depth2[i]).collect();
            let v = PowerElement::apply_op_in(&ctx, op, &refs).map_err(err)?;
            results.push((op, args, index[&v]));
        }
    }
    for t in 0..10 {
        let phi = random::automorphism(&ctx, &mut rng, 2).map_err(err)?;
        let images: Vec<PowerElement> = depth2.iter().map(|f| phi.apply(f)).collect::<fbp::Result<_>>().map_err(err)?;
        for (op, args, v) in &results {
            let refs: Vec<&PowerElement> = args.iter().map(|&i| &images[i]).collect();
            let w = PowerElement::apply_op_in(&ctx, *op, &refs).map_err(err)?;
            ensure(w == images[*v], || format!("automorphism {t} breaks op {op}"))?;
        }
    }
    Ok(())
}

fn criterion_6() -> Outcome {
    let alg = Arc::new(builtin::gf2_ring());
    let iso = ProductIso::new(&alg, 0).map_err(err)?;
    let factor3 = iso.factor().elements_at_depth(3, 1 << 12).map_err(err)?;
    let glued4: HashSet<PowerElement> = iso.glued().elements_at_depth(4, 1 << 16).map_err(err)?.into_iter().collect();
    let mut images = HashSet::new();
    for f1 in &factor3 {
        for f2 in &factor3 {
            let g = iso.apply(f1, f2).map_err(err)?;
            ensure(iso.invert(&g).map_err(err)? == (f1.clone(), f2.clone()), || "product iso does not invert".into())?;
            images.insert(g);
        }
    }
    ensure(images == glued4, || format!("image has {} of {} elements", images.len(), glued4.len()))?;

    let factor2 = iso.factor().elements_at_depth(2, 1 << 12).map_err(err)?;
    let pairs: Vec<(&PowerElement, &PowerElement)> = factor2.iter().flat_map(|a| factor2.iter().map(move |b| (a, b))).collect();
    for (op, o) in alg.ops().iter().enumerate() {
        for idx in tuples(pairs.len(), o.arity) {
            let left: Vec<&PowerElement> = idx.iter().map(|&i| pairs[i].0).collect();
            let right: Vec<&PowerElement> = idx.iter().map(|&i| pairs[i].1).collect();
            let glued: Vec<PowerElement> = idx.iter().map(|&i| iso.apply(pairs[i].0, pairs[i].1)).collect::<fbp::Result<_>>().map_err(err)?;
            let glued_refs: Vec<&PowerElement> = glued.iter().collect();
            let lhs = PowerElement::apply_op_in(iso.glued(), op, &glued_refs).map_err(err)?;
            let a = PowerElement::apply_op_in(iso.factor(), op, &left).map_err(err)?;
            let b = PowerElement::apply_op_in(iso.factor(), op, &right).map_err(err)?;
            ensure(lhs == iso.apply(&a, &b).map_err(err)?, || format!("product iso breaks op {op}"))?;
        }
    }

    let ctx = PowerContext::standard(&alg, &[0, 0]).map_err(err)?;
    let red = reduce_idempotents(&ctx).map_err(err)?;
    ensure(red.target().filters() == [0], || "reduction keeps both filters".into())?;
    let elems = ctx.elements_at_depth(3, 1 << 12).map_err(err)?;
    let images: Vec<PowerElement> = elems.iter().map(|f| red.apply(f)).collect::<fbp::Result<_>>().map_err(err)?;
    let distinct: HashSet<&PowerElement> = images.iter().collect();
    ensure(distinct.len() == elems.len(), || "reduction is not injective".into())?;
    for (f, g) in elems.iter().zip(&images) {
        ensure(red.invert(g).map_err(err)? == *f, || "reduction does not invert".into())?;
    }
    let small = ctx.elements_at_depth(2, 1 << 12).map_err(err)?;
    for (op, o) in alg.ops().iter().enumerate() {
        for idx in tuples(small.len(), o.arity) {
            let args: Vec<&PowerElement> = idx.iter().map(|&i| &small[i]).collect();
            let mapped: Vec<PowerElement> = args.iter().map(|f| red.apply(f)).collect::<fbp::Result<_>>().map_err(err)?;
            let mapped_refs: Vec<&PowerElement> = mapped.iter().collect();
            let lhs = red.apply(&PowerElement::apply_op_in(&ctx, op, &args).map_err(err)?).map_err(err)?;
            let rhs = PowerElement::apply_op_in(red.target(), op, &mapped_refs).map_err(err)?;
            ensure(lhs == rhs, || format!("reduction breaks op {op}"))?;
        }
    }
    Ok(())
}

fn criterion_7() -> Outcome {
    let cases: [(FiniteAlgebra, fn(usize) -> usize); 2] =
        [(builtin::gf2_idempotent_reduct(), |k| 1 << ((1 << k) - 2)), (builtin::gf2_ring(), |k| 1 << ((1 << k) - 1))];
    for (alg, expected_size) in cases {
        let alg = Arc::new(alg);
        let idems = alg.idempotents();
        for k in 1..=3 {
            let data = FreeData::new(&alg, k, 1 << 20).map_err(err)?;
            ensure(data.free.len() == expected_size(k), || format!("|F_{k}| = {}", data.free.len()))?;
            let fk = verify_fk_decomposition(&data).map_err(err)?;
            ensure(fk.verified, || format!("(Fk) fails at k = {k}: {fk:?}"))?;
            let mut seen = Vec::new();
            for e in 0..data.free.len() {
                let pattern = data.free.restrict(e, &data.s);
                if data.s.is_empty() || seen.contains(&pattern) || pattern.iter().any(|v| !idems.contains(v)) {
                    continue;
                }
                seen.push(pattern);
                let ctx = pattern_context(&data, e).map_err(err)?;
                let w = theta_class_is_power_truncation(&data, e, &ctx).map_err(err)?;
                ensure(w.verified(), || format!("θ-class of {e} is not a truncation at k = {k}"))?;
            }
            if alg.op_index("+").is_some() {
                let (n, h, r) = loop_ring_split(&data).map_err(err)?;
                let nh: HashSet<usize> = n.iter().copied().filter(|x| h.contains(x)).collect();
                ensure(r.verified && nh.len() == 1, || format!("split fails at k = {k}"))?;
                ensure(n.len() * h.len() == data.free.len(), || "N_k · H_k has the wrong size".into())?;
            }
        }
    }
    Ok(())
}

fn criterion_8() -> Outcome {
    for seed in 0..200u64 {
        let ctx = Arc::new(PointContext::standard(1 + seed as usize % 2));
        let mut rng = random::seeded(seed);
        let (c1, c2) = random::equal_type_pair(&ctx, &mut rng).map_err(err)?;
        let h = orbit_witness(&c1, &c2).map_err(err)?;
        ensure(h.fixes_points() && h.extends_to_x(), || format!("seed {seed}: witness moves a point"))?;
        let image = h.apply_tail_clopen(&c1).map_err(err)?;
        ensure(image == c2, || format!("seed {seed}: image differs"))?;
        ensure(h.check_image_sampled(&c1, &c2, 48).map_err(err)?, || format!("seed {seed}: sampled image differs"))?;
        let (d1, d2) = random::mismatched_pair(&ctx, &mut rng).map_err(err)?;
        ensure(orbit_witness(&d1, &d2).is_err(), || format!("seed {seed}: mismatched types accepted"))?;
    }
    Ok(())
}

fn criterion_9() -> Outcome {
    let depth = 6;
    let r = example_2_3_report(depth).map_err(err)?;
    ensure(!r.extends_to_x, || "extends to X".into())?;
    ensure(r.involution, || "not an involution".into())?;
    ensure(r.witnesses.len() == depth, || "missing neighborhoods".into())?;
    let ctx = fbp::cantor::two_point_context();
    for wit in &r.witnesses {
        ensure(wit.near.len() == ctx.n(), || format!("{} misses a point", wit.neighborhood))?;
        for (target, (cell, img)) in wit.near.iter().enumerate() {
            ensure(wit.neighborhood.is_prefix_of(cell), || "cell outside the neighborhood".into())?;
            ensure(img.len() >= depth && ctx.point(target).starts_with(&img.prefix(depth)), || format!("{img} is not near point {target}"))?;
        }
    }
    ensure(example_2_3_report(depth).map_err(err)? == r, || "report is not deterministic".into())
}

fn criterion_10() -> Outcome {
    for seed in 0..100u64 {
        let n = 1 + seed as usize % 2;
        let ctx = Arc::new(PointContext::standard(n));
        let sigma = random::point_fixing_homeo(&ctx, &mut random::seeded(seed), 3).map_err(err)?;
        let part = good_partition(&ctx).map_err(err)?;
        let r = pigeonhole_factor(&sigma, &part).map_err(err)?;
        let mut c = TailClopen::empty(&ctx);
        for (t, block) in part.blocks[..=n].iter().enumerate() {
            if t != r.i {
                c = c.union(block).map_err(err)?;
            }
        }
        ensure(verify_factors(&sigma, &part.blocks[r.i], &c, &r.factors).map_err(err)?, || format!("seed {seed}: factors fail"))?;
        for x in EPHomeo::sample_points(&ctx, 6) {
            let step = r.factors.sigma1.apply_point(&x).and_then(|y| r.factors.sigma2.apply_point(&y)).and_then(|y| r.factors.sigma3.apply_point(&y));
            ensure(step.map_err(err)? == sigma.apply_point(&x).map_err(err)?, || format!("seed {seed}: product differs at {x:?}"))?;
        }
    }
    Ok(())
}

fn criterion_11() -> Outcome {
    let alg = Arc::new(builtin::gf4_idempotent_reduct());
    let mut rng = random::seeded(11);
    for filters in [vec![0], vec![1], vec![0, 1], vec![1, 0]] {
        let ctx = PowerContext::standard(&alg, &filters).map_err(err)?;
        let auts = ctx.auts();
        for t in 0..20 {
            let k = random::labeling(&ctx, &mut rng).map_err(err)?;
            let kappa = PowerAutomorphism::from_labeling(&ctx, k.clone()).map_err(err)?;
            let parts = decompose_k(&ctx, &k).map_err(err)?;
            ensure(parts.len() <= auts.len(), || "too many factors".into())?;
            let mut product = PowerAutomorphism::identity(&ctx);
            for (c, alpha, chi) in &parts {
                ensure(*alpha != AutGroup::IDENTITY && k.preimage(*alpha) == *c, || "factor support".into())?;
                product = product.compose(chi).map_err(err)?;
            }
            ensure(product == kappa, || format!("{filters:?}/{t}: factors do not recompose"))?;
            for (i, (_, _, x)) in parts.iter().enumerate() {
                for (_, _, y) in &parts[i + 1..] {
                    ensure(x.compose(y).map_err(err)? == y.compose(x).map_err(err)?, || "factors do not commute".into())?;
                }
            }
        }
    }

    let ctx = PowerContext::standard(&alg, &[0]).map_err(err)?;
    let pts = ctx.points().clone();
    let frob = (0..ctx.auts().len() as u16).find(|&a| a != AutGroup::IDENTITY).expect("GF(4) has a Frobenius");
    let cylinder = TailClopen::cylinder(&pts, &Word::from_bits(vec![1]));
    let alternate = TailClopen::from_tails(&pts, vec![0], vec![vec![true, false]], &Clopen::empty()).map_err(err)?;
    let mut seen = HashSet::new();
    let mut supports = vec![cylinder.clone(), cylinder.complement(), alternate];
    for _ in 0..30 {
        supports.push(random::proper_tail_clopen(&pts, &mut rng).map_err(err)?);
    }
    for c in supports {
        let chi = characteristic(&ctx, &c, frob).map_err(err)?;
        let kf = generate_kprime_factor(&chi).map_err(err)?;
        seen.insert(format!("{:?}", kf.case));
        ensure(in_w(&kf.sigma).map_err(err)? && in_w(&kf.tau).map_err(err)?, || format!("{:?} factor outside W", kf.case))?;
        let stab = ctx.auts().stabilizer(0);
        for f in [&kf.sigma, &kf.tau] {
            for &b in &stab {
                ensure(f.labeling().preimage(b).limit_points() == vec![0], || "a fiber misses the point".into())?;
            }
        }
        ensure(kf.sigma.compose(&kf.tau.inverse().map_err(err)?).map_err(err)? == chi, || format!("{:?} product differs", kf.case))?;
    }
    for case in [KprimeCase::ClopenInX, KprimeCase::CoClopenInX, KprimeCase::TailUnion] {
        ensure(seen.contains(&format!("{case:?}")), || format!("case {case:?} not exercised"))?;
    }
    Ok(())
}

fn criterion_12() -> Outcome {
    let alg = Arc::new(builtin::gf4_idempotent_reduct());
    let mut rng = random::seeded(12);
    for t in 0..100 {
        let filters = if t % 2 == 0 { vec![0, 1] } else { vec![1] };
        let ctx = PowerContext::standard(&alg, &filters).map_err(err)?;
        let blocks = random::block_family(&ctx, 2).map_err(err)?;
        ensure(blocks.len() == ctx.n() + 2, || "block family size".into())?;
        let depth2 = ctx.elements_at_depth(2, 1 << 12).map_err(err)?;
        if t < 50 {
            let phi = random::block_automorphism(&ctx, &blocks, &mut rng).map_err(err)?;
            match verify_stabilizer_containment(&phi, &blocks).map_err(err)? {
                StabilizerOutcome::Decomposition { kappa, gamma } => {
                    ensure(kappa.in_kernel(), || "κ has a homeomorphism part".into())?;
                    for f in &depth2 {
                        let lhs = kappa.apply(&gamma.apply(f).map_err(err)?).map_err(err)?;
                        ensure(lhs == phi.apply(f).map_err(err)?, || format!("{t}: κγ differs from φ"))?;
                    }
                }
                StabilizerOutcome::Violated { a, .. } => return Err(format!("{t}: fixing automorphism moves f_{a:?}")),
            }
        } else {
            let phi = random::non_block_automorphism(&ctx, &blocks, &mut rng).map_err(err)?;
            match verify_stabilizer_containment(&phi, &blocks).map_err(err)? {
                StabilizerOutcome::Violated { f_a, .. } => {
                    ensure(phi.apply(&f_a).map_err(err)? != f_a, || format!("{t}: witness is fixed"))?;
                }
                StabilizerOutcome::Decomposition { .. } => return Err(format!("{t}: non-fixing automorphism decomposed")),
            }
        }
    }
    Ok(())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, u64); 12] = [
        ("algebra hypotheses", criterion_1, 1),
        ("congruence correspondence", criterion_2, 30),
        ("amalgamation", criterion_3, 60),
        ("weak homogeneity", criterion_4, 60),
        ("semidirect structure", criterion_5, 60),
        ("isomorphisms", criterion_6, 30),
        ("free algebra", criterion_7, 120),
        ("types and orbits", criterion_8, 60),
        ("non-extendability", criterion_9, 60),
        ("factorization", criterion_10, 120),
        ("characteristic decomposition", criterion_11, 60),
        ("stabilizer containment", criterion_12, 60),
    ];
    let only: Option<usize> = std::env::var("CRITERION").ok().and_then(|s| s.parse().ok());
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        if only.is_some_and(|k| k != i + 1) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let within = elapsed < Duration::from_secs(*limit);
        let status = match (&outcome, within) {
            (Ok(()), true) => "PASS".to_string(),
            (Ok(()), false) => format!("FAIL (over the {limit} s limit)"),
            (Err(e), _) => format!("FAIL ({e})"),
        };
        if !status.starts_with("PASS") {
            failed += 1;
        }
        println!("criterion {:>2} {name}: {status} in {:.2} s", i + 1, elapsed.as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
