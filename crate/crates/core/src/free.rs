//! Finite-rank free algebras in the variety of a finite algebra.
//!
//! `F_k` is materialized as the clone of `k`-ary term operations, each stored
//! as its value table over `A^k` in the order of [`tuples`].

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use serde::Serialize;

use crate::algebra::{encode, tuples, AutGroup, FiniteAlgebra, Term, DEFAULT_BUDGET};
use crate::error::{Error, Result};
use crate::fraisse::{chain_stage, BPEmbedding, Coord, PowerClass, PowerEmbedding};
use crate::power::{PowerContext, PowerElement};

/// A term operation given by its table over `A^k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TermFunction {
    pub arity: usize,
    pub table: Vec<usize>,
    #[serde(skip)]
    pub witness: Option<Term>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Origin {
    Proj(usize),
    Op(usize),
}

/// The carrier of `F_k` with witness terms.
#[derive(Debug, Clone)]
pub struct FreeAlgebraRep {
    alg: Arc<FiniteAlgebra>,
    rank: usize,
    tables: Vec<Vec<usize>>,
    origins: Vec<(Origin, Vec<usize>)>,
    index: HashMap<Vec<usize>, usize>,
}

/// Closes the projections of `A^k → A` under the basic operations.
pub fn clone_generate(alg: &Arc<FiniteAlgebra>, k: usize, budget: usize) -> Result<FreeAlgebraRep> {
    if k == 0 {
        return Err(Error::ZeroRank);
    }
    let n = alg.size();
    let points: Vec<Vec<usize>> = tuples(n, k).collect();
    let mut rep = FreeAlgebraRep { alg: alg.clone(), rank: k, tables: Vec::new(), origins: Vec::new(), index: HashMap::new() };
    for i in 0..k {
        let t: Vec<usize> = points.iter().map(|a| a[i]).collect();
        rep.insert(t, (Origin::Proj(i), Vec::new()), budget)?;
    }
    let mut done = 0;
    loop {
        let len = rep.tables.len();
        for (oi, op) in alg.ops().iter().enumerate() {
            let r = op.arity;
            if r == 0 {
                if done == 0 {
                    let c = alg.apply(oi, &[]);
                    rep.insert(vec![c; points.len()], (Origin::Op(oi), Vec::new()), budget)?;
                }
                continue;
            }
            for args in tuples(len, r) {
                if args.iter().all(|&a| a < done) {
                    continue;
                }
                let t = rep.eval(oi, &args);
                rep.insert(t, (Origin::Op(oi), args), budget)?;
            }
        }
        if rep.tables.len() == len && done == len {
            break;
        }
        done = len;
    }
    Ok(rep)
}

impl FreeAlgebraRep {
    fn insert(&mut self, table: Vec<usize>, origin: (Origin, Vec<usize>), budget: usize) -> Result<()> {
        if self.index.contains_key(&table) {
            return Ok(());
        }
        if self.tables.len() >= budget {
            return Err(Error::SizeBudgetExceeded(budget));
        }
        self.index.insert(table.clone(), self.tables.len());
        self.tables.push(table);
        self.origins.push(origin);
        Ok(())
    }

    fn eval(&self, op: usize, args: &[usize]) -> Vec<usize> {
        let mut buf = vec![0; args.len()];
        (0..self.tables[0].len())
            .map(|t| {
                for (slot, &a) in buf.iter_mut().zip(args) {
                    *slot = self.tables[a][t];
                }
                self.alg.apply(op, &buf)
            })
            .collect()
    }

    pub fn alg(&self) -> &Arc<FiniteAlgebra> {
        &self.alg
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    pub fn table(&self, f: usize) -> &[usize] {
        &self.tables[f]
    }

    pub fn index_of(&self, table: &[usize]) -> Option<usize> {
        self.index.get(table).copied()
    }

    /// Index of the projection onto coordinate `i`.
    pub fn generator(&self, i: usize) -> usize {
        let t: Vec<usize> = tuples(self.alg.size(), self.rank).map(|a| a[i]).collect();
        self.index[&t]
    }

    /// Value of `f` at the tuple `a`.
    pub fn value(&self, f: usize, a: &[usize]) -> usize {
        self.tables[f][encode(a, self.alg.size())]
    }

    /// Applies a basic operation pointwise to members of `F_k`.
    pub fn apply(&self, op: usize, args: &[usize]) -> usize {
        self.index[&self.eval(op, args)]
    }

    /// A term whose term operation is `f`.
    pub fn term(&self, f: usize) -> Term {
        let (origin, args) = &self.origins[f];
        match origin {
            Origin::Proj(i) => Term::Var(*i),
            Origin::Op(o) => Term::op(*o, args.iter().map(|&a| self.term(a)).collect()),
        }
    }

    pub fn function(&self, f: usize) -> TermFunction {
        TermFunction { arity: self.rank, table: self.tables[f].clone(), witness: Some(self.term(f)) }
    }

    /// Values of `f` on a list of tuples.
    pub fn restrict(&self, f: usize, at: &[Vec<usize>]) -> Vec<usize> {
        at.iter().map(|a| self.value(f, a)).collect()
    }

    /// Closure of `gens` under the basic operations inside `F_k`.
    pub fn subalgebra_generated(&self, gens: &[usize]) -> Vec<usize> {
        let mut inside: HashSet<usize> = gens.iter().copied().collect();
        let mut elems: Vec<usize> = gens.to_vec();
        elems.sort_unstable();
        elems.dedup();
        for (oi, op) in self.alg.ops().iter().enumerate() {
            if op.arity == 0 {
                let c = self.apply(oi, &[]);
                if inside.insert(c) {
                    elems.push(c);
                }
            }
        }
        let mut done = 0;
        loop {
            let len = elems.len();
            for (oi, op) in self.alg.ops().iter().enumerate() {
                if op.arity == 0 {
                    continue;
                }
                for t in tuples(len, op.arity) {
                    if t.iter().all(|&a| a < done) {
                        continue;
                    }
                    let args: Vec<usize> = t.iter().map(|&i| elems[i]).collect();
                    let v = self.apply(oi, &args);
                    if inside.insert(v) {
                        elems.push(v);
                    }
                }
            }
            if elems.len() == len {
                break;
            }
            done = len;
        }
        elems.sort_unstable();
        elems
    }
}

/// The lexicographically least member of the `Aut A`-orbit of `a`.
pub fn orbit_min(auts: &AutGroup, a: &[usize]) -> Vec<usize> {
    auts.perms().iter().map(|p| a.iter().map(|&x| p[x]).collect::<Vec<_>>()).min().expect("identity present")
}

/// Orbit-minimal representatives of `A^k`, in lexicographic order.
pub fn transversal_r(alg: &FiniteAlgebra, auts: &AutGroup, k: usize) -> Vec<Vec<usize>> {
    tuples(alg.size(), k).filter(|a| orbit_min(auts, a) == *a).collect()
}

/// Members of `R` generating a proper subalgebra.
pub fn compute_sk(alg: &FiniteAlgebra, r: &[Vec<usize>]) -> Vec<Vec<usize>> {
    r.iter().filter(|a| alg.subalgebra_generated(a).len() < alg.size()).cloned().collect()
}

/// `F_k` together with `R` and `S_k`.
#[derive(Debug, Clone)]
pub struct FreeData {
    pub free: FreeAlgebraRep,
    pub auts: AutGroup,
    pub r: Vec<Vec<usize>>,
    pub s: Vec<Vec<usize>>,
}

impl FreeData {
    pub fn new(alg: &Arc<FiniteAlgebra>, k: usize, budget: usize) -> Result<Self> {
        let free = clone_generate(alg, k, budget)?;
        let auts = AutGroup::of(alg)?;
        let r = transversal_r(alg, &auts, k);
        let s = compute_sk(alg, &r);
        Ok(FreeData { free, auts, r, s })
    }

    /// `R ∖ S_k` in order.
    pub fn outside(&self) -> Vec<Vec<usize>> {
        self.r.iter().filter(|a| !self.s.contains(a)).cloned().collect()
    }

    /// All `f ∈ F_k` agreeing with `e` on `S_k`.
    pub fn theta_class(&self, e: usize) -> Result<Vec<usize>> {
        let idem = self.free.alg.idempotents();
        let pattern = self.free.restrict(e, &self.s);
        if pattern.iter().any(|v| !idem.contains(v)) {
            return Err(Error::NotIdempotentOnSk);
        }
        Ok((0..self.free.len()).filter(|&f| self.free.restrict(f, &self.s) == pattern).collect())
    }
}

/// Outcome of the enumeration check of the decomposition of `F_k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FkReport {
    pub rank: usize,
    pub size: usize,
    pub r_size: usize,
    pub s_k: Vec<Vec<usize>>,
    pub exponent: usize,
    pub first_factor_size: usize,
    pub second_factor_size: usize,
    /// Every `f ∈ F_k` takes values in `⟨a⟩` at each `a ∈ R`.
    pub values_in_generated: bool,
    /// Restriction to `R` is injective on `F_k`.
    pub determined_by_r: bool,
    /// `F_k` lies in the described set, on the rank `k+1` transversal.
    pub forward_inclusion: bool,
    /// The described set lies in `F_k`, on the rank `k+1` transversal.
    pub backward_inclusion: bool,
    /// `f ↦ (f|_{R∖S_k}, f|_{S_k})` is a bijection onto the product.
    pub product_bijective: bool,
    pub verified: bool,
}

/// Checks the description of `F_k` by values on `R ∖ S_k` and on `S_k`.
///
/// The inclusions are checked on the transversal of rank `k+1`, where the
/// fibres `c_p` over `p ∈ (R ∖ S_k)|_[k]` have more than one member.
pub fn verify_fk_decomposition(data: &FreeData) -> Result<FkReport> {
    let free = &data.free;
    let alg = free.alg.clone();
    let n = alg.size();
    let k = free.rank;

    let values_in_generated = data.r.iter().all(|a| {
        let sub = alg.subalgebra_generated(a);
        (0..free.len()).all(|f| sub.contains(&free.value(f, a)))
    });
    let on_r: HashSet<Vec<usize>> = (0..free.len()).map(|f| free.restrict(f, &data.r)).collect();
    let determined_by_r = on_r.len() == free.len();

    let outside = data.outside();
    let first: HashSet<Vec<usize>> = (0..free.len()).map(|f| free.restrict(f, &outside)).collect();
    let second: HashSet<Vec<usize>> = (0..free.len()).map(|f| free.restrict(f, &data.s)).collect();
    let pairs: HashSet<(Vec<usize>, Vec<usize>)> = (0..free.len()).map(|f| (free.restrict(f, &outside), free.restrict(f, &data.s))).collect();
    let full_first = n.checked_pow(outside.len() as u32).ok_or(Error::SizeBudgetExceeded(usize::MAX))?;
    let product_bijective = pairs.len() == free.len() && first.len() == full_first && pairs.len() == first.len() * second.len();

    let r_next = transversal_r(&alg, &data.auts, k + 1);
    let restricts = {
        let mut prefixes: Vec<Vec<usize>> = r_next.iter().map(|a| a[..k].to_vec()).collect();
        prefixes.sort();
        prefixes.dedup();
        prefixes == data.r
    };
    let s_next: Vec<Vec<usize>> = r_next.iter().filter(|a| data.s.contains(&a[..k].to_vec())).cloned().collect();
    let lifts: Vec<Vec<usize>> = (0..free.len()).map(|f| r_next.iter().map(|a| free.value(f, &a[..k])).collect()).collect();
    let fibres: Vec<Vec<usize>> = outside.iter().map(|p| (0..r_next.len()).filter(|&j| r_next[j][..k] == p[..]).collect()).collect();
    let s_pos: Vec<usize> = (0..r_next.len()).filter(|&j| s_next.contains(&r_next[j])).collect();
    let on_s: HashSet<Vec<usize>> = lifts.iter().map(|l| s_pos.iter().map(|&j| l[j]).collect()).collect();
    let forward_inclusion = restricts
        && lifts.iter().all(|l| fibres.iter().all(|c| c.iter().all(|&j| l[j] == l[c[0]])) && on_s.contains(&s_pos.iter().map(|&j| l[j]).collect::<Vec<_>>()));
    // Members of the described set are fixed by their values at one point per
    // fibre and on S_k, so counting distinct lifts decides the reverse inclusion.
    let described = full_first.checked_mul(on_s.len()).ok_or(Error::SizeBudgetExceeded(usize::MAX))?;
    let distinct_lifts: HashSet<&Vec<usize>> = lifts.iter().collect();
    let backward_inclusion = forward_inclusion && distinct_lifts.len() == described;

    let verified = values_in_generated && determined_by_r && forward_inclusion && backward_inclusion && product_bijective;
    Ok(FkReport {
        rank: k,
        size: free.len(),
        r_size: data.r.len(),
        s_k: data.s.clone(),
        exponent: outside.len(),
        first_factor_size: first.len(),
        second_factor_size: second.len(),
        values_in_generated,
        determined_by_r,
        forward_inclusion,
        backward_inclusion,
        product_bijective,
        verified,
    })
}

/// Context whose filters are the idempotent values of `e` on `S_k`, in order
/// of first occurrence.
pub fn pattern_context(data: &FreeData, e: usize) -> Result<Arc<PowerContext>> {
    let mut filters = Vec::new();
    for v in data.free.restrict(e, &data.s) {
        if !filters.contains(&v) {
            filters.push(v);
        }
    }
    if filters.is_empty() {
        return Err(Error::NoPoints);
    }
    PowerContext::standard(data.free.alg(), &filters)
}

/// Isomorphism between a θ-class and a truncation of the filtered power.
#[derive(Debug, Clone)]
pub struct TruncationWitness {
    pub class: Vec<usize>,
    pub exponent: usize,
    /// Depth of the chain stage the embedding factors through.
    pub depth: usize,
    /// `A^m → A^u` into the free cells of the stage.
    pub into_stage: Option<PowerEmbedding>,
    pub embedding: Option<BPEmbedding>,
    pub images: Vec<PowerElement>,
    pub bijective: bool,
    pub homomorphism: bool,
}

impl TruncationWitness {
    pub fn verified(&self) -> bool {
        self.bijective && self.homomorphism
    }
}

/// Maps the θ-class of `e` into the power over `ctx` by sending `f` to the
/// image of `(f(r))_{r ∈ R∖S_k}` under a chain stage, and checks that this is
/// an isomorphism onto its image.
pub fn theta_class_is_power_truncation(data: &FreeData, e: usize, ctx: &Arc<PowerContext>) -> Result<TruncationWitness> {
    let class = data.theta_class(e)?;
    let pattern: HashSet<usize> = data.free.restrict(e, &data.s).into_iter().collect();
    let filters: HashSet<usize> = ctx.filters().iter().copied().collect();
    if pattern != filters || ctx.alg() != data.free.alg() {
        return Err(Error::PatternMismatch);
    }
    let outside = data.outside();
    let m = outside.len();
    if m == 0 {
        return Ok(TruncationWitness {
            bijective: class.len() == 1,
            homomorphism: true,
            class,
            exponent: 0,
            depth: 0,
            into_stage: None,
            embedding: None,
            images: Vec::new(),
        });
    }
    let pc = PowerClass::new(data.free.alg().clone())?;
    let mut depth = 1;
    let stage = loop {
        if let Ok(s) = chain_stage(ctx, depth) {
            if s.cells.len() >= m {
                break s;
            }
        }
        depth += 1;
    };
    let coords = (0..stage.cells.len()).map(|j| Coord::Aut { aut: AutGroup::IDENTITY, src: j.min(m - 1) }).collect();
    let into_stage = pc.embedding(m, coords)?;
    let embedding = stage.embedding.compose(&pc, &into_stage)?;
    let images = class.iter().map(|&f| embedding.apply(&data.free.restrict(f, &outside))).collect::<Result<Vec<_>>>()?;
    let distinct: HashSet<&PowerElement> = images.iter().collect();
    let expected = data.free.alg().size().checked_pow(m as u32).ok_or(Error::SizeBudgetExceeded(usize::MAX))?;
    let bijective = distinct.len() == class.len() && class.len() == expected;
    let pos: HashMap<usize, usize> = class.iter().enumerate().map(|(i, &f)| (f, i)).collect();
    let mut homomorphism = true;
    'ops: for (oi, op) in data.free.alg().ops().iter().enumerate() {
        for t in tuples(class.len(), op.arity) {
            let args: Vec<usize> = t.iter().map(|&i| class[i]).collect();
            let v = data.free.apply(oi, &args);
            let Some(&vi) = pos.get(&v) else {
                homomorphism = false;
                break 'ops;
            };
            let refs: Vec<&PowerElement> = t.iter().map(|&i| &images[i]).collect();
            let img = if refs.is_empty() { PowerElement::constant(ctx, data.free.alg().apply(oi, &[]))? } else { PowerElement::apply_op(oi, &refs)? };
            if img != images[vi] {
                homomorphism = false;
                break 'ops;
            }
        }
    }
    Ok(TruncationWitness { class, exponent: m, depth, into_stage: Some(into_stage), embedding: Some(embedding), images, bijective, homomorphism })
}

/// The split `F_k = N_k · H_k` for a loop or ring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SplitReport {
    pub rank: usize,
    pub identity: usize,
    pub loop_op: String,
    pub n_size: usize,
    pub h_size: usize,
    pub f_size: usize,
    pub y_in_clone: bool,
    pub intersection_trivial: bool,
    pub product_is_f: bool,
    pub verified: bool,
}

/// Index of a binary operation with two-sided identity `e` whose table is a
/// Latin square.
fn loop_operation(alg: &FiniteAlgebra, e: usize) -> Option<usize> {
    let n = alg.size();
    alg.ops().iter().enumerate().position(|(oi, op)| {
        op.arity == 2
            && (0..n).all(|a| alg.apply(oi, &[e, a]) == a && alg.apply(oi, &[a, e]) == a)
            && (0..n).all(|a| {
                let row: HashSet<usize> = (0..n).map(|b| alg.apply(oi, &[a, b])).collect();
                let col: HashSet<usize> = (0..n).map(|b| alg.apply(oi, &[b, a])).collect();
                row.len() == n && col.len() == n
            })
    })
}

/// Computes `N_k = {f : f(S_k) = e}` and `H_k = ⟨y_1, .., y_k⟩` and checks
/// that they split `F_k`.
pub fn loop_ring_split(data: &FreeData) -> Result<(Vec<usize>, Vec<usize>, SplitReport)> {
    let free = &data.free;
    let alg = free.alg.clone();
    let idem = alg.idempotents();
    let [e] = idem[..] else {
        return Err(Error::NotLoopOrRing);
    };
    let op = loop_operation(&alg, e).ok_or(Error::NotLoopOrRing)?;
    let k = free.rank;
    let n_k: Vec<usize> = (0..free.len()).filter(|&f| data.s.iter().all(|a| free.value(f, a) == e)).collect();
    let proper: Vec<bool> = tuples(alg.size(), k).map(|a| alg.subalgebra_generated(&a).len() < alg.size()).collect();
    let ys: Vec<Option<usize>> = (0..k)
        .map(|j| {
            let t: Vec<usize> = tuples(alg.size(), k).zip(&proper).map(|(a, &p)| if p { a[j] } else { e }).collect();
            free.index_of(&t)
        })
        .collect();
    let y_in_clone = ys.iter().all(Option::is_some);
    let h_k = if y_in_clone { free.subalgebra_generated(&ys.iter().flatten().copied().collect::<Vec<_>>()) } else { Vec::new() };
    let constant_e = free.index_of(&vec![e; free.table(0).len()]);
    let in_n: HashSet<usize> = n_k.iter().copied().collect();
    let meet: Vec<usize> = h_k.iter().copied().filter(|f| in_n.contains(f)).collect();
    let intersection_trivial = constant_e.is_some() && meet == [constant_e.expect("checked")];
    let products: HashSet<usize> = n_k.iter().flat_map(|&a| h_k.iter().map(move |&b| (a, b))).map(|(a, b)| free.apply(op, &[a, b])).collect();
    let product_is_f = products.len() == free.len();
    let report = SplitReport {
        rank: k,
        identity: e,
        loop_op: alg.ops()[op].name.clone(),
        n_size: n_k.len(),
        h_size: h_k.len(),
        f_size: free.len(),
        y_in_clone,
        intersection_trivial,
        product_is_f,
        verified: y_in_clone && intersection_trivial && product_is_f,
    };
    Ok((n_k, h_k, report))
}

/// Convenience wrapper with the default budget.
pub fn free_data(alg: &Arc<FiniteAlgebra>, k: usize) -> Result<FreeData> {
    FreeData::new(alg, k, DEFAULT_BUDGET)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::builtin::*;

    fn example() -> Arc<FiniteAlgebra> {
        Arc::new(gf2_idempotent_reduct())
    }

    #[test]
    fn clone_sizes_rank_one() {
        let f = clone_generate(&example(), 1, 1000).unwrap();
        assert_eq!(f.len(), 1);
        let g = clone_generate(&Arc::new(gf2_ring()), 1, 1000).unwrap();
        assert_eq!(g.len(), 2);
        assert!(g.index_of(&[0, 0]).is_some() && g.index_of(&[0, 1]).is_some());
    }

    #[test]
    fn witnesses_evaluate_to_tables() {
        let alg = example();
        let f = clone_generate(&alg, 2, 1000).unwrap();
        for i in 0..f.len() {
            let t = f.term(i);
            for (j, a) in tuples(2, 2).enumerate() {
                assert_eq!(alg.eval_term(&t, &a), f.table(i)[j]);
            }
        }
    }

    #[test]
    fn transversal_and_sk() {
        let alg = example();
        let d = free_data(&alg, 1).unwrap();
        assert_eq!(d.s, vec![vec![0], vec![1]]);
        let d = free_data(&Arc::new(gf2_ring()), 1).unwrap();
        assert_eq!(d.s, vec![vec![0]]);
        let g4 = gf4_idempotent_reduct();
        let auts = AutGroup::of(&g4).unwrap();
        assert_eq!(transversal_r(&g4, &auts, 1), vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn decomposition_rank_two() {
        let d = free_data(&example(), 2).unwrap();
        let rep = verify_fk_decomposition(&d).unwrap();
        assert!(rep.verified, "{rep:?}");
        assert_eq!(rep.exponent, 2);
        assert_eq!(rep.first_factor_size, 4);
    }

    #[test]
    fn theta_class_truncation() {
        let d = free_data(&example(), 2).unwrap();
        let x = d.free.generator(0);
        let ctx = pattern_context(&d, x).unwrap();
        assert_eq!(ctx.filters(), &[0, 1]);
        let w = theta_class_is_power_truncation(&d, x, &ctx).unwrap();
        assert!(w.verified());
        assert_eq!(w.class.len(), 4);
        let bad = PowerContext::standard(&example(), &[0]).unwrap();
        assert_eq!(theta_class_is_power_truncation(&d, x, &bad).unwrap_err(), Error::PatternMismatch);
    }

    #[test]
    fn ring_split() {
        for k in 1..=2 {
            let d = free_data(&Arc::new(gf2_ring()), k).unwrap();
            let (_, _, rep) = loop_ring_split(&d).unwrap();
            assert!(rep.verified, "{rep:?}");
        }
        let d = free_data(&example(), 1).unwrap();
        assert_eq!(loop_ring_split(&d).unwrap_err(), Error::NotLoopOrRing);
    }

    #[test]
    fn rank_three() {
        for alg in [example(), Arc::new(gf2_ring())] {
            let d = free_data(&alg, 3).unwrap();
            assert!(verify_fk_decomposition(&d).unwrap().verified);
        }
        let d = free_data(&Arc::new(gf2_ring()), 3).unwrap();
        assert_eq!(d.free.len(), 128);
        assert!(loop_ring_split(&d).unwrap().2.verified);
    }
}
