//! Filtered Boolean powers `(A^B)^{x_1..x_n}_{e_1..e_n}` over Cantor space.

use std::collections::HashMap;
use std::sync::Arc;

use crate::algebra::{AutGroup, FiniteAlgebra};
use crate::cantor::homeo::clopen_pairs;
use crate::cantor::tailmap::same_ctx;
use crate::cantor::{Branch, Clopen, EPHomeo, PointContext, PrefixMap, Prog, Strand, TailMap, Tree, Word};
use crate::error::{Error, Result};

/// The algebra, the distinguished points and their filter idempotents.
#[derive(Debug)]
pub struct PowerContext {
    alg: Arc<FiniteAlgebra>,
    auts: AutGroup,
    points: Arc<PointContext>,
    filters: Vec<usize>,
}

impl PartialEq for PowerContext {
    fn eq(&self, other: &Self) -> bool {
        self.alg == other.alg && self.points == other.points && self.filters == other.filters
    }
}

impl Eq for PowerContext {}

impl PowerContext {
    pub fn new(alg: Arc<FiniteAlgebra>, points: Arc<PointContext>, filters: Vec<usize>) -> Result<Arc<Self>> {
        if filters.len() != points.n() {
            return Err(Error::BadContext(format!("{} points but {} filters", points.n(), filters.len())));
        }
        let idem = alg.idempotents();
        if let Some(&e) = filters.iter().find(|e| !idem.contains(e)) {
            return Err(Error::NotIdempotent(e));
        }
        let auts = AutGroup::of(&alg)?;
        Ok(Arc::new(PowerContext { alg, auts, points, filters }))
    }

    /// Points `1^i 0^ω` carrying the given filters.
    pub fn standard(alg: &Arc<FiniteAlgebra>, filters: &[usize]) -> Result<Arc<Self>> {
        Self::new(alg.clone(), Arc::new(PointContext::standard(filters.len())), filters.to_vec())
    }

    pub fn alg(&self) -> &Arc<FiniteAlgebra> {
        &self.alg
    }

    pub fn auts(&self) -> &AutGroup {
        &self.auts
    }

    pub fn points(&self) -> &Arc<PointContext> {
        &self.points
    }

    pub fn filters(&self) -> &[usize] {
        &self.filters
    }

    pub fn n(&self) -> usize {
        self.filters.len()
    }

    /// The cell of length `depth` containing each point, if any.
    fn point_cells(&self, depth: usize) -> Vec<Option<usize>> {
        Word::all_of_length(depth).iter().map(|c| (0..self.n()).find(|&i| self.points.point(i).starts_with(c))).collect()
    }

    /// All elements constant on the cells of length `depth`.
    pub fn elements_at_depth(self: &Arc<Self>, depth: usize, budget: usize) -> Result<Vec<PowerElement>> {
        let cells = Word::all_of_length(depth);
        let owners = self.point_cells(depth);
        let free: Vec<usize> = (0..cells.len()).filter(|&k| owners[k].is_none()).collect();
        let fixed: Vec<Option<usize>> = owners.iter().map(|o| o.map(|i| self.filters[i])).collect();
        for i in 0..self.n() {
            for j in 0..self.n() {
                if i != j && self.points.point(i).prefix(depth) == self.points.point(j).prefix(depth) && self.filters[i] != self.filters[j] {
                    return Err(Error::BadContext(format!("points {i} and {j} share a depth-{depth} cell")));
                }
            }
        }
        let size = self.alg.size();
        let total = (size as u128).checked_pow(free.len() as u32).unwrap_or(u128::MAX);
        if total > budget as u128 {
            return Err(Error::SizeBudgetExceeded(budget));
        }
        let mut out = Vec::with_capacity(total as usize);
        for labels in crate::algebra::tuples(size, free.len()) {
            let mut vals: Vec<usize> = fixed.iter().map(|f| f.unwrap_or(0)).collect();
            for (k, &c) in free.iter().enumerate() {
                vals[c] = labels[k];
            }
            let parts = cells.iter().cloned().zip(vals.into_iter().map(Tree::Leaf)).collect();
            let tree = Tree::from_parts(parts).expect("complete code");
            out.push(PowerElement { ctx: self.clone(), tree });
        }
        Ok(out)
    }
}

/// A continuous map `X → A` taking value `e_i` at `x_i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PowerElement {
    ctx: Arc<PowerContext>,
    tree: Tree<usize>,
}

impl std::hash::Hash for PowerContext {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.points.hash(state);
        self.filters.hash(state);
    }
}

impl PowerElement {
    pub fn from_tree(ctx: &Arc<PowerContext>, tree: Tree<usize>) -> Result<Self> {
        let size = ctx.alg.size();
        if let Some((_, v)) = tree.leaves().into_iter().find(|(_, v)| *v >= size) {
            return Err(Error::OutOfRange { value: v, size });
        }
        for i in 0..ctx.n() {
            if tree.eval_point(&ctx.points.point(i)) != ctx.filters[i] {
                return Err(Error::FilterViolation);
            }
        }
        Ok(PowerElement { ctx: ctx.clone(), tree })
    }

    /// An element from labeled cells forming a complete prefix code.
    pub fn new(ctx: &Arc<PowerContext>, cells: Vec<(Word, usize)>) -> Result<Self> {
        let parts = cells.into_iter().map(|(w, a)| (w, Tree::Leaf(a))).collect();
        let tree = Tree::from_parts(parts).ok_or_else(|| Error::Parse("cells must partition the space".into()))?;
        Self::from_tree(ctx, tree)
    }

    pub fn constant(ctx: &Arc<PowerContext>, a: usize) -> Result<Self> {
        Self::from_tree(ctx, Tree::Leaf(a))
    }

    pub fn ctx(&self) -> &Arc<PowerContext> {
        &self.ctx
    }

    pub fn tree(&self) -> &Tree<usize> {
        &self.tree
    }

    pub fn cells(&self) -> Vec<(Word, usize)> {
        self.tree.leaves()
    }

    pub fn value_at(&self, x: &crate::cantor::Point) -> usize {
        self.tree.eval_point(x)
    }

    /// The restriction to `X°` as a tail map.
    pub fn to_tailmap(&self) -> TailMap<usize> {
        TailMap::from_tree(self.ctx.points(), &self.tree)
    }

    pub fn apply_op(op: usize, args: &[&PowerElement]) -> Result<PowerElement> {
        let ctx = args.first().ok_or(Error::EmptyInput)?.ctx.clone();
        PowerElement::apply_op_in(&ctx, op, args)
    }

    /// As `apply_op`, with the context given so that constants apply.
    pub fn apply_op_in(ctx: &Arc<PowerContext>, op: usize, args: &[&PowerElement]) -> Result<PowerElement> {
        if args.iter().any(|f| f.ctx != *ctx) {
            return Err(Error::ContextMismatch);
        }
        let arity = ctx.alg.ops()[op].arity;
        if args.len() != arity {
            return Err(Error::ArityMismatch { op: ctx.alg.ops()[op].name.clone(), expected: arity, got: args.len() });
        }
        if arity == 0 {
            return PowerElement::from_tree(ctx, Tree::Leaf(ctx.alg.apply(op, &[])));
        }
        let trees: Vec<&Tree<usize>> = args.iter().map(|f| &f.tree).collect();
        let tree = Tree::zip_many(&trees, &|vals: &[usize]| ctx.alg.apply(op, vals));
        Ok(PowerElement { ctx: ctx.clone(), tree })
    }

    /// Applies a permutation of the carrier cellwise.
    pub fn map_labels(&self, ctx: &Arc<PowerContext>, perm: &[usize]) -> Result<PowerElement> {
        PowerElement::from_tree(ctx, self.tree.map(&|a| perm[*a]))
    }
}

/// Where `f` and `g` agree.
pub fn equalizer(f: &PowerElement, g: &PowerElement) -> Result<Clopen> {
    if f.ctx != g.ctx {
        return Err(Error::ContextMismatch);
    }
    Ok(Clopen::from_tree(f.tree.zip(&g.tree, &|a, b| a == b)))
}

/// The congruence `θ_Y` of pairs agreeing on a clopen `Y ∋ x_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowerCongruence {
    ctx: Arc<PowerContext>,
    support: Clopen,
}

impl PowerCongruence {
    pub fn new(ctx: &Arc<PowerContext>, support: Clopen) -> Result<Self> {
        if (0..ctx.n()).any(|i| !support.contains_point(&ctx.points.point(i))) {
            return Err(Error::BadContext("support must contain every distinguished point".into()));
        }
        Ok(PowerCongruence { ctx: ctx.clone(), support })
    }

    /// The identity congruence `θ_X`.
    pub fn identity(ctx: &Arc<PowerContext>) -> Self {
        PowerCongruence { ctx: ctx.clone(), support: Clopen::full() }
    }

    pub fn support(&self) -> &Clopen {
        &self.support
    }

    pub fn meet(&self, o: &PowerCongruence) -> Result<PowerCongruence> {
        if self.ctx != o.ctx {
            return Err(Error::ContextMismatch);
        }
        Ok(PowerCongruence { ctx: self.ctx.clone(), support: self.support.union(&o.support) })
    }

    pub fn join(&self, o: &PowerCongruence) -> Result<PowerCongruence> {
        if self.ctx != o.ctx {
            return Err(Error::ContextMismatch);
        }
        Ok(PowerCongruence { ctx: self.ctx.clone(), support: self.support.intersect(&o.support) })
    }

    pub fn related(&self, f: &PowerElement, g: &PowerElement) -> Result<bool> {
        if f.ctx != self.ctx {
            return Err(Error::ContextMismatch);
        }
        Ok(self.support.is_subset(&equalizer(f, g)?))
    }
}

/// The principal congruence generated by `(f, g)`: agreement on their equalizer.
pub fn principal_congruence(f: &PowerElement, g: &PowerElement) -> Result<PowerCongruence> {
    PowerCongruence::new(f.ctx(), equalizer(f, g)?)
}

/// Restriction to a clopen `b`, rebased onto a fresh copy of Cantor space.
#[derive(Clone, Debug)]
pub struct Restriction {
    src: Arc<PowerContext>,
    dst: Arc<PowerContext>,
    pairs: Vec<(Word, Word)>,
    kept: Vec<usize>,
}

pub fn restrict(ctx: &Arc<PowerContext>, b: &Clopen) -> Result<Restriction> {
    if b.is_empty() {
        return Err(Error::EmptyRestriction);
    }
    let pairs = clopen_pairs(b, &Clopen::full());
    let kept: Vec<usize> = (0..ctx.n()).filter(|&i| b.contains_point(&ctx.points.point(i))).collect();
    let pts: Vec<_> = kept
        .iter()
        .map(|&i| {
            let x = ctx.points.point(i);
            let (u, v) = pairs.iter().find(|(u, _)| x.starts_with(u)).expect("point inside b");
            x.drop_prefix(u.len()).prepend(v)
        })
        .collect();
    let points = if b.is_full() { ctx.points.clone() } else { Arc::new(PointContext::from_points(&pts)?) };
    let pairs = if b.is_full() { vec![(Word::empty(), Word::empty())] } else { pairs };
    let filters = kept.iter().map(|&i| ctx.filters[i]).collect();
    let dst = PowerContext::new(ctx.alg.clone(), points, filters)?;
    Ok(Restriction { src: ctx.clone(), dst, pairs, kept })
}

impl Restriction {
    pub fn source(&self) -> &Arc<PowerContext> {
        &self.src
    }

    pub fn target(&self) -> &Arc<PowerContext> {
        &self.dst
    }

    /// Indices of the points lying in the restricted clopen.
    pub fn kept_points(&self) -> &[usize] {
        &self.kept
    }

    pub fn apply(&self, f: &PowerElement) -> Result<PowerElement> {
        if f.ctx != self.src {
            return Err(Error::ContextMismatch);
        }
        let parts = self.pairs.iter().map(|(u, v)| (v.clone(), f.tree.subtree(u))).collect();
        PowerElement::from_tree(&self.dst, Tree::from_parts(parts).expect("complete code"))
    }
}

/// The isomorphism `D_1 × D_2 → D` gluing two single-point powers along
/// their points: `D` lives on `X = 0·X_1 ∪ 1·X_2` with the two points
/// `0·0^ω` and `1·0^ω` both filtered by `e`.
#[derive(Clone, Debug)]
pub struct ProductIso {
    factor: Arc<PowerContext>,
    glued: Arc<PowerContext>,
}

impl ProductIso {
    pub fn new(alg: &Arc<FiniteAlgebra>, e: usize) -> Result<Self> {
        let factor = PowerContext::standard(alg, &[e])?;
        let points = PointContext::new(vec![Branch { root: Word::from_bits(vec![0]), letter: 0 }, Branch { root: Word::from_bits(vec![1]), letter: 0 }])?;
        let glued = PowerContext::new(alg.clone(), Arc::new(points), vec![e, e])?;
        Ok(ProductIso { factor, glued })
    }

    pub fn factor(&self) -> &Arc<PowerContext> {
        &self.factor
    }

    pub fn glued(&self) -> &Arc<PowerContext> {
        &self.glued
    }

    pub fn apply(&self, f1: &PowerElement, f2: &PowerElement) -> Result<PowerElement> {
        if f1.ctx != self.factor || f2.ctx != self.factor {
            return Err(Error::ContextMismatch);
        }
        PowerElement::from_tree(&self.glued, Tree::node(f1.tree.clone(), f2.tree.clone()))
    }

    pub fn invert(&self, g: &PowerElement) -> Result<(PowerElement, PowerElement)> {
        if g.ctx != self.glued {
            return Err(Error::ContextMismatch);
        }
        let f1 = PowerElement::from_tree(&self.factor, g.tree.subtree(&Word::from_bits(vec![0])))?;
        let f2 = PowerElement::from_tree(&self.factor, g.tree.subtree(&Word::from_bits(vec![1])))?;
        Ok((f1, f2))
    }
}

/// The isomorphism `f ↦ α ∘ f ∘ h⁻¹` between restrictions to two clopens,
/// each holding one distinguished point.
#[derive(Clone, Debug)]
pub struct RestrictionIso {
    from: Restriction,
    to: Restriction,
    alpha: Vec<usize>,
    h: EPHomeo,
}

impl RestrictionIso {
    pub fn new(ctx: &Arc<PowerContext>, b1: &Clopen, b2: &Clopen, alpha: &[usize], h: Option<EPHomeo>) -> Result<Self> {
        let from = restrict(ctx, b1)?;
        let to = restrict(ctx, b2)?;
        if from.kept.len() != 1 || to.kept.len() != 1 {
            return Err(Error::NotSinglePoint);
        }
        if ctx.auts.index_of(alpha).is_none() {
            return Err(Error::NotAutomorphism);
        }
        if alpha[from.dst.filters[0]] != to.dst.filters[0] {
            return Err(Error::IdempotentMismatch);
        }
        let h = match h {
            Some(h) => h,
            None => matching_homeo(from.dst.points(), to.dst.points())?,
        };
        if !same_ctx(h.src_ctx(), from.dst.points()) || !same_ctx(h.dst_ctx(), to.dst.points()) || h.point_map() != Some(vec![0]) {
            return Err(Error::PointMismatch);
        }
        Ok(RestrictionIso { from, to, alpha: alpha.to_vec(), h })
    }

    pub fn from(&self) -> &Restriction {
        &self.from
    }

    pub fn to(&self) -> &Restriction {
        &self.to
    }

    /// Maps an element of the first restriction to one of the second.
    pub fn apply(&self, f: &PowerElement) -> Result<PowerElement> {
        if f.ctx != self.from.dst {
            return Err(Error::ContextMismatch);
        }
        let pushed = self.h.push_map(&f.to_tailmap())?;
        let tree = pushed.to_tree().ok_or(Error::NotExtendable)?;
        PowerElement::from_tree(&self.to.dst, tree.map(&|a| self.alpha[*a]))
    }
}

/// Pairs the off-branch regions of two contexts. When one of them is empty,
/// the first cell of branch 0 on that side is used instead. Returns the
/// pairs and the first cell index of branch 0 left on each side.
fn pair_off_branch(src: &PointContext, dst: &PointContext) -> Result<(Vec<(Word, Word)>, usize, usize)> {
    let (a, b) = (src.off_branch(), dst.off_branch());
    match (a.is_empty(), b.is_empty()) {
        (true, true) => Ok((Vec::new(), 1, 1)),
        (false, false) => Ok((clopen_pairs(&a, &b), 1, 1)),
        (true, false) if src.n() > 0 => Ok((clopen_pairs(&Clopen::cylinder(&src.cell(0, 1)), &b), 2, 1)),
        (false, true) if dst.n() > 0 => Ok((clopen_pairs(&a, &Clopen::cylinder(&dst.cell(0, 1))), 1, 2)),
        _ => Err(Error::NoPoints),
    }
}

/// The homeomorphism between two contexts with the same number of points
/// that maps the cells of branch `i` onto the cells of branch `i` in order.
pub fn matching_homeo(src: &Arc<PointContext>, dst: &Arc<PointContext>) -> Result<EPHomeo> {
    if src.n() != dst.n() {
        return Err(Error::ContextMismatch);
    }
    let (finite, sb, db) = pair_off_branch(src, dst)?;
    let strands = (0..src.n())
        .map(|i| {
            let (s, d) = if i == 0 { (sb, db) } else { (1, 1) };
            Strand { src: Prog::new(i, s, 1), dst: Prog::new(i, d, 1), cellmap: PrefixMap::identity() }
        })
        .collect();
    EPHomeo::new(src, dst, finite, strands)
}

/// Isomorphism from a power with filters `e_1..e_m` onto the power whose
/// filters are orbit representatives: the branches of points with filters
/// in one orbit are interleaved into one branch, and the labels near each
/// merged point are twisted back to the representative.
#[derive(Clone, Debug)]
pub struct Reduction {
    src: Arc<PowerContext>,
    dst: Arc<PowerContext>,
    h: EPHomeo,
    twist: TailMap<u16>,
    target_of: Vec<usize>,
}

pub fn reduce_idempotents(ctx: &Arc<PowerContext>) -> Result<Reduction> {
    let auts = &ctx.auts;
    let mut reps: Vec<usize> = Vec::new();
    let mut target_of = Vec::new();
    let mut twist_labels = Vec::new();
    for &e in &ctx.filters {
        let pos = reps.iter().position(|&r| auts.orbit(r).contains(&e));
        let r = match pos {
            Some(p) => p,
            None => {
                reps.push(e);
                reps.len() - 1
            }
        };
        let alpha = (0..auts.len() as u16).find(|&a| auts.act(a, e) == reps[r]).expect("same orbit");
        target_of.push(r);
        twist_labels.push(alpha);
    }
    let dst_points = Arc::new(PointContext::standard(reps.len()));
    let dst = PowerContext::new(ctx.alg.clone(), dst_points.clone(), reps.clone())?;
    let src_points = ctx.points.clone();
    let (finite, sb, _) = pair_off_branch(&src_points, &dst_points)?;
    let mut strands = Vec::new();
    for r in 0..reps.len() {
        let members: Vec<usize> = (0..ctx.n()).filter(|&i| target_of[i] == r).collect();
        let g = members.len();
        for (q, &i) in members.iter().enumerate() {
            let base = if i == 0 { sb } else { 1 };
            strands.push(Strand { src: Prog::new(i, base, 1), dst: Prog::new(r, q + 1, g), cellmap: PrefixMap::identity() });
        }
    }
    let h = EPHomeo::new(&src_points, &dst_points, finite, strands)?;
    let mut body = Tree::Leaf(AutGroup::IDENTITY);
    for (i, &alpha) in twist_labels.iter().enumerate() {
        body.set(&src_points.branch_word(i), Tree::Leaf(alpha));
    }
    let twist = TailMap::from_tree(&src_points, &body);
    Ok(Reduction { src: ctx.clone(), dst, h, twist, target_of })
}

impl Reduction {
    pub fn source(&self) -> &Arc<PowerContext> {
        &self.src
    }

    pub fn target(&self) -> &Arc<PowerContext> {
        &self.dst
    }

    pub fn homeo(&self) -> &EPHomeo {
        &self.h
    }

    /// The representative point each source point is merged into.
    pub fn target_of(&self) -> &[usize] {
        &self.target_of
    }

    pub fn is_identity(&self) -> bool {
        self.src.n() == self.dst.n()
    }

    pub fn apply(&self, f: &PowerElement) -> Result<PowerElement> {
        if f.ctx != self.src {
            return Err(Error::ContextMismatch);
        }
        let auts = &self.src.auts;
        let twisted = self.twist.zip_with(&f.to_tailmap(), |a, x| auts.act(a, x))?;
        let pushed = self.h.push_map(&twisted)?;
        PowerElement::from_tree(&self.dst, pushed.to_tree().ok_or(Error::NotExtendable)?)
    }

    pub fn invert(&self, g: &PowerElement) -> Result<PowerElement> {
        if g.ctx != self.dst {
            return Err(Error::ContextMismatch);
        }
        let auts = &self.src.auts;
        let pulled = self.h.inverse().push_map(&g.to_tailmap())?;
        let untwisted = self.twist.zip_with(&pulled, |a, x| auts.act(auts.inv(a), x))?;
        PowerElement::from_tree(&self.src, untwisted.to_tree().ok_or(Error::NotExtendable)?)
    }
}

/// The finite subalgebra generated by some elements, as a subalgebra of
/// `A^k` over their common refinement into `k` cells.
#[derive(Clone, Debug)]
pub struct GeneratedSubalgebra {
    pub cells: Vec<Word>,
    pub tuples: Vec<Vec<usize>>,
    pub generators: Vec<usize>,
}

pub fn generated_subalgebra(elems: &[PowerElement], budget: usize) -> Result<GeneratedSubalgebra> {
    let ctx = elems.first().ok_or(Error::EmptyInput)?.ctx.clone();
    if elems.iter().any(|f| f.ctx != ctx) {
        return Err(Error::ContextMismatch);
    }
    let trees: Vec<&Tree<usize>> = elems.iter().map(|f| &f.tree).collect();
    let joint = Tree::zip_many(&trees, &|v: &[usize]| v.to_vec());
    let cells: Vec<Word> = joint.leaves().into_iter().map(|(w, _)| w).collect();
    let gens: Vec<Vec<usize>> = elems.iter().map(|f| cells.iter().map(|c| *f.tree.subtree(c).leaf_value().expect("refinement")).collect()).collect();
    let alg = &ctx.alg;
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut tuples: Vec<Vec<usize>> = Vec::new();
    let mut add = |t: Vec<usize>, tuples: &mut Vec<Vec<usize>>| -> Result<usize> {
        if let Some(&i) = index.get(&t) {
            return Ok(i);
        }
        if tuples.len() >= budget {
            return Err(Error::SizeBudgetExceeded(budget));
        }
        index.insert(t.clone(), tuples.len());
        tuples.push(t);
        Ok(tuples.len() - 1)
    };
    let mut generators = Vec::new();
    for g in gens {
        generators.push(add(g, &mut tuples)?);
    }
    let mut done = 0;
    while done < tuples.len() {
        let known = tuples.len();
        for (op, o) in alg.ops().iter().enumerate() {
            for args in crate::algebra::tuples(known, o.arity) {
                if o.arity > 0 && args.iter().all(|&a| a < done) {
                    continue;
                }
                let t: Vec<usize> = (0..cells.len()).map(|c| alg.apply(op, &args.iter().map(|&a| tuples[a][c]).collect::<Vec<_>>())).collect();
                add(t, &mut tuples)?;
            }
        }
        done = known;
    }
    Ok(GeneratedSubalgebra { cells, tuples, generators })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::builtin;
    use crate::cantor::w;

    fn gf2() -> Arc<FiniteAlgebra> {
        Arc::new(builtin::gf2_ring())
    }

    #[test]
    fn elements_and_ops() {
        let ctx = PowerContext::standard(&gf2(), &[0]).unwrap();
        let f = PowerElement::new(&ctx, vec![(w("0"), 0), (w("1"), 1)]).unwrap();
        let plus = ctx.alg().op_index("+").unwrap();
        let times = ctx.alg().op_index("*").unwrap();
        assert_eq!(PowerElement::apply_op(plus, &[&f, &f]).unwrap(), PowerElement::constant(&ctx, 0).unwrap());
        assert_eq!(PowerElement::apply_op(times, &[&f, &f]).unwrap(), f);
        assert_eq!(PowerElement::new(&ctx, vec![(w("0"), 1), (w("1"), 1)]), Err(Error::FilterViolation));
        let zero = PowerElement::constant(&ctx, 0).unwrap();
        assert_eq!(equalizer(&f, &zero).unwrap(), Clopen::cylinder(&w("0")));
        assert!(equalizer(&f, &f).unwrap().is_full());
    }

    #[test]
    fn congruence_lattice() {
        let ctx = PowerContext::standard(&gf2(), &[0]).unwrap();
        let y = PowerCongruence::new(&ctx, Clopen::cylinder(&w("0"))).unwrap();
        let z = PowerCongruence::new(&ctx, Clopen::from_prefixes(&[w("00"), w("1")])).unwrap();
        assert_eq!(PowerCongruence::identity(&ctx).meet(&y).unwrap(), PowerCongruence::identity(&ctx));
        assert_eq!(y.join(&z).unwrap().support(), &Clopen::cylinder(&w("00")));
        assert!(PowerCongruence::new(&ctx, Clopen::cylinder(&w("1"))).is_err());
    }

    #[test]
    fn restriction_drops_points() {
        let ctx = PowerContext::standard(&gf2(), &[0]).unwrap();
        let r = restrict(&ctx, &Clopen::cylinder(&w("1"))).unwrap();
        assert_eq!(r.target().n(), 0);
        let r = restrict(&ctx, &Clopen::cylinder(&w("0"))).unwrap();
        assert_eq!(r.target().n(), 1);
        let f = PowerElement::new(&ctx, vec![(w("00"), 0), (w("01"), 1), (w("1"), 1)]).unwrap();
        let g = r.apply(&f).unwrap();
        assert_eq!(g.cells(), vec![(w("0"), 0), (w("1"), 1)]);
        assert_eq!(restrict(&ctx, &Clopen::empty()).err(), Some(Error::EmptyRestriction));
    }

    #[test]
    fn product_iso_constants() {
        let p = ProductIso::new(&gf2(), 0).unwrap();
        let e = PowerElement::constant(p.factor(), 0).unwrap();
        assert_eq!(p.apply(&e, &e).unwrap(), PowerElement::constant(p.glued(), 0).unwrap());
    }

    #[test]
    fn reduction_merges_equal_filters() {
        let ctx = PowerContext::standard(&gf2(), &[0, 0]).unwrap();
        let red = reduce_idempotents(&ctx).unwrap();
        assert_eq!(red.target().filters(), &[0]);
        for f in ctx.elements_at_depth(3, 1 << 12).unwrap() {
            let g = red.apply(&f).unwrap();
            assert_eq!(red.invert(&g).unwrap(), f);
        }
        let alg = Arc::new(builtin::gf2_idempotent_reduct());
        let ctx = PowerContext::standard(&alg, &[0, 1]).unwrap();
        assert!(reduce_idempotents(&ctx).unwrap().is_identity());
    }

    #[test]
    fn generated_subalgebra_of_constant() {
        let ctx = PowerContext::standard(&Arc::new(builtin::gf2_idempotent_reduct()), &[0]).unwrap();
        let f = PowerElement::constant(&ctx, 0).unwrap();
        let s = generated_subalgebra(&[f], 1000).unwrap();
        assert_eq!(s.tuples, vec![vec![0]]);
    }
}
