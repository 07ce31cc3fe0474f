use std::fmt::Debug;
use std::hash::Hash;
use std::sync::Arc;

use num_integer::Integer;

use super::clopen::Clopen;
use super::context::{Loc, PointContext, PointLoc};
use super::tree::Tree;
use super::word::{Point, Word};
use crate::error::{Error, Result};

pub trait Label: Copy + Eq + Hash + Ord + Debug {}
impl<T: Copy + Eq + Hash + Ord + Debug> Label for T {}

/// A locally constant map on the punctured space `X°` whose value on the
/// cells of each branch is eventually periodic.
///
/// Past the threshold `d_i` of branch `i` every cell is constant, and cell
/// `d_i + k` carries `tails[i][(k - 1) mod len]`. The body tree holds the
/// values on the off-branch region and on the cells up to the threshold; on
/// the cylinder `deep(i, d_i)` it is the leaf `tails[i][0]`. The canonical
/// form has minimal thresholds and primitive tail words, so structural
/// equality is equality of maps.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TailMap<T> {
    ctx: Arc<PointContext>,
    thresholds: Vec<usize>,
    tails: Vec<Vec<T>>,
    body: Tree<T>,
}

fn primitive<T: PartialEq + Clone>(v: &[T]) -> Vec<T> {
    let n = v.len();
    for p in 1..=n {
        if n.is_multiple_of(p) && (p..n).all(|i| v[i] == v[i - p]) {
            return v[..p].to_vec();
        }
    }
    v.to_vec()
}

pub(crate) fn same_ctx(a: &Arc<PointContext>, b: &Arc<PointContext>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl<T: Label> TailMap<T> {
    pub fn constant(ctx: &Arc<PointContext>, v: T) -> Self {
        TailMap { ctx: ctx.clone(), thresholds: vec![0; ctx.n()], tails: vec![vec![v]; ctx.n()], body: Tree::Leaf(v) }
    }

    /// Assembles and canonicalizes. Body values outside the exceptional
    /// region are ignored.
    pub fn from_parts(ctx: &Arc<PointContext>, thresholds: Vec<usize>, tails: Vec<Vec<T>>, body: Tree<T>) -> Result<Self> {
        if thresholds.len() != ctx.n() || tails.len() != ctx.n() || tails.iter().any(|t| t.is_empty()) {
            return Err(Error::BadContext("one threshold and one nonempty tail word per branch".into()));
        }
        Ok(TailMap { ctx: ctx.clone(), thresholds, tails, body }.canonical())
    }

    /// The restriction to `X°` of a locally constant map on `X`.
    pub fn from_tree(ctx: &Arc<PointContext>, t: &Tree<T>) -> Self {
        let mut thresholds = Vec::new();
        let mut tails = Vec::new();
        for i in 0..ctx.n() {
            let mut k = 1;
            loop {
                if let Some(v) = t.subtree(&ctx.deep(i, k - 1)).leaf_value() {
                    thresholds.push(k - 1);
                    tails.push(vec![*v]);
                    break;
                }
                k += 1;
            }
        }
        TailMap { ctx: ctx.clone(), thresholds, tails, body: t.clone() }.canonical()
    }

    pub fn ctx(&self) -> &Arc<PointContext> {
        &self.ctx
    }

    pub fn thresholds(&self) -> &[usize] {
        &self.thresholds
    }

    pub fn tails(&self) -> &[Vec<T>] {
        &self.tails
    }

    pub fn body(&self) -> &Tree<T> {
        &self.body
    }

    fn canonical(mut self) -> Self {
        for i in 0..self.ctx.n() {
            let mut tail = primitive(&self.tails[i]);
            let mut d = self.thresholds[i];
            while d > 0 {
                let last = *tail.last().expect("nonempty tail");
                if self.body.subtree(&self.ctx.cell(i, d)).leaf_value() == Some(&last) {
                    d -= 1;
                    tail.rotate_right(1);
                } else {
                    break;
                }
            }
            self.body.set(&self.ctx.deep(i, d), Tree::Leaf(tail[0]));
            self.thresholds[i] = d;
            self.tails[i] = tail;
        }
        self
    }

    /// Value on `cell(i, j)` for `j` past the threshold.
    pub fn tail_value(&self, i: usize, j: usize) -> T {
        let d = self.thresholds[i];
        debug_assert!(j > d);
        let t = &self.tails[i];
        t[(j - d - 1) % t.len()]
    }

    /// The constant value on `cell(i, j)`, if any.
    pub fn cell_value(&self, i: usize, j: usize) -> Option<T> {
        if j > self.thresholds[i] {
            Some(self.tail_value(i, j))
        } else {
            self.body.subtree(&self.ctx.cell(i, j)).leaf_value().copied()
        }
    }

    /// The map on a cylinder that avoids the distinguished points.
    pub fn subtree(&self, w: &Word) -> Result<Tree<T>> {
        match self.ctx.locate(w) {
            Loc::Cell { branch, index, .. } if index > self.thresholds[branch] => Ok(Tree::Leaf(self.tail_value(branch, index))),
            Loc::Cell { .. } | Loc::OffBranch => Ok(self.body.subtree(w)),
            Loc::Deep { .. } | Loc::Mixed => Err(Error::BadContext(format!("cylinder {w} contains a distinguished point"))),
        }
    }

    pub fn value_at(&self, x: &Point) -> Option<T> {
        match self.ctx.locate_point(x) {
            PointLoc::Distinguished(_) => None,
            PointLoc::Cell { branch, index } if index > self.thresholds[branch] => Some(self.tail_value(branch, index)),
            _ => Some(self.body.eval_point(x)),
        }
    }

    /// Raises every threshold to at least `target[i]` and every tail length
    /// to a multiple of `period[i]`; not canonical.
    fn aligned(&self, target: &[usize], period: &[usize]) -> Self {
        let mut out = self.clone();
        for i in 0..self.ctx.n() {
            let d = self.thresholds[i];
            let nd = target[i].max(d);
            for j in d + 1..=nd {
                out.body.set(&self.ctx.cell(i, j), Tree::Leaf(self.tail_value(i, j)));
            }
            let mut tail = self.tails[i].clone();
            let r = (nd - d) % tail.len();
            tail.rotate_left(r);
            let len = tail.len().lcm(&period[i]);
            out.tails[i] = tail.iter().cycle().take(len).copied().collect();
            out.thresholds[i] = nd;
            out.body.set(&self.ctx.deep(i, nd), Tree::Leaf(out.tails[i][0]));
        }
        out
    }

    pub fn zip_with<U: Label, V: Label>(&self, other: &TailMap<U>, f: impl Fn(T, U) -> V) -> Result<TailMap<V>> {
        if !same_ctx(&self.ctx, &other.ctx) {
            return Err(Error::ContextMismatch);
        }
        let n = self.ctx.n();
        let target: Vec<usize> = (0..n).map(|i| self.thresholds[i].max(other.thresholds[i])).collect();
        let period: Vec<usize> = (0..n).map(|i| self.tails[i].len().lcm(&other.tails[i].len())).collect();
        let a = self.aligned(&target, &period);
        let b = other.aligned(&target, &period);
        let tails = (0..n).map(|i| a.tails[i].iter().zip(&b.tails[i]).map(|(x, y)| f(*x, *y)).collect()).collect();
        let body = a.body.zip(&b.body, &|x, y| f(*x, *y));
        Ok(TailMap { ctx: self.ctx.clone(), thresholds: target, tails, body }.canonical())
    }

    pub fn map<U: Label>(&self, f: impl Fn(T) -> U) -> TailMap<U> {
        TailMap {
            ctx: self.ctx.clone(),
            thresholds: self.thresholds.clone(),
            tails: self.tails.iter().map(|t| t.iter().map(|v| f(*v)).collect()).collect(),
            body: self.body.map(&|v| f(*v)),
        }
        .canonical()
    }

    /// A body tree valid on the exceptional region at the given thresholds.
    pub fn body_at(&self, thresholds: &[usize]) -> Tree<T> {
        self.aligned(thresholds, &vec![1; self.ctx.n()]).body
    }

    /// Whether every tail is constant, i.e. the map extends continuously to `X`.
    pub fn extends_to_x(&self) -> bool {
        self.tails.iter().all(|t| t.len() == 1)
    }

    /// The continuous extension to `X`, when it exists.
    pub fn to_tree(&self) -> Option<Tree<T>> {
        self.extends_to_x().then(|| self.body.clone())
    }

    /// The set of points where the map takes value `v`.
    pub fn preimage(&self, v: T) -> TailClopen {
        TailClopen(self.map(|x| x == v))
    }

    /// All values taken.
    pub fn values(&self) -> Vec<T> {
        let e = self.ctx.exceptional_region(&self.thresholds);
        let mut vals: Vec<T> =
            self.body.leaves().into_iter().filter(|(w, _)| e.meets_cylinder(w)).map(|(_, v)| v).chain(self.tails.iter().flatten().copied()).collect();
        vals.sort();
        vals.dedup();
        vals
    }
}

/// A clopen subset of the punctured space `X°`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TailClopen(pub TailMap<bool>);

/// The pair `(I, I′)`: indices of points that are limit points of the set,
/// and of its complement.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ClopenType {
    pub limit: Vec<usize>,
    pub co_limit: Vec<usize>,
}

impl TailClopen {
    pub fn empty(ctx: &Arc<PointContext>) -> Self {
        TailClopen(TailMap::constant(ctx, false))
    }

    pub fn full(ctx: &Arc<PointContext>) -> Self {
        TailClopen(TailMap::constant(ctx, true))
    }

    /// `b` minus the distinguished points.
    pub fn from_clopen(ctx: &Arc<PointContext>, b: &Clopen) -> Self {
        TailClopen(TailMap::from_tree(ctx, b.tree()))
    }

    pub fn cylinder(ctx: &Arc<PointContext>, w: &Word) -> Self {
        Self::from_clopen(ctx, &Clopen::cylinder(w))
    }

    /// A clopen from per-branch thresholds and tail words, with exceptional
    /// part `exceptional` (clipped to the exceptional region).
    pub fn from_tails(ctx: &Arc<PointContext>, thresholds: Vec<usize>, tails: Vec<Vec<bool>>, exceptional: &Clopen) -> Result<Self> {
        let e = ctx.exceptional_region(&thresholds);
        Ok(TailClopen(TailMap::from_parts(ctx, thresholds, tails, exceptional.intersect(&e).tree().clone())?))
    }

    pub fn ctx(&self) -> &Arc<PointContext> {
        self.0.ctx()
    }

    pub fn union(&self, o: &TailClopen) -> Result<TailClopen> {
        Ok(TailClopen(self.0.zip_with(&o.0, |a, b| a || b)?))
    }

    pub fn intersect(&self, o: &TailClopen) -> Result<TailClopen> {
        Ok(TailClopen(self.0.zip_with(&o.0, |a, b| a && b)?))
    }

    pub fn difference(&self, o: &TailClopen) -> Result<TailClopen> {
        Ok(TailClopen(self.0.zip_with(&o.0, |a, b| a && !b)?))
    }

    pub fn complement(&self) -> TailClopen {
        TailClopen(self.0.map(|a| !a))
    }

    pub fn is_empty(&self) -> bool {
        self.0.tails.iter().all(|t| t == &[false]) && self.0.body == Tree::Leaf(false)
    }

    pub fn is_full(&self) -> bool {
        self.complement().is_empty()
    }

    pub fn is_subset(&self, o: &TailClopen) -> Result<bool> {
        Ok(self.difference(o)?.is_empty())
    }

    pub fn is_disjoint(&self, o: &TailClopen) -> Result<bool> {
        Ok(self.intersect(o)?.is_empty())
    }

    pub fn contains(&self, x: &Point) -> bool {
        self.0.value_at(x) == Some(true)
    }

    /// The part inside the exceptional region at the current thresholds.
    pub fn exceptional(&self) -> Clopen {
        Clopen::from_tree(self.0.body.clone()).intersect(&self.ctx().exceptional_region(&self.0.thresholds))
    }

    /// The part inside the exceptional region at the given thresholds.
    pub fn exceptional_at(&self, thresholds: &[usize]) -> Clopen {
        Clopen::from_tree(self.0.body_at(thresholds)).intersect(&self.ctx().exceptional_region(thresholds))
    }

    /// The closure in `X`, when the set is clopen there.
    pub fn to_clopen(&self) -> Option<Clopen> {
        self.0.to_tree().map(Clopen::from_tree)
    }

    /// The suffixes `s` with `w·s` in the set, for a cylinder avoiding the points.
    pub fn restrict_to(&self, w: &Word) -> Result<Clopen> {
        Ok(Clopen::from_tree(self.0.subtree(w)?))
    }

    /// Indices of the points that are limit points of the set.
    pub fn limit_points(&self) -> Vec<usize> {
        (0..self.ctx().n()).filter(|&i| self.0.tails[i].contains(&true)).collect()
    }

    pub fn type_of(&self) -> Result<ClopenType> {
        if self.is_empty() || self.is_full() {
            return Err(Error::EmptyOrFull);
        }
        let n = self.ctx().n();
        Ok(ClopenType {
            limit: (0..n).filter(|&i| self.0.tails[i].contains(&true)).collect(),
            co_limit: (0..n).filter(|&i| self.0.tails[i].contains(&false)).collect(),
        })
    }

    pub fn is_good(&self) -> bool {
        match self.type_of() {
            Ok(t) => t.limit.len() == self.ctx().n() && t.co_limit.len() == self.ctx().n(),
            Err(_) => false,
        }
    }

    /// Splits a good clopen into two good halves: the tail cells of each
    /// branch go alternately to the two halves over a doubled period, and
    /// the exceptional part stays with the first half.
    pub fn split_good(&self) -> Result<(TailClopen, TailClopen)> {
        if !self.is_good() {
            return Err(Error::NotGood);
        }
        let ctx = self.ctx();
        let mut first = Vec::new();
        let mut second = Vec::new();
        for t in &self.0.tails {
            let doubled: Vec<bool> = t.iter().chain(t.iter()).copied().collect();
            let mut count = 0;
            let mut a = Vec::new();
            let mut b = Vec::new();
            for &bit in &doubled {
                a.push(bit && count % 2 == 0);
                b.push(bit && count % 2 == 1);
                if bit {
                    count += 1;
                }
            }
            first.push(a);
            second.push(b);
        }
        let th = self.0.thresholds.clone();
        let c1 = TailClopen::from_tails(ctx, th.clone(), first, &self.exceptional())?;
        let c2 = TailClopen::from_tails(ctx, th, second, &Clopen::empty())?;
        Ok((c1, c2))
    }

    /// Indices `j > after` of the IN cells (or OUT cells) of branch `i`,
    /// as offsets within one tail period starting at `after + 1`, plus the
    /// period. Requires `after` at or past the threshold.
    pub(crate) fn tail_pattern(&self, i: usize, after: usize, inside: bool) -> (Vec<usize>, usize) {
        let p = self.0.tails[i].len();
        let offs = (after + 1..=after + p).filter(|&j| self.0.tail_value(i, j) == inside).collect();
        (offs, p)
    }
}
