//! The class `K = {A^k : k ≥ 1}`: embeddings in Foster–Pixley form,
//! joint embedding, amalgamation, embeddings into a filtered Boolean power,
//! weak homogeneity and finite stages of the limit.

use std::sync::Arc;

use crate::algebra::{tuples, AutGroup, FiniteAlgebra};
use crate::cantor::{Clopen, EPHomeo, TailMap, Tree, Word};
use crate::error::{Error, Result};
use crate::power::{PowerContext, PowerElement};

/// One coordinate of an embedding: `α(a_src)` or a constant idempotent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Coord {
    Aut { aut: u16, src: usize },
    Idem(usize),
}

/// The algebra with its automorphism group and idempotents.
#[derive(Clone, Debug)]
pub struct PowerClass {
    alg: Arc<FiniteAlgebra>,
    auts: AutGroup,
    idems: Vec<usize>,
}

/// An embedding `A^u → A^v` given coordinatewise.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PowerEmbedding {
    u: usize,
    coords: Vec<Coord>,
}

/// The block form of an embedding: `a_i` repeated `p_i` times, then the
/// idempotents `idems[t]` repeated `q_t` times.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalForm {
    pub p: Vec<usize>,
    pub q: Vec<usize>,
}

/// `φ = transform ∘ normal`, where `transform` permutes coordinates and
/// renames them by automorphisms.
#[derive(Clone, Debug)]
pub struct Normalized {
    pub form: NormalForm,
    pub perm: Vec<usize>,
    pub auts: Vec<u16>,
}

impl PowerEmbedding {
    pub fn u(&self) -> usize {
        self.u
    }

    pub fn v(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Coord] {
        &self.coords
    }
}

impl PowerClass {
    pub fn new(alg: Arc<FiniteAlgebra>) -> Result<Self> {
        let auts = AutGroup::of(&alg)?;
        let idems = alg.idempotents();
        Ok(PowerClass { alg, auts, idems })
    }

    pub fn alg(&self) -> &Arc<FiniteAlgebra> {
        &self.alg
    }

    pub fn auts(&self) -> &AutGroup {
        &self.auts
    }

    pub fn idempotents(&self) -> &[usize] {
        &self.idems
    }

    pub fn embedding(&self, u: usize, coords: Vec<Coord>) -> Result<PowerEmbedding> {
        if u == 0 {
            return Err(Error::ZeroRank);
        }
        let mut hit = vec![false; u];
        for c in &coords {
            match *c {
                Coord::Aut { aut, src } => {
                    if src >= u || aut as usize >= self.auts.len() {
                        return Err(Error::NotEmbedding(format!("bad coordinate {c:?}")));
                    }
                    hit[src] = true;
                }
                Coord::Idem(e) => {
                    if !self.idems.contains(&e) {
                        return Err(Error::NotEmbedding(format!("{e} is not an idempotent")));
                    }
                }
            }
        }
        if let Some(j) = hit.iter().position(|h| !h) {
            return Err(Error::NotEmbedding(format!("source coordinate {j} is not carried by an automorphism")));
        }
        Ok(PowerEmbedding { u, coords })
    }

    pub fn identity(&self, u: usize) -> PowerEmbedding {
        PowerEmbedding { u, coords: (0..u).map(|src| Coord::Aut { aut: AutGroup::IDENTITY, src }).collect() }
    }

    pub fn eval_coord(&self, c: Coord, a: &[usize]) -> usize {
        match c {
            Coord::Aut { aut, src } => self.auts.act(aut, a[src]),
            Coord::Idem(e) => e,
        }
    }

    pub fn apply(&self, phi: &PowerEmbedding, a: &[usize]) -> Vec<usize> {
        phi.coords.iter().map(|&c| self.eval_coord(c, a)).collect()
    }

    /// The coordinate `c` of an outer map read through an inner map.
    pub fn compose_coord(&self, c: Coord, inner: &PowerEmbedding) -> Coord {
        match c {
            Coord::Idem(e) => Coord::Idem(e),
            Coord::Aut { aut, src } => match inner.coords[src] {
                Coord::Aut { aut: b, src: s } => Coord::Aut { aut: self.auts.mul(aut, b), src: s },
                Coord::Idem(e) => Coord::Idem(self.auts.act(aut, e)),
            },
        }
    }

    /// `outer ∘ inner`.
    pub fn compose(&self, outer: &PowerEmbedding, inner: &PowerEmbedding) -> Result<PowerEmbedding> {
        if outer.u != inner.v() {
            return Err(Error::SourceMismatch);
        }
        Ok(PowerEmbedding { u: inner.u, coords: outer.coords.iter().map(|&c| self.compose_coord(c, inner)).collect() })
    }

    /// All embeddings `A^u → A^v`.
    pub fn all_embeddings(&self, u: usize, v: usize) -> Vec<PowerEmbedding> {
        let mut choices = Vec::new();
        for src in 0..u {
            for aut in 0..self.auts.len() as u16 {
                choices.push(Coord::Aut { aut, src });
            }
        }
        choices.extend(self.idems.iter().map(|&e| Coord::Idem(e)));
        tuples(choices.len(), v).filter_map(|t| self.embedding(u, t.into_iter().map(|k| choices[k]).collect()).ok()).collect()
    }

    pub fn normal_embedding(&self, form: &NormalForm) -> PowerEmbedding {
        let mut coords = Vec::new();
        for (src, &p) in form.p.iter().enumerate() {
            coords.extend(std::iter::repeat_n(Coord::Aut { aut: AutGroup::IDENTITY, src }, p));
        }
        for (t, &q) in form.q.iter().enumerate() {
            coords.extend(std::iter::repeat_n(Coord::Idem(self.idems[t]), q));
        }
        PowerEmbedding { u: form.p.len(), coords }
    }

    pub fn normalize(&self, phi: &PowerEmbedding) -> Result<Normalized> {
        self.embedding(phi.u, phi.coords.clone())?;
        let mut p = vec![0; phi.u];
        let mut q = vec![0; self.idems.len()];
        for c in &phi.coords {
            match *c {
                Coord::Aut { src, .. } => p[src] += 1,
                Coord::Idem(e) => q[self.idems.iter().position(|&x| x == e).expect("validated")] += 1,
            }
        }
        let mut next_a: Vec<usize> = p
            .iter()
            .scan(0, |acc, &x| {
                let s = *acc;
                *acc += x;
                Some(s)
            })
            .collect();
        let total_p: usize = p.iter().sum();
        let mut next_e: Vec<usize> = q
            .iter()
            .scan(total_p, |acc, &x| {
                let s = *acc;
                *acc += x;
                Some(s)
            })
            .collect();
        let mut perm = Vec::with_capacity(phi.v());
        let mut auts = Vec::with_capacity(phi.v());
        for c in &phi.coords {
            match *c {
                Coord::Aut { aut, src } => {
                    perm.push(next_a[src]);
                    next_a[src] += 1;
                    auts.push(aut);
                }
                Coord::Idem(e) => {
                    let t = self.idems.iter().position(|&x| x == e).expect("validated");
                    perm.push(next_e[t]);
                    next_e[t] += 1;
                    auts.push(AutGroup::IDENTITY);
                }
            }
        }
        Ok(Normalized { form: NormalForm { p, q }, perm, auts })
    }

    /// The automorphism `T` of `A^v` with `φ = T ∘ normal`.
    pub fn transform(&self, n: &Normalized) -> PowerEmbedding {
        let coords = n.perm.iter().zip(&n.auts).map(|(&src, &aut)| Coord::Aut { aut, src }).collect();
        PowerEmbedding { u: n.perm.len(), coords }
    }

    pub fn transform_inverse(&self, n: &Normalized) -> PowerEmbedding {
        let mut coords = vec![Coord::Idem(0); n.perm.len()];
        for (i, (&k, &aut)) in n.perm.iter().zip(&n.auts).enumerate() {
            coords[k] = Coord::Aut { aut: self.auts.inv(aut), src: i };
        }
        PowerEmbedding { u: n.perm.len(), coords }
    }

    /// Joint embedding by concatenating coordinates.
    pub fn jep(&self, u: usize, w: usize) -> Result<(usize, PowerEmbedding, PowerEmbedding)> {
        if u == 0 || w == 0 {
            return Err(Error::ZeroRank);
        }
        let id = AutGroup::IDENTITY;
        let e = *self.idems.first().ok_or_else(|| Error::NotEmbedding("no idempotent to pad with".into()))?;
        let first = (0..u).map(|src| Coord::Aut { aut: id, src }).chain(std::iter::repeat_n(Coord::Idem(e), w)).collect();
        let second = std::iter::repeat_n(Coord::Idem(e), u).chain((0..w).map(|src| Coord::Aut { aut: id, src })).collect();
        Ok((u + w, PowerEmbedding { u, coords: first }, PowerEmbedding { u: w, coords: second }))
    }

    /// Multiplicity scheme of the amalgam for two normal forms.
    fn amalgam_side(&self, mine: &NormalForm, v: &[usize], w: &[usize]) -> PowerEmbedding {
        let id = AutGroup::IDENTITY;
        let mut coords = Vec::new();
        let mut src = 0;
        for (i, &p) in mine.p.iter().enumerate() {
            for j in 0..p {
                let mult = if j == 0 { v[i] - p + 1 } else { 1 };
                coords.extend(std::iter::repeat_n(Coord::Aut { aut: id, src: src + j }, mult));
            }
            src += p;
        }
        for (t, &q) in mine.q.iter().enumerate() {
            if q == 0 {
                coords.extend(std::iter::repeat_n(Coord::Idem(self.idems[t]), w[t]));
            }
            for j in 0..q {
                let mult = if j == 0 { w[t] - q + 1 } else { 1 };
                coords.extend(std::iter::repeat_n(Coord::Aut { aut: id, src: src + j }, mult));
            }
            src += q;
        }
        PowerEmbedding { u: src, coords }
    }

    /// Amalgamates `φ: A^u → A^v` and `ψ: A^u → A^w` into `A^m` with
    /// `φ′ ∘ φ = ψ′ ∘ ψ`.
    pub fn amalgamate(&self, phi: &PowerEmbedding, psi: &PowerEmbedding) -> Result<Amalgam> {
        if phi.u != psi.u {
            return Err(Error::SourceMismatch);
        }
        let nphi = self.normalize(phi)?;
        let npsi = self.normalize(psi)?;
        let v: Vec<usize> = nphi.form.p.iter().zip(&npsi.form.p).map(|(a, b)| *a.max(b)).collect();
        let w: Vec<usize> = nphi.form.q.iter().zip(&npsi.form.q).map(|(a, b)| *a.max(b)).collect();
        let m = v.iter().sum::<usize>() + w.iter().sum::<usize>();
        let phi_n = self.amalgam_side(&nphi.form, &v, &w);
        let psi_n = self.amalgam_side(&npsi.form, &v, &w);
        let phi_prime = self.compose(&phi_n, &self.transform_inverse(&nphi))?;
        let psi_prime = self.compose(&psi_n, &self.transform_inverse(&npsi))?;
        let left = self.compose(&phi_prime, phi)?;
        let right = self.compose(&psi_prime, psi)?;
        if left != right {
            return Err(Error::ExtensionFailure("amalgam square does not commute".into()));
        }
        Ok(Amalgam { m, phi_prime, psi_prime })
    }

    /// Exhaustive check of `outer_1 ∘ inner_1 = outer_2 ∘ inner_2` on all tuples.
    pub fn commutes_exhaustively(&self, o1: &PowerEmbedding, i1: &PowerEmbedding, o2: &PowerEmbedding, i2: &PowerEmbedding) -> bool {
        tuples(self.alg.size(), i1.u).all(|a| self.apply(o1, &self.apply(i1, &a)) == self.apply(o2, &self.apply(i2, &a)))
    }
}

#[derive(Clone, Debug)]
pub struct Amalgam {
    pub m: usize,
    pub phi_prime: PowerEmbedding,
    pub psi_prime: PowerEmbedding,
}

/// An embedding `A^u → D` given by a locally constant coordinate formula:
/// `ψ(a)(x) = α(a_j)` on the cells labeled `Aut{α, j}` and `e` on the cells
/// labeled `Idem(e)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BPEmbedding {
    ctx: Arc<PowerContext>,
    u: usize,
    tree: Tree<Coord>,
}

impl BPEmbedding {
    pub fn new(ctx: &Arc<PowerContext>, u: usize, tree: Tree<Coord>) -> Result<Self> {
        let auts = ctx.auts();
        let idems = ctx.alg().idempotents();
        let mut hit = vec![false; u];
        for (_, c) in tree.leaves() {
            match c {
                Coord::Aut { aut, src } if src < u && (aut as usize) < auts.len() => hit[src] = true,
                Coord::Idem(e) if idems.contains(&e) => {}
                _ => return Err(Error::NotEmbedding(format!("bad cell label {c:?}"))),
            }
        }
        if hit.iter().any(|h| !h) {
            return Err(Error::NotEmbedding("every source coordinate needs a cell".into()));
        }
        for i in 0..ctx.n() {
            if tree.eval_point(&ctx.points().point(i)) != Coord::Idem(ctx.filters()[i]) {
                return Err(Error::FilterViolation);
            }
        }
        Ok(BPEmbedding { ctx: ctx.clone(), u, tree })
    }

    /// The embedding with cells `c_{ij}` carrying `α_{ij}(a_i)` and blocks
    /// `b_i ∋ x_i` carrying `e_i`.
    pub fn from_cells(ctx: &Arc<PowerContext>, cells: &[Vec<(Clopen, u16)>], blocks: &[Clopen]) -> Result<Self> {
        let mut parts = Vec::new();
        for (src, list) in cells.iter().enumerate() {
            for (c, aut) in list {
                parts.extend(c.prefixes().into_iter().map(|p| (p, Tree::Leaf(Coord::Aut { aut: *aut, src }))));
            }
        }
        for (i, b) in blocks.iter().enumerate() {
            let e = *ctx.filters().get(i).ok_or(Error::NoPoints)?;
            parts.extend(b.prefixes().into_iter().map(|p| (p, Tree::Leaf(Coord::Idem(e)))));
        }
        let tree = Tree::from_parts(parts).ok_or_else(|| Error::NotEmbedding("cells must partition the space".into()))?;
        Self::new(ctx, cells.len(), tree)
    }

    pub fn ctx(&self) -> &Arc<PowerContext> {
        &self.ctx
    }

    pub fn u(&self) -> usize {
        self.u
    }

    pub fn tree(&self) -> &Tree<Coord> {
        &self.tree
    }

    pub fn apply(&self, a: &[usize]) -> Result<PowerElement> {
        let auts = self.ctx.auts();
        let t = self.tree.map(&|c| match *c {
            Coord::Aut { aut, src } => auts.act(aut, a[src]),
            Coord::Idem(e) => e,
        });
        PowerElement::from_tree(&self.ctx, t)
    }

    /// `self ∘ phi`.
    pub fn compose(&self, class: &PowerClass, phi: &PowerEmbedding) -> Result<BPEmbedding> {
        if phi.v() != self.u {
            return Err(Error::SourceMismatch);
        }
        Ok(BPEmbedding { ctx: self.ctx.clone(), u: phi.u, tree: self.tree.map(&|c| class.compose_coord(*c, phi)) })
    }

    /// `g(h) ∘ self`, moving the cells by a point-fixing homeomorphism.
    pub fn push(&self, h: &EPHomeo) -> Result<BPEmbedding> {
        let moved = h.push_map(&TailMap::from_tree(self.ctx.points(), &self.tree))?;
        let tree = moved.to_tree().ok_or(Error::NotExtendable)?;
        BPEmbedding::new(&self.ctx, self.u, tree)
    }

    /// The embedding `φ` with `stage ∘ φ = self`, when the cells of `self`
    /// are unions of the cells of a stage of the limit chain.
    pub fn factor_through(&self, stage: &ChainStage) -> Result<PowerEmbedding> {
        let auts = self.ctx.auts();
        let mut coords: Vec<Option<Coord>> = vec![None; stage.embedding.u];
        for (w, (s, m)) in stage.embedding.tree.zip(&self.tree, &|s, m| (*s, *m)).leaves() {
            let Coord::Aut { aut, src: j } = s else { continue };
            let inv = auts.inv(aut);
            let c = match m {
                Coord::Aut { aut: b, src } => Coord::Aut { aut: auts.mul(inv, b), src },
                Coord::Idem(e) => Coord::Idem(auts.act(inv, e)),
            };
            match coords[j] {
                None => coords[j] = Some(c),
                Some(old) if old == c => {}
                Some(_) => return Err(Error::ExtensionFailure(format!("cell {w} is not refined by the stage"))),
            }
        }
        let coords = coords.into_iter().collect::<Option<Vec<_>>>().ok_or_else(|| Error::ExtensionFailure("stage coordinate without a cell".into()))?;
        Ok(PowerEmbedding { u: self.u, coords })
    }
}

/// Splits `b` into `k + 1` nonempty cylinders, the first containing `x`,
/// halving the shortest cell each time.
fn carve(b: &Clopen, x: &crate::cantor::Point, k: usize) -> Vec<Clopen> {
    let mut cells = b.prefixes();
    while cells.len() < k + 1 {
        let i = (0..cells.len()).min_by_key(|&i| (cells[i].len(), i)).expect("b is nonempty");
        let w = cells.remove(i);
        cells.insert(i, w.child(1));
        cells.insert(i, w.child(0));
    }
    if let Some(i) = cells.iter().position(|w| x.starts_with(w)) {
        let w = cells.remove(i);
        cells.insert(0, w);
    }
    cells.iter().map(Clopen::cylinder).collect()
}

/// Splits the largest cell of a coordinate formula until source `i` has at
/// least `need[i]` cells.
fn refine_cells(tree: &Tree<Coord>, need: &[usize]) -> Vec<Vec<(Word, Coord)>> {
    let mut cells: Vec<Vec<(Word, Coord)>> = vec![Vec::new(); need.len()];
    for (w, c) in tree.leaves() {
        if let Coord::Aut { src, .. } = c {
            cells[src].push((w, c));
        }
    }
    for (i, list) in cells.iter_mut().enumerate() {
        while list.len() < need[i] {
            let k = (0..list.len()).min_by_key(|&k| (list[k].0.len(), k)).expect("at least one cell");
            let (w, c) = list.remove(k);
            list.insert(k, (w.child(1), c));
            list.insert(k, (w.child(0), c));
        }
    }
    cells
}

/// Extends `ψ: A^u → D` along `φ: A^u → A^v` to `ψ′: A^v → D` with
/// `ψ′ ∘ φ = ψ`.
pub fn extend_weak_homogeneity(class: &PowerClass, phi: &PowerEmbedding, psi: &BPEmbedding) -> Result<BPEmbedding> {
    if phi.u() > phi.v() {
        return Err(Error::ArityOrder);
    }
    if phi.u() != psi.u() {
        return Err(Error::SourceMismatch);
    }
    let ctx = psi.ctx();
    let norm = class.normalize(phi)?;
    let form = &norm.form;
    let cells = refine_cells(&psi.tree, &form.p);
    let mut start = Vec::with_capacity(form.p.len());
    let mut acc = 0;
    for &p in &form.p {
        start.push(acc);
        acc += p;
    }
    let mut parts: Vec<(Word, Tree<Coord>)> = Vec::new();
    for (i, list) in cells.iter().enumerate() {
        for (j, (w, c)) in list.iter().enumerate() {
            let Coord::Aut { aut, .. } = *c else { unreachable!() };
            let target = start[i] + j.min(form.p[i] - 1);
            parts.push((w.clone(), Tree::Leaf(Coord::Aut { aut, src: target })));
        }
    }
    let mut idem_start = acc;
    let mut carved: Vec<Option<usize>> = vec![None; class.idempotents().len()];
    for (t, &q) in form.q.iter().enumerate() {
        if q > 0 {
            let e = class.idempotents()[t];
            let i =
                (0..ctx.n()).find(|&i| ctx.filters()[i] == e).ok_or_else(|| Error::ExtensionFailure(format!("no distinguished point is filtered by {e}")))?;
            carved[t] = Some(i);
        }
    }
    let mut carved_points = vec![None; ctx.n()];
    for (t, c) in carved.iter().enumerate() {
        if let Some(i) = *c {
            carved_points[i] = Some((t, idem_start));
        }
        idem_start += form.q[t];
    }
    for (w, c) in psi.tree.leaves() {
        let Coord::Idem(e) = c else { continue };
        let point = (0..ctx.n()).find(|&i| ctx.points().point(i).starts_with(&w));
        match point.and_then(|i| carved_points[i].map(|s| (i, s))) {
            Some((i, (t, first))) => {
                let pieces = carve(&Clopen::cylinder(&w), &ctx.points().point(i), form.q[t]);
                for (j, piece) in pieces.into_iter().enumerate() {
                    let label = if j == 0 { Coord::Idem(e) } else { Coord::Aut { aut: AutGroup::IDENTITY, src: first + j - 1 } };
                    parts.extend(piece.prefixes().into_iter().map(|p| (p, Tree::Leaf(label))));
                }
            }
            None => parts.push((w, Tree::Leaf(c))),
        }
    }
    let tree = Tree::from_parts(parts).ok_or_else(|| Error::ExtensionFailure("cells do not tile".into()))?;
    let normal = BPEmbedding::new(ctx, phi.v(), tree)?;
    let out = normal.compose(class, &class.transform_inverse(&norm))?;
    if out.compose(class, phi)? != *psi {
        return Err(Error::ExtensionFailure("ψ′ ∘ φ differs from ψ".into()));
    }
    Ok(out)
}

/// Stage `t` of the limit chain: the free cells of length `t` as
/// coordinates, the cells through the points filtered.
#[derive(Clone, Debug)]
pub struct ChainStage {
    pub depth: usize,
    pub cells: Vec<Word>,
    pub embedding: BPEmbedding,
}

#[derive(Clone, Debug)]
pub struct LimitChain {
    pub stages: Vec<ChainStage>,
    /// `links[t]` embeds stage `t` into stage `t + 1`.
    pub links: Vec<PowerEmbedding>,
}

fn first_separating_depth(ctx: &PowerContext) -> usize {
    let n = ctx.n();
    (1..)
        .find(|&d| {
            let cells: Vec<Word> = (0..n).map(|i| ctx.points().point(i).prefix(d)).collect();
            let mut dedup = cells.clone();
            dedup.sort();
            dedup.dedup();
            dedup.len() == n && Word::all_of_length(d).len() > n
        })
        .expect("points are distinct")
}

pub fn chain_stage(ctx: &Arc<PowerContext>, depth: usize) -> Result<ChainStage> {
    let n = ctx.n();
    let mut cells = Vec::new();
    let mut parts = Vec::new();
    for w in Word::all_of_length(depth) {
        let owners: Vec<usize> = (0..n).filter(|&i| ctx.points().point(i).starts_with(&w)).collect();
        match owners.as_slice() {
            [] => {
                parts.push((w.clone(), Tree::Leaf(Coord::Aut { aut: AutGroup::IDENTITY, src: cells.len() })));
                cells.push(w);
            }
            [i] => parts.push((w, Tree::Leaf(Coord::Idem(ctx.filters()[*i])))),
            _ => return Err(Error::BadContext(format!("depth {depth} does not separate the points"))),
        }
    }
    let u = cells.len();
    if u == 0 {
        return Err(Error::BadContext(format!("no free cells at depth {depth}")));
    }
    let embedding = BPEmbedding::new(ctx, u, Tree::from_parts(parts).expect("complete code"))?;
    Ok(ChainStage { depth, cells, embedding })
}

/// Stages at the depths `t_0, …, t_0 + count - 1`, starting at the first
/// depth separating the points.
pub fn limit_chain(class: &PowerClass, ctx: &Arc<PowerContext>, count: usize) -> Result<LimitChain> {
    let t0 = first_separating_depth(ctx);
    let stages: Vec<ChainStage> = (t0..t0 + count).map(|d| chain_stage(ctx, d)).collect::<Result<_>>()?;
    let mut links = Vec::new();
    for k in 1..stages.len() {
        let phi = stages[k - 1].embedding.factor_through(&stages[k])?;
        links.push(class.embedding(phi.u, phi.coords)?);
    }
    Ok(LimitChain { stages, links })
}

impl LimitChain {
    /// The chain moved by a point-fixing homeomorphism.
    pub fn pushed(&self, h: &EPHomeo) -> Result<LimitChain> {
        let mut stages = Vec::new();
        for s in &self.stages {
            stages.push(ChainStage { depth: s.depth, cells: s.cells.clone(), embedding: s.embedding.push(h)? });
        }
        Ok(LimitChain { stages, links: self.links.clone() })
    }

    /// Checks `stage_{t+1} ∘ link_t = stage_t` symbolically.
    pub fn commutes(&self, class: &PowerClass) -> Result<bool> {
        for (t, link) in self.links.iter().enumerate() {
            if self.stages[t + 1].embedding.compose(class, link)? != self.stages[t].embedding {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// One step of a back-and-forth: the partial isomorphism `right ∘ left⁻¹`
/// between the images of two embeddings of `A^k`.
#[derive(Clone, Debug)]
pub struct TraceStep {
    pub forth: bool,
    pub stage: usize,
    pub left: BPEmbedding,
    pub right: BPEmbedding,
}

/// Alternately extends a partial isomorphism from the images of the first
/// chain to the images of the second, using weak homogeneity; each step
/// extends the previous one.
pub fn back_and_forth(class: &PowerClass, first: &LimitChain, second: &LimitChain, steps: usize) -> Result<Vec<TraceStep>> {
    let mut trace: Vec<TraceStep> = Vec::new();
    if steps == 0 {
        return Ok(trace);
    }
    let start_left = first.stages.first().ok_or(Error::EmptyInput)?.embedding.clone();
    let start_right = second.stages.first().ok_or(Error::EmptyInput)?.embedding.clone();
    if start_left.u() != start_right.u() {
        return Err(Error::ExtensionFailure("first stages differ in rank".into()));
    }
    trace.push(TraceStep { forth: true, stage: 0, left: start_left, right: start_right });
    for k in 1..steps {
        let prev = trace.last().expect("nonempty").clone();
        let forth = k % 2 == 1;
        let (chain, mine, other) = if forth { (first, &prev.left, &prev.right) } else { (second, &prev.right, &prev.left) };
        let len = chain.stages.len();
        let mut found = None;
        for stage in k.min(len - 1)..len {
            let Ok(phi) = mine.factor_through(&chain.stages[stage]) else { continue };
            let Ok(phi) = class.embedding(phi.u, phi.coords) else { continue };
            if chain.stages[stage].embedding.compose(class, &phi)? == *mine {
                found = Some((stage, phi));
                break;
            }
        }
        let (stage, phi) = found.ok_or_else(|| Error::ExtensionFailure("chain too short".into()))?;
        let target = &chain.stages[stage];
        let extended = extend_weak_homogeneity(class, &phi, other)?;
        if extended.compose(class, &phi)? != *other {
            return Err(Error::ExtensionFailure("extension does not restrict to the previous map".into()));
        }
        let step = if forth {
            TraceStep { forth, stage, left: target.embedding.clone(), right: extended }
        } else {
            TraceStep { forth, stage, left: extended, right: target.embedding.clone() }
        };
        trace.push(step);
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::builtin;
    use crate::cantor::w;

    fn example() -> PowerClass {
        PowerClass::new(Arc::new(builtin::gf2_idempotent_reduct())).unwrap()
    }

    fn id(src: usize) -> Coord {
        Coord::Aut { aut: 0, src }
    }

    #[test]
    fn normal_forms() {
        let k = example();
        let phi = k.embedding(1, vec![id(0), Coord::Idem(0), id(0)]).unwrap();
        let n = k.normalize(&phi).unwrap();
        assert_eq!(n.form, NormalForm { p: vec![2], q: vec![1, 0] });
        let normal = k.normal_embedding(&n.form);
        assert_eq!(k.compose(&k.transform(&n), &normal).unwrap(), phi);
        assert!(k.embedding(2, vec![id(0), id(0)]).is_err());
    }

    #[test]
    fn amalgam_of_diagonal_and_padding() {
        let k = PowerClass::new(Arc::new(builtin::gf2_ring())).unwrap();
        let phi = k.embedding(1, vec![id(0), id(0)]).unwrap();
        let psi = k.embedding(1, vec![id(0), Coord::Idem(0)]).unwrap();
        let am = k.amalgamate(&phi, &psi).unwrap();
        assert_eq!(am.m, 3);
        assert!(k.commutes_exhaustively(&am.phi_prime, &phi, &am.psi_prime, &psi));
        let same = k.amalgamate(&k.identity(1), &k.identity(1)).unwrap();
        assert_eq!(same.m, 1);
    }

    #[test]
    fn weak_homogeneity_on_diagonal() {
        let k = example();
        let ctx = PowerContext::standard(k.alg(), &[0, 1]).unwrap();
        let psi = BPEmbedding::from_cells(&ctx, &[vec![(Clopen::cylinder(&w("01")), 0)]], &[Clopen::cylinder(&w("00")), Clopen::cylinder(&w("1"))]).unwrap();
        let phi = k.embedding(1, vec![id(0), id(0), Coord::Idem(1)]).unwrap();
        let ext = extend_weak_homogeneity(&k, &phi, &psi).unwrap();
        for a in 0..2 {
            assert_eq!(ext.apply(&k.apply(&phi, &[a])).unwrap(), psi.apply(&[a]).unwrap());
        }
        assert_eq!(extend_weak_homogeneity(&k, &k.identity(1), &psi).unwrap(), psi);
    }

    #[test]
    fn chain_stages() {
        let k = PowerClass::new(Arc::new(builtin::gf2_ring())).unwrap();
        let ctx = PowerContext::standard(k.alg(), &[0]).unwrap();
        let chain = limit_chain(&k, &ctx, 4).unwrap();
        assert_eq!(chain.stages[0].cells, vec![w("1")]);
        assert!(chain.commutes(&k).unwrap());
        let trace = back_and_forth(&k, &chain, &chain, 3).unwrap();
        assert_eq!(trace.len(), 3);
    }

    #[test]
    fn back_and_forth_against_pushed_chain() {
        let k = example();
        let ctx = PowerContext::standard(k.alg(), &[0, 1]).unwrap();
        let chain = limit_chain(&k, &ctx, 10).unwrap();
        for seed in 0..4 {
            let h = crate::random::point_fixing_homeo(ctx.points(), &mut crate::random::seeded(seed), 2).unwrap();
            let moved = chain.pushed(&h).unwrap();
            assert!(moved.commutes(&k).unwrap());
            let trace = back_and_forth(&k, &chain, &moved, 4).unwrap();
            assert_eq!(trace.len(), 4);
            for pair in trace.windows(2) {
                assert!(pair[1].left.u() >= pair[0].left.u());
            }
        }
    }
}
