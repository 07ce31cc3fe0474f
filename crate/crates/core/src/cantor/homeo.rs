use std::collections::HashMap;
use std::sync::Arc;

use num_integer::Integer;

use super::clopen::Clopen;
use super::context::{Branch, Loc, PointContext, PointLoc};
use super::prefix_map::{merge_siblings, PrefixMap};
use super::tailmap::{same_ctx, ClopenType, Label, TailClopen, TailMap};
use super::tree::Tree;
use super::word::{Point, Word};
use crate::error::{Error, Result};

/// The cells `base + step·t`, `t ≥ 0`, of one branch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prog {
    pub branch: usize,
    pub base: usize,
    pub step: usize,
}

impl Prog {
    pub fn new(branch: usize, base: usize, step: usize) -> Self {
        Prog { branch, base, step }
    }

    pub fn at(&self, t: usize) -> usize {
        self.base + self.step * t
    }

    pub fn contains(&self, j: usize) -> bool {
        j >= self.base && (j - self.base).is_multiple_of(self.step)
    }

    pub fn index(&self, j: usize) -> usize {
        (j - self.base) / self.step
    }
}

/// Maps `cell(src.at(t))·s` to `cell(dst.at(t))·cellmap(s)` for every `t`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Strand {
    pub src: Prog,
    pub dst: Prog,
    pub cellmap: PrefixMap,
}

/// A homeomorphism between punctured spaces: a finite prefix bijection on
/// the off-branch region and finitely many cells, plus strands carrying
/// arithmetic progressions of cells to arithmetic progressions of cells.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EPHomeo {
    src: Arc<PointContext>,
    dst: Arc<PointContext>,
    finite: Vec<(Word, Word)>,
    strands: Vec<Strand>,
}

/// Coverage of one branch by progressions: the largest base and the cells
/// below it that no progression reaches.
struct Profile {
    uncovered: Vec<usize>,
}

fn profile<'a>(progs: impl Iterator<Item = &'a Prog>) -> Result<Profile> {
    let progs: Vec<&Prog> = progs.collect();
    if progs.is_empty() {
        return Err(Error::NotBijective("a branch has no strands".into()));
    }
    let max_base = progs.iter().map(|p| p.base).max().unwrap_or(1);
    let period = progs.iter().fold(1, |l, p| l.lcm(&p.step));
    let limit = max_base + period;
    let mut hits = vec![0usize; limit];
    for p in &progs {
        for j in (p.base..limit).step_by(p.step) {
            hits[j] += 1;
        }
    }
    let mut uncovered = Vec::new();
    for (j, &hits) in hits.iter().enumerate().skip(1) {
        if hits > 1 {
            return Err(Error::NotBijective(format!("cell {j} lies in two strands")));
        }
        if hits == 0 {
            if j >= max_base {
                return Err(Error::NotBijective(format!("strands miss cell {j} infinitely often")));
            }
            uncovered.push(j);
        }
    }
    Ok(Profile { uncovered })
}

fn point_free(ctx: &PointContext, w: &Word) -> bool {
    matches!(ctx.locate(w), Loc::OffBranch | Loc::Cell { .. })
}

/// Pairs the prefixes of two nonempty clopens after splitting the shortest
/// ones until the counts agree.
pub fn clopen_pairs(a: &Clopen, b: &Clopen) -> Vec<(Word, Word)> {
    let mut pa = a.prefixes();
    let mut pb = b.prefixes();
    while pa.len() != pb.len() {
        let side = if pa.len() < pb.len() { &mut pa } else { &mut pb };
        let k = (0..side.len()).min_by_key(|&k| side[k].len()).expect("nonempty clopen");
        let w = side.remove(k);
        side.push(w.child(0));
        side.push(w.child(1));
        side.sort();
    }
    pa.into_iter().zip(pb).collect()
}

impl EPHomeo {
    pub fn new(src: &Arc<PointContext>, dst: &Arc<PointContext>, finite: Vec<(Word, Word)>, strands: Vec<Strand>) -> Result<Self> {
        let h = EPHomeo { src: src.clone(), dst: dst.clone(), finite, strands };
        h.validate()?;
        Ok(h.simplified())
    }

    fn new_unchecked(src: &Arc<PointContext>, dst: &Arc<PointContext>, finite: Vec<(Word, Word)>, strands: Vec<Strand>) -> Self {
        let h = EPHomeo { src: src.clone(), dst: dst.clone(), finite, strands }.simplified();
        debug_assert_eq!(h.validate(), Ok(()));
        h
    }

    pub fn identity(ctx: &Arc<PointContext>) -> Self {
        let strands = (0..ctx.n()).map(|i| Strand { src: Prog::new(i, 1, 1), dst: Prog::new(i, 1, 1), cellmap: PrefixMap::identity() }).collect();
        let finite = ctx.off_branch().prefixes().into_iter().map(|p| (p.clone(), p)).collect();
        EPHomeo { src: ctx.clone(), dst: ctx.clone(), finite, strands }
    }

    /// A homeomorphism of `X` given by prefix pairs that carry each
    /// distinguished point to a distinguished point along matching letters.
    pub fn from_prefix_pairs(src: &Arc<PointContext>, dst: &Arc<PointContext>, pairs: Vec<(Word, Word)>) -> Result<Self> {
        PrefixMap::new(pairs.clone())?;
        let mut todo = pairs;
        let mut finite = Vec::new();
        let mut strands = Vec::new();
        while let Some((u, v)) = todo.pop() {
            match (src.locate(&u), dst.locate(&v)) {
                (Loc::OffBranch | Loc::Cell { .. }, Loc::OffBranch | Loc::Cell { .. }) => finite.push((u, v)),
                (Loc::Mixed, _) | (_, Loc::Mixed) => {
                    todo.push((u.child(0), v.child(0)));
                    todo.push((u.child(1), v.child(1)));
                }
                (Loc::Deep { branch: i, k }, Loc::Deep { branch: m, k: k2 }) if src.branches()[i].letter == dst.branches()[m].letter => {
                    strands.push(Strand { src: Prog::new(i, k, 1), dst: Prog::new(m, k2, 1), cellmap: PrefixMap::identity() });
                }
                _ => return Err(Error::NotBijective(format!("{u} ↦ {v} moves a distinguished point"))),
            }
        }
        EPHomeo::new(src, dst, finite, strands)
    }

    pub fn src_ctx(&self) -> &Arc<PointContext> {
        &self.src
    }

    pub fn dst_ctx(&self) -> &Arc<PointContext> {
        &self.dst
    }

    pub fn finite(&self) -> &[(Word, Word)] {
        &self.finite
    }

    pub fn strands(&self) -> &[Strand] {
        &self.strands
    }

    fn src_profile(&self, i: usize) -> Result<Profile> {
        profile(self.strands.iter().map(|s| &s.src).filter(|p| p.branch == i))
    }

    fn dst_profile(&self, m: usize) -> Result<Profile> {
        profile(self.strands.iter().map(|s| &s.dst).filter(|p| p.branch == m))
    }

    fn validate(&self) -> Result<()> {
        for s in &self.strands {
            for (p, ctx) in [(&s.src, &self.src), (&s.dst, &self.dst)] {
                if p.base == 0 || p.step == 0 || p.branch >= ctx.n() {
                    return Err(Error::NotBijective(format!("malformed progression {p:?}")));
                }
            }
        }
        for (u, v) in &self.finite {
            if !point_free(&self.src, u) || !point_free(&self.dst, v) {
                return Err(Error::NotBijective(format!("pair {u} ↦ {v} touches a distinguished point")));
            }
        }
        let mut src_words = self.src.off_branch().prefixes();
        for i in 0..self.src.n() {
            src_words.extend(self.src_profile(i)?.uncovered.into_iter().map(|j| self.src.cell(i, j)));
        }
        let mut dst_words = self.dst.off_branch().prefixes();
        for m in 0..self.dst.n() {
            dst_words.extend(self.dst_profile(m)?.uncovered.into_iter().map(|j| self.dst.cell(m, j)));
        }
        let (need_src, need_dst) = (Clopen::from_prefixes(&src_words), Clopen::from_prefixes(&dst_words));
        for (side, need) in [(0, need_src), (1, need_dst)] {
            let mut words: Vec<Word> = self.finite.iter().map(|p| if side == 0 { p.0.clone() } else { p.1.clone() }).collect();
            words.sort();
            if words.windows(2).any(|w| w[0].is_prefix_of(&w[1])) {
                return Err(Error::NotBijective("finite pairs overlap".into()));
            }
            if Clopen::from_prefixes(&words) != need {
                return Err(Error::NotBijective("finite pairs do not tile the region outside the strands".into()));
            }
        }
        Ok(())
    }

    /// Reduces the representation: merges sibling pairs, absorbs whole cells
    /// of the finite part into strands and merges strands that interleave.
    fn simplified(mut self) -> Self {
        merge_siblings(&mut self.finite);
        loop {
            let mut changed = self.absorb_cells();
            changed |= self.merge_strands();
            if !changed {
                return self;
            }
            merge_siblings(&mut self.finite);
        }
    }

    fn absorb_cells(&mut self) -> bool {
        let mut changed = false;
        for k in 0..self.strands.len() {
            loop {
                let s = &self.strands[k];
                if s.src.base <= s.src.step || s.dst.base <= s.dst.step {
                    break;
                }
                let cs = self.src.cell(s.src.branch, s.src.base - s.src.step);
                let cd = self.dst.cell(s.dst.branch, s.dst.base - s.dst.step);
                let inside: Vec<usize> = (0..self.finite.len()).filter(|&f| cs.is_prefix_of(&self.finite[f].0)).collect();
                if inside.is_empty() || !inside.iter().all(|&f| cd.is_prefix_of(&self.finite[f].1)) {
                    break;
                }
                let rel: Vec<(Word, Word)> = inside.iter().map(|&f| (self.finite[f].0.suffix_from(cs.len()), self.finite[f].1.suffix_from(cd.len()))).collect();
                let Ok(pm) = PrefixMap::new(rel) else { break };
                if !pm.compose(&s.cellmap.inverse()).is_identity() {
                    break;
                }
                for &f in inside.iter().rev() {
                    self.finite.remove(f);
                }
                let s = &mut self.strands[k];
                s.src.base -= s.src.step;
                s.dst.base -= s.dst.step;
                changed = true;
            }
        }
        changed
    }

    fn merge_strands(&mut self) -> bool {
        self.strands.sort_by_key(|a| (a.src, a.dst));
        let index: HashMap<(Prog, Prog), usize> = self.strands.iter().enumerate().map(|(k, s)| ((s.src, s.dst), k)).collect();
        let mut used = vec![false; self.strands.len()];
        let mut merged = Vec::new();
        for k in 0..self.strands.len() {
            if used[k] {
                continue;
            }
            let s = &self.strands[k];
            let g = s.src.step.gcd(&s.dst.step);
            for r in (2..=g).rev().filter(|r| g.is_multiple_of(*r)) {
                let (a, b) = (s.src.step / r, s.dst.step / r);
                let mut members = vec![k];
                for q in 1..r {
                    let want_src = Prog::new(s.src.branch, s.src.base + q * a, s.src.step);
                    let want_dst = Prog::new(s.dst.branch, s.dst.base + q * b, s.dst.step);
                    match index.get(&(want_src, want_dst)) {
                        Some(&p) if !used[p] && self.strands[p].cellmap == s.cellmap => members.push(p),
                        _ => break,
                    }
                }
                if members.len() == r {
                    for &p in &members {
                        used[p] = true;
                    }
                    merged.push(Strand {
                        src: Prog::new(s.src.branch, s.src.base, a),
                        dst: Prog::new(s.dst.branch, s.dst.base, b),
                        cellmap: s.cellmap.clone(),
                    });
                    break;
                }
            }
        }
        if merged.is_empty() {
            return false;
        }
        let mut strands: Vec<Strand> = self.strands.drain(..).zip(used).filter(|(_, u)| !u).map(|(s, _)| s).collect();
        strands.extend(merged);
        strands.sort_by_key(|a| (a.src, a.dst));
        self.strands = strands;
        true
    }

    pub fn inverse(&self) -> Self {
        let mut finite: Vec<_> = self.finite.iter().map(|(u, v)| (v.clone(), u.clone())).collect();
        finite.sort();
        let mut strands: Vec<_> = self.strands.iter().map(|s| Strand { src: s.dst, dst: s.src, cellmap: s.cellmap.inverse() }).collect();
        strands.sort_by_key(|a| (a.src, a.dst));
        EPHomeo { src: self.dst.clone(), dst: self.src.clone(), finite, strands }
    }

    pub fn is_identity(&self) -> bool {
        same_ctx(&self.src, &self.dst) && self.finite.iter().all(|(u, v)| u == v) && self.strands.iter().all(|s| s.src == s.dst && s.cellmap.is_identity())
    }

    /// Equality as maps.
    pub fn same_map(&self, other: &EPHomeo) -> Result<bool> {
        Ok(self.compose(&other.inverse())?.is_identity())
    }

    /// The target branch of each source branch, when the map extends
    /// continuously to the distinguished points.
    pub fn point_map(&self) -> Option<Vec<usize>> {
        (0..self.src.n())
            .map(|i| {
                let mut targets = self.strands.iter().filter(|s| s.src.branch == i).map(|s| s.dst.branch);
                let first = targets.next()?;
                targets.all(|m| m == first).then_some(first)
            })
            .collect()
    }

    pub fn extends_to_x(&self) -> bool {
        self.point_map().is_some()
    }

    pub fn fixes_points(&self) -> bool {
        same_ctx(&self.src, &self.dst) && self.point_map().is_some_and(|pm| pm.iter().enumerate().all(|(i, &m)| i == m))
    }

    fn strand_at(&self, i: usize, j: usize) -> Option<&Strand> {
        self.strands.iter().find(|s| s.src.branch == i && s.src.contains(j))
    }

    pub fn apply_point(&self, x: &Point) -> Result<Point> {
        match self.src.locate_point(x) {
            PointLoc::Distinguished(i) => {
                let pm = self.point_map().ok_or(Error::NotExtendable)?;
                Ok(self.dst.point(pm[i]))
            }
            PointLoc::Cell { branch, index } if self.strand_at(branch, index).is_some() => {
                let s = self.strand_at(branch, index).expect("checked");
                let c = self.src.cell(branch, index);
                let rest = s.cellmap.apply_point(&x.drop_prefix(c.len()));
                Ok(rest.prepend(&self.dst.cell(s.dst.branch, s.dst.at(s.src.index(index)))))
            }
            _ => {
                let (u, v) = self.finite.iter().find(|(u, _)| x.starts_with(u)).ok_or_else(|| Error::NotBijective(format!("{x} is not covered")))?;
                Ok(x.drop_prefix(u.len()).prepend(v))
            }
        }
    }

    /// Images of the sub-cylinders of a cylinder avoiding the points: each
    /// `(s, v)` says `w·s·t ↦ v·t`.
    pub fn push_word(&self, w: &Word) -> Result<Vec<(Word, Word)>> {
        match self.src.locate(w) {
            Loc::Cell { branch, index, rest } if self.strand_at(branch, index).is_some() => {
                let s = self.strand_at(branch, index).expect("checked");
                let c = self.dst.cell(s.dst.branch, s.dst.at(s.src.index(index)));
                Ok(s.cellmap.cover(&rest).into_iter().map(|(r, img)| (r, c.concat(&img))).collect())
            }
            Loc::Cell { .. } | Loc::OffBranch => {
                let mut out = Vec::new();
                for (u, v) in &self.finite {
                    if u.is_prefix_of(w) {
                        return Ok(vec![(Word::empty(), v.concat(&w.suffix_from(u.len())))]);
                    }
                    if w.is_prefix_of(u) {
                        out.push((u.suffix_from(w.len()), v.clone()));
                    }
                }
                Ok(out)
            }
            Loc::Deep { .. } | Loc::Mixed => Err(Error::BadContext(format!("cylinder {w} contains a distinguished point"))),
        }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &EPHomeo) -> Result<EPHomeo> {
        if !same_ctx(&other.dst, &self.src) {
            return Err(Error::ContextMismatch);
        }
        let mut finite = Vec::new();
        for (u, v) in &other.finite {
            for (s, img) in self.push_word(v)? {
                finite.push((u.concat(&s), img));
            }
        }
        let mut strands = Vec::new();
        for s2 in &other.strands {
            let m = s2.dst.branch;
            let firsts: Vec<&Strand> = self.strands.iter().filter(|s| s.src.branch == m).collect();
            let ma = firsts.iter().map(|s| s.src.base).max().unwrap_or(1);
            let k = firsts.iter().fold(1, |acc, s1| acc.lcm(&(s1.src.step / s1.src.step.gcd(&s2.dst.step))));
            let t0 = if s2.dst.base >= ma { 0 } else { (ma - s2.dst.base).div_ceil(s2.dst.step) };
            for t in 0..t0 {
                let cs = other.src.cell(s2.src.branch, s2.src.at(t));
                let cd = other.dst.cell(m, s2.dst.at(t));
                for (x, y) in s2.cellmap.pairs() {
                    for (r, img) in self.push_word(&cd.concat(y))? {
                        finite.push((cs.concat(x).concat(&r), img));
                    }
                }
            }
            for rho in 0..k {
                let t = t0 + rho;
                let j = s2.dst.at(t);
                let s1 = firsts.iter().find(|s| s.src.contains(j)).ok_or_else(|| Error::NotBijective(format!("cell {j} of branch {m} is not in a strand")))?;
                strands.push(Strand {
                    src: Prog::new(s2.src.branch, s2.src.at(t), s2.src.step * k),
                    dst: Prog::new(s1.dst.branch, s1.dst.at(s1.src.index(j)), s1.dst.step * s2.dst.step * k / s1.src.step),
                    cellmap: s1.cellmap.compose(&s2.cellmap),
                });
            }
        }
        Ok(EPHomeo::new_unchecked(&other.src, &self.dst, finite, strands))
    }

    /// The map `f ∘ self⁻¹` on the target space.
    pub fn push_map<T: Label>(&self, f: &TailMap<T>) -> Result<TailMap<T>> {
        if !same_ctx(f.ctx(), &self.src) {
            return Err(Error::ContextMismatch);
        }
        let hi = self.inverse();
        let n = self.dst.n();
        let mut parts = Vec::new();
        for (u, v) in &hi.finite {
            parts.push((u.clone(), f.subtree(v)?));
        }
        let mut thresholds = Vec::with_capacity(n);
        let mut tails = Vec::with_capacity(n);
        for m in 0..n {
            let strands: Vec<&Strand> = hi.strands.iter().filter(|s| s.src.branch == m).collect();
            let mut d = strands.iter().map(|s| s.src.base).max().unwrap_or(1) - 1;
            let mut period = 1;
            for s in &strands {
                let thr = f.thresholds()[s.dst.branch];
                let t_min = if s.dst.base > thr { 0 } else { (thr - s.dst.base) / s.dst.step + 1 };
                d = d.max(s.src.at(t_min) - 1);
                period = period.lcm(&(s.src.step * f.tails()[s.dst.branch].len()));
            }
            let mut slots: Vec<Option<T>> = vec![None; period];
            for s in &strands {
                let first = if s.src.base > d { s.src.base } else { s.src.at((d - s.src.base) / s.src.step + 1) };
                for j in (first..=d + period).step_by(s.src.step) {
                    slots[j - d - 1] = Some(f.tail_value(s.dst.branch, s.dst.at(s.src.index(j))));
                }
            }
            let tail: Vec<T> = slots.into_iter().map(|v| v.expect("cofinite strands")).collect();
            for s in &strands {
                let mut t = 0;
                while s.src.at(t) <= d {
                    let w = self.dst.cell(m, s.src.at(t));
                    let w2 = self.src.cell(s.dst.branch, s.dst.at(t));
                    for (x, y) in s.cellmap.pairs() {
                        parts.push((w.concat(x), f.subtree(&w2.concat(y))?));
                    }
                    t += 1;
                }
            }
            parts.push((self.dst.deep(m, d), Tree::Leaf(tail[0])));
            thresholds.push(d);
            tails.push(tail);
        }
        let body = Tree::from_parts(parts).ok_or_else(|| Error::NotBijective("image pieces do not tile".into()))?;
        TailMap::from_parts(&self.dst, thresholds, tails, body)
    }

    pub fn apply_tail_clopen(&self, c: &TailClopen) -> Result<TailClopen> {
        Ok(TailClopen(self.push_map(&c.0)?))
    }

    pub fn apply_clopen(&self, b: &Clopen) -> Result<TailClopen> {
        self.apply_tail_clopen(&TailClopen::from_clopen(&self.src, b))
    }

    /// Whether the map is the identity on `c`.
    pub fn fixes_pointwise(&self, c: &TailClopen) -> Result<bool> {
        if !same_ctx(c.ctx(), &self.src) || !same_ctx(&self.src, &self.dst) {
            return Err(Error::ContextMismatch);
        }
        let id = EPHomeo::identity(&self.src);
        piecewise_glue(&self.src, &[(c.clone(), self.clone())])?.same_map(&id)
    }

    /// A deterministic sample of points for truncation checks: points in
    /// each branch cell up to `depth` and in the off-branch region.
    pub fn sample_points(ctx: &PointContext, depth: usize) -> Vec<Point> {
        let tails = [
            Point::constant(0),
            Point::constant(1),
            Point::new(Word::empty(), Word::from_bits(vec![0, 1])).expect("period"),
            Point::new(Word::from_bits(vec![1, 1, 0]), Word::from_bits(vec![1, 0, 0])).expect("period"),
        ];
        let mut out = Vec::new();
        for i in 0..ctx.n() {
            for j in 1..=depth {
                let c = ctx.cell(i, j);
                out.extend(tails.iter().map(|t| t.prepend(&c)));
            }
        }
        for p in ctx.off_branch().prefixes() {
            for ext in Word::all_of_length(3) {
                out.extend(tails.iter().map(|t| t.prepend(&p.concat(&ext))));
            }
        }
        out
    }

    /// Checks `x ∈ c ⟺ h(x) ∈ image` on sampled points, evaluating `h`
    /// pointwise.
    pub fn check_image_sampled(&self, c: &TailClopen, image: &TailClopen, depth: usize) -> Result<bool> {
        for x in Self::sample_points(&self.src, depth) {
            if c.contains(&x) != image.contains(&self.apply_point(&x)?) {
                return Ok(false);
            }
        }
        for x in Self::sample_points(&self.dst, depth) {
            let y = self.inverse().apply_point(&x)?;
            if c.contains(&y) != image.contains(&x) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Checks `self = other` pointwise on sampled points.
    pub fn agrees_sampled(&self, other: &EPHomeo, depth: usize) -> Result<bool> {
        for x in Self::sample_points(&self.src, depth) {
            if self.apply_point(&x)? != other.apply_point(&x)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// The homeomorphism equal to `h_k` on each domain `d_k` and to the
/// identity elsewhere.
pub fn piecewise_glue(ctx: &Arc<PointContext>, pieces: &[(TailClopen, EPHomeo)]) -> Result<EPHomeo> {
    for (d, h) in pieces {
        if !same_ctx(d.ctx(), ctx) || !same_ctx(h.src_ctx(), ctx) || !same_ctx(h.dst_ctx(), ctx) {
            return Err(Error::ContextMismatch);
        }
    }
    for a in 0..pieces.len() {
        for b in a + 1..pieces.len() {
            if !pieces[a].0.is_disjoint(&pieces[b].0)? {
                return Err(Error::OverlappingDomains);
            }
        }
    }
    let n = ctx.n();
    let mut thresholds = vec![0; n];
    let mut periods = vec![1usize; n];
    for (d, _) in pieces {
        for i in 0..n {
            thresholds[i] = thresholds[i].max(d.0.thresholds()[i]);
            periods[i] = periods[i].lcm(&d.0.tails()[i].len());
        }
    }
    let mut strands = Vec::new();
    let mut loose = Vec::new();
    for i in 0..n {
        let th = thresholds[i];
        for j in th + 1..=th + periods[i] {
            if !pieces.iter().any(|(d, _)| d.0.tail_value(i, j)) {
                strands.push(Strand { src: Prog::new(i, j, periods[i]), dst: Prog::new(i, j, periods[i]), cellmap: PrefixMap::identity() });
            }
        }
        for (d, h) in pieces {
            for s in h.strands().iter().filter(|s| s.src.branch == i) {
                let l = s.src.step.lcm(&d.0.tails()[i].len());
                let first = if s.src.base > th { s.src.base } else { s.src.base + (th - s.src.base) / s.src.step * s.src.step + s.src.step };
                for j in (first..first + l).step_by(s.src.step) {
                    if d.0.tail_value(i, j) {
                        strands.push(Strand {
                            src: Prog::new(i, j, l),
                            dst: Prog::new(s.dst.branch, s.dst.at(s.src.index(j)), s.dst.step * l / s.src.step),
                            cellmap: s.cellmap.clone(),
                        });
                    }
                }
            }
            for j in h.src_profile(i)?.uncovered {
                if j > th && d.0.tail_value(i, j) {
                    loose.push((ctx.cell(i, j), h));
                }
            }
        }
    }
    let region = ctx.exceptional_region(&thresholds);
    let mut rest = region.clone();
    let mut finite = Vec::new();
    for (d, h) in pieces {
        let r = d.exceptional_at(&thresholds);
        rest = rest.difference(&r);
        for p in r.prefixes() {
            for (s, img) in h.push_word(&p)? {
                finite.push((p.concat(&s), img));
            }
        }
    }
    for p in rest.prefixes() {
        finite.push((p.clone(), p));
    }
    for (p, h) in loose {
        for (s, img) in h.push_word(&p)? {
            finite.push((p.concat(&s), img));
        }
    }
    EPHomeo::new(ctx, ctx, finite, strands)
}

/// A point-fixing homeomorphism extending to `X` and carrying `c1` onto
/// `c2`; exists exactly when the two have the same type.
pub fn orbit_witness(c1: &TailClopen, c2: &TailClopen) -> Result<EPHomeo> {
    let ctx = c1.ctx().clone();
    if !same_ctx(&ctx, c2.ctx()) {
        return Err(Error::ContextMismatch);
    }
    if c1 == c2 {
        return Ok(EPHomeo::identity(&ctx));
    }
    let (t1, t2) = match (c1.type_of(), c2.type_of()) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(_), Err(_)) if c1.is_empty() == c2.is_empty() => return Ok(EPHomeo::identity(&ctx)),
        _ => return Err(Error::TypeMismatch),
    };
    if t1 != t2 {
        return Err(Error::TypeMismatch);
    }
    let cs = [c1, c2];
    let mut th: [Vec<usize>; 2] = [c1.0.thresholds().to_vec(), c2.0.thresholds().to_vec()];
    let pattern = |c: &TailClopen, th: &[usize]| {
        let e = c.exceptional_at(th);
        let region = c.ctx().exceptional_region(th);
        (!e.is_empty(), !region.difference(&e).is_empty())
    };
    loop {
        let p = [pattern(c1, &th[0]), pattern(c2, &th[1])];
        if p[0] == p[1] {
            break;
        }
        let (side, inside) = if p[0].0 != p[1].0 { (if p[0].0 { 1 } else { 0 }, true) } else { (if p[0].1 { 1 } else { 0 }, false) };
        let c = cs[side];
        let i = (0..ctx.n()).find(|&i| c.0.tails()[i].contains(&inside)).ok_or_else(|| Error::NotBijective("no tail cell to borrow".into()))?;
        let mut j = th[side][i] + 1;
        while c.0.tail_value(i, j) != inside {
            j += 1;
        }
        th[side][i] = j;
    }
    let mut strands = Vec::new();
    for i in 0..ctx.n() {
        for inside in [true, false] {
            let (o1, n1) = c1.tail_pattern(i, th[0][i], inside);
            let (o2, n2) = c2.tail_pattern(i, th[1][i], inside);
            if o1.is_empty() {
                continue;
            }
            let (p1, p2) = (o1.len(), o2.len());
            let p = p1.lcm(&p2);
            for rho in 0..p {
                let b1 = n1 * (rho / p1) + o1[rho % p1];
                let b2 = n2 * (rho / p2) + o2[rho % p2];
                strands.push(Strand { src: Prog::new(i, b1, n1 * p / p1), dst: Prog::new(i, b2, n2 * p / p2), cellmap: PrefixMap::identity() });
            }
        }
    }
    let e1 = ctx.exceptional_region(&th[0]);
    let e2 = ctx.exceptional_region(&th[1]);
    let in1 = c1.exceptional_at(&th[0]);
    let in2 = c2.exceptional_at(&th[1]);
    let mut finite = Vec::new();
    for (a, b) in [(in1.clone(), in2.clone()), (e1.difference(&in1), e2.difference(&in2))] {
        if !a.is_empty() {
            finite.extend(clopen_pairs(&a, &b));
        }
    }
    EPHomeo::new(&ctx, &ctx, finite, strands)
}

/// The context of the two constant sequences `0^ω` and `1^ω`.
pub fn two_point_context() -> PointContext {
    PointContext::new(vec![Branch { root: Word::empty(), letter: 0 }, Branch { root: Word::empty(), letter: 1 }]).expect("disjoint branches")
}

/// The homeomorphism of `X°` fixing the cells `b_{ij}` with `j` odd and
/// exchanging `b_{0j}` and `b_{1j}` for `j` even.
pub fn example_2_3(ctx: &Arc<PointContext>) -> EPHomeo {
    let strands = vec![
        Strand { src: Prog::new(0, 1, 2), dst: Prog::new(0, 1, 2), cellmap: PrefixMap::identity() },
        Strand { src: Prog::new(0, 2, 2), dst: Prog::new(1, 2, 2), cellmap: PrefixMap::identity() },
        Strand { src: Prog::new(1, 1, 2), dst: Prog::new(1, 1, 2), cellmap: PrefixMap::identity() },
        Strand { src: Prog::new(1, 2, 2), dst: Prog::new(0, 2, 2), cellmap: PrefixMap::identity() },
    ];
    EPHomeo::new(ctx, ctx, Vec::new(), strands).expect("valid strands")
}

/// For the neighborhood `0^k` of `x_0`, a cell of it mapped into the
/// neighborhood of depth `depth` of each distinguished point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterWitness {
    pub neighborhood: Word,
    pub near: Vec<(Word, Word)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Example23Report {
    pub extends_to_x: bool,
    pub involution: bool,
    pub witnesses: Vec<ClusterWitness>,
}

pub fn example_2_3_report(depth: usize) -> Result<Example23Report> {
    let ctx = Arc::new(two_point_context());
    let h = example_2_3(&ctx);
    let mut witnesses = Vec::new();
    for k in 1..=depth {
        let neighborhood = Word::repeat(0, k);
        let mut near = Vec::new();
        for target in 0..ctx.n() {
            let goal = ctx.deep(target, depth - 1);
            let found = (k.max(1)..=k + depth + 2).find_map(|j| {
                let cell = ctx.cell(0, j);
                let img = h.push_word(&cell).ok()?;
                (img.len() == 1 && goal.is_prefix_of(&img[0].1)).then(|| (cell, img[0].1.clone()))
            });
            near.extend(found);
        }
        witnesses.push(ClusterWitness { neighborhood, near });
    }
    Ok(Example23Report { extends_to_x: h.extends_to_x(), involution: h.compose(&h)?.is_identity(), witnesses })
}

/// Type of a clopen, for convenience alongside the homeomorphism API.
pub fn type_of(c: &TailClopen) -> Result<ClopenType> {
    c.type_of()
}

#[cfg(test)]
mod tests {
    use super::super::word::w;
    use super::*;

    fn ctx(n: usize) -> Arc<PointContext> {
        Arc::new(PointContext::standard(n))
    }

    fn tail(c: &Arc<PointContext>, words: &[&str]) -> TailClopen {
        let tails = words.iter().map(|s| w(s).bits().iter().map(|&b| b == 1).collect()).collect();
        TailClopen::from_tails(c, vec![0; c.n()], tails, &Clopen::empty()).unwrap()
    }

    #[test]
    fn swap_without_points() {
        let c = ctx(0);
        let h = EPHomeo::new(&c, &c, vec![(w("0"), w("1")), (w("1"), w("0"))], vec![]).unwrap();
        assert_eq!(h.apply_point(&Point::constant(0)).unwrap(), Point::constant(0).prepend(&w("1")));
        assert!(h.compose(&h).unwrap().is_identity());
        assert!(h.compose(&h.inverse()).unwrap().is_identity());
    }

    #[test]
    fn shift_by_two_keeps_period_two_tail() {
        let c = ctx(1);
        let shift = vec![Strand { src: Prog::new(0, 1, 1), dst: Prog::new(0, 3, 1), cellmap: PrefixMap::identity() }];
        assert!(EPHomeo::new(&c, &c, vec![(w("1"), w("1"))], shift.clone()).is_err());
        let finite = vec![(w("10"), w("01")), (w("110"), w("001")), (w("111"), w("1"))];
        let h = EPHomeo::new(&c, &c, finite, shift).unwrap();
        assert!(h.fixes_points());
        let t = tail(&c, &["10"]);
        let img = h.apply_tail_clopen(&t).unwrap();
        assert!((3..40).all(|j| img.0.tail_value(0, j) == t.0.tail_value(0, j)));
        assert!(!img.contains(&Point::constant(0).prepend(&c.cell(0, 1))));
        assert!(h.check_image_sampled(&t, &img, 32).unwrap());
        assert!(h.compose(&h.inverse()).unwrap().is_identity());
    }

    #[test]
    fn example_cells() {
        let c = Arc::new(two_point_context());
        let h = example_2_3(&c);
        assert!(!h.extends_to_x());
        let b02 = TailClopen::cylinder(&c, &c.cell(0, 2));
        let b12 = TailClopen::cylinder(&c, &c.cell(1, 2));
        assert_eq!(h.apply_tail_clopen(&b02).unwrap(), b12);
        let b03 = TailClopen::cylinder(&c, &c.cell(0, 3));
        assert_eq!(h.apply_tail_clopen(&b03).unwrap(), b03);
        assert!(h.compose(&h).unwrap().is_identity());
        let r = example_2_3_report(6).unwrap();
        assert!(r.witnesses.iter().all(|x| x.near.len() == 2));
    }

    #[test]
    fn orbit_witness_on_tails() {
        let c = ctx(1);
        let a = tail(&c, &["10"]);
        let b = tail(&c, &["110"]);
        let h = orbit_witness(&a, &b).unwrap();
        assert!(h.fixes_points());
        assert_eq!(h.apply_tail_clopen(&a).unwrap(), b);
        assert!(h.check_image_sampled(&a, &b, 48).unwrap());
        let clopen = TailClopen::cylinder(&c, &w("1"));
        assert_eq!(orbit_witness(&clopen, &a), Err(Error::TypeMismatch));
        assert!(orbit_witness(&a, &a).unwrap().is_identity());
    }

    #[test]
    fn glue_two_pieces() {
        let c = ctx(1);
        let a = tail(&c, &["10"]);
        let b = tail(&c, &["110"]);
        let h = orbit_witness(&a, &b).unwrap();
        let g = orbit_witness(&a.complement(), &b.complement()).unwrap();
        let glued = piecewise_glue(&c, &[(a.clone(), h.clone()), (a.complement(), g.clone())]).unwrap();
        assert_eq!(glued.apply_tail_clopen(&a).unwrap(), b);
        assert!(glued.fixes_points());
        let only = piecewise_glue(&c, &[(a.clone(), h)]);
        assert!(only.is_err());
        assert_eq!(piecewise_glue(&c, &[(a.clone(), g.clone()), (a, g)]), Err(Error::OverlappingDomains));
    }
}
