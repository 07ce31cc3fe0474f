use super::clopen::Clopen;
use super::word::{Point, Word};
use crate::error::{Error, Result};

/// A distinguished point `root · letter^ω`. Its branch is the cylinder
/// `root · letter`, split into the cells `root · letter^j · (1-letter)` for
/// `j ≥ 1`, which accumulate only at the point.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Branch {
    pub root: Word,
    pub letter: u8,
}

/// Finitely many distinguished points with pairwise disjoint branch cylinders.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PointContext {
    branches: Vec<Branch>,
}

/// Where a cylinder sits relative to the branches.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Loc {
    /// Disjoint from every branch cylinder.
    OffBranch,
    /// Inside `cell(branch, index)`, with the remaining suffix.
    Cell { branch: usize, index: usize, rest: Word },
    /// Equal to `root · letter^k` with `k ≥ 1`: the point and cells `j ≥ k`.
    Deep { branch: usize, k: usize },
    /// A proper prefix of some branch cylinder.
    Mixed,
}

/// Where a point sits relative to the branches.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PointLoc {
    OffBranch,
    Cell { branch: usize, index: usize },
    Distinguished(usize),
}

impl PointContext {
    pub fn new(branches: Vec<Branch>) -> Result<Self> {
        for b in &branches {
            if b.letter > 1 {
                return Err(Error::BadContext("letters must be binary".into()));
            }
        }
        for (i, a) in branches.iter().enumerate() {
            for b in &branches[i + 1..] {
                if a.root.child(a.letter).comparable(&b.root.child(b.letter)) {
                    return Err(Error::BadContext(format!("branches {}·{} and {}·{} overlap", a.root, a.letter, b.root, b.letter)));
                }
            }
        }
        Ok(PointContext { branches })
    }

    /// The points `1^i 0^ω` for `i < n`.
    pub fn standard(n: usize) -> Self {
        PointContext { branches: (0..n).map(|i| Branch { root: Word::repeat(1, i), letter: 0 }).collect() }
    }

    /// Builds a context from eventually constant points, lengthening roots
    /// until the branch cylinders separate.
    pub fn from_points(points: &[Point]) -> Result<Self> {
        let mut branches = Vec::new();
        for p in points {
            let letter = p.eventual_constant().ok_or_else(|| Error::BadContext(format!("{p} is not eventually constant")))?;
            branches.push(Branch { root: p.pre().clone(), letter });
        }
        for i in 0..branches.len() {
            for j in 0..branches.len() {
                if i != j && branches[i] == branches[j] {
                    return Err(Error::BadContext("points must be distinct".into()));
                }
            }
        }
        loop {
            let mut grew = false;
            for i in 0..branches.len() {
                let ci = branches[i].root.child(branches[i].letter);
                let clash = (0..branches.len()).any(|j| j != i && ci.is_prefix_of(&branches[j].root.child(branches[j].letter)));
                if clash {
                    let l = branches[i].letter;
                    branches[i].root.push(l);
                    grew = true;
                }
            }
            if !grew {
                break;
            }
        }
        PointContext::new(branches)
    }

    pub fn n(&self) -> usize {
        self.branches.len()
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn point(&self, i: usize) -> Point {
        let b = &self.branches[i];
        Point::new(b.root.clone(), Word::from_bits(vec![b.letter])).expect("nonempty period")
    }

    pub fn branch_word(&self, i: usize) -> Word {
        let b = &self.branches[i];
        b.root.child(b.letter)
    }

    pub fn cell(&self, i: usize, j: usize) -> Word {
        debug_assert!(j >= 1);
        let b = &self.branches[i];
        let mut w = b.root.concat(&Word::repeat(b.letter, j));
        w.push(1 - b.letter);
        w
    }

    /// The cylinder `root · letter^(d+1)` holding `x_i` and the cells past `d`.
    pub fn deep(&self, i: usize, d: usize) -> Word {
        let b = &self.branches[i];
        b.root.concat(&Word::repeat(b.letter, d + 1))
    }

    pub fn off_branch(&self) -> Clopen {
        let branches: Vec<Word> = (0..self.n()).map(|i| self.branch_word(i)).collect();
        Clopen::from_prefixes(&branches).complement()
    }

    /// Off-branch region together with the cells `cell(i, j)`, `j ≤ d_i`.
    pub fn exceptional_region(&self, thresholds: &[usize]) -> Clopen {
        let deep: Vec<Word> = (0..self.n()).map(|i| self.deep(i, thresholds[i])).collect();
        Clopen::from_prefixes(&deep).complement()
    }

    pub fn locate(&self, w: &Word) -> Loc {
        for (i, b) in self.branches.iter().enumerate() {
            let bw = self.branch_word(i);
            if w.len() < bw.len() {
                if w.is_prefix_of(&bw) {
                    return Loc::Mixed;
                }
                continue;
            }
            if !bw.is_prefix_of(w) {
                continue;
            }
            let start = b.root.len();
            let run = w.bits()[start..].iter().take_while(|&&x| x == b.letter).count();
            if start + run == w.len() {
                return Loc::Deep { branch: i, k: run };
            }
            return Loc::Cell { branch: i, index: run, rest: w.suffix_from(start + run + 1) };
        }
        Loc::OffBranch
    }

    pub fn locate_point(&self, x: &Point) -> PointLoc {
        for (i, b) in self.branches.iter().enumerate() {
            let bw = self.branch_word(i);
            if !x.starts_with(&bw) {
                continue;
            }
            let start = b.root.len();
            let horizon = x.pre().len() + x.per().len();
            let mut run = 0;
            while x.bit(start + run) == b.letter {
                run += 1;
                if start + run > horizon + 1 {
                    return PointLoc::Distinguished(i);
                }
            }
            return PointLoc::Cell { branch: i, index: run };
        }
        PointLoc::OffBranch
    }

    pub fn is_distinguished(&self, x: &Point) -> bool {
        matches!(self.locate_point(x), PointLoc::Distinguished(_))
    }
}

#[cfg(test)]
mod tests {
    use super::super::word::w;
    use super::*;

    #[test]
    fn standard_cells() {
        let ctx = PointContext::standard(2);
        assert_eq!(ctx.point(1), Point::new(w("1"), w("0")).unwrap());
        assert_eq!(ctx.cell(1, 2), w("1001"));
        assert_eq!(ctx.off_branch().prefixes(), vec![w("11")]);
        assert_eq!(ctx.locate(&w("10010")), Loc::Cell { branch: 1, index: 2, rest: w("0") });
        assert_eq!(ctx.locate(&w("100")), Loc::Deep { branch: 1, k: 2 });
        assert_eq!(ctx.locate(&w("1")), Loc::Mixed);
        assert_eq!(ctx.locate(&w("110")), Loc::OffBranch);
        assert_eq!(ctx.locate_point(&ctx.point(0)), PointLoc::Distinguished(0));
        let y = Point::new(w("0001"), w("1")).unwrap();
        assert_eq!(ctx.locate_point(&y), PointLoc::Cell { branch: 0, index: 3 });
    }

    #[test]
    fn context_from_points() {
        let pts = [Point::constant(0), Point::new(w("00"), w("1")).unwrap()];
        let ctx = PointContext::from_points(&pts).unwrap();
        assert_eq!(ctx.point(0), pts[0]);
        assert_eq!(ctx.point(1), pts[1]);
        assert!(!ctx.branch_word(0).comparable(&ctx.branch_word(1)));
        let two = PointContext::new(vec![Branch { root: Word::empty(), letter: 0 }, Branch { root: Word::empty(), letter: 1 }]).unwrap();
        assert!(two.off_branch().is_empty());
        assert_eq!(two.cell(1, 3), w("1110"));
    }
}
