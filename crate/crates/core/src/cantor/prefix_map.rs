use super::clopen::Clopen;
use super::tree::Tree;
use super::word::{Point, Word};
use crate::error::{Error, Result};

/// A bijection of Cantor space given by a pairing of two complete prefix
/// codes, acting by `u·s ↦ v·s`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PrefixMap {
    pairs: Vec<(Word, Word)>,
}

fn is_complete_code<'a>(words: impl Iterator<Item = &'a Word>) -> bool {
    let parts: Vec<(Word, Tree<bool>)> = words.map(|w| (w.clone(), Tree::Leaf(true))).collect();
    Tree::from_parts(parts).is_some()
}

impl PrefixMap {
    pub fn identity() -> Self {
        PrefixMap { pairs: vec![(Word::empty(), Word::empty())] }
    }

    pub fn new(mut pairs: Vec<(Word, Word)>) -> Result<Self> {
        if !is_complete_code(pairs.iter().map(|p| &p.0)) || !is_complete_code(pairs.iter().map(|p| &p.1)) {
            return Err(Error::NotBijective("prefix pairs must form complete codes on both sides".into()));
        }
        pairs.sort();
        Ok(PrefixMap { pairs }.simplified())
    }

    pub fn pairs(&self) -> &[(Word, Word)] {
        &self.pairs
    }

    pub fn is_identity(&self) -> bool {
        self.pairs.iter().all(|(u, v)| u == v)
    }

    pub fn inverse(&self) -> Self {
        let mut pairs: Vec<_> = self.pairs.iter().map(|(u, v)| (v.clone(), u.clone())).collect();
        pairs.sort();
        PrefixMap { pairs }
    }

    /// Images of the sub-cylinders of `r`: each `(s, v)` says `r·s·t ↦ v·t`.
    pub fn cover(&self, r: &Word) -> Vec<(Word, Word)> {
        let mut out = Vec::new();
        for (u, v) in &self.pairs {
            if u.is_prefix_of(r) {
                return vec![(Word::empty(), v.concat(&r.suffix_from(u.len())))];
            }
            if r.is_prefix_of(u) {
                out.push((u.suffix_from(r.len()), v.clone()));
            }
        }
        out
    }

    pub fn apply_point(&self, x: &Point) -> Point {
        let (u, v) = self.pairs.iter().find(|(u, _)| x.starts_with(u)).expect("complete code");
        x.drop_prefix(u.len()).prepend(v)
    }

    /// The function `t ∘ self⁻¹`.
    pub fn push_tree<T: Clone + PartialEq>(&self, t: &Tree<T>) -> Tree<T> {
        let parts = self.pairs.iter().map(|(u, v)| (v.clone(), t.subtree(u))).collect();
        Tree::from_parts(parts).expect("complete code")
    }

    pub fn image(&self, b: &Clopen) -> Clopen {
        Clopen::from_tree(self.push_tree(b.tree()))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &PrefixMap) -> PrefixMap {
        let mut pairs = Vec::new();
        for (u, v) in &other.pairs {
            for (s, img) in self.cover(v) {
                pairs.push((u.concat(&s), img));
            }
        }
        pairs.sort();
        PrefixMap { pairs }.simplified()
    }

    /// Merges sibling pairs mapped onto siblings in the same order.
    fn simplified(mut self) -> Self {
        loop {
            let mut merged = false;
            let mut i = 0;
            while i + 1 < self.pairs.len() {
                let (u0, v0) = &self.pairs[i];
                let (u1, v1) = &self.pairs[i + 1];
                if let (Some(pu), Some(pv)) = (u0.parent(), v0.parent()) {
                    if u0.last() == Some(0) && v0.last() == Some(0) && pu.child(1) == *u1 && pv.child(1) == *v1 {
                        self.pairs[i] = (pu, pv);
                        self.pairs.remove(i + 1);
                        merged = true;
                        continue;
                    }
                }
                i += 1;
            }
            if !merged {
                return self;
            }
        }
    }
}

/// Merges sibling pairs in a sorted list of prefix pairs.
pub(crate) fn merge_siblings(pairs: &mut Vec<(Word, Word)>) {
    pairs.sort();
    let pm = PrefixMap { pairs: std::mem::take(pairs) }.simplified();
    *pairs = pm.pairs;
}

#[cfg(test)]
mod tests {
    use super::super::word::w;
    use super::*;

    #[test]
    fn swap_and_compose() {
        let swap = PrefixMap::new(vec![(w("0"), w("1")), (w("1"), w("0"))]).unwrap();
        assert_eq!(swap.apply_point(&Point::constant(0)), Point::constant(0).prepend(&w("1")));
        assert!(swap.compose(&swap).is_identity());
        assert_eq!(swap.compose(&swap), PrefixMap::identity());
        let rot = PrefixMap::new(vec![(w("0"), w("00")), (w("10"), w("01")), (w("11"), w("1"))]).unwrap();
        assert!(rot.compose(&rot.inverse()).is_identity());
        assert_eq!(rot.image(&Clopen::cylinder(&w("0"))), Clopen::cylinder(&w("00")));
        assert!(PrefixMap::new(vec![(w("0"), w("0"))]).is_err());
    }
}
