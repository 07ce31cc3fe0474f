use std::fmt;

use super::tree::Tree;
use super::word::{Point, Word};
use crate::error::{Error, Result};

/// A clopen subset of Cantor space. Its canonical antichain of prefixes is
/// read off the underlying trie, which never holds two equal sibling leaves.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Clopen(Tree<bool>);

impl Clopen {
    pub fn empty() -> Self {
        Clopen(Tree::Leaf(false))
    }

    pub fn full() -> Self {
        Clopen(Tree::Leaf(true))
    }

    pub fn cylinder(w: &Word) -> Self {
        Clopen(Tree::Leaf(false).graft(w, Tree::Leaf(true)))
    }

    /// Union of the cylinders of the given words (need not be an antichain).
    pub fn from_prefixes<'a>(words: impl IntoIterator<Item = &'a Word>) -> Self {
        let mut t = Tree::Leaf(false);
        for w in words {
            if t.subtree(w) != Tree::Leaf(true) {
                t.set(w, Tree::Leaf(true));
            }
        }
        Clopen(t)
    }

    pub fn from_tree(t: Tree<bool>) -> Self {
        Clopen(t)
    }

    pub fn tree(&self) -> &Tree<bool> {
        &self.0
    }

    pub fn prefixes(&self) -> Vec<Word> {
        self.0.leaves().into_iter().filter(|(_, v)| *v).map(|(w, _)| w).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.0 == Tree::Leaf(false)
    }

    pub fn is_full(&self) -> bool {
        self.0 == Tree::Leaf(true)
    }

    pub fn union(&self, o: &Clopen) -> Clopen {
        Clopen(self.0.zip(&o.0, &|a, b| *a || *b))
    }

    pub fn intersect(&self, o: &Clopen) -> Clopen {
        Clopen(self.0.zip(&o.0, &|a, b| *a && *b))
    }

    pub fn difference(&self, o: &Clopen) -> Clopen {
        Clopen(self.0.zip(&o.0, &|a, b| *a && !*b))
    }

    pub fn complement(&self) -> Clopen {
        Clopen(self.0.map(&|a| !*a))
    }

    pub fn is_subset(&self, o: &Clopen) -> bool {
        self.difference(o).is_empty()
    }

    pub fn is_disjoint(&self, o: &Clopen) -> bool {
        self.intersect(o).is_empty()
    }

    pub fn contains_point(&self, x: &Point) -> bool {
        self.0.eval_point(x)
    }

    pub fn contains_cylinder(&self, w: &Word) -> bool {
        self.0.subtree(w) == Tree::Leaf(true)
    }

    pub fn meets_cylinder(&self, w: &Word) -> bool {
        self.0.subtree(w) != Tree::Leaf(false)
    }

    /// The suffixes `s` with `w·s` in the set.
    pub fn restrict_to(&self, w: &Word) -> Clopen {
        Clopen(self.0.subtree(w))
    }

    /// Uniform measure, exact for depths below 53.
    pub fn measure(&self) -> f64 {
        self.prefixes().iter().map(|p| 0.5f64.powi(p.len() as i32)).sum()
    }

    pub fn depth(&self) -> usize {
        self.0.depth()
    }

    /// Splits a nonempty clopen into two nonempty disjoint halves: the first
    /// prefix against the rest, or the two children of a lone prefix.
    pub fn split(&self) -> Result<(Clopen, Clopen)> {
        let ps = self.prefixes();
        match ps.len() {
            0 => Err(Error::EmptyInput),
            1 => Ok((Clopen::cylinder(&ps[0].child(0)), Clopen::cylinder(&ps[0].child(1)))),
            _ => Ok((Clopen::cylinder(&ps[0]), Clopen::from_prefixes(&ps[1..]))),
        }
    }
}

impl fmt::Debug for Clopen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.prefixes()).finish()
    }
}
