use super::word::{Point, Word};

/// A locally constant function on Cantor space as a binary trie. The smart
/// constructor [`Tree::node`] merges equal sibling leaves, so structurally
/// equal trees denote equal functions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Tree<T> {
    Leaf(T),
    Node(Box<Tree<T>>, Box<Tree<T>>),
}

impl<T: Clone + PartialEq> Tree<T> {
    pub fn node(l: Tree<T>, r: Tree<T>) -> Tree<T> {
        if let (Tree::Leaf(a), Tree::Leaf(b)) = (&l, &r) {
            if a == b {
                return l;
            }
        }
        Tree::Node(Box::new(l), Box::new(r))
    }

    pub fn leaf_value(&self) -> Option<&T> {
        match self {
            Tree::Leaf(v) => Some(v),
            Tree::Node(..) => None,
        }
    }

    pub fn subtree(&self, w: &Word) -> Tree<T> {
        let mut t = self;
        for &b in w.bits() {
            match t {
                Tree::Leaf(_) => return t.clone(),
                Tree::Node(l, r) => t = if b == 0 { l } else { r },
            }
        }
        t.clone()
    }

    /// Replaces the subtree at cylinder `w`.
    pub fn graft(&self, w: &Word, sub: Tree<T>) -> Tree<T> {
        self.graft_at(w.bits(), sub)
    }

    /// Replaces the subtree at cylinder `w` in place.
    pub fn set(&mut self, w: &Word, sub: Tree<T>) {
        self.set_at(w.bits(), sub);
    }

    fn set_at(&mut self, bits: &[u8], sub: Tree<T>) {
        let Some((&b, rest)) = bits.split_first() else {
            *self = sub;
            return;
        };
        if let Tree::Leaf(v) = self {
            let v = v.clone();
            *self = Tree::Node(Box::new(Tree::Leaf(v.clone())), Box::new(Tree::Leaf(v)));
        }
        let Tree::Node(l, r) = self else { unreachable!() };
        if b == 0 {
            l.set_at(rest, sub);
        } else {
            r.set_at(rest, sub);
        }
        let merged = match (&**l, &**r) {
            (Tree::Leaf(x), Tree::Leaf(y)) if x == y => Some(x.clone()),
            _ => None,
        };
        if let Some(v) = merged {
            *self = Tree::Leaf(v);
        }
    }

    fn graft_at(&self, bits: &[u8], sub: Tree<T>) -> Tree<T> {
        let Some((&b, rest)) = bits.split_first() else {
            return sub;
        };
        let (l, r) = match self {
            Tree::Leaf(v) => (Tree::Leaf(v.clone()), Tree::Leaf(v.clone())),
            Tree::Node(l, r) => ((**l).clone(), (**r).clone()),
        };
        if b == 0 {
            Tree::node(l.graft_at(rest, sub), r)
        } else {
            Tree::node(l, r.graft_at(rest, sub))
        }
    }

    pub fn eval_point(&self, x: &Point) -> T {
        let mut t = self;
        let mut i = 0;
        loop {
            match t {
                Tree::Leaf(v) => return v.clone(),
                Tree::Node(l, r) => t = if x.bit(i) == 0 { l } else { r },
            }
            i += 1;
        }
    }

    pub fn map<U: Clone + PartialEq>(&self, f: &impl Fn(&T) -> U) -> Tree<U> {
        match self {
            Tree::Leaf(v) => Tree::Leaf(f(v)),
            Tree::Node(l, r) => Tree::node(l.map(f), r.map(f)),
        }
    }

    pub fn zip<U: Clone + PartialEq, V: Clone + PartialEq>(&self, other: &Tree<U>, f: &impl Fn(&T, &U) -> V) -> Tree<V> {
        match (self, other) {
            (Tree::Leaf(a), Tree::Leaf(b)) => Tree::Leaf(f(a, b)),
            (Tree::Leaf(_), Tree::Node(l, r)) => Tree::node(self.zip(l, f), self.zip(r, f)),
            (Tree::Node(l, r), Tree::Leaf(_)) => Tree::node(l.zip(other, f), r.zip(other, f)),
            (Tree::Node(a, b), Tree::Node(c, d)) => Tree::node(a.zip(c, f), b.zip(d, f)),
        }
    }

    /// Pointwise combination of several trees.
    pub fn zip_many<U: Clone + PartialEq>(trees: &[&Tree<T>], f: &impl Fn(&[T]) -> U) -> Tree<U> {
        if let Some(vals) = trees.iter().map(|t| t.leaf_value().cloned()).collect::<Option<Vec<T>>>() {
            return Tree::Leaf(f(&vals));
        }
        let left: Vec<Tree<T>> = trees.iter().map(|t| t.subtree(&Word::from_bits(vec![0]))).collect();
        let right: Vec<Tree<T>> = trees.iter().map(|t| t.subtree(&Word::from_bits(vec![1]))).collect();
        let lrefs: Vec<&Tree<T>> = left.iter().collect();
        let rrefs: Vec<&Tree<T>> = right.iter().collect();
        Tree::node(Tree::zip_many(&lrefs, f), Tree::zip_many(&rrefs, f))
    }

    /// The canonical partition into maximal constant cylinders, in
    /// lexicographic order.
    pub fn leaves(&self) -> Vec<(Word, T)> {
        let mut out = Vec::new();
        self.collect_leaves(&mut Word::empty(), &mut out);
        out
    }

    fn collect_leaves(&self, path: &mut Word, out: &mut Vec<(Word, T)>) {
        match self {
            Tree::Leaf(v) => out.push((path.clone(), v.clone())),
            Tree::Node(l, r) => {
                let mut p0 = path.child(0);
                l.collect_leaves(&mut p0, out);
                let mut p1 = path.child(1);
                r.collect_leaves(&mut p1, out);
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Tree::Leaf(_) => 0,
            Tree::Node(l, r) => 1 + l.depth().max(r.depth()),
        }
    }

    /// Assembles a tree from subtrees placed at the words of a complete
    /// prefix code; `None` if the words do not form one.
    pub fn from_parts(parts: Vec<(Word, Tree<T>)>) -> Option<Tree<T>> {
        Self::build(parts, 0)
    }

    fn build(parts: Vec<(Word, Tree<T>)>, depth: usize) -> Option<Tree<T>> {
        if parts.is_empty() {
            return None;
        }
        if parts.iter().any(|(w, _)| w.len() == depth) {
            if parts.len() != 1 {
                return None;
            }
            return parts.into_iter().next().map(|(_, t)| t);
        }
        let (zeros, ones): (Vec<_>, Vec<_>) = parts.into_iter().partition(|(w, _)| w.bit(depth) == 0);
        Some(Tree::node(Self::build(zeros, depth + 1)?, Self::build(ones, depth + 1)?))
    }
}
