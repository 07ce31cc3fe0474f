//! Finite algebras given by operation tables.
//!
//! Carriers are `0..size`. Tables are flat and row-major: the entry for the
//! argument tuple `(a_0, .., a_{r-1})` sits at `Σ a_i · size^(r-1-i)`.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default node budget for the exhaustive searches in this module.
pub const DEFAULT_BUDGET: usize = 5_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Operation {
    pub name: String,
    pub arity: usize,
    pub table: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteAlgebra {
    size: usize,
    ops: Vec<Operation>,
    malcev_hint: Option<Term>,
}

/// Term over a signature; `Op` refers to operations by index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(usize),
    Op(usize, Vec<Term>),
}

impl Term {
    pub fn op(index: usize, args: Vec<Term>) -> Term {
        Term::Op(index, args)
    }

    /// Renders the term with the operation names of `alg`.
    pub fn display<'a>(&'a self, alg: &'a FiniteAlgebra) -> TermDisplay<'a> {
        TermDisplay { term: self, alg }
    }
}

pub struct TermDisplay<'a> {
    term: &'a Term,
    alg: &'a FiniteAlgebra,
}

impl fmt::Display for TermDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const NAMES: [&str; 3] = ["x", "y", "z"];
        match self.term {
            Term::Var(i) if *i < 3 => write!(f, "{}", NAMES[*i]),
            Term::Var(i) => write!(f, "x{}", i + 1),
            Term::Op(o, args) => {
                write!(f, "{}", self.alg.ops[*o].name)?;
                if args.is_empty() {
                    return Ok(());
                }
                write!(f, "(")?;
                for (k, a) in args.iter().enumerate() {
                    if k > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}", a.display(self.alg))?;
                }
                write!(f, ")")
            }
        }
    }
}

/// A congruence stored as a block index per element, blocks numbered by
/// first occurrence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AlgCongruence {
    block: Vec<usize>,
}

impl AlgCongruence {
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut seen = HashMap::new();
        let block = labels
            .iter()
            .map(|l| {
                let next = seen.len();
                *seen.entry(*l).or_insert(next)
            })
            .collect();
        AlgCongruence { block }
    }

    pub fn identity(size: usize) -> Self {
        AlgCongruence { block: (0..size).collect() }
    }

    pub fn full(size: usize) -> Self {
        AlgCongruence { block: vec![0; size] }
    }

    pub fn block_of(&self, a: usize) -> usize {
        self.block[a]
    }

    pub fn related(&self, a: usize, b: usize) -> bool {
        self.block[a] == self.block[b]
    }

    pub fn num_blocks(&self) -> usize {
        self.block.iter().max().map_or(0, |m| m + 1)
    }

    pub fn is_full(&self) -> bool {
        self.num_blocks() <= 1
    }

    pub fn is_identity(&self) -> bool {
        self.num_blocks() == self.block.len()
    }

    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_blocks()];
        for (a, b) in self.block.iter().enumerate() {
            out[*b].push(a);
        }
        out
    }
}

/// A unary map on the carrier that preserves every operation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Endomap {
    pub map: Vec<usize>,
    pub is_automorphism: bool,
}

impl Endomap {
    pub fn apply(&self, a: usize) -> usize {
        self.map[a]
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut a: usize) -> usize {
        while self.parent[a] != a {
            self.parent[a] = self.parent[self.parent[a]];
            a = self.parent[a];
        }
        a
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }
}

/// Iterates over all tuples in `0..base` of the given length, lexicographically.
pub fn tuples(base: usize, len: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = base.checked_pow(len as u32).unwrap_or(usize::MAX);
    (0..total).map(move |mut idx| {
        let mut t = vec![0; len];
        for slot in t.iter_mut().rev() {
            *slot = idx % base;
            idx /= base;
        }
        t
    })
}

impl FiniteAlgebra {
    pub fn new(size: usize, ops: Vec<Operation>) -> Result<Self> {
        if size < 2 {
            return Err(Error::DegenerateCarrier);
        }
        for op in &ops {
            let expected = size.checked_pow(op.arity as u32).ok_or(Error::SizeBudgetExceeded(usize::MAX))?;
            if op.table.len() != expected {
                return Err(Error::ArityMismatch { op: op.name.clone(), expected, got: op.table.len() });
            }
            if let Some(&v) = op.table.iter().find(|&&v| v >= size) {
                return Err(Error::OutOfRange { value: v, size });
            }
        }
        Ok(FiniteAlgebra { size, ops, malcev_hint: None })
    }

    /// Builds an algebra from `(name, arity, f)` triples by tabulating `f`.
    pub fn from_fns(size: usize, ops: &[(&str, usize, &dyn Fn(&[usize]) -> usize)]) -> Result<Self> {
        let ops = ops
            .iter()
            .map(|(name, arity, f)| Operation { name: name.to_string(), arity: *arity, table: tuples(size, *arity).map(|t| f(&t)).collect() })
            .collect();
        FiniteAlgebra::new(size, ops)
    }

    /// Attaches a known Mal'cev term; it is checked before use.
    pub fn with_malcev_hint(mut self, t: Term) -> Self {
        self.malcev_hint = Some(t);
        self
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn ops(&self) -> &[Operation] {
        &self.ops
    }

    pub fn op_index(&self, name: &str) -> Option<usize> {
        self.ops.iter().position(|o| o.name == name)
    }

    pub fn apply(&self, op: usize, args: &[usize]) -> usize {
        let o = &self.ops[op];
        debug_assert_eq!(args.len(), o.arity);
        let mut idx = 0;
        for &a in args {
            idx = idx * self.size + a;
        }
        o.table[idx]
    }

    pub fn eval_term(&self, t: &Term, env: &[usize]) -> usize {
        match t {
            Term::Var(i) => env[*i],
            Term::Op(o, args) => {
                let vals: Vec<usize> = args.iter().map(|a| self.eval_term(a, env)).collect();
                self.apply(*o, &vals)
            }
        }
    }

    pub fn is_malcev_term(&self, t: &Term) -> bool {
        (0..self.size).all(|x| (0..self.size).all(|y| self.eval_term(t, &[x, x, y]) == y && self.eval_term(t, &[y, x, x]) == y))
    }

    /// Searches for a Mal'cev term by closing the projections under the basic
    /// operations, with functions restricted to the tuples `(x,x,y)` and `(y,x,x)`.
    pub fn find_malcev_term(&self, budget: usize) -> Result<Option<Term>> {
        if let Some(t) = &self.malcev_hint {
            if self.is_malcev_term(t) {
                return Ok(Some(t.clone()));
            }
        }
        let n = self.size;
        let mut points: Vec<[usize; 3]> = Vec::new();
        let mut target = Vec::new();
        let mut seen_pts = HashSet::new();
        for x in 0..n {
            for y in 0..n {
                for p in [[x, x, y], [y, x, x]] {
                    if seen_pts.insert(p) {
                        points.push(p);
                        target.push(y);
                    }
                }
            }
        }
        let mut funcs: Vec<Vec<usize>> = Vec::new();
        let mut terms: Vec<Term> = Vec::new();
        let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
        for v in 0..3 {
            let vals: Vec<usize> = points.iter().map(|p| p[v]).collect();
            if vals == target {
                return Ok(Some(Term::Var(v)));
            }
            if !index.contains_key(&vals) {
                index.insert(vals.clone(), funcs.len());
                funcs.push(vals);
                terms.push(Term::Var(v));
            }
        }
        let mut work = 0usize;
        let mut frontier_start = 0;
        loop {
            let old_len = funcs.len();
            for (oi, op) in self.ops.iter().enumerate() {
                let r = op.arity;
                if r == 0 {
                    if frontier_start > 0 {
                        continue;
                    }
                    let vals = vec![op.table[0]; points.len()];
                    if vals == target {
                        return Ok(Some(Term::Op(oi, vec![])));
                    }
                    if !index.contains_key(&vals) {
                        index.insert(vals.clone(), funcs.len());
                        funcs.push(vals);
                        terms.push(Term::Op(oi, vec![]));
                    }
                    continue;
                }
                for combo in tuples(old_len, r) {
                    if combo.iter().all(|&c| c < frontier_start) {
                        continue;
                    }
                    work += 1;
                    if work > budget {
                        return Err(Error::SearchBudgetExceeded(budget));
                    }
                    let vals: Vec<usize> = (0..points.len())
                        .map(|k| {
                            let args: Vec<usize> = combo.iter().map(|&c| funcs[c][k]).collect();
                            self.apply(oi, &args)
                        })
                        .collect();
                    if index.contains_key(&vals) {
                        continue;
                    }
                    let t = Term::Op(oi, combo.iter().map(|&c| terms[c].clone()).collect());
                    if vals == target {
                        return Ok(Some(t));
                    }
                    index.insert(vals.clone(), funcs.len());
                    funcs.push(vals);
                    terms.push(t);
                }
            }
            if funcs.len() == old_len {
                return Ok(None);
            }
            frontier_start = old_len;
        }
    }

    /// Least congruence containing every pair in `pairs`, by closure under
    /// basic translations.
    pub fn congruence_generated(&self, pairs: &[(usize, usize)]) -> AlgCongruence {
        let n = self.size;
        let mut uf = UnionFind::new(n);
        let mut queue: VecDeque<(usize, usize)> = VecDeque::new();
        for &(a, b) in pairs {
            if uf.union(a, b) {
                queue.push_back((a, b));
            }
        }
        let mut args = Vec::new();
        while let Some((a, b)) = queue.pop_front() {
            for oi in 0..self.ops.len() {
                let r = self.ops[oi].arity;
                if r == 0 {
                    continue;
                }
                for pos in 0..r {
                    for rest in tuples(n, r - 1) {
                        args.clear();
                        args.extend_from_slice(&rest[..pos]);
                        args.push(a);
                        args.extend_from_slice(&rest[pos..]);
                        let fa = self.apply(oi, &args);
                        args[pos] = b;
                        let fb = self.apply(oi, &args);
                        if uf.union(fa, fb) {
                            queue.push_back((fa, fb));
                        }
                    }
                }
            }
        }
        let labels: Vec<usize> = (0..n).map(|a| uf.find(a)).collect();
        AlgCongruence::from_labels(&labels)
    }

    pub fn principal_congruence(&self, a: usize, b: usize) -> Result<AlgCongruence> {
        for v in [a, b] {
            if v >= self.size {
                return Err(Error::OutOfRange { value: v, size: self.size });
            }
        }
        Ok(self.congruence_generated(&[(a, b)]))
    }

    pub fn is_simple(&self) -> bool {
        (0..self.size).all(|a| (a + 1..self.size).all(|b| self.congruence_generated(&[(a, b)]).is_full()))
    }

    /// Checks that a partition (given by labels) is compatible with every operation.
    pub fn is_compatible(&self, labels: &[usize]) -> bool {
        self.ops.iter().enumerate().all(|(oi, op)| {
            let r = op.arity;
            tuples(self.size, r).all(|t| {
                tuples(self.size, r).all(|s| {
                    if t.iter().zip(&s).any(|(x, y)| labels[*x] != labels[*y]) {
                        return true;
                    }
                    labels[self.apply(oi, &t)] == labels[self.apply(oi, &s)]
                })
            })
        })
    }

    pub fn idempotents(&self) -> Vec<usize> {
        (0..self.size).filter(|&e| (0..self.ops.len()).all(|oi| self.apply(oi, &vec![e; self.ops[oi].arity]) == e)).collect()
    }

    /// Closure of a generating set under all operations, sorted.
    pub fn subalgebra_generated(&self, gens: &[usize]) -> Vec<usize> {
        let mut inside = vec![false; self.size];
        let mut elems: Vec<usize> = Vec::new();
        let push = |v: usize, inside: &mut Vec<bool>, elems: &mut Vec<usize>| {
            if !inside[v] {
                inside[v] = true;
                elems.push(v);
            }
        };
        for &g in gens {
            push(g, &mut inside, &mut elems);
        }
        for (oi, op) in self.ops.iter().enumerate() {
            if op.arity == 0 {
                push(self.apply(oi, &[]), &mut inside, &mut elems);
            }
        }
        loop {
            let before = elems.len();
            let snapshot = elems.clone();
            for (oi, op) in self.ops.iter().enumerate() {
                if op.arity == 0 {
                    continue;
                }
                for t in tuples(snapshot.len(), op.arity) {
                    let args: Vec<usize> = t.iter().map(|&i| snapshot[i]).collect();
                    push(self.apply(oi, &args), &mut inside, &mut elems);
                }
            }
            if elems.len() == before {
                break;
            }
        }
        elems.sort_unstable();
        elems
    }

    /// All nonempty subuniverses, sorted by size then lexicographically.
    pub fn subalgebras(&self, budget: usize) -> Result<Vec<Vec<usize>>> {
        let n = self.size;
        let mut found: HashSet<Vec<usize>> = HashSet::new();
        if n <= 8 {
            for mask in 1usize..(1 << n) {
                let gens: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
                found.insert(self.subalgebra_generated(&gens));
            }
        } else {
            let mut queue: VecDeque<Vec<usize>> = VecDeque::new();
            for a in 0..n {
                let s = self.subalgebra_generated(&[a]);
                if found.insert(s.clone()) {
                    queue.push_back(s);
                }
            }
            let mut work = 0;
            while let Some(s) = queue.pop_front() {
                for a in 0..n {
                    if s.binary_search(&a).is_ok() {
                        continue;
                    }
                    work += 1;
                    if work > budget {
                        return Err(Error::SearchBudgetExceeded(budget));
                    }
                    let mut gens = s.clone();
                    gens.push(a);
                    let t = self.subalgebra_generated(&gens);
                    if found.insert(t.clone()) {
                        queue.push_back(t);
                    }
                }
            }
        }
        let mut out: Vec<Vec<usize>> = found.into_iter().collect();
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        Ok(out)
    }

    pub fn proper_subalgebras(&self, budget: usize) -> Result<Vec<Vec<usize>>> {
        let n = self.size;
        Ok(self.subalgebras(budget)?.into_iter().filter(|s| s.len() < n).collect())
    }

    pub fn is_endomorphism(&self, map: &[usize]) -> bool {
        self.ops.iter().enumerate().all(|(oi, op)| {
            tuples(self.size, op.arity).all(|t| {
                let img: Vec<usize> = t.iter().map(|&a| map[a]).collect();
                map[self.apply(oi, &t)] == self.apply(oi, &img)
            })
        })
    }

    /// All automorphisms by backtracking over partial injections; the
    /// identity comes first.
    pub fn automorphisms(&self, budget: usize) -> Result<Vec<Endomap>> {
        let n = self.size;
        let mut out = Vec::new();
        let mut map = vec![usize::MAX; n];
        let mut used = vec![false; n];
        let mut nodes = 0usize;
        self.aut_search(0, &mut map, &mut used, &mut out, &mut nodes, budget)?;
        out.sort_by(|a: &Endomap, b| {
            let ida = a.map.iter().enumerate().all(|(i, &v)| i == v);
            let idb = b.map.iter().enumerate().all(|(i, &v)| i == v);
            idb.cmp(&ida).then_with(|| a.map.cmp(&b.map))
        });
        Ok(out)
    }

    fn aut_search(&self, k: usize, map: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Endomap>, nodes: &mut usize, budget: usize) -> Result<()> {
        *nodes += 1;
        if *nodes > budget {
            return Err(Error::SearchBudgetExceeded(budget));
        }
        if !self.partial_consistent(map) {
            return Ok(());
        }
        if k == self.size {
            out.push(Endomap { map: map.clone(), is_automorphism: true });
            return Ok(());
        }
        for v in 0..self.size {
            if used[v] {
                continue;
            }
            map[k] = v;
            used[v] = true;
            self.aut_search(k + 1, map, used, out, nodes, budget)?;
            used[v] = false;
            map[k] = usize::MAX;
        }
        Ok(())
    }

    fn partial_consistent(&self, map: &[usize]) -> bool {
        self.ops.iter().enumerate().all(|(oi, op)| {
            tuples(self.size, op.arity).all(|t| {
                if t.iter().any(|&a| map[a] == usize::MAX) {
                    return true;
                }
                let r = self.apply(oi, &t);
                if map[r] == usize::MAX {
                    return true;
                }
                let img: Vec<usize> = t.iter().map(|&a| map[a]).collect();
                map[r] == self.apply(oi, &img)
            })
        })
    }

    /// Abelianness for algebras with a Mal'cev term: the diagonal of `A²`
    /// must be a block of the congruence generated by pairs of diagonal elements.
    pub fn is_abelian(&self) -> Result<bool> {
        if self.find_malcev_term(DEFAULT_BUDGET)?.is_none() {
            return Err(Error::NoMalcevTerm);
        }
        let n = self.size;
        let sq = self.direct_power(2, DEFAULT_BUDGET)?;
        let pairs: Vec<(usize, usize)> = (1..n).map(|b| (0, b * n + b)).collect();
        let cong = sq.congruence_generated(&pairs);
        let diag_block = cong.block_of(0);
        Ok((0..n * n).all(|p| (cong.block_of(p) == diag_block) == (p / n == p % n)))
    }

    /// Componentwise power `A^k`; element `(a_0,..,a_{k-1})` is encoded in base `|A|`.
    pub fn direct_power(&self, k: usize, budget: usize) -> Result<FiniteAlgebra> {
        if k == 0 {
            return Err(Error::ZeroRank);
        }
        let n = self.size;
        let size = n.checked_pow(k as u32).filter(|&s| s <= budget).ok_or(Error::SizeBudgetExceeded(budget))?;
        let mut ops = Vec::new();
        for (oi, op) in self.ops.iter().enumerate() {
            let r = op.arity;
            let entries = size.checked_pow(r as u32).filter(|&s| s <= budget).ok_or(Error::SizeBudgetExceeded(budget))?;
            let mut table = Vec::with_capacity(entries);
            for t in tuples(size, r) {
                let decoded: Vec<Vec<usize>> = t.iter().map(|&e| decode(e, n, k)).collect();
                let mut out = 0;
                for c in 0..k {
                    let args: Vec<usize> = decoded.iter().map(|d| d[c]).collect();
                    out = out * n + self.apply(oi, &args);
                }
                table.push(out);
            }
            ops.push(Operation { name: op.name.clone(), arity: r, table });
        }
        FiniteAlgebra::new(size, ops)
    }
}

/// Base-`n` digits of `e`, most significant first, padded to `k` digits.
pub fn decode(mut e: usize, n: usize, k: usize) -> Vec<usize> {
    let mut d = vec![0; k];
    for slot in d.iter_mut().rev() {
        *slot = e % n;
        e /= n;
    }
    d
}

pub fn encode(digits: &[usize], n: usize) -> usize {
    digits.iter().fold(0, |acc, &d| acc * n + d)
}

/// The automorphism group of an algebra with its multiplication table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AutGroup {
    perms: Vec<Vec<usize>>,
    mul: Vec<Vec<u16>>,
    inv: Vec<u16>,
    index: HashMap<Vec<usize>, u16>,
}

impl AutGroup {
    pub fn of(alg: &FiniteAlgebra) -> Result<Self> {
        let perms: Vec<Vec<usize>> = alg.automorphisms(DEFAULT_BUDGET)?.into_iter().map(|e| e.map).collect();
        Ok(Self::from_perms(perms))
    }

    /// Builds the group from a list of permutations closed under composition,
    /// with the identity first.
    pub fn from_perms(perms: Vec<Vec<usize>>) -> Self {
        let index: HashMap<Vec<usize>, u16> = perms.iter().enumerate().map(|(i, p)| (p.clone(), i as u16)).collect();
        let mul: Vec<Vec<u16>> = perms
            .iter()
            .map(|a| {
                perms
                    .iter()
                    .map(|b| {
                        let c: Vec<usize> = b.iter().map(|&x| a[x]).collect();
                        index[&c]
                    })
                    .collect()
            })
            .collect();
        let inv = (0..perms.len()).map(|a| (0..perms.len()).find(|&b| mul[a][b] == 0).expect("group inverse") as u16).collect();
        AutGroup { perms, mul, inv, index }
    }

    pub fn len(&self) -> usize {
        self.perms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perms.is_empty()
    }

    pub const IDENTITY: u16 = 0;

    pub fn perm(&self, a: u16) -> &[usize] {
        &self.perms[a as usize]
    }

    pub fn perms(&self) -> &[Vec<usize>] {
        &self.perms
    }

    pub fn act(&self, a: u16, x: usize) -> usize {
        self.perms[a as usize][x]
    }

    /// Index of `a ∘ b`.
    pub fn mul(&self, a: u16, b: u16) -> u16 {
        self.mul[a as usize][b as usize]
    }

    pub fn inv(&self, a: u16) -> u16 {
        self.inv[a as usize]
    }

    pub fn index_of(&self, perm: &[usize]) -> Option<u16> {
        self.index.get(perm).copied()
    }

    /// Indices of automorphisms fixing `e`.
    pub fn stabilizer(&self, e: usize) -> Vec<u16> {
        (0..self.perms.len() as u16).filter(|&a| self.act(a, e) == e).collect()
    }

    pub fn orbit(&self, e: usize) -> Vec<usize> {
        let mut o: Vec<usize> = self.perms.iter().map(|p| p[e]).collect();
        o.sort_unstable();
        o.dedup();
        o
    }
}

/// Built-in algebras.
pub mod builtin {
    use super::*;

    const PLUS: usize = 0;

    fn group_malcev(plus: usize, neg: usize) -> Term {
        Term::op(plus, vec![Term::Var(0), Term::op(plus, vec![Term::op(neg, vec![Term::Var(1)]), Term::Var(2)])])
    }

    /// The two-element field as a ring with `+`, unary `-`, `*` and the constant `0`.
    pub fn gf2_ring() -> FiniteAlgebra {
        FiniteAlgebra::from_fns(
            2,
            &[("+", 2, &|a: &[usize]| (a[0] + a[1]) % 2), ("-", 1, &|a: &[usize]| a[0]), ("*", 2, &|a: &[usize]| a[0] * a[1]), ("0", 0, &|_: &[usize]| 0)],
        )
        .expect("valid tables")
        .with_malcev_hint(group_malcev(PLUS, 1))
    }

    /// The two-element field reduced to the ternary `x-y+z` and `*`.
    pub fn gf2_idempotent_reduct() -> FiniteAlgebra {
        FiniteAlgebra::from_fns(2, &[("m", 3, &|a: &[usize]| (a[0] + a[1] + a[2]) % 2), ("*", 2, &|a: &[usize]| a[0] * a[1])])
            .expect("valid tables")
            .with_malcev_hint(Term::op(0, vec![Term::Var(0), Term::Var(1), Term::Var(2)]))
    }

    /// GF(4) = {0, 1, w, w²} encoded as polynomials over GF(2): 2 = w, 3 = w + 1.
    pub fn gf4_mul(a: usize, b: usize) -> usize {
        let mut p = 0;
        for i in 0..2 {
            if b >> i & 1 == 1 {
                p ^= a << i;
            }
        }
        if p & 4 != 0 {
            p ^= 0b111;
        }
        p
    }

    pub fn gf4_idempotent_reduct() -> FiniteAlgebra {
        FiniteAlgebra::from_fns(4, &[("m", 3, &|a: &[usize]| a[0] ^ a[1] ^ a[2]), ("*", 2, &|a: &[usize]| gf4_mul(a[0], a[1]))])
            .expect("valid tables")
            .with_malcev_hint(Term::op(0, vec![Term::Var(0), Term::Var(1), Term::Var(2)]))
    }

    pub fn cyclic_group(k: usize) -> Result<FiniteAlgebra> {
        Ok(FiniteAlgebra::from_fns(k, &[("+", 2, &|a: &[usize]| (a[0] + a[1]) % k), ("-", 1, &|a: &[usize]| (k - a[0]) % k), ("0", 0, &|_: &[usize]| 0)])?
            .with_malcev_hint(group_malcev(PLUS, 1)))
    }

    /// `Z_k` with addition and the constant zero multiplication.
    pub fn zero_ring(k: usize) -> Result<FiniteAlgebra> {
        Ok(FiniteAlgebra::from_fns(
            k,
            &[("+", 2, &|a: &[usize]| (a[0] + a[1]) % k), ("-", 1, &|a: &[usize]| (k - a[0]) % k), ("*", 2, &|_: &[usize]| 0), ("0", 0, &|_: &[usize]| 0)],
        )?
        .with_malcev_hint(group_malcev(PLUS, 1)))
    }

    /// The ring `Z_k`.
    pub fn zk_ring(k: usize) -> Result<FiniteAlgebra> {
        Ok(FiniteAlgebra::from_fns(
            k,
            &[
                ("+", 2, &|a: &[usize]| (a[0] + a[1]) % k),
                ("-", 1, &|a: &[usize]| (k - a[0]) % k),
                ("*", 2, &|a: &[usize]| (a[0] * a[1]) % k),
                ("0", 0, &|_: &[usize]| 0),
            ],
        )?
        .with_malcev_hint(group_malcev(PLUS, 1)))
    }

    /// The two-element meet semilattice.
    pub fn meet_semilattice() -> FiniteAlgebra {
        FiniteAlgebra::from_fns(2, &[("meet", 2, &|a: &[usize]| a[0].min(a[1]))]).expect("valid tables")
    }

    /// Looks up a built-in by name; parametrized families take a trailing
    /// size, as in `cyclic-group 5` or `zero-ring-3`.
    pub fn by_name(name: &str) -> Result<FiniteAlgebra> {
        let name = name.trim();
        match name {
            "gf2-ring" => return Ok(gf2_ring()),
            "gf2-idempotent-reduct" => return Ok(gf2_idempotent_reduct()),
            "gf4-idempotent-reduct" => return Ok(gf4_idempotent_reduct()),
            "meet-semilattice" => return Ok(meet_semilattice()),
            _ => {}
        }
        let split = name.rfind([' ', '-', ':']).ok_or_else(|| Error::Parse(format!("unknown built-in `{name}`")))?;
        let (family, k) = (&name[..split], &name[split + 1..]);
        let k: usize = k.parse().map_err(|_| Error::Parse(format!("unknown built-in `{name}`")))?;
        match family {
            "cyclic-group" => cyclic_group(k),
            "zero-ring" => zero_ring(k),
            "zk-ring" | "ring" => zk_ring(k),
            _ => Err(Error::Parse(format!("unknown built-in `{name}`"))),
        }
    }
}
