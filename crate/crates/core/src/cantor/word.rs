use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A finite binary word, naming the cylinder `w·2^ω`.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_bits(bits: Vec<u8>) -> Self {
        debug_assert!(bits.iter().all(|&b| b < 2));
        Word(bits)
    }

    pub fn repeat(bit: u8, n: usize) -> Self {
        Word(vec![bit; n])
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bit(&self, i: usize) -> u8 {
        self.0[i]
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn comparable(&self, other: &Word) -> bool {
        self.is_prefix_of(other) || other.is_prefix_of(self)
    }

    pub fn child(&self, bit: u8) -> Word {
        let mut v = self.0.clone();
        v.push(bit);
        Word(v)
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn push(&mut self, bit: u8) {
        self.0.push(bit);
    }

    /// The word with the first `k` letters removed.
    pub fn suffix_from(&self, k: usize) -> Word {
        Word(self.0[k..].to_vec())
    }

    pub fn prefix(&self, k: usize) -> Word {
        Word(self.0[..k].to_vec())
    }

    pub fn parent(&self) -> Option<Word> {
        if self.0.is_empty() {
            None
        } else {
            Some(self.prefix(self.len() - 1))
        }
    }

    pub fn last(&self) -> Option<u8> {
        self.0.last().copied()
    }

    /// All words of length `n` in lexicographic order.
    pub fn all_of_length(n: usize) -> Vec<Word> {
        (0..1usize << n).map(|m| Word((0..n).map(|i| (m >> (n - 1 - i) & 1) as u8).collect())).collect()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::Parse(format!("`{s}` is not a binary word"))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(Word)
    }
}

/// Shorthand for parsing literal words in code and tests.
pub fn w(s: &str) -> Word {
    s.parse().expect("binary literal")
}

/// An eventually periodic sequence `pre · per^ω`, kept with minimal
/// preperiod and primitive period.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    pre: Word,
    per: Word,
}

fn primitive_root(v: &[u8]) -> Vec<u8> {
    let n = v.len();
    for p in 1..=n {
        if n.is_multiple_of(p) && (p..n).all(|i| v[i] == v[i - p]) {
            return v[..p].to_vec();
        }
    }
    v.to_vec()
}

impl Point {
    pub fn new(pre: Word, per: Word) -> Result<Self> {
        if per.is_empty() {
            return Err(Error::Parse("period must be nonempty".into()));
        }
        let mut per = primitive_root(per.bits());
        let mut pre = pre.0;
        while let Some(&b) = pre.last() {
            if b != *per.last().expect("nonempty period") {
                break;
            }
            pre.pop();
            per.rotate_right(1);
        }
        Ok(Point { pre: Word(pre), per: Word(per) })
    }

    /// The constant sequence `bit^ω`.
    pub fn constant(bit: u8) -> Self {
        Point { pre: Word::empty(), per: Word(vec![bit]) }
    }

    pub fn pre(&self) -> &Word {
        &self.pre
    }

    pub fn per(&self) -> &Word {
        &self.per
    }

    pub fn bit(&self, i: usize) -> u8 {
        if i < self.pre.len() {
            self.pre.bit(i)
        } else {
            self.per.bit((i - self.pre.len()) % self.per.len())
        }
    }

    pub fn prefix(&self, n: usize) -> Word {
        Word((0..n).map(|i| self.bit(i)).collect())
    }

    pub fn starts_with(&self, w: &Word) -> bool {
        (0..w.len()).all(|i| self.bit(i) == w.bit(i))
    }

    /// The sequence with its first `k` letters removed.
    pub fn drop_prefix(&self, k: usize) -> Point {
        if k <= self.pre.len() {
            Point::new(self.pre.suffix_from(k), self.per.clone()).expect("nonempty period")
        } else {
            let mut per = self.per.0.clone();
            let r = (k - self.pre.len()) % per.len();
            per.rotate_left(r);
            Point::new(Word::empty(), Word(per)).expect("nonempty period")
        }
    }

    pub fn prepend(&self, w: &Word) -> Point {
        Point::new(w.concat(&self.pre), self.per.clone()).expect("nonempty period")
    }

    /// Whether the sequence is eventually constant, and with which letter.
    pub fn eventual_constant(&self) -> Option<u8> {
        if self.per.len() == 1 {
            Some(self.per.bit(0))
        } else {
            None
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})^ω", self.pre, self.per)
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
