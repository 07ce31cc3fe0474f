//! JSON payloads for algebras, clopens, homeomorphisms, elements,
//! automorphisms and embeddings.
//!
//! Each payload type converts to and from the library type; parsing needs
//! the surrounding context.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::{FiniteAlgebra, Operation};
use crate::automorphism::PowerAutomorphism;
use crate::cantor::{Clopen, EPHomeo, PointContext, PrefixMap, Prog, Strand, TailClopen, TailMap, Tree, Word};
use crate::cantor::{Label, Point};
use crate::error::{Error, Result};
use crate::fraisse::{Coord, PowerClass, PowerEmbedding};
use crate::power::{PowerCongruence, PowerContext, PowerElement};

pub fn to_string<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable payload")
}

pub fn from_str<'a, T: Deserialize<'a>>(s: &'a str) -> Result<T> {
    serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
}

fn word(s: &str) -> Result<Word> {
    s.parse()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgebraJson {
    pub carrier: usize,
    pub ops: Vec<Operation>,
}

impl AlgebraJson {
    pub fn from_algebra(a: &FiniteAlgebra) -> Self {
        AlgebraJson { carrier: a.size(), ops: a.ops().to_vec() }
    }

    pub fn to_algebra(&self) -> Result<FiniteAlgebra> {
        FiniteAlgebra::new(self.carrier, self.ops.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointJson {
    pub pre: String,
    pub per: String,
}

impl PointJson {
    pub fn from_point(p: &Point) -> Self {
        PointJson { pre: p.pre().to_string(), per: p.per().to_string() }
    }

    pub fn to_point(&self) -> Result<Point> {
        Point::new(word(&self.pre)?, word(&self.per)?)
    }
}

/// Distinguished points and their filter idempotents.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextJson {
    pub points: Vec<PointJson>,
    #[serde(default)]
    pub filters: Vec<usize>,
}

impl ContextJson {
    pub fn from_context(ctx: &PowerContext) -> Self {
        let pc = ctx.points();
        ContextJson { points: (0..pc.n()).map(|i| PointJson::from_point(&pc.point(i))).collect(), filters: ctx.filters().to_vec() }
    }

    pub fn to_points(&self) -> Result<Arc<PointContext>> {
        let pts = self.points.iter().map(PointJson::to_point).collect::<Result<Vec<_>>>()?;
        Ok(Arc::new(PointContext::from_points(&pts)?))
    }

    pub fn to_context(&self, alg: &Arc<FiniteAlgebra>) -> Result<Arc<PowerContext>> {
        PowerContext::new(alg.clone(), self.to_points()?, self.filters.clone())
    }
}

pub type ClopenJson = Vec<String>;

pub fn clopen_to_json(c: &Clopen) -> ClopenJson {
    c.prefixes().iter().map(Word::to_string).collect()
}

pub fn clopen_from_json(c: &ClopenJson) -> Result<Clopen> {
    let words = c.iter().map(|s| word(s)).collect::<Result<Vec<_>>>()?;
    Ok(Clopen::from_prefixes(&words))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TailWordJson {
    pub branch: usize,
    pub word: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TailClopenJson {
    pub threshold: Vec<usize>,
    pub exceptional: ClopenJson,
    pub tails: Vec<TailWordJson>,
}

impl TailClopenJson {
    pub fn from_clopen(c: &TailClopen) -> Self {
        TailClopenJson {
            threshold: c.0.thresholds().to_vec(),
            exceptional: clopen_to_json(&c.exceptional()),
            tails: c
                .0
                .tails()
                .iter()
                .enumerate()
                .map(|(i, t)| TailWordJson { branch: i, word: t.iter().map(|&b| if b { '1' } else { '0' }).collect() })
                .collect(),
        }
    }

    pub fn to_clopen(&self, ctx: &Arc<PointContext>) -> Result<TailClopen> {
        let mut tails = vec![Vec::new(); ctx.n()];
        for t in &self.tails {
            let slot = tails.get_mut(t.branch).ok_or_else(|| Error::Parse(format!("branch {} out of range", t.branch)))?;
            *slot = word(&t.word)?.bits().iter().map(|&b| b == 1).collect();
        }
        TailClopen::from_tails(ctx, self.threshold.clone(), tails, &clopen_from_json(&self.exceptional)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgJson {
    pub branch: usize,
    pub base: usize,
    pub step: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrandJson {
    pub src: ProgJson,
    pub dst: ProgJson,
    pub cellmap: Vec<[String; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomeoJson {
    pub pairs: Vec<[String; 2]>,
    pub tails: Vec<StrandJson>,
}

fn pairs_to_json(p: &[(Word, Word)]) -> Vec<[String; 2]> {
    p.iter().map(|(u, v)| [u.to_string(), v.to_string()]).collect()
}

fn pairs_from_json(p: &[[String; 2]]) -> Result<Vec<(Word, Word)>> {
    p.iter().map(|[u, v]| Ok((word(u)?, word(v)?))).collect()
}

fn prog(p: Prog) -> ProgJson {
    ProgJson { branch: p.branch, base: p.base, step: p.step }
}

impl HomeoJson {
    pub fn from_homeo(h: &EPHomeo) -> Self {
        HomeoJson {
            pairs: pairs_to_json(h.finite()),
            tails: h.strands().iter().map(|s| StrandJson { src: prog(s.src), dst: prog(s.dst), cellmap: pairs_to_json(s.cellmap.pairs()) }).collect(),
        }
    }

    /// Parses a self-map of `ctx`.
    pub fn to_homeo(&self, ctx: &Arc<PointContext>) -> Result<EPHomeo> {
        let strands = self
            .tails
            .iter()
            .map(|s| {
                if s.src.step == 0 || s.dst.step == 0 || s.src.base == 0 || s.dst.base == 0 {
                    return Err(Error::Parse("progressions need positive base and step".into()));
                }
                Ok(Strand {
                    src: Prog::new(s.src.branch, s.src.base, s.src.step),
                    dst: Prog::new(s.dst.branch, s.dst.base, s.dst.step),
                    cellmap: PrefixMap::new(pairs_from_json(&s.cellmap)?)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        EPHomeo::new(ctx, ctx, pairs_from_json(&self.pairs)?, strands)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellJson {
    pub prefix: String,
    pub label: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementJson {
    pub cells: Vec<CellJson>,
}

impl ElementJson {
    pub fn from_element(f: &PowerElement) -> Self {
        ElementJson { cells: f.cells().into_iter().map(|(w, a)| CellJson { prefix: w.to_string(), label: a }).collect() }
    }

    pub fn to_element(&self, ctx: &Arc<PowerContext>) -> Result<PowerElement> {
        let cells = self.cells.iter().map(|c| Ok((word(&c.prefix)?, c.label))).collect::<Result<Vec<_>>>()?;
        PowerElement::new(ctx, cells)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CongruenceJson {
    pub support: ClopenJson,
}

impl CongruenceJson {
    pub fn from_congruence(c: &PowerCongruence) -> Self {
        CongruenceJson { support: clopen_to_json(c.support()) }
    }

    pub fn to_congruence(&self, ctx: &Arc<PowerContext>) -> Result<PowerCongruence> {
        PowerCongruence::new(ctx, clopen_from_json(&self.support)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionJson {
    pub region: String,
    pub aut: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutTailJson {
    pub branch: usize,
    pub auts: Vec<Vec<usize>>,
}

/// A labeling `X° → Aut A` with automorphisms written as permutations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelingJson {
    pub threshold: Vec<usize>,
    pub cells: Vec<RegionJson>,
    pub tails: Vec<AutTailJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutomorphismJson {
    pub homeo: HomeoJson,
    pub labeling: LabelingJson,
}

fn tailmap_parts<T: Label>(m: &TailMap<T>) -> (Vec<(Word, T)>, Vec<Vec<T>>) {
    (m.body().leaves(), m.tails().to_vec())
}

impl AutomorphismJson {
    pub fn from_automorphism(phi: &PowerAutomorphism) -> Self {
        let auts = phi.ctx().auts();
        let k = phi.labeling();
        let (body, tails) = tailmap_parts(k);
        AutomorphismJson {
            homeo: HomeoJson::from_homeo(phi.homeo()),
            labeling: LabelingJson {
                threshold: k.thresholds().to_vec(),
                cells: body.into_iter().map(|(w, a)| RegionJson { region: w.to_string(), aut: auts.perm(a).to_vec() }).collect(),
                tails: tails
                    .into_iter()
                    .enumerate()
                    .map(|(i, t)| AutTailJson { branch: i, auts: t.into_iter().map(|a| auts.perm(a).to_vec()).collect() })
                    .collect(),
            },
        }
    }

    pub fn to_automorphism(&self, ctx: &Arc<PowerContext>) -> Result<PowerAutomorphism> {
        let auts = ctx.auts();
        let idx = |p: &[usize]| auts.index_of(p).ok_or(Error::NotAutomorphism);
        let parts = self.labeling.cells.iter().map(|c| Ok((word(&c.region)?, Tree::Leaf(idx(&c.aut)?)))).collect::<Result<Vec<_>>>()?;
        let body = Tree::from_parts(parts).ok_or_else(|| Error::Parse("labeling regions must form a complete prefix code".into()))?;
        let mut tails = vec![Vec::new(); ctx.n()];
        for t in &self.labeling.tails {
            let slot = tails.get_mut(t.branch).ok_or_else(|| Error::Parse(format!("branch {} out of range", t.branch)))?;
            *slot = t.auts.iter().map(|p| idx(p)).collect::<Result<Vec<_>>>()?;
        }
        let k = TailMap::from_parts(ctx.points(), self.labeling.threshold.clone(), tails, body)?;
        PowerAutomorphism::new(ctx, self.homeo.to_homeo(ctx.points())?, k)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoordJson {
    Aut { aut: Vec<usize>, src: usize },
    Idem { idem: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingJson {
    pub u: usize,
    pub v: usize,
    pub coords: Vec<CoordJson>,
}

impl EmbeddingJson {
    pub fn from_embedding(class: &PowerClass, phi: &PowerEmbedding) -> Self {
        let coords = phi
            .coords()
            .iter()
            .map(|c| match *c {
                Coord::Aut { aut, src } => CoordJson::Aut { aut: class.auts().perm(aut).to_vec(), src },
                Coord::Idem(e) => CoordJson::Idem { idem: e },
            })
            .collect();
        EmbeddingJson { u: phi.u(), v: phi.v(), coords }
    }

    pub fn to_embedding(&self, class: &PowerClass) -> Result<PowerEmbedding> {
        if self.coords.len() != self.v {
            return Err(Error::Parse(format!("expected {} coordinates, got {}", self.v, self.coords.len())));
        }
        let coords = self
            .coords
            .iter()
            .map(|c| match c {
                CoordJson::Aut { aut, src } => Ok(Coord::Aut { aut: class.auts().index_of(aut).ok_or(Error::NotAutomorphism)?, src: *src }),
                CoordJson::Idem { idem } => Ok(Coord::Idem(*idem)),
            })
            .collect::<Result<Vec<_>>>()?;
        class.embedding(self.u, coords)
    }
}
