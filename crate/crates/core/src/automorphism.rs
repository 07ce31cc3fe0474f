//! Automorphisms of a filtered Boolean power in semidirect normal form:
//! a point-fixing homeomorphism `ψ` and a labeling `k: X° → Aut A`,
//! acting by `f ↦ k·(f ∘ ψ⁻¹)`.

use std::sync::Arc;

use crate::algebra::AutGroup;
use crate::cantor::tailmap::same_ctx;
use crate::cantor::{Clopen, EPHomeo, TailClopen, TailMap};
use crate::error::{Error, Result};
use crate::power::{PowerContext, PowerElement};

/// A continuous map `X° → Aut A`, as indices into the automorphism group,
/// whose tail labels at each point stabilize the filter there.
pub type AutLabeling = TailMap<u16>;

#[derive(Clone, Debug)]
pub struct PowerAutomorphism {
    ctx: Arc<PowerContext>,
    homeo: EPHomeo,
    labeling: AutLabeling,
}

impl PartialEq for PowerAutomorphism {
    fn eq(&self, other: &Self) -> bool {
        self.ctx == other.ctx && self.labeling == other.labeling && self.homeo.same_map(&other.homeo).unwrap_or(false)
    }
}

fn check_labeling(ctx: &PowerContext, k: &AutLabeling) -> Result<()> {
    if !same_ctx(k.ctx(), ctx.points()) {
        return Err(Error::ContextMismatch);
    }
    let auts = ctx.auts();
    for (i, tail) in k.tails().iter().enumerate() {
        if tail.iter().any(|&a| a as usize >= auts.len() || auts.act(a, ctx.filters()[i]) != ctx.filters()[i]) {
            return Err(Error::TailLabelViolation);
        }
    }
    if k.values().iter().any(|&a| a as usize >= auts.len()) {
        return Err(Error::TailLabelViolation);
    }
    Ok(())
}

fn check_homeo(ctx: &PowerContext, h: &EPHomeo) -> Result<()> {
    if !same_ctx(h.src_ctx(), ctx.points()) || !same_ctx(h.dst_ctx(), ctx.points()) {
        return Err(Error::ContextMismatch);
    }
    if !h.extends_to_x() {
        return Err(Error::NotExtendable);
    }
    if !h.fixes_points() {
        return Err(Error::PointNotFixed);
    }
    Ok(())
}

impl PowerAutomorphism {
    pub fn new(ctx: &Arc<PowerContext>, homeo: EPHomeo, labeling: AutLabeling) -> Result<Self> {
        check_homeo(ctx, &homeo)?;
        check_labeling(ctx, &labeling)?;
        Ok(PowerAutomorphism { ctx: ctx.clone(), homeo, labeling })
    }

    pub fn identity(ctx: &Arc<PowerContext>) -> Self {
        PowerAutomorphism { ctx: ctx.clone(), homeo: EPHomeo::identity(ctx.points()), labeling: TailMap::constant(ctx.points(), AutGroup::IDENTITY) }
    }

    /// The automorphism `f ↦ f ∘ ψ⁻¹`.
    pub fn from_homeo(ctx: &Arc<PowerContext>, psi: EPHomeo) -> Result<Self> {
        check_homeo(ctx, &psi)?;
        Ok(PowerAutomorphism { ctx: ctx.clone(), homeo: psi, labeling: TailMap::constant(ctx.points(), AutGroup::IDENTITY) })
    }

    /// The kernel automorphism `f ↦ [x ↦ k(x)(f(x))]`.
    pub fn from_labeling(ctx: &Arc<PowerContext>, k: AutLabeling) -> Result<Self> {
        check_labeling(ctx, &k)?;
        Ok(PowerAutomorphism { ctx: ctx.clone(), homeo: EPHomeo::identity(ctx.points()), labeling: k })
    }

    pub fn ctx(&self) -> &Arc<PowerContext> {
        &self.ctx
    }

    /// The induced homeomorphism `h(φ)`.
    pub fn homeo(&self) -> &EPHomeo {
        &self.homeo
    }

    /// The labeling part `p` of the decomposition.
    pub fn labeling(&self) -> &AutLabeling {
        &self.labeling
    }

    /// Whether the homeomorphism part is the identity.
    pub fn in_kernel(&self) -> bool {
        self.homeo.is_identity()
    }

    pub fn is_identity(&self) -> bool {
        self.in_kernel() && self.labeling.values() == vec![AutGroup::IDENTITY]
    }

    /// The kernel factor `κ` with `self = κ ∘ g(ψ)`.
    pub fn kernel_part(&self) -> PowerAutomorphism {
        PowerAutomorphism { ctx: self.ctx.clone(), homeo: EPHomeo::identity(self.ctx.points()), labeling: self.labeling.clone() }
    }

    /// The section factor `g(ψ)` with `self = κ ∘ g(ψ)`.
    pub fn section_part(&self) -> PowerAutomorphism {
        PowerAutomorphism { ctx: self.ctx.clone(), homeo: self.homeo.clone(), labeling: TailMap::constant(self.ctx.points(), AutGroup::IDENTITY) }
    }

    pub fn apply(&self, f: &PowerElement) -> Result<PowerElement> {
        if f.ctx() != &self.ctx {
            return Err(Error::ContextMismatch);
        }
        let auts = self.ctx.auts();
        let moved = self.homeo.push_map(&f.to_tailmap())?;
        let out = self.labeling.zip_with(&moved, |a, x| auts.act(a, x))?;
        PowerElement::from_tree(&self.ctx, out.to_tree().ok_or(Error::NotExtendable)?)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &PowerAutomorphism) -> Result<PowerAutomorphism> {
        if self.ctx != other.ctx {
            return Err(Error::ContextMismatch);
        }
        let auts = self.ctx.auts();
        let moved = self.homeo.push_map(&other.labeling)?;
        let labeling = self.labeling.zip_with(&moved, |a, b| auts.mul(a, b))?;
        let homeo = self.homeo.compose(&other.homeo)?;
        Ok(PowerAutomorphism { ctx: self.ctx.clone(), homeo, labeling })
    }

    pub fn inverse(&self) -> Result<PowerAutomorphism> {
        let auts = self.ctx.auts();
        let homeo = self.homeo.inverse();
        let labeling = homeo.push_map(&self.labeling.map(|a| auts.inv(a)))?;
        Ok(PowerAutomorphism { ctx: self.ctx.clone(), homeo, labeling })
    }

    /// The kernel automorphism with labeling `k ∘ ψ⁻¹`, i.e. the conjugate
    /// `g(ψ) ∘ κ ∘ g(ψ)⁻¹` of a kernel automorphism.
    pub fn conjugate_by_homeo(&self, psi: &EPHomeo) -> Result<PowerAutomorphism> {
        let g = PowerAutomorphism::from_homeo(&self.ctx, psi.clone())?;
        g.compose(self)?.compose(&g.inverse()?)
    }
}

/// The characteristic automorphism `χ^{c,α}`: `α` on `c`, identity elsewhere.
pub fn characteristic(ctx: &Arc<PowerContext>, c: &TailClopen, alpha: u16) -> Result<PowerAutomorphism> {
    if !same_ctx(c.ctx(), ctx.points()) {
        return Err(Error::ContextMismatch);
    }
    if alpha as usize >= ctx.auts().len() {
        return Err(Error::NotAutomorphism);
    }
    if c.limit_points().iter().any(|&i| ctx.auts().act(alpha, ctx.filters()[i]) != ctx.filters()[i]) {
        return Err(Error::IllegalTriple);
    }
    let k = c.0.map(|inside| if inside { alpha } else { AutGroup::IDENTITY });
    PowerAutomorphism::from_labeling(ctx, k)
}

/// Characteristic factors `χ^{c_α,α}` over the non-identity labels of `k`,
/// with `c_α = k⁻¹(α)`. They have disjoint supports and multiply to `k`.
pub fn decompose_k(ctx: &Arc<PowerContext>, k: &AutLabeling) -> Result<Vec<(TailClopen, u16, PowerAutomorphism)>> {
    check_labeling(ctx, k)?;
    let mut out = Vec::new();
    for alpha in k.values() {
        if alpha == AutGroup::IDENTITY {
            continue;
        }
        let c = k.preimage(alpha);
        let chi = characteristic(ctx, &c, alpha)?;
        out.push((c, alpha, chi));
    }
    Ok(out)
}

/// Which construction produced a `K′` factorization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KprimeCase {
    /// The support is clopen in `X`.
    ClopenInX,
    /// The complement of the support is clopen in `X`.
    CoClopenInX,
    /// The support and its complement both accumulate at the point.
    TailUnion,
    /// The label is the identity.
    Trivial,
}

#[derive(Clone, Debug)]
pub struct KprimeFactor {
    pub case: KprimeCase,
    pub sigma: PowerAutomorphism,
    pub tau: PowerAutomorphism,
}

/// A labeling that is `exc` on the exceptional part of `region`, `outside`
/// off `region`, and cycles through `cycle` on the successive tail cells
/// of `region`.
fn round_robin(region: &TailClopen, cycle: &[u16], exc: u16, outside: u16) -> Result<AutLabeling> {
    let m = &region.0;
    let ctx = m.ctx();
    let s = cycle.len();
    let mut tails = Vec::new();
    for tail in m.tails() {
        let p = tail.len();
        let mut count = 0;
        let word = (0..p * s)
            .map(|k| {
                if tail[k % p] {
                    count += 1;
                    cycle[(count - 1) % s]
                } else {
                    outside
                }
            })
            .collect();
        tails.push(word);
    }
    let body = m.body().map(&|&b| if b { exc } else { outside });
    TailMap::from_parts(ctx, m.thresholds().to_vec(), tails, body)
}

/// Writes `χ^{c,α}` as `σ ∘ τ⁻¹` with `σ, τ` in `W`: kernel automorphisms
/// with labels in the stabilizer of `e_1` whose every label fiber has `x_1`
/// as a limit point.
pub fn generate_kprime_factor(chi: &PowerAutomorphism) -> Result<KprimeFactor> {
    let ctx = chi.ctx();
    if ctx.n() != 1 {
        return Err(Error::NotSinglePoint);
    }
    if !chi.in_kernel() {
        return Err(Error::ContextMismatch);
    }
    let auts = ctx.auts();
    let e = ctx.filters()[0];
    let stab = auts.stabilizer(e);
    let vals: Vec<u16> = chi.labeling.values().into_iter().filter(|&a| a != AutGroup::IDENTITY).collect();
    if vals.iter().any(|&a| auts.act(a, e) != e) {
        return Err(Error::NotStabilizing);
    }
    let alpha = match vals.as_slice() {
        [] => AutGroup::IDENTITY,
        [a] => *a,
        _ => return Err(Error::NotSinglePoint),
    };
    let id = AutGroup::IDENTITY;
    if alpha == id {
        let full = TailClopen::full(ctx.points());
        let sigma = PowerAutomorphism::from_labeling(ctx, round_robin(&full, &stab, id, id)?)?;
        return Ok(KprimeFactor { case: KprimeCase::Trivial, tau: sigma.clone(), sigma });
    }
    let c = chi.labeling.preimage(alpha);
    let (case, sigma, tau) = if c.limit_points().is_empty() {
        let rest = c.complement();
        let sigma = round_robin(&rest, &stab, id, alpha)?;
        let tau = round_robin(&rest, &stab, id, id)?;
        (KprimeCase::ClopenInX, sigma, tau)
    } else {
        let twisted: Vec<u16> = stab.iter().map(|&b| auts.mul(alpha, b)).collect();
        let sigma = round_robin(&c, &twisted, alpha, id)?;
        let tau = round_robin(&c, &stab, id, id)?;
        let case = if c.complement().limit_points().is_empty() { KprimeCase::CoClopenInX } else { KprimeCase::TailUnion };
        (case, sigma, tau)
    };
    Ok(KprimeFactor { case, sigma: PowerAutomorphism::from_labeling(ctx, sigma)?, tau: PowerAutomorphism::from_labeling(ctx, tau)? })
}

/// Whether a kernel automorphism lies in `W`: labels in the stabilizer of
/// `e_1` and `x_1` a limit point of every fiber over the stabilizer.
pub fn in_w(phi: &PowerAutomorphism) -> Result<bool> {
    let ctx = phi.ctx();
    if ctx.n() != 1 {
        return Err(Error::NotSinglePoint);
    }
    if !phi.in_kernel() {
        return Ok(false);
    }
    let stab = ctx.auts().stabilizer(ctx.filters()[0]);
    if phi.labeling.values().iter().any(|a| !stab.contains(a)) {
        return Ok(false);
    }
    for &b in &stab {
        if phi.labeling.preimage(b).limit_points().is_empty() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The outcome of testing an automorphism against the family `f_a`.
#[derive(Clone, Debug)]
pub enum StabilizerOutcome {
    /// `φ = κ ∘ γ` with `γ` a block-preserving homeomorphism section and
    /// `κ` a kernel automorphism stabilizing `e_i` on `b_i` and trivial on
    /// the blocks without points.
    Decomposition { kappa: PowerAutomorphism, gamma: PowerAutomorphism },
    /// Some `f_a` is moved.
    Violated { a: Vec<usize>, f_a: PowerElement },
}

/// The family `f_a` for `a ∈ ∏{e_i} × A^{m-n}`, constant `a_i` on `b_i`.
pub fn stabilizer_family(ctx: &Arc<PowerContext>, blocks: &[Clopen]) -> Result<Vec<(Vec<usize>, PowerElement)>> {
    let n = ctx.n();
    let m = blocks.len();
    check_blocks(ctx, blocks)?;
    let size = ctx.alg().size();
    let mut out = Vec::new();
    for extra in crate::algebra::tuples(size, m - n) {
        let a: Vec<usize> = ctx.filters().iter().copied().chain(extra).collect();
        let mut cells = Vec::new();
        for (b, &v) in blocks.iter().zip(&a) {
            cells.extend(b.prefixes().into_iter().map(|p| (p, v)));
        }
        out.push((a, PowerElement::new(ctx, cells)?));
    }
    Ok(out)
}

fn check_blocks(ctx: &PowerContext, blocks: &[Clopen]) -> Result<()> {
    let n = ctx.n();
    if blocks.len() < n {
        return Err(Error::BadContext("fewer blocks than points".into()));
    }
    let mut seen = Clopen::empty();
    for b in blocks {
        if b.is_empty() || !seen.is_disjoint(b) {
            return Err(Error::BadContext("blocks must be nonempty and disjoint".into()));
        }
        seen = seen.union(b);
    }
    if !seen.is_full() {
        return Err(Error::BadContext("blocks must cover the space".into()));
    }
    for (k, b) in blocks.iter().enumerate() {
        for i in 0..n {
            if b.contains_point(&ctx.points().point(i)) != (k == i) {
                return Err(Error::BadContext(format!("block {k} must contain exactly the point {k}")));
            }
        }
    }
    Ok(())
}

pub fn verify_stabilizer_containment(phi: &PowerAutomorphism, blocks: &[Clopen]) -> Result<StabilizerOutcome> {
    let ctx = phi.ctx();
    let auts = ctx.auts();
    let filters = ctx.filters();
    for i in 0..filters.len() {
        for j in 0..i {
            if auts.orbit(filters[i]).contains(&filters[j]) {
                return Err(Error::OrbitCollision);
            }
        }
    }
    for (a, f_a) in stabilizer_family(ctx, blocks)? {
        if phi.apply(&f_a)? != f_a {
            return Ok(StabilizerOutcome::Violated { a, f_a });
        }
    }
    let gamma = phi.section_part();
    let kappa = phi.kernel_part();
    for b in blocks {
        let image = phi.homeo().apply_clopen(b)?;
        if image != TailClopen::from_clopen(ctx.points(), b) {
            return Err(Error::NotBijective("fixed family but a block is moved".into()));
        }
    }
    for (k, b) in blocks.iter().enumerate() {
        let on_b = TailClopen::from_clopen(ctx.points(), b);
        for alpha in kappa.labeling().values() {
            if on_b.is_disjoint(&kappa.labeling().preimage(alpha))? {
                continue;
            }
            let ok = if k < ctx.n() { auts.act(alpha, filters[k]) == filters[k] } else { alpha == AutGroup::IDENTITY };
            if !ok {
                return Err(Error::NotBijective("fixed family but a label leaves the stabilizer".into()));
            }
        }
    }
    if kappa.compose(&gamma)? != *phi {
        return Err(Error::NotBijective("decomposition does not recompose".into()));
    }
    Ok(StabilizerOutcome::Decomposition { kappa, gamma })
}
