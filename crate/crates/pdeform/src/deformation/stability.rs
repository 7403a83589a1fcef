//! Order-by-order constructions along the extension chain of a parameter
//! ring: extending a target deformation to a deformation of the map
//! (stability), extending a source deformation (costability), and factoring
//! a deformed composite through a deformed first map.
//!
//! Each small extension is handled in two stages. The atlas part of the
//! residual is an exact cocycle by the degree-2 injectivity hypothesis and is
//! removed first; the remaining map part is then a cocycle whose class is hit
//! by atlas cocycles by the degree-1 surjectivity hypothesis.

use std::sync::Arc;

use serde::Serialize;

use crate::cech::cohomology::{self, induced_matrix, solve, Audited, Op};
use crate::cech::{Block, Cochain, ColumnComplex, Sheaf, Space};
use crate::complexes::{CompositeOps, MapOps};
use crate::error::{Error, Result};
use crate::exact_algebra::{kernel_of_images, ParamRing, SparseVec};
use crate::geometry::{PoissonAtlas, PoissonMapData, ValidationReport};
use crate::multivector::Multivector;

use super::complex::{pull_along_assignment, DefComplex, Parts};
use super::lift::{max_exponent, same_ring};
use super::residual::{apply_correction, residuals};
use super::{coefficient, validate_deformation, DeformationDatum, Mode};

/// Rank of a map induced on cohomology, against what a hypothesis needs.
#[derive(Clone, Debug, Serialize)]
pub struct HypothesisRank {
    pub what: String,
    pub source_dim: usize,
    pub target_dim: usize,
    pub rank: usize,
    pub required: usize,
    pub audit_pass: bool,
}

impl HypothesisRank {
    pub fn pass(&self) -> bool {
        self.rank == self.required
    }

    pub fn render(&self) -> String {
        format!(
            "HYPOTHESIS {} dims {}->{} rank={} required={} audit={} {}",
            self.what,
            self.source_dim,
            self.target_dim,
            self.rank,
            self.required,
            if self.audit_pass { "PASS" } else { "FAIL" },
            if self.pass() { "PASS" } else { "FAIL" }
        )
    }

    fn error(&self) -> Error {
        Error::HypothesisFailed { what: self.what.clone(), rank: self.rank, required: self.required }
    }
}

fn column_cohomology(c: &ColumnComplex, k: i64, w: i32) -> Result<Audited> {
    Audited::run(w, |w| cohomology::plain(w, c.blocks(k - 1), &|x| c.d(k - 1, x), c.blocks(k), &|x| c.d(k, x), c.blocks(k + 1)))
}

fn induced_rank(what: &str, src: &Audited, dst: &Audited, op: Op, surjective: bool) -> Result<HypothesisRank> {
    let m = induced_matrix(&src.main, &dst.main, op)?;
    Ok(HypothesisRank {
        what: what.to_string(),
        source_dim: src.dim(),
        target_dim: dst.dim(),
        rank: m.rank(),
        required: if surjective { dst.dim() } else { src.dim() },
        audit_pass: src.audit.pass && dst.audit.pass,
    })
}

/// Which construction a rank report is for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Construction {
    Stability,
    Costability,
}

/// Ranks of the maps whose surjectivity in degree 1 and injectivity in
/// degree 2 the construction relies on: F for stability, f^* for costability.
pub fn hypothesis_ranks(base: &Arc<PoissonMapData>, which: Construction, w: i32) -> Result<Vec<HypothesisRank>> {
    let cx = DefComplex::new(base.clone(), Parts { source: false, target: false })?;
    let mut out = Vec::new();
    for (k, surjective) in [(1, true), (2, false)] {
        let dst = column_cohomology(&cx.mc.b, k, w)?;
        let kind = if surjective { "surjective" } else { "injective" };
        let r = match which {
            Construction::Stability => {
                let src = column_cohomology(&cx.mc.a, k, w)?;
                induced_rank(&format!("F on H^{k} {kind}"), &src, &dst, &|c| cx.mc.f(k, c), surjective)?
            }
            Construction::Costability => {
                let src = column_cohomology(&cx.ty, k, w)?;
                induced_rank(&format!("f* on H^{k} {kind}"), &src, &dst, &|c| cx.fstar(k, c), surjective)?
            }
        };
        out.push(r);
    }
    Ok(out)
}

/// Result of an order-by-order construction.
#[derive(Clone, Debug)]
pub struct ChainLift {
    pub datum: DeformationDatum,
    pub report: ValidationReport,
    pub hypotheses: Vec<HypothesisRank>,
    /// The datum after each small extension, from the first quotient on.
    pub steps: Vec<DeformationDatum>,
    pub window: i32,
}

/// Try window `w`, then the preimage window of the unknowns.
fn solve_in_windows(w: i32, unknowns: Vec<Block>, attempt: impl Fn(i32) -> Result<Option<Cochain>>) -> Result<Option<Cochain>> {
    for w in [w, Space::new(unknowns, 0).preimage_window(w)?] {
        if let Some(c) = attempt(w)? {
            return Ok(Some(c));
        }
    }
    Ok(None)
}

fn stuck(hyp: &[HypothesisRank], what: &str) -> Error {
    match hyp.iter().find(|h| !h.pass()) {
        Some(h) => h.error(),
        None => Error::WindowInsufficient(format!("{what}: no solution in the window or its outer window")),
    }
}

/// The atlas complex solved for: A when the source varies, T otherwise.
fn atlas(cx: &DefComplex) -> &ColumnComplex {
    if cx.parts.source {
        &cx.mc.a
    } else {
        &cx.ty
    }
}

fn atlas_part(cx: &DefComplex, k: i64, c: &Cochain) -> Cochain {
    let (_, a, t) = cx.split(k, c);
    if cx.parts.source {
        a
    } else {
        t
    }
}

fn with_atlas(cx: &DefComplex, k: i64, x: &Cochain) -> Cochain {
    let b = Cochain::zero(cx.mc.b.blocks(k).len());
    let a = Cochain::zero(cx.mc.a.blocks(k + 1).len());
    let t = Cochain::zero(cx.ty.blocks(k + 1).len());
    if cx.parts.source {
        cx.join(&b, x, &t)
    } else {
        cx.join(&b, &a, x)
    }
}

/// One small extension of the two-stage construction. `lift` must carry the
/// given deformed atlas on the fixed side.
fn two_stage_step(cx: &DefComplex, lift: DeformationDatum, kernel: &[u32], window: i32, hyp: &[HypothesisRank]) -> Result<DeformationDatum> {
    let at = atlas(cx);
    let r = residuals(&lift, kernel, cx)?;
    if !cx.rel(1, &r)?.is_zero() {
        return Err(Error::InvariantViolation("residual violates the cocycle relations".into()));
    }
    let w = window.max(max_exponent(&r));
    let ra = atlas_part(cx, 1, &r);
    let lift = if ra.is_zero() {
        lift
    } else {
        let dst = Space::new(at.blocks(2), 0);
        let rhs = dst.to_vec(&ra.neg())?;
        let z0 = solve_in_windows(w, at.blocks(1), |w| {
            let src = Space::new(at.blocks(1), w);
            let keys = src.window_keys(w);
            let cols = src.images(&keys, &dst, &|c| at.d(1, c))?;
            Ok(solve(&cols, &rhs).map(|x| src.combination(&keys, &x)))
        })?
        .ok_or_else(|| stuck(hyp, "atlas stage"))?;
        apply_correction(&lift, kernel, cx, &with_atlas(cx, 0, &z0))?
    };
    let r = residuals(&lift, kernel, cx)?;
    if r.is_zero() {
        return Ok(lift);
    }
    let dst = Space::new(cx.blocks(1), 0);
    let rhs = dst.to_vec(&r.neg())?;
    let c = solve_in_windows(w, cx.mc.b.blocks(0), |w| {
        let bspace = Space::new(cx.mc.b.blocks(0), w);
        let mut unknowns: Vec<Cochain> = bspace
            .window_keys(w)
            .iter()
            .map(|k| {
                let q = bspace.unit(k);
                cx.join(&q, &Cochain::zero(cx.mc.a.blocks(1).len()), &Cochain::zero(cx.ty.blocks(1).len()))
            })
            .collect();
        let aspace = Space::new(at.blocks(1), w);
        let akeys = aspace.window_keys(w);
        let next = Space::new(at.blocks(2), 0);
        for z in kernel_of_images(&aspace.images(&akeys, &next, &|c| at.d(1, c))?) {
            unknowns.push(with_atlas(cx, 0, &aspace.combination(&akeys, &z)));
        }
        let cols = unknowns.iter().map(|u| dst.to_vec(&cx.cob(1, u)?)).collect::<Result<Vec<SparseVec>>>()?;
        Ok(solve(&cols, &rhs).map(|x| {
            let mut c = Cochain::zero(cx.blocks(0).len());
            for (j, coef) in &x.0 {
                c = c.add(&unknowns[*j].scale(coef));
            }
            c
        }))
    })?
    .ok_or_else(|| stuck(hyp, "map stage"))?;
    apply_correction(&lift, kernel, cx, &c)
}

fn check_hypotheses(hyp: &[HypothesisRank], enforce: bool) -> Result<()> {
    if enforce {
        if let Some(h) = hyp.iter().find(|h| !h.pass()) {
            return Err(h.error());
        }
    }
    Ok(())
}

fn owned(a: &Arc<PoissonAtlas>) -> PoissonAtlas {
    (**a).clone()
}

fn chain_lift(
    f: &Arc<PoissonMapData>,
    given: &DeformationDatum,
    which: Construction,
    window: i32,
    hypotheses_check: bool,
) -> Result<ChainLift> {
    if given.base.source.name != f.source.name || given.base.target.name != f.target.name {
        return Err(Error::InvalidDatum(format!("deformation {} is not a deformation of the map's atlases", given.name)));
    }
    let hyp = hypothesis_ranks(f, which, window)?;
    check_hypotheses(&hyp, hypotheses_check)?;
    let parts = match which {
        Construction::Stability => Parts { source: true, target: false },
        Construction::Costability => Parts { source: false, target: true },
    };
    let cx = DefComplex::new(f.clone(), parts)?;
    let chain = given.ring.extension_chain()?;
    let fixed_side = |d: &DeformationDatum, ring: &Arc<ParamRing>| -> Result<DeformationDatum> {
        let g = given.over(ring)?;
        match which {
            Construction::Stability => d.with_atlases(owned(d.source()), owned(g.target())),
            Construction::Costability => d.with_atlases(owned(g.source()), owned(d.target())),
        }
    };
    let name = format!("{}.{}", f.name, given.name);
    let start = chain.first().map(|e| e.quotient.clone()).unwrap_or_else(|| given.ring.clone());
    let mut cur = fixed_side(&DeformationDatum::trivial(&name, f.clone(), start.clone(), Mode::Free)?, &start)?;
    let mut steps = Vec::new();
    for e in &chain {
        let lift = fixed_side(&cur.canonical_lift(&e.total)?, &e.total)?;
        cur = two_stage_step(&cx, lift, &e.kernel, window, &hyp)?;
        steps.push(cur.clone());
    }
    let report = validate_deformation(&cur);
    Ok(ChainLift { datum: cur, report, hypotheses: hyp, steps, window })
}

/// Extend a deformation of the target of `f` (read from `target_def`) to a
/// deformation of the source and a Poisson map over the same ring.
pub fn stability_lift(f: &Arc<PoissonMapData>, target_def: &DeformationDatum, window: i32, hypotheses_check: bool) -> Result<ChainLift> {
    chain_lift(f, target_def, Construction::Stability, window, hypotheses_check)
}

/// Extend a deformation of the source of `f` (read from `source_def`) to a
/// deformation of the target and a Poisson map over the same ring.
pub fn costability_lift(f: &Arc<PoissonMapData>, source_def: &DeformationDatum, window: i32, hypotheses_check: bool) -> Result<ChainLift> {
    chain_lift(f, source_def, Construction::Costability, window, hypotheses_check)
}

/// Result of factoring a deformed composite through a deformed first map.
#[derive(Clone, Debug)]
pub struct FactorResult {
    /// The deformation of the second map.
    pub datum: DeformationDatum,
    /// Validation of the second map plus the composite identity.
    pub report: ValidationReport,
    pub hypotheses: Vec<HypothesisRank>,
    pub steps: Vec<DeformationDatum>,
    pub window: i32,
}

fn same_atlas(a: &PoissonAtlas, b: &PoissonAtlas) -> bool {
    a.len() == b.len() && a.transition_list() == b.transition_list() && a.bivectors == b.bivectors
}

/// `f^*`: cochains of `g^*T_Z` on the cover of Y to cochains of `h^*T_Z`
/// on the cover of X.
pub(crate) fn composite_fstar(ops: &CompositeOps, bg: &ColumnComplex, bh: &ColumnComplex, k: i64, c: &Cochain) -> Result<Cochain> {
    let assignment = &ops.f.map.assignment;
    pull_along_assignment(&bg.blocks(k), &bh.blocks(k), assignment, c, &|i, b, m| {
        let moved = if b == assignment[i] { m.clone() } else { ops.g.transport(m, b, assignment[i])? };
        ops.fstar(i, &moved)
    })
}

/// `Upsilon - Psi o Phi` at the kernel monomial, as a 0-cochain of `h^*T_Z`.
fn composite_residual(upsilon: &PoissonMapData, phi: &PoissonMapData, psi: &PoissonMapData, h: &MapOps, kernel: &[u32]) -> Result<Cochain> {
    let mut out = Cochain::zero(1);
    for i in 0..phi.source.len() {
        let a = phi.assignment[i];
        let mc = &h.charts[i];
        let mut m = Multivector::zero(&mc.chart, &mc.ctx, mc.m, 1);
        for (k, (u, p)) in upsilon.components[i].iter().zip(&psi.components[a]).enumerate() {
            let diff = u.sub(&p.substitute(phi.source.ctx(i), &phi.components[i])?);
            for (_, params, _) in diff.terms() {
                if params != kernel {
                    return Err(Error::InvalidDatum(format!("composite differs below the kernel monomial on chart {i}")));
                }
            }
            m.set(vec![k as u16], coefficient(&diff, kernel, &mc.ctx));
        }
        if !m.is_zero() {
            out.accumulate(0, vec![i], vec![m]);
        }
    }
    Ok(out)
}

/// Check that `Psi o Phi = Upsilon` holds exactly.
fn composite_check(upsilon: &PoissonMapData, phi: &PoissonMapData, psi: &PoissonMapData) -> ValidationReport {
    let mut rep = ValidationReport::default();
    for i in 0..phi.source.len() {
        let a = phi.assignment[i];
        let residual = (|| -> Result<Option<String>> {
            for (u, p) in upsilon.components[i].iter().zip(&psi.components[a]) {
                let d = u.sub(&p.substitute(phi.source.ctx(i), &phi.components[i])?);
                if !d.is_zero() {
                    return Ok(Some(d.to_string()));
                }
            }
            Ok(None)
        })()
        .unwrap_or_else(|e| Some(e.to_string()));
        rep.push("factor.composite", vec![i], residual);
    }
    rep
}

/// Ranks of `f^*` on `H^0` (surjective) and `H^1` (injective) from
/// `g^*T_Z^.` to `h^*T_Z^.`.
pub fn factor_ranks(f: &Arc<PoissonMapData>, g: &Arc<PoissonMapData>, w: i32) -> Result<Vec<HypothesisRank>> {
    let ops = CompositeOps::new(f.clone(), g.clone())?;
    let bg = ColumnComplex::pullback(Arc::new(ops.g.clone()));
    let bh = ColumnComplex::pullback(Arc::new(ops.h.clone()));
    let mut out = Vec::new();
    for (k, surjective) in [(0, true), (1, false)] {
        let src = column_cohomology(&bg, k, w)?;
        let dst = column_cohomology(&bh, k, w)?;
        let kind = if surjective { "surjective" } else { "injective" };
        out.push(induced_rank(&format!("f* on H^{k}(g*T_Z) {kind}"), &src, &dst, &|c| composite_fstar(&ops, &bg, &bh, k, c), surjective)?);
    }
    Ok(out)
}

/// Given a deformation `upsilon` of `h = g o f` and a deformation `phi` of
/// f over the same ring with the same deformed source, construct a
/// deformation Psi of g from the target of `phi` to the target of `upsilon`
/// with `Psi o phi = upsilon`.
pub fn factor_through_family(
    upsilon: &DeformationDatum,
    phi: &DeformationDatum,
    g: &Arc<PoissonMapData>,
    window: i32,
    hypotheses_check: bool,
) -> Result<FactorResult> {
    if !same_ring(&upsilon.ring, &phi.ring) {
        return Err(Error::ExtensionMismatch(format!("{} vs {}", upsilon.ring.describe(), phi.ring.describe())));
    }
    if !same_atlas(upsilon.source(), phi.source()) {
        return Err(Error::InvalidDatum("the composite and the first map have different deformed sources".into()));
    }
    let f = phi.base.clone();
    let ops = CompositeOps::new(f.clone(), g.clone())?;
    if ops.h.map.components != upsilon.base.components || upsilon.base.assignment != ops.h.map.assignment {
        return Err(Error::InvalidDatum(format!("{} is not a deformation of the composite", upsilon.name)));
    }
    let hyp = factor_ranks(&f, g, window)?;
    check_hypotheses(&hyp, hypotheses_check)?;
    let cx = DefComplex::new(g.clone(), Parts { source: false, target: false })?;
    let bh_ops = Arc::new(ops.h.clone());
    let bh = ColumnComplex::pullback(bh_ops.clone());
    let gamma_block = Block::new(Sheaf::Pullback(bh_ops.clone()), 1, 0);
    let mut blocks = cx.blocks(1);
    blocks.push(gamma_block);
    let chain = upsilon.ring.extension_chain()?;
    let start = chain.first().map(|e| e.quotient.clone()).unwrap_or_else(|| upsilon.ring.clone());
    let attach = |d: &DeformationDatum, ring: &Arc<ParamRing>| -> Result<DeformationDatum> {
        d.with_atlases(owned(phi.over(ring)?.target()), owned(upsilon.over(ring)?.target()))
    };
    let name = format!("{}.{}", g.name, upsilon.name);
    let mut cur = attach(&DeformationDatum::trivial(&name, g.clone(), start.clone(), Mode::Free)?, &start)?;
    let mut steps = Vec::new();
    for e in &chain {
        let lift = attach(&cur.canonical_lift(&e.total)?, &e.total)?;
        let (ups, ph) = (upsilon.over(&e.total)?, phi.over(&e.total)?);
        let r = residuals(&lift, &e.kernel, &cx)?.concat(&composite_residual(&ups.map, &ph.map, &lift.map, &bh_ops, &e.kernel)?);
        if r.is_zero() {
            cur = lift;
            steps.push(cur.clone());
            continue;
        }
        let dst = Space::new(blocks.clone(), 0);
        let rhs = dst.to_vec(&r.neg())?;
        let w = window.max(max_exponent(&r));
        let c = solve_in_windows(w, cx.blocks(0), |w| {
            let src = Space::new(cx.blocks(0), w);
            let keys = src.window_keys(w);
            let cols = src.images(&keys, &dst, &|u| Ok(cx.cob(1, u)?.concat(&composite_fstar(&ops, &cx.mc.b, &bh, 0, u)?.neg())))?;
            Ok(solve(&cols, &rhs).map(|x| src.combination(&keys, &x)))
        })?
        .ok_or_else(|| stuck(&hyp, "factorization"))?;
        cur = apply_correction(&lift, &e.kernel, &cx, &c)?;
        steps.push(cur.clone());
    }
    let mut report = validate_deformation(&cur);
    report.extend(composite_check(&upsilon.map, &phi.map, &cur.map));
    Ok(FactorResult { datum: cur, report, hypotheses: hyp, steps, window })
}
