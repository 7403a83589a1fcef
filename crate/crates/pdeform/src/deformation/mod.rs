//! Deformations of a Poisson map over truncated parameter rings: validation
//! of deformation data, first-order classes, obstruction classes for small
//! extensions, one-step lifting, and the order-by-order constructions of
//! stability, costability and factorization through a family.
//!
//! A datum stores the deformed source atlas, target atlas and map over the
//! parameter ring; its corrections are the differences from the base data.
//! At a small extension with kernel monomial `t^e` the defining identities of
//! an arbitrary lift fail only at `t^e`, and their `t^e` coefficients form
//! one cochain of the complex `B^k (+) A^{k+1} (+) T^{k+1}` (with
//! `A = T_X^.`, `B = f^*T_Y^.`, `T = T_Y^.`) in level 1, see [`DefComplex`].

mod complex;
mod lift;
mod residual;
pub(crate) mod stability;

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact_algebra::{ParamRing, Poly, VarContext};
use crate::geometry::{validate_atlas, validate_map, PoissonAtlas, PoissonMapData, ValidationReport};
use crate::multivector::{ChartMap, Multivector};

pub use complex::{DefComplex, Parts};
pub use lift::{
    first_order_class, first_order_datum, lift_step, obstruction_class, FirstOrderClass, LiftCertificate, LiftOutcome, ObstructionClass,
    Obstructor,
};
pub use residual::{apply_correction, correction_of, residuals};
pub use stability::{
    costability_lift, factor_ranks, factor_through_family, hypothesis_ranks, stability_lift, ChainLift, Construction, FactorResult, HypothesisRank,
};

/// Which parts of the data may depend on the parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Source and target fixed, only the map deforms.
    FixedBoth,
    /// Target fixed; source and map deform.
    FixedTarget,
    /// Source fixed; target and map deform.
    FixedSource,
    /// Everything deforms.
    Free,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::FixedBoth, Mode::FixedTarget, Mode::FixedSource, Mode::Free];

    pub fn name(self) -> &'static str {
        match self {
            Mode::FixedBoth => "fixed_both",
            Mode::FixedTarget => "fixed_target",
            Mode::FixedSource => "fixed_source",
            Mode::Free => "free",
        }
    }

    pub fn parse(s: &str) -> Option<Mode> {
        Mode::ALL.into_iter().find(|m| m.name() == s)
    }

    pub fn source_varies(self) -> bool {
        matches!(self, Mode::FixedTarget | Mode::Free)
    }

    pub fn target_varies(self) -> bool {
        matches!(self, Mode::FixedSource | Mode::Free)
    }

    pub fn parts(self) -> Parts {
        Parts { source: self.source_varies(), target: self.target_varies() }
    }
}

/// A deformation of a Poisson map over a parameter ring.
#[derive(Clone, Debug)]
pub struct DeformationDatum {
    pub name: String,
    pub mode: Mode,
    pub base: Arc<PoissonMapData>,
    pub ring: Arc<ParamRing>,
    /// The deformed map; its source and target are the deformed atlases.
    pub map: Arc<PoissonMapData>,
}

fn is_constant_poly(p: &Poly) -> bool {
    p.max_param_degree().unwrap_or(0) == 0
}

fn atlas_is_constant(a: &PoissonAtlas) -> bool {
    a.transition_list().iter().all(|(_, _, c)| c.iter().all(is_constant_poly))
        && a.bivectors.iter().all(|b| b.coeffs().values().all(is_constant_poly))
}

fn same_polys(a: &[Poly], b: &[Poly]) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(x, y)| coefficient(x, &vec![0; x.ctx().r()], y.ctx()) == *y)
}

fn reduces_to(deformed: &PoissonAtlas, base: &PoissonAtlas) -> bool {
    if deformed.len() != base.len() {
        return false;
    }
    let d = deformed.transition_list();
    let b = base.transition_list();
    let transitions_ok = d.len() == b.len() && d.iter().zip(&b).all(|((i, j, c), (k, l, e))| i == k && j == l && same_polys(c, e));
    let bivectors_ok = deformed.bivectors.iter().zip(&base.bivectors).all(|(x, y)| {
        let keys: std::collections::BTreeSet<_> = x.coeffs().keys().chain(y.coeffs().keys()).cloned().collect();
        keys.iter().all(|idx| same_polys(&[x.coeff(idx)], &[y.coeff(idx)]))
    });
    transitions_ok && bivectors_ok
}

/// Recompute the transition `j <- i` for `i < j` as the formal inverse of
/// `i <- j`, so that every lift satisfies `phi_ij o phi_ji = id`.
pub fn normalize_inverses(a: &PoissonAtlas, base: &PoissonAtlas) -> Result<PoissonAtlas> {
    let n = a.len();
    let mut transitions = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let fwd = a.transition(i, j);
            let back: Vec<Poly> = base.transition(j, i).components.iter().map(|c| c.recontext(a.ctx(i))).collect();
            let m = ChartMap::new(&a.charts[j].id, &a.charts[i].id, a.ctx(j), a.ctx(i), fwd.components.clone(), None)?
                .with_formal_inverse(back)?;
            transitions.push((i, j, fwd.components.clone()));
            transitions.push((j, i, m.inverse.expect("formal inverse computed")));
        }
    }
    a.with_data(transitions, a.bivectors.clone())
}

impl DeformationDatum {
    /// Check the structural invariants: ring consistency, reduction to the
    /// base at t = 0, and the mode's constant parts.
    pub fn new(name: &str, mode: Mode, base: Arc<PoissonMapData>, map: Arc<PoissonMapData>) -> Result<DeformationDatum> {
        let ring = map.source.ring().clone();
        if **map.target.ring() != *ring {
            return Err(Error::InvalidDatum("source and target live over different rings".into()));
        }
        if base.source.ring().r() != 0 || base.target.ring().r() != 0 {
            return Err(Error::InvalidDatum("base map must be parameter free".into()));
        }
        if map.assignment != base.assignment {
            return Err(Error::InvalidDatum("chart assignment differs from the base map".into()));
        }
        if !reduces_to(&map.source, &base.source) || !reduces_to(&map.target, &base.target) {
            return Err(Error::InvalidDatum("atlases do not reduce to the base atlases at t = 0".into()));
        }
        for (i, (c, b)) in map.components.iter().zip(&base.components).enumerate() {
            if !same_polys(c, b) {
                return Err(Error::InvalidDatum(format!("map components on chart {} do not reduce to the base", map.source.charts[i].id)));
            }
        }
        if !mode.source_varies() && !atlas_is_constant(&map.source) {
            return Err(Error::InvalidDatum(format!("{} mode keeps the source fixed", mode.name())));
        }
        if !mode.target_varies() && !atlas_is_constant(&map.target) {
            return Err(Error::InvalidDatum(format!("{} mode keeps the target fixed", mode.name())));
        }
        Ok(DeformationDatum { name: name.to_string(), mode, base, ring, map })
    }

    /// All corrections zero.
    pub fn trivial(name: &str, base: Arc<PoissonMapData>, ring: Arc<ParamRing>, mode: Mode) -> Result<DeformationDatum> {
        let source = Arc::new(base.source.with_ring(&ring));
        let target = Arc::new(base.target.with_ring(&ring));
        let map = Arc::new(base.rebase(source, target));
        DeformationDatum::new(name, mode, base, map)
    }

    /// Build from deformed pieces given as polynomial data over `ring`.
    pub fn from_parts(
        name: &str,
        mode: Mode,
        base: Arc<PoissonMapData>,
        ring: Arc<ParamRing>,
        source: Option<(Vec<(usize, usize, Vec<Poly>)>, Vec<Multivector>)>,
        target: Option<(Vec<(usize, usize, Vec<Poly>)>, Vec<Multivector>)>,
        components: Option<Vec<Vec<Poly>>>,
    ) -> Result<DeformationDatum> {
        let lifted_source = base.source.with_ring(&ring);
        let lifted_target = base.target.with_ring(&ring);
        let source = match source {
            Some((t, b)) => lifted_source.with_data(t, b)?,
            None => lifted_source,
        };
        let target = match target {
            Some((t, b)) => lifted_target.with_data(t, b)?,
            None => lifted_target,
        };
        let (source, target) = (Arc::new(source), Arc::new(target));
        let map = match components {
            Some(c) => base.with_components(source.clone(), target.clone(), c)?,
            None => base.rebase(source.clone(), target.clone()),
        };
        DeformationDatum::new(name, mode, base, Arc::new(map))
    }

    pub fn source(&self) -> &Arc<PoissonAtlas> {
        &self.map.source
    }

    pub fn target(&self) -> &Arc<PoissonAtlas> {
        &self.map.target
    }

    /// The same datum with every polynomial moved to another ring with the
    /// same parameters (a quotient drops terms, an extension keeps them).
    pub fn over(&self, ring: &Arc<ParamRing>) -> Result<DeformationDatum> {
        if ring.names() != self.ring.names() {
            return Err(Error::ExtensionMismatch(format!("{} vs {}", ring.describe(), self.ring.describe())));
        }
        let source = Arc::new(self.source().with_ring(ring));
        let target = Arc::new(self.target().with_ring(ring));
        let map = Arc::new(self.map.rebase(source, target));
        Ok(DeformationDatum { name: self.name.clone(), mode: self.mode, base: self.base.clone(), ring: ring.clone(), map })
    }

    /// Canonical lift to a larger ring: the same polynomials, with the
    /// reverse transitions recomputed as formal inverses.
    pub fn canonical_lift(&self, ring: &Arc<ParamRing>) -> Result<DeformationDatum> {
        let moved = self.over(ring)?;
        moved.with_atlases(normalize_inverses(moved.source(), &self.base.source)?, normalize_inverses(moved.target(), &self.base.target)?)
    }

    /// Replace the atlases, keeping the map components.
    pub fn with_atlases(&self, source: PoissonAtlas, target: PoissonAtlas) -> Result<DeformationDatum> {
        let map = self.map.with_components(Arc::new(source), Arc::new(target), self.map.components.clone())?;
        Ok(DeformationDatum { map: Arc::new(map), ..self.clone() })
    }

    /// Same data in another mode (checked).
    pub fn with_mode(&self, mode: Mode) -> Result<DeformationDatum> {
        DeformationDatum::new(&self.name, mode, self.base.clone(), self.map.clone())
    }
}

/// Check every defining identity of the datum exactly over its ring: the
/// Poisson, cocycle and compatibility conditions of both atlases, gluing and
/// the Poisson condition of the map, reduction to the base and the mode's
/// constant parts.
pub fn validate_deformation(d: &DeformationDatum) -> ValidationReport {
    let mut rep = ValidationReport::default();
    rep.extend(validate_atlas(d.source()));
    rep.extend(validate_atlas(d.target()));
    rep.extend(validate_map(&d.map));
    let reduces = reduces_to(d.source(), &d.base.source)
        && reduces_to(d.target(), &d.base.target)
        && d.map.components.iter().zip(&d.base.components).all(|(c, b)| same_polys(c, b));
    rep.push("reduces_to_base", vec![], if reduces { None } else { Some("data differ from the base at t = 0".into()) });
    let fixed_ok = (d.mode.source_varies() || atlas_is_constant(d.source())) && (d.mode.target_varies() || atlas_is_constant(d.target()));
    rep.push(&format!("mode.{}", d.mode.name()), vec![], if fixed_ok { None } else { Some("a fixed side depends on the parameters".into()) });
    rep
}

/// Smallest truncation order at which the datum stops being valid, if any.
pub fn lowest_failing_order(d: &DeformationDatum) -> Result<Option<u32>> {
    for mu in 0..=d.ring.mu() {
        let ring = Arc::new(ParamRing::new(d.ring.names().to_vec(), mu, d.ring.ideal().to_vec())?);
        if !validate_deformation(&d.over(&ring)?).passed() {
            return Ok(Some(mu));
        }
    }
    Ok(None)
}

/// `t^e` coefficient of p, as a polynomial in the parameter-free context `ctx`.
pub(crate) fn coefficient(p: &Poly, e: &[u32], ctx: &Arc<VarContext>) -> Poly {
    let mut out = Poly::zero(ctx);
    for (chart, params, c) in p.terms() {
        if params == e {
            out.add_assign(&Poly::monomial(ctx, chart, &[], c.clone()));
        }
    }
    out
}

/// A parameter-free polynomial times `t^e`, in the context `ctx`.
pub(crate) fn embed(p: &Poly, e: &[u32], ctx: &Arc<VarContext>) -> Poly {
    let mut out = Poly::zero(ctx);
    for (chart, _, c) in p.terms() {
        out.add_assign(&Poly::monomial(ctx, chart, e, c.clone()));
    }
    out
}

#[cfg(test)]
mod tests;
