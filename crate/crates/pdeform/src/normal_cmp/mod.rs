//! The two normal complexes of a Poisson submanifold X of (Y, Lambda_0):
//! `N_{X/Y}^.` with the differential nabla, and `N_i^.`, the cokernel of
//! `T_X^. -> T_Y^.|_X` along the inclusion i; the comparison map phi
//! between them and the maps it induces on hypercohomology in degrees 0 and 1.
//!
//! A section of `N_{X/Y} (x) wedge^p T_Y|_X` on chart a is stored as r
//! sections of `wedge^p T_Y|_X` (ambient frame, coefficients on X), one per
//! defining coordinate `w^alpha`.
//!
//! With `[Lambda_0, w^alpha] = sum_beta w^beta T^beta_alpha` (standard
//! bracket), the differential is
//! `nabla(h)_alpha = -[h_alpha, Lambda_0]|_X + sum_beta T^beta_alpha ^ h_beta`
//! and phi sends `g` in `wedge^{p+1}` to `((-1)^p [g, w^alpha]|_X)_alpha`.
//! Writing the tangential term as `T ^ h` absorbs the sign `(-1)^p` needed
//! for `nabla . phi = phi . pi_i`.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::cech::{self, Audited, ColumnComplex, MapComplexes, Value};
use crate::cech::total::blockwise;
use crate::complexes::{atlas_d, MapOps};
use crate::error::{Error, Result};
use crate::exact_algebra::{Poly, RationalMatrix};
use crate::geometry::{validate_submanifold, PoissonAtlas, SubmanifoldData, TangentialData};
use crate::multivector::Multivector;

/// Everything needed to evaluate nabla, phi and the normal transition rule.
#[derive(Debug)]
pub struct NormalModel {
    pub sub: Arc<SubmanifoldData>,
    pub x: Arc<PoissonAtlas>,
    pub incl: Arc<MapOps>,
    pub tangential: TangentialData,
    /// `(a, b) -> F^alpha_beta` as functions on chart a of X, with
    /// `h_a^alpha = sum_beta F^alpha_beta h_b^beta`.
    factors: BTreeMap<(usize, usize), Vec<Vec<Poly>>>,
}

impl NormalModel {
    pub fn new(sub: Arc<SubmanifoldData>) -> Result<NormalModel> {
        let (rep, tangential) = validate_submanifold(&sub);
        let Some(tangential) = tangential else {
            let why = rep.first_failure().map(|c| c.to_string()).unwrap_or_else(|| "validation failed".into());
            return Err(Error::InvalidSubmanifold(why));
        };
        let x = Arc::new(sub.x_atlas()?);
        let incl = Arc::new(MapOps::new(Arc::new(sub.inclusion(x.clone())?))?);
        let mut factors = BTreeMap::new();
        for a in 0..x.len() {
            for b in 0..x.len() {
                if a == b {
                    continue;
                }
                let raw = sub.transition_factors(a, b, x.ctx(b))?;
                let back = &x.transition(b, a).components;
                let moved = raw
                    .iter()
                    .map(|row| row.iter().map(|p| p.substitute(x.ctx(a), back)).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()?;
                factors.insert((a, b), moved);
            }
        }
        Ok(NormalModel { sub, x, incl, tangential, factors })
    }

    pub fn codim(&self) -> usize {
        self.sub.codim()
    }

    /// Dimension of the ambient chart containing chart a of X.
    pub fn ambient_dim(&self, a: usize) -> usize {
        self.sub.ambient.charts[self.sub.charts[a]].dim()
    }

    fn restrict(&self, a: usize, m: &Multivector) -> Result<Multivector> {
        self.sub.restrict(a, self.x.ctx(a), m, &self.x.charts[a].id)
    }

    /// `-[h~, Lambda_0]|_X` for a section of `wedge^p T_Y|_X`, computed on an
    /// extension independent of the defining coordinates.
    pub fn pi_i(&self, a: usize, h: &Multivector) -> Result<Multivector> {
        let ext = self.sub.extend(a, h)?;
        self.restrict(a, &atlas_d(&self.sub.ambient, self.sub.charts[a], &ext)?)
    }

    /// Move a normal value from chart b to chart a of X.
    pub fn transport(&self, v: &[Multivector], b: usize, a: usize) -> Result<Value> {
        if a == b {
            return Ok(v.to_vec());
        }
        let moved: Vec<Multivector> = v.iter().map(|m| self.incl.transport(m, b, a)).collect::<Result<_>>()?;
        let f = &self.factors[&(a, b)];
        let mut out = Vec::with_capacity(moved.len());
        for row in f {
            let mut acc = Multivector::zero(&self.x.charts[a].id, self.x.ctx(a), self.ambient_dim(a), v[0].degree());
            for (beta, c) in row.iter().enumerate() {
                if !c.is_zero() {
                    acc = acc.add(&moved[beta].mul_fn(c));
                }
            }
            out.push(acc);
        }
        Ok(out)
    }

    /// The normal differential on chart a.
    pub fn nabla(&self, a: usize, h: &[Multivector]) -> Result<Value> {
        let r = self.codim();
        if h.len() != r {
            return Err(Error::ArityMismatch { expected: r, got: h.len() });
        }
        let t = &self.tangential.t[a];
        let mut out = Vec::with_capacity(r);
        for alpha in 0..r {
            let mut acc = self.pi_i(a, &h[alpha])?;
            for beta in 0..r {
                acc = acc.add(&t[alpha][beta].wedge(&h[beta])?);
            }
            out.push(acc);
        }
        Ok(out)
    }

    /// `g -> ((-1)^p [g~, w^alpha]|_X)_alpha` for g in `wedge^{p+1} T_Y|_X`.
    pub fn phi(&self, a: usize, g: &Multivector) -> Result<Value> {
        let i = self.sub.charts[a];
        let amb = &self.sub.ambient;
        let ext = self.sub.extend(a, g)?;
        let p = g.degree().saturating_sub(1);
        self.sub.defining[a]
            .iter()
            .map(|&w| {
                let wf = Multivector::function(&amb.charts[i].id, Poly::var(amb.ctx(i), w));
                let br = self.restrict(a, &ext.schouten(&wf)?)?;
                Ok(if p % 2 == 0 { br } else { br.neg() })
            })
            .collect()
    }
}

/// Dimension of one hypercohomology space with its audit.
#[derive(Clone, Debug, Serialize)]
pub struct SpaceSummary {
    pub label: String,
    pub degree: i64,
    pub dim: usize,
    pub audit_window: i32,
    pub audit_dim: usize,
    pub audit_pass: bool,
}

impl SpaceSummary {
    fn new(label: &str, degree: i64, a: &Audited) -> SpaceSummary {
        SpaceSummary {
            label: label.to_string(),
            degree,
            dim: a.dim(),
            audit_window: a.audit.window,
            audit_dim: a.audit.dim,
            audit_pass: a.audit.pass,
        }
    }
}

/// The induced map in one degree as an explicit matrix.
#[derive(Clone, Debug, Serialize)]
pub struct InducedMap {
    pub degree: i64,
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Vec<String>>,
    pub rank: usize,
}

impl InducedMap {
    fn new(degree: i64, m: &RationalMatrix) -> InducedMap {
        InducedMap {
            degree,
            rows: m.rows,
            cols: m.cols,
            entries: m.entries.iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect(),
            rank: m.rank(),
        }
    }
}

/// Comparison of `H^k(N_i^.)` and `H^k(N_{X/Y}^.)` for k = 0, 1.
#[derive(Clone, Debug, Serialize)]
pub struct NormalComparison {
    pub window: i32,
    pub spaces: Vec<SpaceSummary>,
    pub maps: Vec<InducedMap>,
    pub phi0_isomorphism: bool,
    pub phi1_injective: bool,
}

impl NormalComparison {
    pub fn passed(&self) -> bool {
        self.phi0_isomorphism && self.phi1_injective && self.spaces.iter().all(|s| s.audit_pass)
    }

    pub fn render(&self) -> String {
        let mut out = format!("NORMAL-COMPARE window={}\n", self.window);
        for s in &self.spaces {
            out.push_str(&format!(
                "{}^{} dim={} audit[D={}] dim={} {}\n",
                s.label,
                s.degree,
                s.dim,
                s.audit_window,
                s.audit_dim,
                if s.audit_pass { "PASS" } else { "FAIL" }
            ));
        }
        for m in &self.maps {
            out.push_str(&format!("phi{} {}x{} rank={}\n", m.degree, m.rows, m.cols, m.rank));
            for row in &m.entries {
                out.push_str(&format!("  [{}]\n", row.join(" ")));
            }
        }
        out.push_str(&format!("phi0 isomorphism {}\n", if self.phi0_isomorphism { "PASS" } else { "FAIL" }));
        out.push_str(&format!("phi1 injective {}\n", if self.phi1_injective { "PASS" } else { "FAIL" }));
        out
    }
}

/// The cochain map phi from the pullback complex along i (degree k) to the
/// normal complex (degree k).
pub fn phi_cochain(b: &ColumnComplex, n: &ColumnComplex, model: &NormalModel, k: i64, c: &cech::Cochain) -> Result<cech::Cochain> {
    blockwise(b, n, k, -1, c, &|a, v| model.phi(a, &v[0]))
}

/// Compute both hypercohomologies in degrees 0 and 1 and the matrices of
/// phi^0 and phi^1 between them.
pub fn compare_normal_cohomology(sub: Arc<SubmanifoldData>, window: i32) -> Result<NormalComparison> {
    let model = Arc::new(NormalModel::new(sub)?);
    let mc = MapComplexes::new(model.incl.map.clone())?;
    let normal = ColumnComplex::normal(model.clone());
    let mut spaces = Vec::new();
    let mut maps = Vec::new();
    let mut ranks = Vec::new();
    for k in 0..2i64 {
        let ni = Audited::run(window, |w| mc.h_quot(k, w))?;
        let nn = cech::hypercohomology(&normal, k, window)?;
        spaces.push(SpaceSummary::new("H(N_i)", k, &ni));
        spaces.push(SpaceSummary::new("H(N_X/Y)", k, &nn));
        let m = cech::induced_matrix(&ni.main, &nn.main, &|c| phi_cochain(&mc.b, &normal, &model, k, c))?;
        let im = InducedMap::new(k, &m);
        ranks.push((im.rank, ni.dim(), nn.dim()));
        maps.push(im);
    }
    Ok(NormalComparison {
        window,
        spaces,
        maps,
        phi0_isomorphism: ranks[0].0 == ranks[0].1 && ranks[0].1 == ranks[0].2,
        phi1_injective: ranks[1].0 == ranks[1].1,
    })
}

#[cfg(test)]
mod tests;
