use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exact_algebra::{Poly, VarContext};
use crate::multivector::Multivector;

use super::{Chart, PoissonAtlas, PoissonMapData, ValidationReport};

/// A submanifold cut out, on each listed ambient chart, by the vanishing of
/// some of that chart's coordinates (the defining coordinates w^1..w^r).
#[derive(Clone, Debug)]
pub struct SubmanifoldData {
    pub name: String,
    pub ambient: Arc<PoissonAtlas>,
    /// Ambient chart index of each submanifold chart.
    pub charts: Vec<usize>,
    /// Defining coordinates (ambient variable indices) on each submanifold chart.
    pub defining: Vec<Vec<usize>>,
}

/// Coefficients of `[Lambda_0, w^alpha] = sum_beta w^beta T^beta_alpha`
/// restricted to the submanifold: `t[a][alpha][beta]` is a section of
/// `T_Y|_X` on submanifold chart a (ambient frame, submanifold coefficients).
#[derive(Clone, Debug)]
pub struct TangentialData {
    pub t: Vec<Vec<Vec<Multivector>>>,
}

/// Split `p` as `sum_beta w^beta q_beta` by assigning each term to the first
/// defining variable that divides it; returns the remainder not in the ideal.
fn divide_by_ideal(p: &Poly, defining: &[usize]) -> (Vec<Poly>, Poly) {
    let ctx = p.ctx();
    let mut quotients = vec![Poly::zero(ctx); defining.len()];
    let mut rest = Poly::zero(ctx);
    for (chart, params, c) in p.terms() {
        let slot = defining.iter().position(|&v| chart[v] > 0);
        let mut e = chart.to_vec();
        match slot {
            Some(b) => {
                e[defining[b]] -= 1;
                quotients[b].add_assign(&Poly::monomial(ctx, &e, &params, c.clone()));
            }
            None => rest.add_assign(&Poly::monomial(ctx, &e, &params, c.clone())),
        }
    }
    (quotients, rest)
}

impl SubmanifoldData {
    pub fn new(name: &str, ambient: Arc<PoissonAtlas>, charts: Vec<usize>, defining: Vec<Vec<usize>>) -> Result<Self> {
        if charts.len() != defining.len() || charts.is_empty() {
            return Err(Error::InvalidSubmanifold("one list of defining coordinates per chart is required".into()));
        }
        let r = defining[0].len();
        for (&c, d) in charts.iter().zip(&defining) {
            if c >= ambient.len() {
                return Err(Error::InvalidSubmanifold(format!("chart index {c} out of range")));
            }
            if d.len() != r {
                return Err(Error::InvalidSubmanifold("codimension differs between charts".into()));
            }
            if d.iter().any(|&v| v >= ambient.charts[c].dim()) {
                return Err(Error::InvalidSubmanifold("defining coordinate out of range".into()));
            }
        }
        Ok(SubmanifoldData { name: name.to_string(), ambient, charts, defining })
    }

    pub fn codim(&self) -> usize {
        self.defining[0].len()
    }

    /// Ambient variable indices along the submanifold on chart a.
    pub fn tangent_vars(&self, a: usize) -> Vec<usize> {
        let n = self.ambient.charts[self.charts[a]].dim();
        (0..n).filter(|v| !self.defining[a].contains(v)).collect()
    }

    fn x_ctx(&self, a: usize) -> Arc<VarContext> {
        let amb = self.ambient.ctx(self.charts[a]);
        let names = self.tangent_vars(a).iter().map(|&v| amb.vars()[v].clone()).collect();
        VarContext::new(names, amb.ring().clone(), amb.window(), amb.policy())
    }

    /// Images of ambient chart-a variables on the submanifold (defining
    /// variables go to zero), in context `xctx`.
    fn restriction_images(&self, a: usize, xctx: &Arc<VarContext>) -> Vec<Poly> {
        let tv = self.tangent_vars(a);
        let n = self.ambient.charts[self.charts[a]].dim();
        (0..n)
            .map(|v| match tv.iter().position(|&u| u == v) {
                Some(pos) => Poly::var(xctx, pos),
                None => Poly::zero(xctx),
            })
            .collect()
    }

    /// Restrict an ambient function on chart a to the submanifold.
    pub fn restrict_fn(&self, a: usize, xctx: &Arc<VarContext>, p: &Poly) -> Result<Poly> {
        p.substitute(xctx, &self.restriction_images(a, xctx))
    }

    /// Extend a submanifold function on chart a to the ambient chart
    /// (independent of the defining coordinates).
    pub fn extend_fn(&self, a: usize, p: &Poly) -> Result<Poly> {
        let amb = self.ambient.ctx(self.charts[a]);
        let images: Vec<Poly> = self.tangent_vars(a).iter().map(|&v| Poly::var(amb, v)).collect();
        p.substitute(amb, &images)
    }

    /// Restrict an ambient multivector to a section of `wedge^p T_Y|_X`
    /// (ambient frame, submanifold coefficients in `xctx`).
    pub fn restrict(&self, a: usize, xctx: &Arc<VarContext>, m: &Multivector, chart: &Arc<str>) -> Result<Multivector> {
        let images = self.restriction_images(a, xctx);
        let mut out = Multivector::zero(chart, xctx, m.frame(), m.degree());
        for (k, c) in m.coeffs() {
            out.set(k.clone(), c.substitute(xctx, &images)?);
        }
        Ok(out)
    }

    /// Extend a section of `wedge^p T_Y|_X` to an ambient multivector whose
    /// coefficients do not depend on the defining coordinates.
    pub fn extend(&self, a: usize, m: &Multivector) -> Result<Multivector> {
        let i = self.charts[a];
        let amb = self.ambient.ctx(i);
        let mut out = Multivector::zero(&self.ambient.charts[i].id, amb, amb.n(), m.degree());
        for (k, c) in m.coeffs() {
            out.set(k.clone(), self.extend_fn(a, c)?);
        }
        Ok(out)
    }

    /// The submanifold as a Poisson atlas: coordinates are the non-defining
    /// ambient coordinates, transitions and bivector are restricted.
    pub fn x_atlas(&self) -> Result<PoissonAtlas> {
        let m = self.charts.len();
        let ctxs: Vec<Arc<VarContext>> = (0..m).map(|a| self.x_ctx(a)).collect();
        let charts: Vec<Chart> = (0..m)
            .map(|a| Chart { id: self.ambient.charts[self.charts[a]].id.clone(), ctx: ctxs[a].clone(), invertible: vec![] })
            .collect();
        let mut transitions = Vec::new();
        for a in 0..m {
            for b in 0..m {
                if a == b {
                    continue;
                }
                let (i, k) = (self.charts[a], self.charts[b]);
                if i == k {
                    return Err(Error::InvalidSubmanifold("two submanifold charts on one ambient chart".into()));
                }
                let map = self.ambient.transition(i, k);
                let images = self.restriction_images(b, &ctxs[b]);
                let comps: Vec<Poly> = self
                    .tangent_vars(a)
                    .iter()
                    .map(|&v| map.components[v].substitute(&ctxs[b], &images))
                    .collect::<Result<_>>()?;
                transitions.push((a, b, comps));
            }
        }
        let mut bivectors = Vec::new();
        for a in 0..m {
            let i = self.charts[a];
            let tv = self.tangent_vars(a);
            let lam = &self.ambient.bivectors[i];
            let mut out = Multivector::zero(&charts[a].id, &ctxs[a], tv.len(), 2);
            for (k, c) in lam.coeffs() {
                let pos: Option<Vec<u16>> =
                    k.iter().map(|&v| tv.iter().position(|&u| u == v as usize).map(|p| p as u16)).collect();
                if let Some(pos) = pos {
                    out.set(pos, self.restrict_fn(a, &ctxs[a], c)?);
                }
            }
            bivectors.push(out);
        }
        PoissonAtlas::new(&format!("{}.X", self.name), charts, transitions, bivectors)
    }

    /// The inclusion of the submanifold into the ambient atlas.
    pub fn inclusion(&self, x: Arc<PoissonAtlas>) -> Result<PoissonMapData> {
        let comps = (0..self.charts.len()).map(|a| self.restriction_images(a, x.ctx(a))).collect();
        PoissonMapData::new(&format!("{}.incl", self.name), x, self.ambient.clone(), self.charts.clone(), comps)
    }

    /// `F[alpha][beta]` with `w_i^alpha = sum_beta w_k^beta F^alpha_{ik beta}`
    /// restricted to the submanifold, for charts i = charts[a], k = charts[b],
    /// as functions on submanifold chart b.
    pub fn transition_factors(&self, a: usize, b: usize, xctx_b: &Arc<VarContext>) -> Result<Vec<Vec<Poly>>> {
        let (i, k) = (self.charts[a], self.charts[b]);
        let map = self.ambient.transition(i, k);
        let mut out = Vec::new();
        for &w in &self.defining[a] {
            let (q, rest) = divide_by_ideal(&map.components[w], &self.defining[b]);
            if !rest.is_zero() {
                return Err(Error::InvalidSubmanifold(format!("defining coordinate does not vanish on the overlap: {rest}")));
            }
            out.push(q.iter().map(|p| self.restrict_fn(b, xctx_b, p)).collect::<Result<Vec<_>>>()?);
        }
        Ok(out)
    }

    /// The standard bracket `[Lambda_0, w^alpha]` on chart a.
    fn bracket_with_defining(&self, a: usize, alpha: usize) -> Result<Multivector> {
        let i = self.charts[a];
        let w = Multivector::function(&self.ambient.charts[i].id, Poly::var(self.ambient.ctx(i), self.defining[a][alpha]));
        self.ambient.bivectors[i].schouten(&w)
    }

    /// Extract the tangential coefficients, or fail if some bracket leaves
    /// the defining ideal.
    pub fn tangential(&self, x: &PoissonAtlas) -> Result<TangentialData> {
        let r = self.codim();
        let mut t = Vec::new();
        for a in 0..self.charts.len() {
            let i = self.charts[a];
            let amb = self.ambient.ctx(i);
            let mut per_alpha = Vec::new();
            for alpha in 0..r {
                let br = self.bracket_with_defining(a, alpha)?;
                let mut per_beta: Vec<Multivector> = (0..r).map(|_| Multivector::zero(&x.charts[a].id, x.ctx(a), amb.n(), 1)).collect();
                for (k, c) in br.coeffs() {
                    let (q, rest) = divide_by_ideal(c, &self.defining[a]);
                    if !rest.is_zero() {
                        return Err(Error::InvalidSubmanifold(format!("[Lambda, w^{}] has component {rest} off the ideal", alpha + 1)));
                    }
                    for (beta, qb) in q.iter().enumerate() {
                        let restricted = self.restrict_fn(a, x.ctx(a), qb)?;
                        let term = Multivector::basis_in_frame(&x.charts[a].id, x.ctx(a), amb.n(), k, restricted);
                        per_beta[beta] = per_beta[beta].add(&term);
                    }
                }
                per_alpha.push(per_beta);
            }
            t.push(per_alpha);
        }
        Ok(TangentialData { t })
    }
}

/// Check that the ambient bivector is tangential (`[Lambda_0, w^alpha]` lies
/// in the defining ideal) and that defining coordinates vanish on overlaps.
/// On success the tangential coefficients are returned.
pub fn validate_submanifold(s: &SubmanifoldData) -> (ValidationReport, Option<TangentialData>) {
    let mut rep = ValidationReport::default();
    for a in 0..s.charts.len() {
        for alpha in 0..s.codim() {
            let residual = match s.bracket_with_defining(a, alpha) {
                Ok(br) => br.set_vars_zero(&s.defining[a]).coeffs().values().find(|p| !p.is_zero()).map(|p| p.to_string()),
                Err(e) => Some(e.to_string()),
            };
            rep.push(&format!("{}.tangential", s.name), vec![a, alpha], residual);
        }
    }
    for a in 0..s.charts.len() {
        for b in 0..s.charts.len() {
            if a == b {
                continue;
            }
            let map = s.ambient.transition(s.charts[a], s.charts[b]);
            for (alpha, &w) in s.defining[a].iter().enumerate() {
                let rest = map.components[w].set_vars_zero(&s.defining[b]);
                let residual = if rest.is_zero() { None } else { Some(rest.to_string()) };
                rep.push(&format!("{}.defining_ideal", s.name), vec![a, b, alpha], residual);
            }
        }
    }
    if !rep.passed() {
        return (rep, None);
    }
    let data = s.x_atlas().and_then(|x| s.tangential(&x));
    match data {
        Ok(t) => (rep, Some(t)),
        Err(e) => {
            rep.push(&format!("{}.restriction", s.name), vec![], Some(e.to_string()));
            (rep, None)
        }
    }
}
