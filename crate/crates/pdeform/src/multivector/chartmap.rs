use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exact_algebra::{Poly, VarContext};

/// Coordinate map between two charts: target variable k equals
/// `components[k]` (a function of the source variables). The optional inverse
/// gives each source variable as a function of the target variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChartMap {
    pub source: Arc<str>,
    pub target: Arc<str>,
    pub source_ctx: Arc<VarContext>,
    pub target_ctx: Arc<VarContext>,
    pub components: Vec<Poly>,
    pub inverse: Option<Vec<Poly>>,
}

impl ChartMap {
    pub fn new(
        source: &Arc<str>,
        target: &Arc<str>,
        source_ctx: &Arc<VarContext>,
        target_ctx: &Arc<VarContext>,
        components: Vec<Poly>,
        inverse: Option<Vec<Poly>>,
    ) -> Result<Self> {
        if components.len() != target_ctx.n() {
            return Err(Error::ArityMismatch { expected: target_ctx.n(), got: components.len() });
        }
        if components.iter().any(|c| !VarContext::same(c.ctx(), source_ctx)) {
            return Err(Error::ContextMismatch(format!("components of {source} -> {target}")));
        }
        if let Some(inv) = &inverse {
            if inv.len() != source_ctx.n() {
                return Err(Error::ArityMismatch { expected: source_ctx.n(), got: inv.len() });
            }
            if inv.iter().any(|c| !VarContext::same(c.ctx(), target_ctx)) {
                return Err(Error::ContextMismatch(format!("inverse of {source} -> {target}")));
            }
        }
        Ok(ChartMap {
            source: source.clone(),
            target: target.clone(),
            source_ctx: source_ctx.clone(),
            target_ctx: target_ctx.clone(),
            components,
            inverse,
        })
    }

    pub fn identity(chart: &Arc<str>, ctx: &Arc<VarContext>) -> Self {
        let comps: Vec<Poly> = (0..ctx.n()).map(|i| Poly::var(ctx, i)).collect();
        ChartMap {
            source: chart.clone(),
            target: chart.clone(),
            source_ctx: ctx.clone(),
            target_ctx: ctx.clone(),
            components: comps.clone(),
            inverse: Some(comps),
        }
    }

    /// Pull a target function back to the source chart: `g o map`.
    pub fn pull(&self, g: &Poly) -> Result<Poly> {
        g.substitute(&self.source_ctx, &self.components)
    }

    /// Express a source function in target coordinates via the inverse.
    pub fn push_fn(&self, h: &Poly) -> Result<Poly> {
        let inv = self.inverse.as_ref().ok_or_else(|| Error::NoInverse(format!("{} -> {}", self.source, self.target)))?;
        h.substitute(&self.target_ctx, inv)
    }

    /// `other o self` (self: a -> b, other: b -> c).
    pub fn then(&self, other: &ChartMap) -> Result<ChartMap> {
        if self.target != other.source {
            return Err(Error::CompositionMismatch(format!("{} -> {} then {} -> {}", self.source, self.target, other.source, other.target)));
        }
        let comps = other.components.iter().map(|c| c.substitute(&self.source_ctx, &self.components)).collect::<Result<Vec<_>>>()?;
        let inverse = match (&self.inverse, &other.inverse) {
            (Some(a), Some(b)) => Some(a.iter().map(|c| c.substitute(&other.target_ctx, b)).collect::<Result<Vec<_>>>()?),
            _ => None,
        };
        ChartMap::new(&self.source, &other.target, &self.source_ctx, &other.target_ctx, comps, inverse)
    }

    /// Compute the inverse of a map whose parameter-free part has the known
    /// inverse `base_inverse`, by the fixed-point iteration
    /// `psi <- psi0(w - h(psi))` where `h` is the parameter-dependent part.
    /// Converges after at most `mu + 1` rounds since `h` is nilpotent.
    pub fn with_formal_inverse(mut self, base_inverse: Vec<Poly>) -> Result<ChartMap> {
        if base_inverse.len() != self.source_ctx.n() {
            return Err(Error::ArityMismatch { expected: self.source_ctx.n(), got: base_inverse.len() });
        }
        let tctx = self.target_ctx.clone();
        let h: Vec<Poly> = self.components.iter().map(|c| c.sub(&c.at_params_zero())).collect();
        let mut psi = base_inverse.clone();
        let rounds = tctx.ring().mu() as usize + 1;
        for _ in 0..rounds {
            // w - h(psi(w))
            let mut arg = Vec::with_capacity(tctx.n());
            for (k, hk) in h.iter().enumerate() {
                let hv = hk.substitute(&tctx, &psi)?;
                arg.push(Poly::var(&tctx, k).sub(&hv));
            }
            let next = base_inverse.iter().map(|b| b.substitute(&tctx, &arg)).collect::<Result<Vec<_>>>()?;
            if next == psi {
                break;
            }
            psi = next;
        }
        self.inverse = Some(psi);
        Ok(self)
    }

    /// Residuals of `inverse o components - id` on source variables, and of
    /// `components o inverse - id` on target variables.
    pub fn inverse_residuals(&self) -> Result<Vec<Poly>> {
        let inv = self.inverse.as_ref().ok_or_else(|| Error::NoInverse(format!("{} -> {}", self.source, self.target)))?;
        let mut out = Vec::new();
        for (i, p) in inv.iter().enumerate() {
            out.push(p.substitute(&self.source_ctx, &self.components)?.sub(&Poly::var(&self.source_ctx, i)));
        }
        for (k, c) in self.components.iter().enumerate() {
            out.push(c.substitute(&self.target_ctx, inv)?.sub(&Poly::var(&self.target_ctx, k)));
        }
        Ok(out)
    }

    /// Jacobian rows `d components[k] / d z^i`.
    pub fn jacobian(&self) -> Vec<Vec<Poly>> {
        self.components.iter().map(|c| (0..self.source_ctx.n()).map(|i| c.deriv(i)).collect()).collect()
    }

    pub fn recontext(&self, source_ctx: &Arc<VarContext>, target_ctx: &Arc<VarContext>) -> ChartMap {
        ChartMap {
            source: self.source.clone(),
            target: self.target.clone(),
            source_ctx: source_ctx.clone(),
            target_ctx: target_ctx.clone(),
            components: self.components.iter().map(|c| c.recontext(source_ctx)).collect(),
            inverse: self.inverse.as_ref().map(|v| v.iter().map(|c| c.recontext(target_ctx)).collect()),
        }
    }
}
