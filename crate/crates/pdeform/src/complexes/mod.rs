//! Chain-level operators attached to a Poisson map f: X -> Y: the
//! Lichnerowicz differential on X, the differential `pi_f` on sections of
//! the pulled-back multivector bundles, and the chain maps F, f*, f*G.
//!
//! A section of `f^* wedge^q T_Y` on source chart i is a [`Multivector`]
//! tagged with chart i, whose frame is the assigned target chart's
//! coordinates and whose coefficients are functions on chart i.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exact_algebra::{Poly, VarContext};
use crate::geometry::{PoissonAtlas, PoissonMapData};
use crate::multivector::{index_tuples, merge_sign, rbracket, Index, Multivector};

/// `u -> rbracket(Lambda, u) = -[u, Lambda]`; squares to zero when
/// `[Lambda, Lambda] = 0`.
pub fn lichnerowicz_d(lam: &Multivector, u: &Multivector) -> Result<Multivector> {
    rbracket(lam, u)
}

/// Lichnerowicz differential of a value on chart `i` of an atlas.
pub fn atlas_d(atlas: &PoissonAtlas, i: usize, u: &Multivector) -> Result<Multivector> {
    lichnerowicz_d(&atlas.bivectors[i], u)
}

fn sign(k: usize) -> i32 {
    if k % 2 == 0 {
        1
    } else {
        -1
    }
}

fn signed(p: Poly, s: i32) -> Poly {
    if s > 0 {
        p
    } else {
        p.neg()
    }
}

/// Precomputed data of a Poisson map on one source chart.
#[derive(Clone, Debug)]
pub struct MapChart {
    pub chart: Arc<str>,
    pub ctx: Arc<VarContext>,
    pub target: usize,
    /// Target dimension (frame size).
    pub m: usize,
    pub lam: Multivector,
    pub pi: Multivector,
    pub f: Vec<Poly>,
    /// `grads[p][alpha] = d f^p / d z^alpha`.
    pub grads: Vec<Vec<Poly>>,
    /// `(a, b) -> [(d_rho Pi_ab) o f]_rho` for a < b.
    dpi: BTreeMap<(u16, u16), Vec<Poly>>,
}

impl MapChart {
    pub fn new(f: &PoissonMapData, i: usize) -> Result<MapChart> {
        let a = f.assignment[i];
        let ctx = f.source.ctx(i).clone();
        let comps = f.components[i].clone();
        let n = ctx.n();
        let m = f.target.charts[a].dim();
        let grads = comps.iter().map(|c| (0..n).map(|al| c.deriv(al)).collect()).collect();
        let pi = f.target.bivectors[a].clone();
        let mut dpi = BTreeMap::new();
        for idx in index_tuples(m, 2) {
            let c = pi.coeff(&idx);
            let row = (0..m).map(|rho| c.deriv(rho).substitute(&ctx, &comps)).collect::<Result<Vec<_>>>()?;
            dpi.insert((idx[0], idx[1]), row);
        }
        Ok(MapChart { chart: f.source.charts[i].id.clone(), ctx, target: a, m, lam: f.source.bivectors[i].clone(), pi, f: comps, grads, dpi })
    }

    /// `Lambda_0(g, h)` given the gradient of h.
    fn lam_pair(&self, g: &Poly, h_grad: &[Poly]) -> Poly {
        let mut acc = Poly::zero(&self.ctx);
        if g.is_zero() {
            return acc;
        }
        for (idx, c) in self.lam.coeffs() {
            let (a, b) = (idx[0] as usize, idx[1] as usize);
            let t = g.deriv(a).mul(&h_grad[b]).sub(&g.deriv(b).mul(&h_grad[a]));
            if !t.is_zero() {
                acc.add_assign(&c.mul(&t));
            }
        }
        acc
    }

    fn check_section(&self, q: &Multivector) -> Result<()> {
        if q.chart() != &self.chart || q.frame() != self.m || !VarContext::same(q.ctx(), &self.ctx) {
            return Err(Error::ChartMismatch(self.chart.to_string(), q.chart().to_string()));
        }
        Ok(())
    }

    /// `Q(w^rho, w^{rest...})` for coordinate arguments.
    fn q_coord(q: &Multivector, rho: u16, rest: &[u16]) -> Option<Poly> {
        let (s, idx) = merge_sign(&[rho], rest)?;
        let c = q.coeffs().get(&idx)?;
        Some(signed(c.clone(), s))
    }

    /// `pi_f(Q)` computed by applying the defining alternating sum to the
    /// target coordinate functions:
    /// `pi(Q)(a_1..a_{q+1}) = sum_{S(q,1)} sgn Lambda_0(Q(a..), f(a_last))
    ///   - (-1)^{q-1} sum_{S(2,q-1)} sgn Q(Pi_0(a, a'), a..)`.
    pub fn pi_f(&self, q: &Multivector) -> Result<Multivector> {
        self.check_section(q)?;
        let deg = q.degree();
        let mut out = Multivector::zero(&self.chart, &self.ctx, self.m, deg + 1);
        if deg + 1 > self.m {
            return Ok(out);
        }
        let s2 = -sign(deg + 1); // -(-1)^{q-1}
        for j in index_tuples(self.m, deg + 1) {
            let mut acc = Poly::zero(&self.ctx);
            for k in 0..=deg {
                let rest: Index = j.iter().enumerate().filter(|(t, _)| *t != k).map(|(_, &x)| x).collect();
                let g = q.coeff(&rest);
                let term = self.lam_pair(&g, &self.grads[j[k] as usize]);
                acc.add_assign(&signed(term, sign(deg - k)));
            }
            for k in 0..deg + 1 {
                for l in k + 1..deg + 1 {
                    let rest: Index = j.iter().enumerate().filter(|(t, _)| *t != k && *t != l).map(|(_, &x)| x).collect();
                    let row = &self.dpi[&(j[k], j[l])];
                    let mut inner = Poly::zero(&self.ctx);
                    for (rho, d) in row.iter().enumerate() {
                        if d.is_zero() {
                            continue;
                        }
                        if let Some(qc) = Self::q_coord(q, rho as u16, &rest) {
                            inner.add_assign(&d.mul(&qc));
                        }
                    }
                    acc.add_assign(&signed(inner, s2 * sign(k + l + 1)));
                }
            }
            out.set(j, acc);
        }
        Ok(out)
    }

    /// `pi_f(Q)(a_1, .., a_{q+1})` for arbitrary target functions, evaluating
    /// every term of the defining sum literally.
    pub fn pi_f_on(&self, q: &Multivector, args: &[Poly]) -> Result<Poly> {
        self.check_section(q)?;
        let deg = q.degree();
        if args.len() != deg + 1 {
            return Err(Error::ArityMismatch { expected: deg + 1, got: args.len() });
        }
        let pulled: Vec<Poly> = args.iter().map(|a| a.substitute(&self.ctx, &self.f)).collect::<Result<_>>()?;
        let mut acc = Poly::zero(&self.ctx);
        for k in 0..=deg {
            let rest: Vec<Poly> = args.iter().enumerate().filter(|(t, _)| *t != k).map(|(_, a)| a.clone()).collect();
            let g = q.evaluate_pullback(&rest, &self.f)?;
            let h_grad: Vec<Poly> = (0..self.ctx.n()).map(|al| pulled[k].deriv(al)).collect();
            acc.add_assign(&signed(self.lam_pair(&g, &h_grad), sign(deg - k)));
        }
        let s2 = -sign(deg + 1);
        for k in 0..deg + 1 {
            for l in k + 1..deg + 1 {
                let bracket = self.pi.evaluate(&[args[k].clone(), args[l].clone()])?;
                let mut inner_args = vec![bracket];
                inner_args.extend(args.iter().enumerate().filter(|(t, _)| *t != k && *t != l).map(|(_, a)| a.clone()));
                let v = q.evaluate_pullback(&inner_args, &self.f)?;
                acc.add_assign(&signed(v, s2 * sign(k + l + 1)));
            }
        }
        Ok(acc)
    }

    /// `F(P)(a_1..a_q) = P(f(a_1), .., f(a_q))`.
    pub fn chain_map_f(&self, p: &Multivector) -> Result<Multivector> {
        if p.chart() != &self.chart || !p.is_tangent() || !VarContext::same(p.ctx(), &self.ctx) {
            return Err(Error::ChartMismatch(self.chart.to_string(), p.chart().to_string()));
        }
        let mut out = Multivector::zero(&self.chart, &self.ctx, self.m, p.degree());
        for j in index_tuples(self.m, p.degree()) {
            let rows: Vec<Vec<Poly>> = j.iter().map(|&x| self.grads[x as usize].clone()).collect();
            out.set(j, p.contract_gradients(&rows));
        }
        Ok(out)
    }

    /// `f^*(Q)(a..) = Q(a..) o f` for a multivector on the assigned target chart.
    pub fn pullback(&self, q: &Multivector) -> Result<Multivector> {
        if q.frame() != self.m || !q.is_tangent() {
            return Err(Error::ChartMismatch(self.chart.to_string(), q.chart().to_string()));
        }
        let mut out = Multivector::zero(&self.chart, &self.ctx, self.m, q.degree());
        for (k, c) in q.coeffs() {
            out.set(k.clone(), c.substitute(&self.ctx, &self.f)?);
        }
        Ok(out)
    }
}

/// Per-chart operator tables of a Poisson map.
#[derive(Clone, Debug)]
pub struct MapOps {
    pub map: Arc<PoissonMapData>,
    pub charts: Vec<MapChart>,
}

impl MapOps {
    pub fn new(map: Arc<PoissonMapData>) -> Result<MapOps> {
        let charts = (0..map.source.len()).map(|i| MapChart::new(&map, i)).collect::<Result<_>>()?;
        Ok(MapOps { map, charts })
    }

    pub fn source(&self) -> &Arc<PoissonAtlas> {
        &self.map.source
    }

    pub fn target(&self) -> &Arc<PoissonAtlas> {
        &self.map.target
    }

    /// Find the chart table for a section by its chart tag.
    fn chart_of(&self, m: &Multivector) -> Result<&MapChart> {
        self.charts
            .iter()
            .find(|c| &c.chart == m.chart())
            .ok_or_else(|| Error::ChartMismatch(m.chart().to_string(), "source atlas".into()))
    }

    pub fn pi_f(&self, q: &Multivector) -> Result<Multivector> {
        self.chart_of(q)?.pi_f(q)
    }

    pub fn chain_map_f(&self, p: &Multivector) -> Result<Multivector> {
        self.chart_of(p)?.chain_map_f(p)
    }

    /// Pull back a target multivector living on target chart `b` to source chart `i`.
    pub fn pullback_fstar(&self, i: usize, b: usize, q: &Multivector) -> Result<Multivector> {
        let mc = &self.charts[i];
        let tq = if b == mc.target { q.clone() } else { q.pushforward(self.target().transition(mc.target, b))? };
        mc.pullback(&tq)
    }

    /// Move a section of `f^* wedge^q T_Y` from source chart j to source chart
    /// i: change the target frame by the target transition, composed with f on
    /// chart j, then re-express the coefficients in chart i coordinates.
    pub fn transport(&self, q: &Multivector, j: usize, i: usize) -> Result<Multivector> {
        let (mj, mi) = (&self.charts[j], &self.charts[i]);
        let framed = if mj.target == mi.target {
            q.clone()
        } else {
            let psi = &self.target().transition(mi.target, mj.target).components;
            let mut out = Multivector::zero(&mj.chart, &mj.ctx, mi.m, q.degree());
            let grads: Vec<Vec<Poly>> = psi
                .iter()
                .map(|c| (0..mj.m).map(|rho| c.deriv(rho).substitute(&mj.ctx, &mj.f)).collect::<Result<Vec<_>>>())
                .collect::<Result<_>>()?;
            for k in index_tuples(mi.m, q.degree()) {
                let rows: Vec<Vec<Poly>> = k.iter().map(|&x| grads[x as usize].clone()).collect();
                out.set(k, q.contract_gradients(&rows));
            }
            out
        };
        let back = &self.source().transition(j, i).components;
        let mut out = Multivector::zero(&mi.chart, &mi.ctx, mi.m, q.degree());
        for (k, c) in framed.coeffs() {
            out.set(k.clone(), c.substitute(&mi.ctx, back)?);
        }
        Ok(out)
    }
}

/// Composite of two Poisson maps `h = g o f` (chart assignments compose).
pub fn compose(f: &PoissonMapData, g: &PoissonMapData) -> Result<PoissonMapData> {
    if !Arc::ptr_eq(&f.target, &g.source) && f.target.name != g.source.name {
        return Err(Error::CompositionMismatch(format!("{} does not map into the source of {}", f.name, g.name)));
    }
    let mut comps = Vec::new();
    let mut assignment = Vec::new();
    for i in 0..f.source.len() {
        let b = f.assignment[i];
        assignment.push(g.assignment[b]);
        comps.push(g.components[b].iter().map(|c| c.substitute(f.source.ctx(i), &f.components[i])).collect::<Result<Vec<_>>>()?);
    }
    PoissonMapData::new(&format!("{}.{}", g.name, f.name), f.source.clone(), g.target.clone(), assignment, comps)
}

/// Operators attached to a composable pair: `f^*G: f^*T_Y -> h^*T_Z`
/// (`P -> (b.. -> P(g(b)..))`) and `f^*: g^*T_Z -> h^*T_Z`.
#[derive(Clone, Debug)]
pub struct CompositeOps {
    pub f: MapOps,
    pub g: MapOps,
    pub h: MapOps,
}

impl CompositeOps {
    pub fn new(f: Arc<PoissonMapData>, g: Arc<PoissonMapData>) -> Result<CompositeOps> {
        let h = Arc::new(compose(&f, &g)?);
        Ok(CompositeOps { f: MapOps::new(f)?, g: MapOps::new(g)?, h: MapOps::new(h)? })
    }

    /// `f^*G` on source chart i.
    pub fn fstar_g(&self, i: usize, p: &Multivector) -> Result<Multivector> {
        let fc = &self.f.charts[i];
        let hc = &self.h.charts[i];
        let gcomps = &self.g.map.components[fc.target];
        let mut out = Multivector::zero(&hc.chart, &hc.ctx, hc.m, p.degree());
        for k in index_tuples(hc.m, p.degree()) {
            let args: Vec<Poly> = k.iter().map(|&x| gcomps[x as usize].clone()).collect();
            out.set(k, p.evaluate_pullback(&args, &fc.f)?);
        }
        Ok(out)
    }

    /// `f^*` on source chart i for a section of `g^* wedge^q T_Z` on Y chart `assignment[i]`.
    pub fn fstar(&self, i: usize, q: &Multivector) -> Result<Multivector> {
        let fc = &self.f.charts[i];
        let hc = &self.h.charts[i];
        if q.frame() != hc.m {
            return Err(Error::CompositionMismatch("frame of g^*T_Z section".into()));
        }
        let mut out = Multivector::zero(&hc.chart, &hc.ctx, hc.m, q.degree());
        for (k, c) in q.coeffs() {
            out.set(k.clone(), c.substitute(&fc.ctx, &fc.f)?);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests;
