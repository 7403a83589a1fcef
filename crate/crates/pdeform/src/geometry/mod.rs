//! Atlas-level Poisson varieties, Poisson maps and Poisson submanifolds,
//! with validation of every compatibility the deformation theory assumes.

mod report;
pub mod samples;
mod submanifold;

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exact_algebra::{ParamRing, Poly, VarContext};
use crate::multivector::{index_tuples, ChartMap, Multivector};

pub use report::{Check, ValidationReport};
pub use submanifold::{validate_submanifold, SubmanifoldData, TangentialData};

/// One coordinate chart: its variables (in `ctx`) and the variables that are
/// units on the whole chart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chart {
    pub id: Arc<str>,
    pub ctx: Arc<VarContext>,
    pub invertible: Vec<usize>,
}

impl Chart {
    pub fn new(id: &str, vars: &[&str], ring: &Arc<ParamRing>) -> Chart {
        Chart {
            id: Arc::from(id),
            ctx: VarContext::wide(vars.iter().map(|s| s.to_string()).collect(), ring.clone()),
            invertible: vec![],
        }
    }

    pub fn dim(&self) -> usize {
        self.ctx.n()
    }
}

/// Charts, transition maps for every ordered pair, and one Poisson bivector
/// per chart. `transition(i, j)` expresses chart i's coordinates as functions
/// of chart j's coordinates.
#[derive(Clone, Debug)]
pub struct PoissonAtlas {
    pub name: String,
    pub charts: Vec<Chart>,
    transitions: BTreeMap<(usize, usize), ChartMap>,
    pub bivectors: Vec<Multivector>,
}

impl PoissonAtlas {
    /// `transitions` lists `(i, j, components)` with chart i's coordinates as
    /// functions of chart j's coordinates. Every ordered pair of distinct
    /// charts must be present; inverses are taken from the reverse pair.
    pub fn new(name: &str, charts: Vec<Chart>, transitions: Vec<(usize, usize, Vec<Poly>)>, bivectors: Vec<Multivector>) -> Result<Self> {
        let n = charts.len();
        if bivectors.len() != n {
            return Err(Error::ArityMismatch { expected: n, got: bivectors.len() });
        }
        for (c, b) in charts.iter().zip(&bivectors) {
            if b.degree() != 2 || b.chart() != &c.id || !VarContext::same(b.ctx(), &c.ctx) {
                return Err(Error::ChartMismatch(c.id.to_string(), b.chart().to_string()));
            }
        }
        let mut comps: BTreeMap<(usize, usize), Vec<Poly>> = BTreeMap::new();
        for (i, j, c) in transitions {
            if i >= n || j >= n || i == j {
                return Err(Error::InvariantViolation(format!("bad transition index ({i},{j})")));
            }
            comps.insert((i, j), c);
        }
        let mut maps = BTreeMap::new();
        for i in 0..n {
            maps.insert((i, i), ChartMap::identity(&charts[i].id, &charts[i].ctx));
            for j in 0..n {
                if i == j {
                    continue;
                }
                let fwd = comps
                    .get(&(i, j))
                    .ok_or_else(|| Error::InvariantViolation(format!("missing transition {} <- {}", charts[i].id, charts[j].id)))?;
                let back = comps
                    .get(&(j, i))
                    .ok_or_else(|| Error::InvariantViolation(format!("missing transition {} <- {}", charts[j].id, charts[i].id)))?;
                let m = ChartMap::new(&charts[j].id, &charts[i].id, &charts[j].ctx, &charts[i].ctx, fwd.clone(), Some(back.clone()))?;
                maps.insert((i, j), m);
            }
        }
        Ok(PoissonAtlas { name: name.to_string(), charts, transitions: maps, bivectors })
    }

    /// Single affine chart.
    pub fn affine(name: &str, chart: Chart, bivector: Multivector) -> Result<Self> {
        Self::new(name, vec![chart], vec![], vec![bivector])
    }

    pub fn len(&self) -> usize {
        self.charts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.charts.is_empty()
    }

    pub fn chart_index(&self, id: &str) -> Option<usize> {
        self.charts.iter().position(|c| &*c.id == id)
    }

    pub fn ctx(&self, i: usize) -> &Arc<VarContext> {
        &self.charts[i].ctx
    }

    pub fn dim(&self) -> usize {
        self.charts.first().map(|c| c.dim()).unwrap_or(0)
    }

    pub fn ring(&self) -> &Arc<ParamRing> {
        self.charts[0].ctx.ring()
    }

    /// Map from chart j coordinates to chart i coordinates.
    pub fn transition(&self, i: usize, j: usize) -> &ChartMap {
        &self.transitions[&(i, j)]
    }

    /// Transition components as supplied, for each ordered pair of distinct charts.
    pub fn transition_list(&self) -> Vec<(usize, usize, Vec<Poly>)> {
        self.transitions.iter().filter(|((i, j), _)| i != j).map(|((i, j), m)| (*i, *j, m.components.clone())).collect()
    }

    /// Same data with every polynomial moved to a new parameter ring.
    pub fn with_ring(&self, ring: &Arc<ParamRing>) -> PoissonAtlas {
        let charts: Vec<Chart> = self
            .charts
            .iter()
            .map(|c| Chart { id: c.id.clone(), ctx: c.ctx.with_ring(ring.clone()), invertible: c.invertible.clone() })
            .collect();
        let transitions = self
            .transitions
            .iter()
            .map(|(&(i, j), m)| ((i, j), m.recontext(&charts[j].ctx, &charts[i].ctx)))
            .collect();
        let bivectors = self.bivectors.iter().zip(&charts).map(|(b, c)| b.recontext(&c.ctx)).collect();
        PoissonAtlas { name: self.name.clone(), charts, transitions, bivectors }
    }

    /// Replace transition data and bivectors (used for deformed atlases over
    /// a parameter ring). Inverses are recomputed from the reverse pairs.
    pub fn with_data(&self, transitions: Vec<(usize, usize, Vec<Poly>)>, bivectors: Vec<Multivector>) -> Result<PoissonAtlas> {
        let mut out = PoissonAtlas::new(&self.name, self.charts.clone(), transitions, bivectors)?;
        for c in out.charts.iter_mut().zip(&self.charts) {
            c.0.invertible = c.1.invertible.clone();
        }
        Ok(out)
    }

    /// Variables of chart `i0` that are units on the overlap of the given charts.
    pub fn overlap_units(&self, tuple: &[usize]) -> Vec<usize> {
        let i0 = tuple[0];
        let mut units = self.charts[i0].invertible.clone();
        for &k in &tuple[1..] {
            for c in &self.transition(k, i0).components {
                for v in 0..self.charts[i0].dim() {
                    if let Some((lo, _)) = c.exponent_range(v) {
                        if lo < 0 {
                            units.push(v);
                        }
                    }
                }
            }
        }
        units.sort();
        units.dedup();
        units
    }
}

/// Poisson map between atlases: source chart i maps into target chart
/// `assignment[i]` with the given components (one per target variable, as
/// functions of the source variables).
#[derive(Clone, Debug)]
pub struct PoissonMapData {
    pub name: String,
    pub source: Arc<PoissonAtlas>,
    pub target: Arc<PoissonAtlas>,
    pub assignment: Vec<usize>,
    pub components: Vec<Vec<Poly>>,
}

impl PoissonMapData {
    pub fn new(
        name: &str,
        source: Arc<PoissonAtlas>,
        target: Arc<PoissonAtlas>,
        assignment: Vec<usize>,
        components: Vec<Vec<Poly>>,
    ) -> Result<Self> {
        if assignment.len() != source.len() || components.len() != source.len() {
            return Err(Error::ArityMismatch { expected: source.len(), got: assignment.len().min(components.len()) });
        }
        for (i, (&a, comps)) in assignment.iter().zip(&components).enumerate() {
            if a >= target.len() {
                return Err(Error::InvariantViolation(format!("chart {} assigned to missing target chart {a}", source.charts[i].id)));
            }
            if comps.len() != target.charts[a].dim() {
                return Err(Error::ArityMismatch { expected: target.charts[a].dim(), got: comps.len() });
            }
            if comps.iter().any(|c| !VarContext::same(c.ctx(), source.ctx(i))) {
                return Err(Error::ContextMismatch(format!("map components on chart {}", source.charts[i].id)));
            }
        }
        Ok(PoissonMapData { name: name.to_string(), source, target, assignment, components })
    }

    /// Identity map of an atlas.
    pub fn identity(name: &str, atlas: Arc<PoissonAtlas>) -> Self {
        let comps = (0..atlas.len()).map(|i| (0..atlas.charts[i].dim()).map(|v| Poly::var(atlas.ctx(i), v)).collect()).collect();
        PoissonMapData { name: name.to_string(), source: atlas.clone(), target: atlas.clone(), assignment: (0..atlas.len()).collect(), components: comps }
    }

    /// Chart map from source chart i into its assigned target chart.
    pub fn chart_map(&self, i: usize) -> ChartMap {
        let a = self.assignment[i];
        ChartMap {
            source: self.source.charts[i].id.clone(),
            target: self.target.charts[a].id.clone(),
            source_ctx: self.source.ctx(i).clone(),
            target_ctx: self.target.ctx(a).clone(),
            components: self.components[i].clone(),
            inverse: None,
        }
    }

    /// Components of the map on source chart i expressed in target chart `b`
    /// (composing with the target transition `b <- assignment[i]`).
    pub fn components_into(&self, i: usize, b: usize) -> Result<Vec<Poly>> {
        let a = self.assignment[i];
        if a == b {
            return Ok(self.components[i].clone());
        }
        self.target.transition(b, a).components.iter().map(|c| c.substitute(self.source.ctx(i), &self.components[i])).collect()
    }

    /// Same map between atlases carrying the same charts over another ring.
    pub fn rebase(&self, source: Arc<PoissonAtlas>, target: Arc<PoissonAtlas>) -> PoissonMapData {
        let components = self
            .components
            .iter()
            .enumerate()
            .map(|(i, cs)| cs.iter().map(|c| c.recontext(source.ctx(i))).collect())
            .collect();
        PoissonMapData { name: self.name.clone(), source, target, assignment: self.assignment.clone(), components }
    }

    /// Same map with new components (and possibly deformed atlases).
    pub fn with_components(&self, source: Arc<PoissonAtlas>, target: Arc<PoissonAtlas>, components: Vec<Vec<Poly>>) -> Result<PoissonMapData> {
        PoissonMapData::new(&self.name, source, target, self.assignment.clone(), components)
    }
}

fn first_nonzero<'a>(it: impl IntoIterator<Item = &'a Poly>) -> Option<String> {
    it.into_iter().find(|p| !p.is_zero()).map(|p| p.to_string())
}

fn mv_residual(m: &Multivector) -> Option<String> {
    first_nonzero(m.coeffs().values())
}

/// Check [Lambda_i, Lambda_i] = 0, the transition cocycle condition on all
/// triples (including i -> j -> i, which tests the inverses) and
/// compatibility of the bivectors with the transitions.
pub fn validate_atlas(a: &PoissonAtlas) -> ValidationReport {
    let mut rep = ValidationReport::default();
    let n = a.len();
    for i in 0..n {
        let residual = match a.bivectors[i].schouten(&a.bivectors[i]) {
            Ok(b) => mv_residual(&b),
            Err(e) => Some(e.to_string()),
        };
        rep.push(&format!("{}.poisson", a.name), vec![i], residual);
    }
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            for k in 0..n {
                if j == k {
                    continue;
                }
                let outer = a.transition(i, j);
                let inner = a.transition(j, k);
                let direct = a.transition(i, k);
                let residual = (|| -> Result<Option<String>> {
                    let mut res = Vec::new();
                    for (c, d) in outer.components.iter().zip(&direct.components) {
                        res.push(c.substitute(a.ctx(k), &inner.components)?.sub(d));
                    }
                    Ok(first_nonzero(&res))
                })()
                .unwrap_or_else(|e| Some(e.to_string()));
                rep.push(&format!("{}.cocycle", a.name), vec![i, j, k], residual);
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let residual = match a.bivectors[j].pushforward(a.transition(i, j)) {
                Ok(p) => mv_residual(&p.sub(&a.bivectors[i])),
                Err(e) => Some(e.to_string()),
            };
            rep.push(&format!("{}.compatibility", a.name), vec![i, j], residual);
        }
    }
    rep
}

/// Check gluing `Phi_i o phi_ij = psi_{a(i)a(j)} o Phi_j` and the Poisson
/// condition `Lambda_i(Phi^p, Phi^q) = Pi_pq o Phi` on every chart.
pub fn validate_map(f: &PoissonMapData) -> ValidationReport {
    let mut rep = ValidationReport::default();
    let (x, y) = (&f.source, &f.target);
    for i in 0..x.len() {
        for j in 0..x.len() {
            if i == j {
                continue;
            }
            let residual = (|| -> Result<Option<String>> {
                let lhs: Vec<Poly> =
                    f.components[i].iter().map(|c| c.substitute(x.ctx(j), &x.transition(i, j).components)).collect::<Result<_>>()?;
                let rhs = f.components_into(j, f.assignment[i])?;
                let res: Vec<Poly> = lhs.iter().zip(&rhs).map(|(l, r)| l.sub(r)).collect();
                Ok(first_nonzero(&res))
            })()
            .unwrap_or_else(|e| Some(e.to_string()));
            rep.push(&format!("{}.gluing", f.name), vec![i, j], residual);
        }
    }
    for i in 0..x.len() {
        let a = f.assignment[i];
        let residual = (|| -> Result<Option<String>> {
            let m = y.charts[a].dim();
            let mut res = Vec::new();
            for idx in index_tuples(m, 2) {
                let (p, q) = (idx[0] as usize, idx[1] as usize);
                let lhs = x.bivectors[i].evaluate(&[f.components[i][p].clone(), f.components[i][q].clone()])?;
                let rhs = y.bivectors[a].coeff(&idx).substitute(x.ctx(i), &f.components[i])?;
                res.push(lhs.sub(&rhs));
            }
            Ok(first_nonzero(&res))
        })()
        .unwrap_or_else(|e| Some(e.to_string()));
        rep.push(&format!("{}.poisson_map", f.name), vec![i], residual);
    }
    rep
}

#[cfg(test)]
mod tests;
