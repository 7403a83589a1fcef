//! Small explicit Poisson varieties, maps and submanifolds used by the
//! bundled scenarios and the test suites.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exact_algebra::{parse_poly, ParamRing, Poly, VarContext};
use crate::multivector::Multivector;

use super::{Chart, PoissonAtlas, PoissonMapData, SubmanifoldData};

fn field() -> Arc<ParamRing> {
    Arc::new(ParamRing::field())
}

fn poly(ctx: &Arc<VarContext>, s: &str) -> Result<Poly> {
    parse_poly(ctx, s).map_err(|e| Error::InvariantViolation(format!("{s}: {e}")))
}

/// The affine plane `(x, y)` with bivector `lam d_x ^ d_y`.
pub fn plane(lam: &str) -> Result<PoissonAtlas> {
    let c = Chart::new("A", &["x", "y"], &field());
    let b = Multivector::basis(&c.id, &c.ctx, &[0, 1], poly(&c.ctx, lam)?);
    PoissonAtlas::affine("plane", c, b)
}

/// The projective line with charts `U0 (z)` and `U1 (w)`, `w = 1/z`.
pub fn p1() -> Result<PoissonAtlas> {
    let u0 = Chart::new("U0", &["z"], &field());
    let u1 = Chart::new("U1", &["w"], &field());
    let t10 = vec![poly(&u0.ctx, "z^-1")?];
    let t01 = vec![poly(&u1.ctx, "w^-1")?];
    let b0 = Multivector::zero(&u0.id, &u0.ctx, 1, 2);
    let b1 = Multivector::zero(&u1.id, &u1.ctx, 1, 2);
    PoissonAtlas::new("P1", vec![u0, u1], vec![(1, 0, t10), (0, 1, t01)], vec![b0, b1])
}

/// The projective plane with charts `V0 (x1, x2)`, `V1 (y0, y2)`,
/// `V2 (u0, u1)` and the bivector of a homogeneous cubic
/// `C(X0, X1, X2)`: `C(1, x1, x2) d_x1 ^ d_x2` on V0,
/// `-C(y0, 1, y2) d_y0 ^ d_y2` on V1 and `C(u0, u1, 1) d_u0 ^ d_u1` on V2.
pub fn p2(cubic: &str) -> Result<PoissonAtlas> {
    let names: [(&str, [&str; 2]); 3] = [("V0", ["x1", "x2"]), ("V1", ["y0", "y2"]), ("V2", ["u0", "u1"])];
    let charts: Vec<Chart> = names.iter().map(|(id, v)| Chart::new(id, v, &field())).collect();
    let hom = VarContext::wide(vec!["X0".into(), "X1".into(), "X2".into()], field());
    let c = poly(&hom, cubic)?;
    let t = |i: usize, j: usize, a: &str, b: &str| -> Result<(usize, usize, Vec<Poly>)> {
        Ok((i, j, vec![poly(&charts[j].ctx, a)?, poly(&charts[j].ctx, b)?]))
    };
    let transitions = vec![
        t(0, 1, "y0^-1", "y2*y0^-1")?,
        t(1, 0, "x1^-1", "x2*x1^-1")?,
        t(0, 2, "u1*u0^-1", "u0^-1")?,
        t(2, 0, "x2^-1", "x1*x2^-1")?,
        t(1, 2, "u0*u1^-1", "u1^-1")?,
        t(2, 1, "y0*y2^-1", "y2^-1")?,
    ];
    let slots: [[&str; 3]; 3] = [["1", "x1", "x2"], ["y0", "1", "y2"], ["u0", "u1", "1"]];
    let signs = [1, -1, 1];
    let mut bivectors = Vec::new();
    for (k, ch) in charts.iter().enumerate() {
        let images = slots[k].iter().map(|s| poly(&ch.ctx, s)).collect::<Result<Vec<_>>>()?;
        let mut coef = c.substitute(&ch.ctx, &images)?;
        if signs[k] < 0 {
            coef = coef.neg();
        }
        bivectors.push(Multivector::basis(&ch.id, &ch.ctx, &[0, 1], coef));
    }
    PoissonAtlas::new("P2", charts, transitions, bivectors)
}

/// The point included into `plane(lam)` at `(x0, y0)`.
pub fn point_into_plane(lam: &str, x0: &str, y0: &str) -> Result<PoissonMapData> {
    let y = Arc::new(plane(lam)?);
    let pt = Chart::new("P", &[], &field());
    let b = Multivector::zero(&pt.id, &pt.ctx, 0, 2);
    let ctx = pt.ctx.clone();
    let src = Arc::new(PoissonAtlas::affine("pt", pt, b)?);
    let comps = vec![vec![poly(&ctx, x0)?, poly(&ctx, y0)?]];
    PoissonMapData::new("incl", src, y, vec![0], comps)
}

/// The line `{X2 = 0}` in `p2(cubic)`, on charts V0 and V1.
pub fn line_in_p2(cubic: &str) -> Result<SubmanifoldData> {
    let y = Arc::new(p2(cubic)?);
    SubmanifoldData::new("L", y, vec![0, 1], vec![vec![1], vec![1]])
}

/// Affine space with coordinates `vars` and the zero bivector.
pub fn affine_zero(name: &str, vars: &[&str]) -> Result<PoissonAtlas> {
    let c = Chart::new("A", vars, &field());
    let b = Multivector::zero(&c.id, &c.ctx, vars.len(), 2);
    PoissonAtlas::affine(name, c, b)
}

/// The origin of affine 3-space `(x, y, z)` with the zero bivector.
pub fn point_into_space() -> Result<PoissonMapData> {
    let y = Arc::new(affine_zero("space", &["x", "y", "z"])?);
    let src = Arc::new(affine_zero("pt", &[])?);
    let ctx = src.ctx(0).clone();
    PoissonMapData::new("incl", src, y, vec![0], vec![vec![Poly::zero(&ctx); 3]])
}

/// The chain `point -> line -> plane` (origin, then the x-axis), all with
/// zero bivectors.
pub fn point_line_plane() -> Result<(PoissonMapData, PoissonMapData)> {
    let pt = Arc::new(affine_zero("pt", &[])?);
    let line = Arc::new(affine_zero("line", &["s"])?);
    let plane = Arc::new(affine_zero("plane", &["x", "y"])?);
    let f = PoissonMapData::new("f", pt.clone(), line.clone(), vec![0], vec![vec![Poly::zero(pt.ctx(0))]])?;
    let g = PoissonMapData::new("g", line.clone(), plane, vec![0], vec![vec![poly(line.ctx(0), "s")?, Poly::zero(line.ctx(0))]])?;
    Ok((f, g))
}
