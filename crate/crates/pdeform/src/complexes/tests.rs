use super::*;
use crate::exact_algebra::{parse_poly, ParamRing};
use crate::geometry::Chart;
use crate::multivector::random::{random_in_frame, random_multivector, random_poly};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn field() -> Arc<ParamRing> {
    Arc::new(ParamRing::field())
}

fn plane(lam: &str) -> Arc<PoissonAtlas> {
    let c = Chart::new("A", &["x", "y"], &field());
    let b = Multivector::basis(&c.id, &c.ctx, &[0, 1], parse_poly(&c.ctx, lam).unwrap());
    Arc::new(PoissonAtlas::affine("plane", c, b).unwrap())
}

/// The x-axis `{y = 0}` with zero structure, included into the plane.
fn axis_into(y: Arc<PoissonAtlas>) -> PoissonMapData {
    let c = Chart::new("L", &["x"], &field());
    let ctx = c.ctx.clone();
    let b = Multivector::zero(&c.id, &ctx, 1, 2);
    let x = Arc::new(PoissonAtlas::affine("axis", c, b).unwrap());
    PoissonMapData::new("incl", x, y, vec![0], vec![vec![Poly::var(&ctx, 0), Poly::zero(&ctx)]]).unwrap()
}

#[test]
fn lichnerowicz_examples() {
    let y = plane("x");
    let ctx = y.ctx(0).clone();
    let id = &y.charts[0].id;
    let one = Multivector::function(id, Poly::one(&ctx));
    assert!(atlas_d(&y, 0, &one).unwrap().is_zero());
    let fy = Multivector::function(id, Poly::var(&ctx, 1));
    let d = atlas_d(&y, 0, &fy).unwrap();
    assert_eq!(d, Multivector::basis(id, &ctx, &[0], parse_poly(&ctx, "-x").unwrap()));
    let z = plane("0");
    assert!(atlas_d(&z, 0, &Multivector::function(id, Poly::var(&ctx, 1))).unwrap().is_zero());
}

#[test]
fn pi_of_identity_is_lichnerowicz() {
    let y = plane("x^2*y + y");
    let ops = MapOps::new(Arc::new(PoissonMapData::identity("id", y.clone()))).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for p in 0..3 {
        let q = random_multivector(&mut rng, &y.charts[0].id, y.ctx(0), p, 3, 3);
        assert_eq!(ops.pi_f(&q).unwrap(), atlas_d(&y, 0, &q).unwrap());
        assert_eq!(ops.chain_map_f(&q).unwrap(), q);
    }
}

#[test]
fn pi_on_axis_examples() {
    let f = axis_into(plane("y"));
    let ops = MapOps::new(Arc::new(f)).unwrap();
    let mc = &ops.charts[0];
    let dy = Multivector::basis_in_frame(&mc.chart, &mc.ctx, 2, &[1], Poly::one(&mc.ctx));
    let p = ops.pi_f(&dy).unwrap();
    assert_eq!(p.coeff(&[0, 1]), parse_poly(&mc.ctx, "-1").unwrap());
    let dx = Multivector::basis_in_frame(&mc.chart, &mc.ctx, 2, &[0], Poly::one(&mc.ctx));
    assert!(ops.pi_f(&dx).unwrap().is_zero());
    let u = Multivector::basis(&mc.chart, &mc.ctx, &[0], Poly::one(&mc.ctx));
    assert_eq!(ops.chain_map_f(&u).unwrap(), dx);
    let pi0 = ops.target().bivectors[0].clone();
    assert!(ops.pullback_fstar(0, 0, &pi0).unwrap().is_zero());
}

fn source_plane() -> Arc<PoissonAtlas> {
    let c = Chart::new("S", &["s", "t"], &field());
    let lam = Multivector::basis(&c.id, &c.ctx, &[0, 1], parse_poly(&c.ctx, "s").unwrap());
    Arc::new(PoissonAtlas::affine("src", c, lam).unwrap())
}

fn map_ops(y: Arc<PoissonAtlas>, comps: [&str; 2]) -> MapOps {
    let x = source_plane();
    let ctx = x.ctx(0).clone();
    let comps = comps.iter().map(|c| parse_poly(&ctx, c).unwrap()).collect();
    MapOps::new(Arc::new(PoissonMapData::new("f", x, y, vec![0], vec![comps]).unwrap())).unwrap()
}

#[test]
fn literal_and_coordinate_routes_agree() {
    // on coordinate arguments the two routes agree for any map
    let y = plane("x*y^2 + x");
    let ops = map_ops(y.clone(), ["s*t", "s + t^2"]);
    let mc = &ops.charts[0];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for deg in 0..2 {
        let q = random_in_frame(&mut rng, &mc.chart, &mc.ctx, 2, deg, 3, 2);
        let pq = mc.pi_f(&q).unwrap();
        for j in index_tuples(2, deg + 1) {
            let args: Vec<Poly> = j.iter().map(|&v| Poly::var(y.ctx(0), v as usize)).collect();
            assert_eq!(pq.coeff(&j), mc.pi_f_on(&q, &args).unwrap());
        }
    }
}

#[test]
fn literal_formula_is_a_multiderivation_for_poisson_maps() {
    let y = plane("x");
    let ops = map_ops(y.clone(), ["s", "t + s^2"]);
    assert!(crate::geometry::validate_map(&ops.map).passed());
    let mc = &ops.charts[0];
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for deg in 0..3 {
        let q = random_in_frame(&mut rng, &mc.chart, &mc.ctx, 2, deg, 3, 2);
        let pq = mc.pi_f(&q).unwrap();
        let args: Vec<Poly> = (0..=deg).map(|_| random_poly(&mut rng, y.ctx(0), 3, 2)).collect();
        let rows: Vec<Vec<Poly>> =
            args.iter().map(|a| (0..2).map(|v| a.deriv(v).substitute(&mc.ctx, &mc.f).unwrap()).collect()).collect();
        assert_eq!(pq.contract_gradients(&rows), mc.pi_f_on(&q, &args).unwrap());
    }
}

#[test]
fn squares_commute_for_a_poisson_map() {
    let y = plane("x");
    let ops = map_ops(y.clone(), ["s", "t + s^2"]);
    let x = ops.source().clone();
    let mc = &ops.charts[0];
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for deg in 0..3 {
        let q = random_in_frame(&mut rng, &mc.chart, &mc.ctx, 2, deg, 3, 2);
        let pq = ops.pi_f(&q).unwrap();
        assert!(ops.pi_f(&pq).unwrap().is_zero(), "pi^2 != 0 in degree {deg}");
        let u = random_multivector(&mut rng, &mc.chart, &mc.ctx, deg, 3, 2);
        let lhs = ops.pi_f(&ops.chain_map_f(&u).unwrap()).unwrap();
        let rhs = ops.chain_map_f(&atlas_d(&x, 0, &u).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
        let w = random_multivector(&mut rng, &y.charts[0].id, y.ctx(0), deg, 3, 2);
        let lhs = ops.pi_f(&ops.pullback_fstar(0, 0, &w).unwrap()).unwrap();
        let rhs = ops.pullback_fstar(0, 0, &atlas_d(&y, 0, &w).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
        let d = atlas_d(&x, 0, &u).unwrap();
        assert!(atlas_d(&x, 0, &d).unwrap().is_zero());
    }
}

#[test]
fn composite_point_line_plane() {
    let y = plane("0");
    let g = Arc::new(axis_into(y));
    let pt = Chart::new("P", &[], &field());
    let pctx = pt.ctx.clone();
    let pb = Multivector::zero(&pt.id, &pctx, 0, 2);
    let src = Arc::new(PoissonAtlas::affine("pt", pt, pb).unwrap());
    let f = Arc::new(PoissonMapData::new("p", src, g.source.clone(), vec![0], vec![vec![Poly::zero(&pctx)]]).unwrap());
    let ops = CompositeOps::new(f, g).unwrap();
    // a line vector d_x at the point maps to the plane vector d_x at the origin
    let v = Multivector::basis_in_frame(&ops.f.charts[0].chart, &pctx, 1, &[0], Poly::one(&pctx));
    let w = ops.fstar_g(0, &v).unwrap();
    assert_eq!(w.coeff(&[0]), Poly::one(&pctx));
    assert!(w.coeff(&[1]).is_zero());
}
