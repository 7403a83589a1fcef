use super::*;
use crate::exact_algebra::parse_poly;

fn field() -> Arc<ParamRing> {
    Arc::new(ParamRing::field())
}

fn plane(lam: &str) -> PoissonAtlas {
    let c = Chart::new("A", &["x", "y"], &field());
    let b = Multivector::basis(&c.id, &c.ctx, &[0, 1], parse_poly(&c.ctx, lam).unwrap());
    PoissonAtlas::affine("plane", c, b).unwrap()
}

fn p1(back: &str) -> PoissonAtlas {
    let u0 = Chart::new("U0", &["z"], &field());
    let u1 = Chart::new("U1", &["w"], &field());
    let t10 = vec![parse_poly(&u0.ctx, "z^-1").unwrap()];
    let t01 = vec![parse_poly(&u1.ctx, back).unwrap()];
    let b0 = Multivector::zero(&u0.id, &u0.ctx, 1, 2);
    let b1 = Multivector::zero(&u1.id, &u1.ctx, 1, 2);
    PoissonAtlas::new("P1", vec![u0, u1], vec![(1, 0, t10), (0, 1, t01)], vec![b0, b1]).unwrap()
}

fn point_into_plane(x: &str) -> PoissonMapData {
    let y = Arc::new(plane("x"));
    let pt = Chart::new("P", &[], &field());
    let b = Multivector::zero(&pt.id, &pt.ctx, 0, 2);
    let ctx = pt.ctx.clone();
    let src = Arc::new(PoissonAtlas::affine("pt", pt, b).unwrap());
    let comps = vec![vec![parse_poly(&ctx, x).unwrap(), Poly::zero(&ctx)]];
    PoissonMapData::new("incl", src, y, vec![0], comps).unwrap()
}

#[test]
fn affine_atlas_passes() {
    let rep = validate_atlas(&plane("x"));
    assert!(rep.passed(), "{rep}");
    assert_eq!(rep.to_string(), "CHECK plane.poisson [0] PASS residual=0\n");
}

#[test]
fn p1_atlas_and_wrong_inverse() {
    assert!(validate_atlas(&p1("w^-1")).passed());
    let rep = validate_atlas(&p1("w"));
    let fail = rep.first_failure().unwrap();
    assert_eq!(fail.name, "P1.cocycle");
}

#[test]
fn identity_map_passes() {
    let a = Arc::new(p1("w^-1"));
    assert!(validate_map(&PoissonMapData::identity("id", a)).passed());
}

#[test]
fn point_inclusions() {
    assert!(validate_map(&point_into_plane("0")).passed());
    let rep = validate_map(&point_into_plane("1"));
    assert!(!rep.passed());
    assert_eq!(rep.first_failure().unwrap().name, "incl.poisson_map");
}

#[test]
fn submanifold_examples() {
    let y = Arc::new(plane("x"));
    let s = SubmanifoldData::new("X", y, vec![0], vec![vec![0]]).unwrap();
    let (rep, t) = validate_submanifold(&s);
    assert!(rep.passed(), "{rep}");
    let t = t.unwrap();
    // [x d_x ^ d_y, x] = -x d_y in the standard convention
    let v = &t.t[0][0][0];
    assert_eq!(v.coeff(&[1]).as_constant().unwrap(), crate::exact_algebra::Rational::from_int(-1));
    assert!(v.coeff(&[0]).is_zero());

    let y = Arc::new(plane("1"));
    let s = SubmanifoldData::new("X", y, vec![0], vec![vec![1]]).unwrap();
    let (rep, t) = validate_submanifold(&s);
    assert!(!rep.passed());
    assert!(t.is_none());

    let y = Arc::new(plane("0"));
    let s = SubmanifoldData::new("X", y, vec![0], vec![vec![1]]).unwrap();
    let (rep, t) = validate_submanifold(&s);
    assert!(rep.passed());
    assert!(t.unwrap().t[0][0][0].is_zero());
}
