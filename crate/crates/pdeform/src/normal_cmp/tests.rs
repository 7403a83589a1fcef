use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::exact_algebra::Rational;
use crate::geometry::samples;
use crate::multivector::random::random_in_frame;

const CUBIC: &str = "X2*X0*X1 + X2^2*X0";

fn axis_model(lam: &str) -> NormalModel {
    let y = Arc::new(samples::plane(lam).unwrap());
    NormalModel::new(Arc::new(SubmanifoldData::new("X", y, vec![0], vec![vec![0]]).unwrap())).unwrap()
}

fn line_model() -> NormalModel {
    NormalModel::new(Arc::new(samples::line_in_p2(CUBIC).unwrap())).unwrap()
}

fn section(m: &NormalModel, a: usize, p: usize, rng: &mut ChaCha8Rng) -> Multivector {
    random_in_frame(rng, &m.x.charts[a].id, m.x.ctx(a), m.ambient_dim(a), p, 3, 3)
}

fn basis(m: &NormalModel, a: usize, idx: &[u16], c: i64) -> Multivector {
    let ctx = m.x.ctx(a);
    Multivector::basis_in_frame(&m.x.charts[a].id, ctx, m.ambient_dim(a), idx, Poly::one(ctx).scale(&Rational::from_int(c)))
}

#[test]
fn nabla_on_the_axis() {
    let m = axis_model("x");
    let one = basis(&m, 0, &[], 1);
    let d = m.nabla(0, &[one]).unwrap();
    assert_eq!(d[0], basis(&m, 0, &[1], -1));
}

#[test]
fn nabla_vanishes_for_zero_structure() {
    let m = axis_model("0");
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for p in 0..3 {
        let h = section(&m, 0, p, &mut rng);
        assert!(m.nabla(0, &[h]).unwrap()[0].is_zero());
    }
}

#[test]
fn phi_examples() {
    let m = axis_model("x");
    assert!(m.phi(0, &basis(&m, 0, &[1], 1)).unwrap()[0].is_zero());
    assert_eq!(m.phi(0, &basis(&m, 0, &[0], 1)).unwrap()[0], basis(&m, 0, &[], 1));
    assert_eq!(m.phi(0, &basis(&m, 0, &[0, 1], 1)).unwrap()[0], basis(&m, 0, &[1], 1));
}

#[test]
fn phi_intertwines_pi_and_nabla() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for m in [axis_model("x"), axis_model("x*y + x^2"), line_model()] {
        for a in 0..m.x.len() {
            for p in 1..=m.ambient_dim(a) {
                for _ in 0..4 {
                    let g = section(&m, a, p, &mut rng);
                    let lhs = m.nabla(a, &m.phi(a, &g).unwrap()).unwrap();
                    let rhs = m.phi(a, &m.incl.charts[a].pi_f(&g).unwrap()).unwrap();
                    assert_eq!(lhs, rhs, "chart {a}, degree {p}");
                    let nn = m.nabla(a, &lhs).unwrap();
                    assert!(nn.iter().all(|x| x.is_zero()));
                }
            }
        }
    }
}

#[test]
fn pi_i_matches_the_pullback_differential() {
    let m = line_model();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for a in 0..m.x.len() {
        for p in 1..=2 {
            let g = section(&m, a, p, &mut rng);
            assert_eq!(m.pi_i(a, &g).unwrap(), m.incl.charts[a].pi_f(&g).unwrap());
        }
    }
}

#[test]
fn phi_is_compatible_with_chart_changes() {
    let m = line_model();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for p in 1..=2 {
        let g = section(&m, 1, p, &mut rng);
        let moved_first = m.phi(0, &m.incl.transport(&g, 1, 0).unwrap()).unwrap();
        let phi_first = m.transport(&m.phi(1, &g).unwrap(), 1, 0).unwrap();
        assert_eq!(moved_first, phi_first);
    }
}

#[test]
fn phi_kills_exactly_the_tangential_bivectors() {
    let m = line_model();
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let w = m.sub.defining[0][0] as u16;
    for _ in 0..10 {
        let g = section(&m, 0, 2, &mut rng);
        let mut tangential = g.clone();
        for (idx, _) in g.coeffs() {
            if idx.contains(&w) {
                tangential.set(idx.clone(), Poly::zero(m.x.ctx(0)));
            }
        }
        assert!(m.phi(0, &tangential).unwrap()[0].is_zero());
        let normal_part = g.sub(&tangential);
        assert_eq!(m.phi(0, &g).unwrap()[0].is_zero(), normal_part.is_zero());
    }
}

#[test]
fn comparison_on_small_examples() {
    for lam in ["x", "0", "x*y"] {
        let y = Arc::new(samples::plane(lam).unwrap());
        let sub = Arc::new(SubmanifoldData::new("X", y, vec![0], vec![vec![0]]).unwrap());
        let rep = compare_normal_cohomology(sub, 2).unwrap();
        assert!(rep.phi0_isomorphism && rep.phi1_injective, "{}", rep.render());
    }
}

#[test]
fn comparison_on_line_in_p2() {
    let rep = compare_normal_cohomology(Arc::new(samples::line_in_p2(CUBIC).unwrap()), 2).unwrap();
    assert!(rep.passed(), "{}", rep.render());
    assert_eq!(rep.maps[1].rank, rep.maps[1].cols);
}
