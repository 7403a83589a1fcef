use std::sync::Arc;

use pdeform::exact_algebra::{ParamRing, VarContext};
use pdeform::multivector::random::random_multivector;
use pdeform::multivector::Multivector;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn chart(n: usize) -> (Arc<str>, Arc<VarContext>) {
    let names = ["x", "y", "z"][..n].iter().map(|s| s.to_string()).collect();
    (Arc::from("U"), VarContext::wide(names, Arc::new(ParamRing::field())))
}

fn sign(k: usize) -> i64 {
    if k % 2 == 0 {
        1
    } else {
        -1
    }
}

fn signed(m: &Multivector, s: i64) -> Multivector {
    if s > 0 {
        m.clone()
    } else {
        m.neg()
    }
}

fn triple(seed: u64, n: usize, p: usize, q: usize, r: usize) -> (Multivector, Multivector, Multivector) {
    let (u, c) = chart(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (
        random_multivector(&mut rng, &u, &c, p, 2, 3),
        random_multivector(&mut rng, &u, &c, q, 2, 3),
        random_multivector(&mut rng, &u, &c, r, 2, 3),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn antisymmetry(seed in any::<u64>(), n in 2usize..=3, p in 0usize..=3, q in 0usize..=3) {
        let (a, b, _) = triple(seed, n, p, q, 0);
        let ab = a.schouten(&b).unwrap();
        let ba = b.schouten(&a).unwrap();
        let s = -sign((p + 1) * (q + 1));
        prop_assert_eq!(ab, signed(&ba, s));
    }

    #[test]
    fn jacobi(seed in any::<u64>(), n in 2usize..=3, p in 0usize..=3, q in 0usize..=3, r in 0usize..=3) {
        let (a, b, c) = triple(seed, n, p, q, r);
        let t1 = a.schouten(&b.schouten(&c).unwrap()).unwrap();
        let t2 = b.schouten(&c.schouten(&a).unwrap()).unwrap();
        let t3 = c.schouten(&a.schouten(&b).unwrap()).unwrap();
        let sum = signed(&t1, sign((p + 1) * (r + 1)))
            .add(&signed(&t2, sign((q + 1) * (p + 1))))
            .add(&signed(&t3, sign((r + 1) * (q + 1))));
        prop_assert!(sum.is_zero(), "{:?}", sum);
    }

    #[test]
    fn leibniz(seed in any::<u64>(), n in 2usize..=3, p in 0usize..=3, q in 0usize..=2, r in 0usize..=2) {
        let (a, b, c) = triple(seed, n, p, q, r);
        let lhs = a.schouten(&b.wedge(&c).unwrap()).unwrap();
        let rhs = a.schouten(&b).unwrap().wedge(&c).unwrap()
            .add(&signed(&b.wedge(&a.schouten(&c).unwrap()).unwrap(), sign((p + 1) * q)));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn wedge_graded_commutative(seed in any::<u64>(), n in 2usize..=3, p in 0usize..=3, q in 0usize..=3) {
        let (a, b, _) = triple(seed, n, p, q, 0);
        prop_assert_eq!(a.wedge(&b).unwrap(), signed(&b.wedge(&a).unwrap(), sign(p * q)));
    }
}
