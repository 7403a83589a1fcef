//! Seeded random polynomials and multivectors for property checks.

use std::sync::Arc;

use rand::Rng;

use crate::exact_algebra::{Poly, Rational, VarContext};

use super::{index_tuples, Multivector};

/// Random polynomial with up to `terms` terms, nonnegative chart exponents of
/// total degree at most `max_deg`, small integer coefficients. Parameters are
/// not used.
pub fn random_poly<R: Rng>(rng: &mut R, ctx: &Arc<VarContext>, terms: usize, max_deg: i32) -> Poly {
    let n = ctx.n();
    let r = ctx.r();
    let mut p = Poly::zero(ctx);
    for _ in 0..terms {
        let mut e = vec![0i32; n];
        let mut budget = rng.gen_range(0..=max_deg);
        for slot in e.iter_mut() {
            if budget == 0 {
                break;
            }
            let k = rng.gen_range(0..=budget);
            *slot = k;
            budget -= k;
        }
        if n > 0 {
            let shift = rng.gen_range(0..n);
            e.rotate_left(shift);
        }
        let c = rng.gen_range(-3i64..=3);
        if c != 0 {
            p.add_assign(&Poly::monomial(ctx, &e, &vec![0; r], Rational::from_int(c)));
        }
    }
    p
}

/// Random degree-`p` tangent multivector on a chart.
pub fn random_multivector<R: Rng>(
    rng: &mut R,
    chart: &Arc<str>,
    ctx: &Arc<VarContext>,
    p: usize,
    terms: usize,
    max_deg: i32,
) -> Multivector {
    random_in_frame(rng, chart, ctx, ctx.n(), p, terms, max_deg)
}

/// Random degree-`p` element of a frame of size `frame` with coefficients in `ctx`.
pub fn random_in_frame<R: Rng>(
    rng: &mut R,
    chart: &Arc<str>,
    ctx: &Arc<VarContext>,
    frame: usize,
    p: usize,
    terms: usize,
    max_deg: i32,
) -> Multivector {
    let mut m = Multivector::zero(chart, ctx, frame, p);
    for idx in index_tuples(frame, p) {
        if rng.gen_bool(0.7) {
            m.set(idx, random_poly(rng, ctx, terms, max_deg));
        }
    }
    m
}
