//! Residuals of a lifted datum at a kernel monomial, and corrections by
//! level-0 cochains of the deformation complex.
//!
//! Level-1 entries: on the map part, the gluing defect
//! `Phi_i o phi_ij - psi_{a(i)a(j)} o Phi_j` on pairs and the Poisson defect
//! `Lambda_i(Phi^p, Phi^q) - Pi_pq o Phi_i` on charts; on each atlas part, the
//! cocycle defect `phi_ij o phi_jk - phi_ik` on triples, the compatibility
//! defect `phi_ij* Lambda_j - Lambda_i` on pairs and `-1/2 [Lambda_i, Lambda_i]`
//! on charts. Vector-valued defects are written in the coordinates of the
//! first chart of their tuple.
//!
//! A level-0 cochain `(Q, (u, lambda), (U, H))` corrects a datum by
//! `Phi_i += t^e Q_i`, `phi_ij += t^e u_ij o phi_ij` (i < j, reverse
//! transitions recomputed), `Lambda_i += t^e lambda_i`, and likewise on the
//! target. Since `t^{2e} = 0` the residual then changes by exactly the
//! incoming differential of the correction.

use std::sync::Arc;

use crate::cech::{Block, Cochain};
use crate::error::{Error, Result};
use crate::exact_algebra::{Poly, VarContext};
use crate::geometry::PoissonAtlas;
use crate::multivector::{index_tuples, Multivector};

use super::complex::DefComplex;
use super::{coefficient, embed, normalize_inverses, DeformationDatum};

/// The `t^e` coefficient of p, failing if p has any other nonzero part.
fn take(p: &Poly, e: &[u32], ctx: &Arc<VarContext>, what: &str) -> Result<Poly> {
    for (_, params, _) in p.terms() {
        if params != e {
            return Err(Error::InvalidDatum(format!("{what} fails below the kernel monomial: {p}")));
        }
    }
    Ok(coefficient(p, e, ctx))
}

fn vector(chart: &Arc<str>, ctx: &Arc<VarContext>, comps: Vec<Poly>) -> Multivector {
    let mut m = Multivector::zero(chart, ctx, comps.len(), 1);
    for (k, c) in comps.into_iter().enumerate() {
        m.set(vec![k as u16], c);
    }
    m
}

fn take_mv(m: &Multivector, e: &[u32], ctx: &Arc<VarContext>, what: &str) -> Result<Multivector> {
    m.map_coeffs(ctx, |p| take(p, e, ctx, what))
}

fn insert(out: &mut Cochain, blocks: &[Block], p: usize, q: usize, tuple: Vec<usize>, m: Multivector) {
    if m.is_zero() {
        return;
    }
    if let Some(b) = blocks.iter().position(|x| x.p == p && x.q == q) {
        out.accumulate(b, tuple, vec![m]);
    }
}

/// Level-1 atlas residual `(cocycle, compatibility, Poisson)` in `T^2`.
fn atlas_residual(a: &PoissonAtlas, base: &PoissonAtlas, e: &[u32], blocks: &[Block]) -> Result<Cochain> {
    let n = a.len();
    let mut out = Cochain::zero(blocks.len());
    let what = format!("{} identities", a.name);
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let inner = &a.transition(j, k).components;
                let mut comps = Vec::new();
                for (c, d) in a.transition(i, j).components.iter().zip(&a.transition(i, k).components) {
                    let r = take(&c.substitute(a.ctx(k), inner)?.sub(d), e, base.ctx(k), &what)?;
                    comps.push(r.substitute(base.ctx(i), &base.transition(k, i).components)?);
                }
                insert(&mut out, blocks, 1, 2, vec![i, j, k], vector(&base.charts[i].id, base.ctx(i), comps));
            }
            let pushed = a.bivectors[j].pushforward(a.transition(i, j))?;
            let r = take_mv(&pushed.sub(&a.bivectors[i]), e, base.ctx(i), &what)?;
            insert(&mut out, blocks, 2, 1, vec![i, j], r);
        }
        let lam = &a.bivectors[i];
        let sq = lam.schouten(lam)?.scale(&crate::exact_algebra::Rational::new(-1, 2));
        let r = take_mv(&sq, e, base.ctx(i), &what)?;
        insert(&mut out, blocks, 3, 0, vec![i], r);
    }
    Ok(out)
}

/// Level-1 map residual `(gluing, Poisson)` in `B^1`.
fn map_residual(d: &DeformationDatum, e: &[u32], cx: &DefComplex) -> Result<Cochain> {
    let f = &d.map;
    let (x, y) = (f.source.clone(), f.target.clone());
    let bx = &d.base.source;
    let blocks = cx.mc.b.blocks(1);
    let mut out = Cochain::zero(blocks.len());
    let what = format!("{} identities", f.name);
    for i in 0..x.len() {
        let mc = &cx.mc.ops.charts[i];
        for j in i + 1..x.len() {
            let phi = &x.transition(i, j).components;
            let rhs = f.components_into(j, f.assignment[i])?;
            let mut comps = Vec::new();
            for (c, r) in f.components[i].iter().zip(&rhs) {
                let res = take(&c.substitute(x.ctx(j), phi)?.sub(r), e, bx.ctx(j), &what)?;
                comps.push(res.substitute(bx.ctx(i), &bx.transition(j, i).components)?);
            }
            insert(&mut out, &blocks, 1, 1, vec![i, j], vector(&mc.chart, &mc.ctx, comps));
        }
        let a = f.assignment[i];
        let m = y.charts[a].dim();
        let mut res = Multivector::zero(&mc.chart, &mc.ctx, m, 2);
        for idx in index_tuples(m, 2) {
            let (p, q) = (idx[0] as usize, idx[1] as usize);
            let lhs = x.bivectors[i].evaluate(&[f.components[i][p].clone(), f.components[i][q].clone()])?;
            let rhs = y.bivectors[a].coeff(&idx).substitute(x.ctx(i), &f.components[i])?;
            res.set(idx, take(&lhs.sub(&rhs), e, &mc.ctx, &what)?);
        }
        insert(&mut out, &blocks, 2, 0, vec![i], res);
    }
    Ok(out)
}

/// The level-1 residual of a datum whose identities hold up to the kernel
/// monomial `t^e`. Parts the complex does not carry are dropped.
pub fn residuals(d: &DeformationDatum, e: &[u32], cx: &DefComplex) -> Result<Cochain> {
    let rb = map_residual(d, e, cx)?;
    let ra = if cx.parts.source {
        atlas_residual(d.source(), &d.base.source, e, &cx.mc.a.blocks(2))?
    } else {
        Cochain::zero(cx.mc.a.blocks(2).len())
    };
    let rt = if cx.parts.target {
        atlas_residual(d.target(), &d.base.target, e, &cx.ty.blocks(2))?
    } else {
        Cochain::zero(cx.ty.blocks(2).len())
    };
    Ok(cx.join(&rb, &ra, &rt))
}

fn value_at<'a>(c: &'a Cochain, blocks: &[Block], p: usize, q: usize, tuple: &[usize]) -> Option<&'a Multivector> {
    let b = blocks.iter().position(|x| x.p == p && x.q == q)?;
    c.parts[b].get(tuple).and_then(|v| v.first())
}

/// Apply an atlas correction `(u, lambda)` from a level-0 `T^1` cochain.
fn correct_atlas(a: &PoissonAtlas, base: &PoissonAtlas, e: &[u32], blocks: &[Block], c: &Cochain) -> Result<PoissonAtlas> {
    let n = a.len();
    let mut transitions = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let mut comps = a.transition(i, j).components.clone();
            if let Some(u) = value_at(c, blocks, 1, 1, &[i, j]) {
                let phi = &base.transition(i, j).components;
                for (k, comp) in comps.iter_mut().enumerate() {
                    let moved = u.coeff(&[k as u16]).substitute(base.ctx(j), phi)?;
                    comp.add_assign(&embed(&moved, e, a.ctx(j)));
                }
            }
            transitions.push((i, j, comps));
            transitions.push((j, i, a.transition(j, i).components.clone()));
        }
    }
    let mut bivectors = a.bivectors.clone();
    for (i, lam) in bivectors.iter_mut().enumerate() {
        if let Some(l) = value_at(c, blocks, 2, 0, &[i]) {
            *lam = lam.add(&l.map_coeffs(a.ctx(i), |p| Ok(embed(p, e, a.ctx(i))))?.with_chart(&a.charts[i].id));
        }
    }
    normalize_inverses(&a.with_data(transitions, bivectors)?, base)
}

/// The datum corrected by a level-0 cochain at the kernel monomial `t^e`.
pub fn apply_correction(d: &DeformationDatum, e: &[u32], cx: &DefComplex, c: &Cochain) -> Result<DeformationDatum> {
    let (q, a, t) = cx.split(0, c);
    let source = if cx.parts.source {
        correct_atlas(d.source(), &d.base.source, e, &cx.mc.a.blocks(1), &a)?
    } else {
        (**d.source()).clone()
    };
    let target = if cx.parts.target {
        correct_atlas(d.target(), &d.base.target, e, &cx.ty.blocks(1), &t)?
    } else {
        (**d.target()).clone()
    };
    let (source, target) = (Arc::new(source), Arc::new(target));
    let bblocks = cx.mc.b.blocks(0);
    let mut comps = Vec::new();
    for (i, cs) in d.map.components.iter().enumerate() {
        let ctx = source.ctx(i);
        let mut cs: Vec<Poly> = cs.iter().map(|p| p.recontext(ctx)).collect();
        if let Some(v) = value_at(&q, &bblocks, 1, 0, &[i]) {
            for (k, comp) in cs.iter_mut().enumerate() {
                comp.add_assign(&embed(&v.coeff(&[k as u16]), e, ctx));
            }
        }
        comps.push(cs);
    }
    let map = d.map.with_components(source, target, comps)?;
    DeformationDatum::new(&d.name, d.mode, d.base.clone(), Arc::new(map))
}

fn atlas_correction(a: &PoissonAtlas, base: &PoissonAtlas, e: &[u32], blocks: &[Block]) -> Result<Cochain> {
    let n = a.len();
    let mut out = Cochain::zero(blocks.len());
    for i in 0..n {
        for j in i + 1..n {
            let mut comps = Vec::new();
            for c in &a.transition(i, j).components {
                comps.push(coefficient(c, e, base.ctx(j)).substitute(base.ctx(i), &base.transition(j, i).components)?);
            }
            insert(&mut out, blocks, 1, 1, vec![i, j], vector(&base.charts[i].id, base.ctx(i), comps));
        }
        let lam = a.bivectors[i].map_coeffs(base.ctx(i), |p| Ok(coefficient(p, e, base.ctx(i))))?;
        insert(&mut out, blocks, 2, 0, vec![i], lam);
    }
    Ok(out)
}

/// The `t^e` parts of a datum as a level-0 cochain: the inverse of
/// [`apply_correction`] on a trivial datum. For a first-order datum this
/// cochain is killed by the incoming differential of level 1.
pub fn correction_of(d: &DeformationDatum, e: &[u32], cx: &DefComplex) -> Result<Cochain> {
    let bblocks = cx.mc.b.blocks(0);
    let mut q = Cochain::zero(bblocks.len());
    for (i, cs) in d.map.components.iter().enumerate() {
        let mc = &cx.mc.ops.charts[i];
        let comps = cs.iter().map(|p| coefficient(p, e, &mc.ctx)).collect();
        insert(&mut q, &bblocks, 1, 0, vec![i], vector(&mc.chart, &mc.ctx, comps));
    }
    let a = if cx.parts.source {
        atlas_correction(d.source(), &d.base.source, e, &cx.mc.a.blocks(1))?
    } else {
        Cochain::zero(cx.mc.a.blocks(1).len())
    };
    let t = if cx.parts.target {
        atlas_correction(d.target(), &d.base.target, e, &cx.ty.blocks(1))?
    } else {
        Cochain::zero(cx.ty.blocks(1).len())
    };
    Ok(cx.join(&q, &a, &t))
}
