//! Total complexes of Čech cochains with values in a complex of multivector
//! sheaves, and chain maps between them.
//!
//! Total degree k collects the blocks `C^q(wedge^p)` with
//! `q + (p - p_lo) = k`, listed by decreasing q. The total differential
//! sends the `(p, q)` entry to `sigma(k, q) delta` in `(p, q + 1)` and to
//! the column differential in `(p + 1, q)`. The Čech signs reproduce the
//! relations written for deformations of Poisson maps, e.g.
//! `D(g) = (-delta g, d g)`, `D(rho, lambda) = (delta rho, delta lambda + d rho, d lambda)`
//! and `D(s, r, w) = (delta s, d s - delta r, d r - delta w, d w)`.

use std::sync::Arc;

use crate::complexes::{atlas_d, MapOps};
use crate::error::Result;
use crate::exact_algebra::Rational;
use crate::geometry::PoissonAtlas;
use crate::normal_cmp::NormalModel;

use super::space::{cech_delta, Block, Cochain, Sheaf, Value};

/// The differential along the sheaf direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Differential {
    Lichnerowicz,
    Pi,
    Nabla,
    Zero,
}

/// A complex of multivector sheaves `wedge^{p_lo} -> .. -> wedge^{p_hi}`.
#[derive(Clone, Debug)]
pub struct ColumnComplex {
    pub sheaf: Sheaf,
    pub p_lo: usize,
    pub p_hi: usize,
    pub diff: Differential,
}

/// Sign of the Čech part of the total differential on `C^q` in total degree k.
pub fn delta_sign(k: i64, q: usize) -> i32 {
    const BY_Q: [i32; 4] = [-1, -1, 1, -1];
    let s = if q < 4 { BY_Q[q] } else { -1 };
    if k.rem_euclid(2) == 0 {
        s
    } else {
        -s
    }
}

fn scaled(v: &Value, s: i32) -> Value {
    if s > 0 {
        v.clone()
    } else {
        v.iter().map(|m| m.neg()).collect()
    }
}

impl ColumnComplex {
    /// `T_X^.`: `T -> wedge^2 T -> ..` with the Lichnerowicz differential.
    pub fn tangent(atlas: Arc<PoissonAtlas>) -> ColumnComplex {
        let n = atlas.dim();
        ColumnComplex { sheaf: Sheaf::Tangent(atlas), p_lo: 1, p_hi: n.max(1), diff: Differential::Lichnerowicz }
    }

    /// `f^*T_Y^.` with the differential `pi_f`.
    pub fn pullback(ops: Arc<MapOps>) -> ColumnComplex {
        let m = ops.target().dim();
        ColumnComplex { sheaf: Sheaf::Pullback(ops), p_lo: 1, p_hi: m.max(1), diff: Differential::Pi }
    }

    /// `N_{X/Y} -> N_{X/Y} (x) T_Y|_X -> ..` with the normal differential.
    pub fn normal(model: Arc<NormalModel>) -> ColumnComplex {
        let m = model.sub.ambient.dim();
        ColumnComplex { sheaf: Sheaf::Normal(model), p_lo: 0, p_hi: m, diff: Differential::Nabla }
    }

    /// One sheaf in one multivector degree with zero differential.
    pub fn single(sheaf: Sheaf, p: usize) -> ColumnComplex {
        ColumnComplex { sheaf, p_lo: p, p_hi: p, diff: Differential::Zero }
    }

    pub fn charts(&self) -> usize {
        self.sheaf.cover().len()
    }

    /// Blocks of total degree k, by decreasing Čech degree.
    pub fn blocks(&self, k: i64) -> Vec<Block> {
        let mut out = Vec::new();
        for p in self.p_lo..=self.p_hi {
            let q = k - (p - self.p_lo) as i64;
            if q >= 0 && (q as usize) < self.charts() {
                out.push(Block::new(self.sheaf.clone(), p, q as usize));
            }
        }
        out
    }

    /// Position of the `(p, q)` block in total degree k.
    pub fn position(&self, k: i64, p: usize, q: usize) -> Option<usize> {
        self.blocks(k).iter().position(|b| b.p == p && b.q == q)
    }

    /// The column differential on a value living on chart `i0`.
    pub fn column_d(&self, i0: usize, v: &Value) -> Result<Value> {
        match (&self.sheaf, self.diff) {
            (Sheaf::Tangent(a), Differential::Lichnerowicz) => Ok(vec![atlas_d(a, i0, &v[0])?]),
            (Sheaf::Pullback(ops), Differential::Pi) => Ok(vec![ops.charts[i0].pi_f(&v[0])?]),
            (Sheaf::Normal(n), Differential::Nabla) => n.nabla(i0, v),
            (s, _) => {
                let p = v.first().map(|m| m.degree()).unwrap_or(0);
                Ok(s.zero_value(i0, p + 1))
            }
        }
    }

    /// Total differential from degree k to degree k + 1.
    pub fn d(&self, k: i64, c: &Cochain) -> Result<Cochain> {
        let src = self.blocks(k);
        let mut out = Cochain::zero(self.blocks(k + 1).len());
        for (b, block) in src.iter().enumerate() {
            let part = &c.parts[b];
            if part.is_empty() {
                continue;
            }
            if let Some(t) = self.position(k + 1, block.p, block.q + 1) {
                let s = delta_sign(k, block.q);
                for (tuple, v) in cech_delta(block, part)? {
                    out.accumulate(t, tuple, scaled(&v, s));
                }
            }
            if block.p < self.p_hi && self.diff != Differential::Zero {
                if let Some(t) = self.position(k + 1, block.p + 1, block.q) {
                    for (tuple, v) in part {
                        out.accumulate(t, tuple.clone(), self.column_d(tuple[0], v)?);
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Apply a chart-local map block by block from degree k of `src` to degree
/// k of `dst`, sending `wedge^p` to `wedge^{p + shift}`.
pub fn blockwise(
    src: &ColumnComplex,
    dst: &ColumnComplex,
    k: i64,
    shift: i64,
    c: &Cochain,
    f: &dyn Fn(usize, &Value) -> Result<Value>,
) -> Result<Cochain> {
    let target_k = shifted_degree(src, dst, k, shift);
    let mut out = Cochain::zero(dst.blocks(target_k).len());
    for (b, block) in src.blocks(k).iter().enumerate() {
        let p = block.p as i64 + shift;
        if p < 0 {
            continue;
        }
        let Some(t) = dst.position(target_k, p as usize, block.q) else { continue };
        for (tuple, v) in &c.parts[b] {
            out.accumulate(t, tuple.clone(), f(tuple[0], v)?);
        }
    }
    Ok(out)
}

/// Total degree of `dst` matching degree k of `src` under a column shift.
pub fn shifted_degree(src: &ColumnComplex, dst: &ColumnComplex, k: i64, shift: i64) -> i64 {
    k + shift + src.p_lo as i64 - dst.p_lo as i64
}

/// `F`: `T_X^. -> f^*T_Y^.` on cochains of total degree k.
pub fn chain_f(a: &ColumnComplex, b: &ColumnComplex, k: i64, c: &Cochain) -> Result<Cochain> {
    let Sheaf::Pullback(ops) = &b.sheaf else { unreachable!("target of F is a pullback complex") };
    blockwise(a, b, k, 0, c, &|i0, v| Ok(vec![ops.charts[i0].chain_map_f(&v[0])?]))
}

/// Multiply a cochain by a rational.
pub fn scale(c: &Cochain, s: i64) -> Cochain {
    c.scale(&Rational::from_int(s))
}
