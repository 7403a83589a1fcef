//! The complex governing deformations of a Poisson map in each mode.
//!
//! Level k is `B^k (+) A^{k+1} (+) T^{k+1}`, where the A part is present
//! when the source may deform and the T part when the target may deform.
//! The incoming differential is
//! `cob_k(b, a, s) = (D_B b + F a - f^* s, D_A a, D_T s)` and the outgoing
//! one is `rel_k(y, x, v) = (D_B y - F x + f^* v, D_A x, D_T v)`; they differ
//! only in the signs of the chain maps, and `rel_{k+1} . cob_{k+1} = 0`.
//! With only B present this is `f^*T_Y^.` itself; with B and A it is the
//! cone presenting PD and PD^1.

use std::sync::Arc;

use crate::cech::cohomology::{self, Computation};
use crate::cech::{Block, Cochain, ColumnComplex, MapComplexes, Sheaf};
use crate::error::Result;
use crate::geometry::PoissonMapData;
use crate::multivector::Multivector;

/// Which optional parts a level carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Parts {
    pub source: bool,
    pub target: bool,
}

/// The complexes of a base map and the operators between them.
#[derive(Clone, Debug)]
pub struct DefComplex {
    pub mc: MapComplexes,
    /// `T_Y^.` on the target cover.
    pub ty: ColumnComplex,
    pub parts: Parts,
}

/// Pull a cochain on the target cover back along the chart assignment.
/// The entry on a source tuple `(i_0..i_q)` is the value on the target
/// tuple `(a(i_0)..a(i_q))` (zero if two charts coincide, reordered with the
/// permutation sign otherwise), moved to chart `a(i_0)` and pulled back by
/// `pull(i_0, b_0, value)` where `b_0` is the chart the value is stored on.
pub fn pull_along_assignment(
    src: &[Block],
    dst: &[Block],
    assignment: &[usize],
    c: &Cochain,
    pull: &dyn Fn(usize, usize, &Multivector) -> Result<Multivector>,
) -> Result<Cochain> {
    let mut out = Cochain::zero(dst.len());
    for (db, block) in dst.iter().enumerate() {
        let Some(sb) = src.iter().position(|s| s.p == block.p && s.q == block.q) else { continue };
        if c.parts[sb].is_empty() {
            continue;
        }
        for tuple in block.tuples() {
            let image: Vec<usize> = tuple.iter().map(|&i| assignment[i]).collect();
            let mut sorted = image.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                continue;
            }
            let Some(v) = c.parts[sb].get(&sorted) else { continue };
            let inversions = (0..image.len()).flat_map(|a| (a + 1..image.len()).map(move |b| (a, b))).filter(|&(a, b)| image[a] > image[b]).count();
            let mut pulled = Vec::with_capacity(v.len());
            for m in v {
                let p = pull(tuple[0], sorted[0], m)?;
                pulled.push(if inversions % 2 == 0 { p } else { p.neg() });
            }
            out.accumulate(db, tuple, pulled);
        }
    }
    Ok(out)
}

impl DefComplex {
    pub fn new(base: Arc<PoissonMapData>, parts: Parts) -> Result<DefComplex> {
        let mc = MapComplexes::new(base.clone())?;
        Ok(DefComplex { mc, ty: ColumnComplex::tangent(base.target.clone()), parts })
    }

    pub fn with_parts(&self, parts: Parts) -> DefComplex {
        DefComplex { parts, ..self.clone() }
    }

    fn counts(&self, k: i64) -> (usize, usize, usize) {
        let nb = self.mc.b.blocks(k).len();
        let na = if self.parts.source { self.mc.a.blocks(k + 1).len() } else { 0 };
        let nt = if self.parts.target { self.ty.blocks(k + 1).len() } else { 0 };
        (nb, na, nt)
    }

    /// Blocks of level k.
    pub fn blocks(&self, k: i64) -> Vec<Block> {
        let mut out = self.mc.b.blocks(k);
        if self.parts.source {
            out.extend(self.mc.a.blocks(k + 1));
        }
        if self.parts.target {
            out.extend(self.ty.blocks(k + 1));
        }
        out
    }

    /// Split a level-k cochain into its B, A and T parts (absent parts empty).
    pub fn split(&self, k: i64, c: &Cochain) -> (Cochain, Cochain, Cochain) {
        let (nb, na, nt) = self.counts(k);
        let a = if self.parts.source { c.slice(nb..nb + na) } else { Cochain::zero(self.mc.a.blocks(k + 1).len()) };
        let t = if self.parts.target { c.slice(nb + na..nb + na + nt) } else { Cochain::zero(self.ty.blocks(k + 1).len()) };
        (c.slice(0..nb), a, t)
    }

    /// Assemble a level-k cochain from full B, A and T parts, dropping the
    /// parts this complex does not carry.
    pub fn join(&self, b: &Cochain, a: &Cochain, t: &Cochain) -> Cochain {
        let mut out = b.clone();
        if self.parts.source {
            out = out.concat(a);
        }
        if self.parts.target {
            out = out.concat(t);
        }
        out
    }

    /// `f^*`: `T_Y^k -> B^k`.
    pub fn fstar(&self, k: i64, c: &Cochain) -> Result<Cochain> {
        let ops = &self.mc.ops;
        pull_along_assignment(&self.ty.blocks(k), &self.mc.b.blocks(k), &ops.map.assignment, c, &|i, b, m| ops.pullback_fstar(i, b, m))
    }

    fn combine(&self, k: i64, c: &Cochain, sign: i32) -> Result<Cochain> {
        let (b, a, t) = self.split(k, c);
        let mut out_b = self.mc.b.d(k, &b)?;
        let mut out_a = Cochain::zero(self.mc.a.blocks(k + 2).len());
        let mut out_t = Cochain::zero(self.ty.blocks(k + 2).len());
        if self.parts.source {
            let fa = self.mc.f(k + 1, &a)?;
            out_b = if sign > 0 { out_b.add(&fa) } else { out_b.sub(&fa) };
            out_a = self.mc.a.d(k + 1, &a)?;
        }
        if self.parts.target {
            let ft = self.fstar(k + 1, &t)?;
            out_b = if sign > 0 { out_b.sub(&ft) } else { out_b.add(&ft) };
            out_t = self.ty.d(k + 1, &t)?;
        }
        Ok(self.join(&out_b, &out_a, &out_t))
    }

    /// Incoming differential into level k (argument in level k - 1).
    pub fn cob(&self, k: i64, c: &Cochain) -> Result<Cochain> {
        self.combine(k - 1, c, 1)
    }

    /// Outgoing differential from level k.
    pub fn rel(&self, k: i64, c: &Cochain) -> Result<Cochain> {
        self.combine(k, c, -1)
    }

    /// Flip the signs of the A and T parts: exchanges kernels of `cob_{k+1}`
    /// and `rel_k`.
    pub fn flip(&self, k: i64, c: &Cochain) -> Cochain {
        let (b, a, t) = self.split(k, c);
        self.join(&b, &a.neg(), &t.neg())
    }

    /// Cohomology of level k at window `w`.
    pub fn cohomology(&self, k: i64, w: i32) -> Result<Computation> {
        cohomology::plain(w, self.blocks(k - 1), &|c| self.cob(k, c), self.blocks(k), &|c| self.rel(k, c), self.blocks(k + 1))
    }

    /// The sheaf of the T part, for building unit cochains.
    pub fn target_sheaf(&self) -> Sheaf {
        self.ty.sheaf.clone()
    }
}
