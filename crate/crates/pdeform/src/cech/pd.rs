//! The complexes attached to a Poisson map f: `A = T_X^.`, `B = f^*T_Y^.`
//! and the chain map F between them; the spaces PD and PD^1, the kernel
//! and cokernel complexes, the family version of PD, and the rank audit of
//! the four long exact sequences relating them.

use std::sync::Arc;

use serde::Serialize;

use crate::complexes::MapOps;
use crate::error::{Error, Result};
use crate::exact_algebra::{intersect_with_coordinates, kernel_of_images, Quotient, Rational, SparseVec};
use crate::geometry::PoissonMapData;

use super::cohomology::{self, solve, Audited, Computation};
use super::space::{Block, Cochain, Space};
use super::total::{chain_f, ColumnComplex};

/// `T_X^.`, `f^*T_Y^.` and F for one Poisson map.
#[derive(Clone, Debug)]
pub struct MapComplexes {
    pub ops: Arc<MapOps>,
    pub a: ColumnComplex,
    pub b: ColumnComplex,
}

fn concat(mut x: Vec<Block>, y: Vec<Block>) -> Vec<Block> {
    x.extend(y);
    x
}

impl MapComplexes {
    pub fn new(map: Arc<PoissonMapData>) -> Result<MapComplexes> {
        let ops = Arc::new(MapOps::new(map.clone())?);
        Ok(MapComplexes { a: ColumnComplex::tangent(map.source.clone()), b: ColumnComplex::pullback(ops.clone()), ops })
    }

    pub fn f(&self, k: i64, c: &Cochain) -> Result<Cochain> {
        chain_f(&self.a, &self.b, k, c)
    }

    /// `H^k(T_X^.)` at window `w`.
    pub fn h_a(&self, k: i64, w: i32) -> Result<Computation> {
        let a = &self.a;
        cohomology::plain(w, a.blocks(k - 1), &|x| a.d(k - 1, x), a.blocks(k), &|x| a.d(k, x), a.blocks(k + 1))
    }

    /// `H^k(f^*T_Y^.)` at window `w`.
    pub fn h_b(&self, k: i64, w: i32) -> Result<Computation> {
        let b = &self.b;
        cohomology::plain(w, b.blocks(k - 1), &|x| b.d(k - 1, x), b.blocks(k), &|x| b.d(k, x), b.blocks(k + 1))
    }

    /// Blocks of `B^k (+) A^{k+1}`; degree 0 holds `(tau, rho, lambda)`,
    /// degree 1 holds `(xi, eta, s, r, w)`.
    pub fn cone_blocks(&self, k: i64) -> Vec<Block> {
        concat(self.b.blocks(k), self.a.blocks(k + 1))
    }

    fn split(&self, k: i64, c: &Cochain) -> (Cochain, Cochain) {
        let nb = self.b.blocks(k).len();
        (c.slice(0..nb), c.slice(nb..c.parts.len()))
    }

    /// Left-hand sides of the defining relations: `(D_B y - F x, D_A x)`.
    pub fn relations(&self, k: i64, c: &Cochain) -> Result<Cochain> {
        let (y, x) = self.split(k, c);
        Ok(self.b.d(k, &y)?.sub(&self.f(k + 1, &x)?).concat(&self.a.d(k + 1, &x)?))
    }

    /// Trivial elements `(F z + D_B a, D_A z)` generated by `(a, z)` in degree k - 1.
    pub fn coboundary(&self, k: i64, c: &Cochain) -> Result<Cochain> {
        let (y, x) = self.split(k - 1, c);
        Ok(self.b.d(k - 1, &y)?.add(&self.f(k, &x)?).concat(&self.a.d(k, &x)?))
    }

    /// PD (k = 0) and PD^1 (k = 1) at window `w`.
    pub fn cone(&self, k: i64, w: i32) -> Result<Computation> {
        cohomology::plain(
            w,
            self.cone_blocks(k - 1),
            &|c| self.coboundary(k, c),
            self.cone_blocks(k),
            &|c| self.relations(k, c),
            self.cone_blocks(k + 1),
        )
    }

    /// `H^k(T_{X/Y}^.)`, the kernel of F.
    pub fn h_rel(&self, k: i64, w: i32) -> Result<Computation> {
        let (a, b) = (&self.a, &self.b);
        cohomology::kernel_complex(
            w,
            a.blocks(k - 1),
            &|x| a.d(k - 1, x),
            &|x| self.f(k - 1, x),
            b.blocks(k - 1),
            a.blocks(k),
            &|x| Ok(self.f(k, x)?.concat(&a.d(k, x)?)),
            concat(b.blocks(k), a.blocks(k + 1)),
        )
    }

    /// `H^k(N_f^.)`, the cokernel of F, indexed so that `N_f^0 = coker(T_X -> f^*T_Y)`.
    pub fn h_quot(&self, k: i64, w: i32) -> Result<Computation> {
        let (a, b) = (&self.a, &self.b);
        cohomology::quotient_complex(
            w,
            b.blocks(k - 1),
            &|x| b.d(k - 1, x),
            a.blocks(k),
            &|x| self.f(k, x),
            b.blocks(k),
            &|x| b.d(k, x),
            a.blocks(k + 1),
            &|x| self.f(k + 1, x),
            b.blocks(k + 1),
        )
    }

    pub fn pd_space(&self, w: i32) -> Result<Audited> {
        Audited::run(w, |w| self.cone(0, w))
    }

    pub fn pd1_space(&self, w: i32) -> Result<Audited> {
        Audited::run(w, |w| self.cone(1, w))
    }

    /// Check that every relation of a PD-type element holds exactly.
    pub fn satisfies_relations(&self, k: i64, c: &Cochain) -> Result<bool> {
        Ok(self.relations(k, c)?.is_zero())
    }

    /// Connecting map `H^k(N_f) -> H^{k+2}(T_{X/Y})`: lift `D_B y = F x`
    /// and return `D_A x`.
    pub fn connecting(&self, k: i64, y: &Cochain, w: i32) -> Result<Cochain> {
        let target = Space::new(self.b.blocks(k + 1), 0);
        let rhs = target.to_vec(&self.b.d(k, y)?)?;
        let src = Space::new(self.a.blocks(k + 1), 0);
        for window in [w, src.preimage_window(w)?] {
            let keys = src.window_keys(window);
            let cols = src.images(&keys, &target, &|x| self.f(k + 1, x))?;
            if let Some(x) = solve(&cols, &rhs) {
                return self.a.d(k + 1, &src.combination(&keys, &x));
            }
        }
        Err(Error::WindowInsufficient("no lift of D_B y through F inside the window".into()))
    }

    /// Rank audit of the four exact sequences.
    pub fn exactness_audit(&self, w: i32) -> Result<ExactnessReport> {
        let ha: Vec<Computation> = (0..3).map(|k| self.h_a(k, w)).collect::<Result<_>>()?;
        let hb: Vec<Computation> = (0..3).map(|k| self.h_b(k, w)).collect::<Result<_>>()?;
        let cone: Vec<Computation> = (0..2).map(|k| self.cone(k, w)).collect::<Result<_>>()?;
        let rel: Vec<Computation> = (0..4).map(|k| self.h_rel(k, w)).collect::<Result<_>>()?;
        let quot: Vec<Computation> = (0..2).map(|k| self.h_quot(k, w)).collect::<Result<_>>()?;
        let mut seqs = Vec::new();
        for k in 0..2i64 {
            let ku = k as usize;
            let fk = cohomology::induced_matrix(&ha[ku], &hb[ku], &|c| self.f(k, c))?.rank();
            let nb = self.b.blocks(k).len();
            let na = self.a.blocks(k + 1).len();
            let incl = cohomology::induced_matrix(&hb[ku], &cone[ku], &|c| Ok(c.concat(&Cochain::zero(na))))?.rank();
            let proj = cohomology::induced_matrix(&cone[ku], &ha[ku + 1], &|c| Ok(c.slice(nb..nb + na)))?.rank();
            let fk1 = cohomology::induced_matrix(&ha[ku + 1], &hb[ku + 1], &|c| self.f(k + 1, c))?.rank();
            let (pd, pdn) = if k == 0 { ("PD", "a") } else { ("PD1", "c") };
            let dims = [ha[ku].dim(), hb[ku].dim(), cone[ku].dim(), ha[ku + 1].dim(), hb[ku + 1].dim()];
            let names = [format!("H{k}(T_X)"), format!("H{k}(f*T_Y)"), pd.to_string(), format!("H{}(T_X)", k + 1), format!("H{}(f*T_Y)", k + 1)];
            let ranks = [fk, incl, proj, fk1];
            let checks = vec![
                (format!("exact at {}", names[1]), fk + incl == dims[1]),
                (format!("exact at {}", names[2]), incl + proj == dims[2]),
                (format!("exact at {}", names[3]), proj + fk1 == dims[3]),
                (format!("dim {pd} = dim coker + dim ker"), dims[2] == (dims[1] - fk) + (dims[3] - fk1)),
            ];
            seqs.push(SequenceReport::new(pdn, &names, &dims, &ranks, checks));

            let j = cohomology::induced_matrix(&rel[ku + 1], &cone[ku], &|c| Ok(Cochain::zero(nb).concat(c)))?.rank();
            let p = cohomology::induced_matrix(&cone[ku], &quot[ku], &|c| Ok(c.slice(0..nb)))?.rank();
            let conn = cohomology::induced_matrix(&quot[ku], &rel[ku + 2], &|c| self.connecting(k, c, w))?.rank();
            let names = [format!("H{}(T_X/Y)", k + 1), pd.to_string(), format!("H{k}(N_f)"), format!("H{}(T_X/Y)", k + 2)];
            let dims = [rel[ku + 1].dim(), cone[ku].dim(), quot[ku].dim(), rel[ku + 2].dim()];
            let ranks = [j, p, conn];
            let checks = vec![
                (format!("injective on {}", names[0]), j == dims[0]),
                (format!("exact at {}", names[1]), j + p == dims[1]),
                (format!("exact at {}", names[2]), p + conn == dims[2]),
            ];
            seqs.push(SequenceReport::new(if k == 0 { "b" } else { "d" }, &names, &dims, &ranks, checks));
        }
        seqs.sort_by(|x, y| x.name.cmp(&y.name));
        Ok(ExactnessReport { window: w, sequences: seqs })
    }

    /// PD of the map relative to a family of targets: elements
    /// `(tau, rho, lambda, theta)` with `D_B tau = F(rho, lambda) + sum theta^v dir_v`,
    /// modulo `(F g, D_A g, 0)`. Each direction is a pair `(rho'_v, gamma_v)`
    /// laid out on the blocks of `B^1` and must be a cocycle.
    pub fn pd_family_space(&self, directions: &[Cochain], w: i32) -> Result<FamilySpace> {
        for (v, d) in directions.iter().enumerate() {
            if !self.b.d(1, d)?.is_zero() {
                return Err(Error::NotACocycle(v));
            }
        }
        let space = Space::new(self.cone_blocks(0), w);
        let next = Space::new(self.cone_blocks(1), 0);
        let keys = space.window_keys(w);
        let mut columns = space.images(&keys, &next, &|c| self.relations(0, c))?;
        let na2 = self.a.blocks(2).len();
        for d in directions {
            columns.push(next.to_vec(&d.neg().concat(&Cochain::zero(na2)))?);
        }
        let n = keys.len();
        let cycles: Vec<SparseVec> =
            kernel_of_images(&columns).iter().map(|v| v.remap(|j| if j < n { j } else { THETA + (j - n) })).collect();
        let prev = Space::new(self.cone_blocks(-1), 0);
        let pkeys = prev.window_keys(prev.preimage_window(w)?);
        let images = prev.images(&pkeys, &space, &|c| self.coboundary(0, c))?;
        let bounds = intersect_with_coordinates(&images, |i| space.is_inside(i));
        Ok(FamilySpace { quotient: Quotient::new(&cycles, &bounds), space, r: directions.len() })
    }
}

const THETA: usize = 1 << 40;

/// PD relative to a family of targets.
#[derive(Debug)]
pub struct FamilySpace {
    pub space: Space,
    pub quotient: Quotient,
    pub r: usize,
}

impl FamilySpace {
    pub fn dim(&self) -> usize {
        self.quotient.dim()
    }

    /// Class representatives as `(tau, rho, lambda)` plus the scalars theta.
    pub fn basis(&self) -> Vec<(Cochain, Vec<Rational>)> {
        self.quotient
            .basis()
            .iter()
            .map(|v| {
                let theta = (0..self.r).map(|t| v.get(THETA + t)).collect();
                (self.space.from_vec(&v.filter(|i| i < THETA)), theta)
            })
            .collect()
    }
}

/// One long exact sequence with term dimensions and arrow ranks.
#[derive(Clone, Debug, Serialize)]
pub struct SequenceReport {
    pub name: String,
    pub terms: Vec<(String, usize)>,
    pub ranks: Vec<usize>,
    pub checks: Vec<(String, bool)>,
}

impl SequenceReport {
    fn new(name: &str, names: &[String], dims: &[usize], ranks: &[usize], checks: Vec<(String, bool)>) -> SequenceReport {
        SequenceReport {
            name: name.to_string(),
            terms: names.iter().cloned().zip(dims.iter().copied()).collect(),
            ranks: ranks.to_vec(),
            checks,
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|(_, ok)| *ok)
    }
}

/// Rank audit of the sequences (a)-(d).
#[derive(Clone, Debug, Serialize)]
pub struct ExactnessReport {
    pub window: i32,
    pub sequences: Vec<SequenceReport>,
}

impl ExactnessReport {
    pub fn passed(&self) -> bool {
        self.sequences.iter().all(|s| s.passed())
    }

    pub fn render(&self) -> String {
        let mut out = format!("EXACTNESS window={}\n", self.window);
        for s in &self.sequences {
            let terms: Vec<String> = s.terms.iter().map(|(n, d)| format!("{n}[{d}]")).collect();
            let ranks: Vec<String> = s.ranks.iter().map(|r| r.to_string()).collect();
            out.push_str(&format!("SEQUENCE ({}) {} ranks={}\n", s.name, terms.join(" -> "), ranks.join(",")));
            for (what, ok) in &s.checks {
                out.push_str(&format!("  CHECK {what} {}\n", if *ok { "PASS" } else { "FAIL" }));
            }
        }
        out
    }
}
