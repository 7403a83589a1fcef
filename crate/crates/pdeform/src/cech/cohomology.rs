//! Windowed exact computation of cohomology spaces `Z / B` of cochain
//! complexes, subcomplexes, quotient complexes and cones.
//!
//! Cocycles are taken among cochains whose coefficients lie in the box
//! window of size D; coboundaries are images of the window of size 2D + w,
//! w the largest exponent picked up by frame changes (at least 2),
//! intersected with the D window. Every result is recomputed at D + 2 and
//! the dimensions compared.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact_algebra::{intersect_with_coordinates, kernel_of_images, Echelon, Quotient, Rational, RationalMatrix, SparseVec};

use super::space::{Block, Cochain, Space};

pub type Op<'a> = &'a dyn Fn(&Cochain) -> Result<Cochain>;

/// A computed quotient `Z / B` inside the window of a cochain space.
#[derive(Debug)]
pub struct Computation {
    pub space: Space,
    pub quotient: Quotient,
}

impl Computation {
    pub fn dim(&self) -> usize {
        self.quotient.dim()
    }

    /// Canonical class representatives.
    pub fn basis(&self) -> Vec<Cochain> {
        self.quotient.basis().iter().map(|v| self.space.from_vec(v)).collect()
    }

    /// Coordinates of the class of a cocycle against [`Computation::basis`].
    pub fn coords(&self, c: &Cochain) -> Result<Vec<Rational>> {
        let v = self.space.to_vec(c)?;
        if v.0.iter().any(|(i, _)| !self.space.is_inside(*i)) {
            return Err(Error::WindowInsufficient(format!("representative leaves the window D={}", self.space.window)));
        }
        self.quotient.coords(&v).map_err(|_| Error::NotACocycle(0))
    }

    pub fn is_cocycle_vec(&self, v: &SparseVec) -> bool {
        self.quotient.space.contains(v)
    }

    /// Whether a cocycle is a coboundary.
    pub fn is_trivial(&self, c: &Cochain) -> Result<bool> {
        Ok(self.coords(c)?.iter().all(|x| x.is_zero()))
    }

    pub fn blocks(&self) -> &[Block] {
        &self.space.blocks
    }
}

/// Cohomology at `cur` of `prev --d_prev--> cur --d_cur--> next`.
pub fn plain(window: i32, prev: Vec<Block>, d_prev: Op, cur: Vec<Block>, d_cur: Op, next: Vec<Block>) -> Result<Computation> {
    let space = Space::new(cur, window);
    let next_space = Space::new(next, 0);
    let keys = space.window_keys(window);
    let cycles = kernel_of_images(&space.images(&keys, &next_space, d_cur)?);
    let bounds = boundaries(&space, prev, d_prev, window)?;
    Ok(Computation { quotient: Quotient::new(&cycles, &bounds), space })
}

fn boundaries(space: &Space, prev: Vec<Block>, d_prev: Op, window: i32) -> Result<Vec<SparseVec>> {
    let prev_space = Space::new(prev, 0);
    let keys = prev_space.window_keys(prev_space.preimage_window(window)?);
    let images = prev_space.images(&keys, space, d_prev)?;
    Ok(intersect_with_coordinates(&images, |i| space.is_inside(i)))
}

/// Cohomology of the subcomplex `ker(F)`: cocycles are killed by both the
/// differential and F; coboundaries are differentials of elements of
/// `ker(F)` in the previous degree.
pub fn kernel_complex(
    window: i32,
    prev: Vec<Block>,
    d_prev: Op,
    f_prev: Op,
    f_prev_target: Vec<Block>,
    cur: Vec<Block>,
    d_and_f_cur: Op,
    d_and_f_target: Vec<Block>,
) -> Result<Computation> {
    let space = Space::new(cur, window);
    let target = Space::new(d_and_f_target, 0);
    let keys = space.window_keys(window);
    let cycles = kernel_of_images(&space.images(&keys, &target, d_and_f_cur)?);
    let prev_space = Space::new(prev, 0);
    let pkeys = prev_space.window_keys(prev_space.preimage_window(window)?);
    let ftarget = Space::new(f_prev_target, 0);
    let kernel = kernel_of_images(&prev_space.images(&pkeys, &ftarget, f_prev)?);
    let mut images = Vec::new();
    for v in &kernel {
        let c = prev_space.combination(&pkeys, v);
        images.push(space.to_vec(&d_prev(&c)?)?);
    }
    let bounds = intersect_with_coordinates(&images, |i| space.is_inside(i));
    Ok(Computation { quotient: Quotient::new(&cycles, &bounds), space })
}

/// Cohomology of the quotient complex `B / F(A)` at degree k: cocycles are
/// `y` with `D y` in the image of F, coboundaries are `D(B^{k-1}) + F(A^k)`.
#[allow(clippy::too_many_arguments)]
pub fn quotient_complex(
    window: i32,
    b_prev: Vec<Block>,
    d_b_prev: Op,
    a_cur: Vec<Block>,
    f_cur: Op,
    b_cur: Vec<Block>,
    d_b_cur: Op,
    a_next: Vec<Block>,
    f_next: Op,
    b_next: Vec<Block>,
) -> Result<Computation> {
    let space = Space::new(b_cur, window);
    let next = Space::new(b_next, 0);
    let ykeys = space.window_keys(window);
    let mut columns = space.images(&ykeys, &next, d_b_cur)?;
    let a_next_space = Space::new(a_next, 0);
    let xkeys = a_next_space.window_keys(a_next_space.preimage_window(window)?);
    let neg_f = |c: &Cochain| f_next(c).map(|x| x.neg());
    columns.extend(a_next_space.images(&xkeys, &next, &neg_f)?);
    let ny = ykeys.len();
    let mut z = Echelon::new();
    for v in kernel_of_images(&columns) {
        z.insert(&v.filter(|j| j < ny));
    }
    let mut gens = Vec::new();
    let b_prev_space = Space::new(b_prev, 0);
    let pkeys = b_prev_space.window_keys(b_prev_space.preimage_window(window)?);
    gens.extend(b_prev_space.images(&pkeys, &space, d_b_prev)?);
    let a_cur_space = Space::new(a_cur, 0);
    let akeys = a_cur_space.window_keys(a_cur_space.preimage_window(window)?);
    gens.extend(a_cur_space.images(&akeys, &space, f_cur)?);
    let bounds = intersect_with_coordinates(&gens, |i| space.is_inside(i));
    Ok(Computation { quotient: Quotient::new(&z.rows(), &bounds), space })
}

/// Result of re-running a computation at a larger window.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct Audit {
    pub window: i32,
    pub dim: usize,
    pub pass: bool,
}

/// One degree of a cohomology report.
#[derive(Clone, Debug, Serialize)]
pub struct DegreeReport {
    pub label: String,
    pub degree: i64,
    pub dim: usize,
    pub window: i32,
    pub audit: Audit,
    pub basis: Vec<Vec<String>>,
}

impl DegreeReport {
    pub fn render(&self) -> String {
        let mut s = format!(
            "{}^{} dim={} window={} audit[D={}] dim={} {}\n",
            self.label,
            self.degree,
            self.dim,
            self.window,
            self.audit.window,
            self.audit.dim,
            if self.audit.pass { "PASS" } else { "FAIL" }
        );
        for (i, b) in self.basis.iter().enumerate() {
            s.push_str(&format!("  basis[{i}]\n"));
            for line in b {
                s.push_str(&format!("    {line}\n"));
            }
        }
        s
    }
}

/// A computation at window D together with its audit at D + 2.
#[derive(Debug)]
pub struct Audited {
    pub main: Computation,
    pub audit: Audit,
}

impl Audited {
    pub fn run(window: i32, build: impl Fn(i32) -> Result<Computation>) -> Result<Audited> {
        let main = build(window)?;
        let big = build(window + 2)?;
        let audit = Audit { window: window + 2, dim: big.dim(), pass: big.dim() == main.dim() };
        Ok(Audited { main, audit })
    }

    /// Like [`Audited::run`] but failing with `WindowInsufficient` when the
    /// audit disagrees.
    pub fn run_strict(window: i32, what: &str, build: impl Fn(i32) -> Result<Computation>) -> Result<Audited> {
        let a = Audited::run(window, build)?;
        if !a.audit.pass {
            return Err(Error::WindowInsufficient(format!(
                "{what}: dim {} at D={window} but {} at D={}",
                a.main.dim(),
                a.audit.dim,
                a.audit.window
            )));
        }
        Ok(a)
    }

    pub fn dim(&self) -> usize {
        self.main.dim()
    }

    pub fn report(&self, label: &str, degree: i64) -> DegreeReport {
        DegreeReport {
            label: label.to_string(),
            degree,
            dim: self.main.dim(),
            window: self.main.space.window,
            audit: self.audit.clone(),
            basis: self.main.basis().iter().map(|c| c.dump(self.main.blocks())).collect(),
        }
    }
}

/// Matrix of the map induced on cohomology by a cochain map: column j holds
/// the coordinates of the image of the j-th source basis class.
pub fn induced_matrix(src: &Computation, dst: &Computation, op: Op) -> Result<RationalMatrix> {
    let mut cols = Vec::new();
    for b in src.basis() {
        let img = op(&b)?;
        cols.push(SparseVec::from_dense(&dst.coords(&img)?));
    }
    Ok(RationalMatrix::from_columns(dst.dim(), &cols))
}

/// Canonical solution x of `sum_j x_j columns[j] = rhs`, if any. The
/// solution is reduced against the kernel, which makes it unique.
pub fn solve(columns: &[SparseVec], rhs: &SparseVec) -> Option<SparseVec> {
    let offset = columns.iter().chain(std::iter::once(rhs)).flat_map(|v| v.0.iter().map(|(i, _)| *i + 1)).max().unwrap_or(0);
    let mut e = Echelon::new();
    for (j, c) in columns.iter().enumerate() {
        let mut aug = c.0.clone();
        aug.push((offset + j, Rational::one()));
        e.insert(&SparseVec(aug));
    }
    let red = e.reduce(rhs);
    if red.0.iter().any(|(i, _)| *i < offset) {
        return None;
    }
    Some(SparseVec(red.0.iter().map(|(i, c)| (i - offset, -c.clone())).collect()))
}
