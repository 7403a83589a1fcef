use std::collections::BTreeMap;

use super::rational::Rational;
use crate::error::{Error, Result};

/// Sparse rational vector: strictly increasing column indices, no zeros.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SparseVec(pub Vec<(usize, Rational)>);

impl SparseVec {
    pub fn new() -> Self {
        SparseVec(Vec::new())
    }

    pub fn from_map(m: BTreeMap<usize, Rational>) -> Self {
        SparseVec(m.into_iter().filter(|(_, c)| !c.is_zero()).collect())
    }

    pub fn from_dense(v: &[Rational]) -> Self {
        SparseVec(v.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, c)| (i, c.clone())).collect())
    }

    pub fn unit(i: usize) -> Self {
        SparseVec(vec![(i, Rational::one())])
    }

    pub fn to_dense(&self, n: usize) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); n];
        for (i, c) in &self.0 {
            v[*i] = c.clone();
        }
        v
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn lead(&self) -> Option<usize> {
        self.0.first().map(|(i, _)| *i)
    }

    pub fn get(&self, i: usize) -> Rational {
        match self.0.binary_search_by_key(&i, |(j, _)| *j) {
            Ok(k) => self.0[k].1.clone(),
            Err(_) => Rational::zero(),
        }
    }

    pub fn scale(&self, c: &Rational) -> SparseVec {
        if c.is_zero() {
            return SparseVec::new();
        }
        SparseVec(self.0.iter().map(|(i, x)| (*i, x * c)).collect())
    }

    /// self + c * other
    pub fn axpy(&self, c: &Rational, other: &SparseVec) -> SparseVec {
        if c.is_zero() {
            return self.clone();
        }
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut a, mut b) = (0, 0);
        while a < self.0.len() || b < other.0.len() {
            let ia = self.0.get(a).map(|x| x.0).unwrap_or(usize::MAX);
            let ib = other.0.get(b).map(|x| x.0).unwrap_or(usize::MAX);
            if ia < ib {
                out.push(self.0[a].clone());
                a += 1;
            } else if ib < ia {
                out.push((ib, &other.0[b].1 * c));
                b += 1;
            } else {
                let v = &self.0[a].1 + &(&other.0[b].1 * c);
                if !v.is_zero() {
                    out.push((ia, v));
                }
                a += 1;
                b += 1;
            }
        }
        SparseVec(out)
    }

    pub fn add(&self, other: &SparseVec) -> SparseVec {
        self.axpy(&Rational::one(), other)
    }

    pub fn sub(&self, other: &SparseVec) -> SparseVec {
        self.axpy(&-Rational::one(), other)
    }

    /// Keep only entries whose index satisfies `keep`.
    pub fn filter(&self, keep: impl Fn(usize) -> bool) -> SparseVec {
        SparseVec(self.0.iter().filter(|(i, _)| keep(*i)).cloned().collect())
    }

    /// Re-index entries through `f`; the result is re-sorted.
    pub fn remap(&self, f: impl Fn(usize) -> usize) -> SparseVec {
        let mut m = BTreeMap::new();
        for (i, c) in &self.0 {
            let e = m.entry(f(*i)).or_insert_with(Rational::zero);
            *e += c;
        }
        SparseVec::from_map(m)
    }
}

/// Incrementally built reduced row echelon basis. Rows are kept fully
/// reduced against each other, so the final state is the unique RREF of the
/// span of everything inserted.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    rows: BTreeMap<usize, SparseVec>,
}

impl Echelon {
    pub fn new() -> Self {
        Echelon { rows: BTreeMap::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> Vec<usize> {
        self.rows.keys().copied().collect()
    }

    /// Rows in pivot order.
    pub fn rows(&self) -> Vec<SparseVec> {
        self.rows.values().cloned().collect()
    }

    /// Reduce `v` modulo the span: the result has zero entries at every pivot.
    pub fn reduce(&self, v: &SparseVec) -> SparseVec {
        let mut v = v.clone();
        let mut k = 0;
        while k < v.0.len() {
            let col = v.0[k].0;
            if let Some(row) = self.rows.get(&col) {
                let c = -v.0[k].1.clone();
                v = v.axpy(&c, row);
                // entries before k are untouched because the row has zeros at
                // every other pivot and its lead is at `col`
            } else {
                k += 1;
            }
        }
        v
    }

    pub fn contains(&self, v: &SparseVec) -> bool {
        self.reduce(v).is_zero()
    }

    /// Insert a vector; returns true if the rank grew.
    pub fn insert(&mut self, v: &SparseVec) -> bool {
        let r = self.reduce(v);
        let Some(lead) = r.lead() else { return false };
        let inv = r.0[0].1.recip();
        let r = r.scale(&inv);
        // clear the new pivot column in existing rows
        let keys: Vec<usize> = self.rows.keys().copied().collect();
        for k in keys {
            let row = &self.rows[&k];
            let c = row.get(lead);
            if !c.is_zero() {
                let updated = row.axpy(&-c, &r);
                self.rows.insert(k, updated);
            }
        }
        self.rows.insert(lead, r);
        true
    }

    /// Coordinates of a vector of the span in the RREF basis (entries at the
    /// pivot columns). Returns None if the vector is outside the span.
    pub fn coordinates(&self, v: &SparseVec) -> Option<Vec<Rational>> {
        if !self.contains(v) {
            return None;
        }
        Some(self.rows.keys().map(|&p| v.get(p)).collect())
    }
}

/// Dense rational matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Vec<Rational>>,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix { rows, cols, entries: vec![vec![Rational::zero(); cols]; rows] }
    }

    pub fn from_ints(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map(|r| r.len()).unwrap_or(0);
        RationalMatrix {
            rows: rows.len(),
            cols,
            entries: rows.iter().map(|r| r.iter().map(|&x| Rational::from_int(x)).collect()).collect(),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries[i][i] = Rational::one();
        }
        m
    }

    /// Build from sparse columns.
    pub fn from_columns(rows: usize, cols: &[SparseVec]) -> Self {
        let mut m = Self::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for (i, x) in &c.0 {
                m.entries[*i][j] = x.clone();
            }
        }
        m
    }

    pub fn row_sparse(&self, i: usize) -> SparseVec {
        SparseVec::from_dense(&self.entries[i])
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (RationalMatrix, Vec<usize>) {
        let mut e = Echelon::new();
        for i in 0..self.rows {
            e.insert(&self.row_sparse(i));
        }
        let pivots = e.pivots();
        let mut m = Self::zeros(self.rows, self.cols);
        for (k, row) in e.rows().iter().enumerate() {
            m.entries[k] = row.to_dense(self.cols);
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Kernel basis derived from the RREF: one vector per free column, free
    /// columns in ascending order, with a 1 in its own free column.
    pub fn kernel_basis(&self) -> Vec<Vec<Rational>> {
        let (r, pivots) = self.rref();
        let mut out = Vec::new();
        for free in 0..self.cols {
            if pivots.contains(&free) {
                continue;
            }
            let mut v = vec![Rational::zero(); self.cols];
            v[free] = Rational::one();
            for (k, &p) in pivots.iter().enumerate() {
                v[p] = -r.entries[k][free].clone();
            }
            out.push(v);
        }
        out
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        self.entries
            .iter()
            .map(|row| row.iter().zip(v).fold(Rational::zero(), |acc, (a, b)| acc + a * b))
            .collect()
    }
}

/// Kernel of the linear map sending unit vector j to `images[j]`, as a
/// canonical (RREF) basis in domain coordinates.
pub fn kernel_of_images(images: &[SparseVec]) -> Vec<SparseVec> {
    let offset = images.iter().flat_map(|v| v.0.iter().map(|(i, _)| *i + 1)).max().unwrap_or(0);
    let mut e = Echelon::new();
    let mut kernel = Echelon::new();
    for (j, img) in images.iter().enumerate() {
        let mut aug = img.0.clone();
        aug.push((offset + j, Rational::one()));
        let aug = SparseVec(aug);
        let red = e.reduce(&aug);
        match red.lead() {
            Some(l) if l >= offset => {
                kernel.insert(&SparseVec(red.0.iter().map(|(i, c)| (i - offset, c.clone())).collect()));
            }
            Some(_) => {
                e.insert(&red);
            }
            None => {}
        }
    }
    kernel.rows()
}

/// Intersection of span(gens) with the coordinate subspace of indices where
/// `inside` holds. Returned as an RREF basis.
pub fn intersect_with_coordinates(gens: &[SparseVec], inside: impl Fn(usize) -> bool) -> Vec<SparseVec> {
    // order outside coordinates first so that rows leading inside are free of
    // outside entries
    let mut outside_cols: Vec<usize> = Vec::new();
    let mut inside_cols: Vec<usize> = Vec::new();
    for g in gens {
        for (i, _) in &g.0 {
            if inside(*i) {
                inside_cols.push(*i);
            } else {
                outside_cols.push(*i);
            }
        }
    }
    outside_cols.sort_unstable();
    outside_cols.dedup();
    inside_cols.sort_unstable();
    inside_cols.dedup();
    let mut to_new: BTreeMap<usize, usize> = BTreeMap::new();
    for (k, &c) in outside_cols.iter().chain(inside_cols.iter()).enumerate() {
        to_new.insert(c, k);
    }
    let back: Vec<usize> = outside_cols.iter().chain(inside_cols.iter()).copied().collect();
    let nout = outside_cols.len();
    let mut e = Echelon::new();
    for g in gens {
        e.insert(&g.remap(|i| to_new[&i]));
    }
    let mut out = Echelon::new();
    for row in e.rows() {
        if row.lead().map(|l| l >= nout).unwrap_or(false) {
            out.insert(&row.remap(|i| back[i]));
        }
    }
    out.rows()
}

/// A quotient space Z/B with a canonical complement: B is kept in RREF,
/// classes are represented by their normal form modulo B, and coordinates are
/// taken against the RREF basis of the reduced cocycle space.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub space: Echelon,
    pub sub: Echelon,
    complement: Echelon,
}

impl Quotient {
    pub fn new(space: &[SparseVec], sub: &[SparseVec]) -> Self {
        let mut s = Echelon::new();
        for v in space {
            s.insert(v);
        }
        let mut b = Echelon::new();
        for v in sub {
            b.insert(v);
        }
        let mut c = Echelon::new();
        for v in s.rows() {
            c.insert(&b.reduce(&v));
        }
        Quotient { space: s, sub: b, complement: c }
    }

    pub fn dim(&self) -> usize {
        self.complement.rank()
    }

    /// Canonical basis of the complement (class representatives).
    pub fn basis(&self) -> Vec<SparseVec> {
        self.complement.rows()
    }

    pub fn coords(&self, v: &SparseVec) -> Result<Vec<Rational>> {
        if !self.space.contains(v) {
            return Err(Error::NotInSpace);
        }
        let red = self.sub.reduce(v);
        self.complement.coordinates(&red).ok_or(Error::NotInSpace)
    }

    pub fn is_trivial_class(&self, v: &SparseVec) -> Result<bool> {
        Ok(self.coords(v)?.iter().all(|c| c.is_zero()))
    }
}

/// Coordinates of [v] in space/subspace against the canonical complement.
pub fn quotient_coords(space_basis: &[SparseVec], subspace_basis: &[SparseVec], v: &SparseVec) -> Result<Vec<Rational>> {
    Quotient::new(space_basis, subspace_basis).coords(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Rational {
        Rational::from_int(n)
    }

    #[test]
    fn kernel_examples() {
        let z = RationalMatrix::zeros(0, 3);
        assert_eq!(z.kernel_basis().len(), 3);
        assert!(RationalMatrix::identity(3).kernel_basis().is_empty());
        let m = RationalMatrix::from_ints(&[&[1, 2], &[2, 4]]);
        assert_eq!(m.kernel_basis(), vec![vec![q(-2), q(1)]]);
    }

    #[test]
    fn kernel_of_images_matches_dense() {
        let m = RationalMatrix::from_ints(&[&[1, 2, 3, 0], &[0, 1, 1, 1], &[1, 3, 4, 1]]);
        let cols: Vec<SparseVec> = (0..4)
            .map(|j| SparseVec::from_dense(&(0..3).map(|i| m.entries[i][j].clone()).collect::<Vec<_>>()))
            .collect();
        let k = kernel_of_images(&cols);
        let mut dense = Echelon::new();
        for v in m.kernel_basis() {
            dense.insert(&SparseVec::from_dense(&v));
        }
        assert_eq!(k, dense.rows());
    }

    #[test]
    fn quotient_examples() {
        let space = vec![SparseVec::unit(0), SparseVec::unit(1)];
        let sub = vec![SparseVec::from_dense(&[q(1), q(1)])];
        let a = quotient_coords(&space, &sub, &SparseVec::from_dense(&[q(1), q(0)])).unwrap();
        let b = quotient_coords(&space, &sub, &SparseVec::from_dense(&[q(0), q(-1)])).unwrap();
        assert_eq!(a.len(), 1);
        assert!(!a[0].is_zero());
        assert_eq!(a, b);
        let z = quotient_coords(&space, &sub, &SparseVec::from_dense(&[q(2), q(2)])).unwrap();
        assert!(z[0].is_zero());
        let c = quotient_coords(&space, &[], &SparseVec::from_dense(&[q(3), q(5)])).unwrap();
        assert_eq!(c, vec![q(3), q(5)]);
        let small = vec![SparseVec::unit(0)];
        assert_eq!(quotient_coords(&small, &[], &SparseVec::unit(1)), Err(Error::NotInSpace));
    }

    #[test]
    fn intersection_with_coordinate_subspace() {
        // span{(1,1,0),(0,1,1)} meets {x0 = 0} in span{(0,1,1)} ... plus nothing else
        let gens = vec![SparseVec::from_dense(&[q(1), q(1), q(0)]), SparseVec::from_dense(&[q(0), q(1), q(1)])];
        let got = intersect_with_coordinates(&gens, |i| i != 0);
        assert_eq!(got, vec![SparseVec::from_dense(&[q(0), q(1), q(1)])]);
    }
}
