//! Čech cochains with values in multivector sheaves, the coboundary, and
//! finite monomial windows turning cochain spaces into coordinate spaces.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::complexes::MapOps;
use crate::error::{Error, Result};
use crate::exact_algebra::{Poly, Rational, SparseVec};
use crate::geometry::PoissonAtlas;
use crate::multivector::{index_tuples, Index, Multivector};
use crate::normal_cmp::NormalModel;

/// The sheaf a block of cochains takes values in. The multivector degree is
/// carried by the block.
#[derive(Clone, Debug)]
pub enum Sheaf {
    /// `wedge^p T` of an atlas.
    Tangent(Arc<PoissonAtlas>),
    /// `wedge^p f^*T_Y` along a map, on the source cover.
    Pullback(Arc<MapOps>),
    /// `N_{X/Y} (x) wedge^p T_Y|_X`, as r copies of `wedge^p T_Y|_X`.
    Normal(Arc<NormalModel>),
}

impl Sheaf {
    pub fn cover(&self) -> &Arc<PoissonAtlas> {
        match self {
            Sheaf::Tangent(a) => a,
            Sheaf::Pullback(m) => m.source(),
            Sheaf::Normal(n) => &n.x,
        }
    }

    pub fn copies(&self) -> usize {
        match self {
            Sheaf::Normal(n) => n.sub.codim(),
            _ => 1,
        }
    }

    /// Frame size of values on chart i.
    pub fn frame(&self, i: usize) -> usize {
        match self {
            Sheaf::Tangent(a) => a.charts[i].dim(),
            Sheaf::Pullback(m) => m.charts[i].m,
            Sheaf::Normal(n) => n.ambient_dim(i),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Sheaf::Tangent(_) => "T",
            Sheaf::Pullback(_) => "f*T",
            Sheaf::Normal(_) => "N",
        }
    }

    /// Express a value given on chart j in the coordinates of chart i.
    pub fn transport(&self, v: &[Multivector], j: usize, i: usize) -> Result<Vec<Multivector>> {
        if i == j {
            return Ok(v.to_vec());
        }
        match self {
            Sheaf::Tangent(a) => v.iter().map(|m| m.pushforward(a.transition(i, j))).collect(),
            Sheaf::Pullback(ops) => v.iter().map(|m| ops.transport(m, j, i)).collect(),
            Sheaf::Normal(n) => n.transport(v, j, i),
        }
    }

    /// Zero value on chart i in multivector degree p.
    pub fn zero_value(&self, i: usize, p: usize) -> Vec<Multivector> {
        let cover = self.cover();
        (0..self.copies()).map(|_| Multivector::zero(&cover.charts[i].id, cover.ctx(i), self.frame(i), p)).collect()
    }

    fn same(&self, other: &Sheaf) -> bool {
        match (self, other) {
            (Sheaf::Tangent(a), Sheaf::Tangent(b)) => Arc::ptr_eq(a, b),
            (Sheaf::Pullback(a), Sheaf::Pullback(b)) => Arc::ptr_eq(a, b),
            (Sheaf::Normal(a), Sheaf::Normal(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

/// Čech q-cochains of `wedge^p` of a sheaf.
#[derive(Clone, Debug)]
pub struct Block {
    pub sheaf: Sheaf,
    pub p: usize,
    pub q: usize,
}

impl Block {
    pub fn new(sheaf: Sheaf, p: usize, q: usize) -> Block {
        Block { sheaf, p, q }
    }

    pub fn tuples(&self) -> Vec<Vec<usize>> {
        chart_tuples(self.sheaf.cover().len(), self.q + 1)
    }

    pub fn same(&self, other: &Block) -> bool {
        self.p == other.p && self.q == other.q && self.sheaf.same(&other.sheaf)
    }

    /// Largest exponent of any chart variable in a unit frame element moved
    /// between two charts. Preimages of coboundaries can need monomials this
    /// much beyond twice the window.
    pub fn frame_weight(&self) -> Result<i32> {
        let cover = self.sheaf.cover();
        let n = cover.len();
        let mut weight = 0;
        for j in 0..n {
            for idx in index_tuples(self.sheaf.frame(j), self.p) {
                for copy in 0..self.sheaf.copies() {
                    let mut v = self.sheaf.zero_value(j, self.p);
                    v[copy].set(idx.clone(), Poly::one(cover.ctx(j)));
                    for i in (0..n).filter(|&i| i != j) {
                        for m in self.sheaf.transport(&v, j, i)? {
                            for p in m.coeffs().values() {
                                for (e, _, _) in p.terms() {
                                    weight = e.iter().fold(weight, |w, x| w.max(x.abs()));
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(weight)
    }

    pub fn label(&self) -> String {
        format!("C^{}({}^{})", self.q, self.sheaf.label(), self.p)
    }
}

/// Increasing tuples of `len` distinct chart indices out of `n`.
pub fn chart_tuples(n: usize, len: usize) -> Vec<Vec<usize>> {
    index_tuples(n, len).into_iter().map(|t| t.into_iter().map(|x| x as usize).collect()).collect()
}

pub type Value = Vec<Multivector>;

/// An element of a direct sum of cochain blocks. Each block maps increasing
/// chart tuples to values expressed in the coordinates of the first chart;
/// missing tuples are zero.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Cochain {
    pub parts: Vec<BTreeMap<Vec<usize>, Value>>,
}

fn value_is_zero(v: &Value) -> bool {
    v.iter().all(|m| m.is_zero())
}

fn value_add(a: &Value, b: &Value) -> Value {
    a.iter().zip(b).map(|(x, y)| x.add(y)).collect()
}

impl Cochain {
    pub fn zero(blocks: usize) -> Cochain {
        Cochain { parts: vec![BTreeMap::new(); blocks] }
    }

    pub fn is_zero(&self) -> bool {
        self.parts.iter().all(|p| p.values().all(value_is_zero))
    }

    /// Add `v` at `(block, tuple)`.
    pub fn accumulate(&mut self, block: usize, tuple: Vec<usize>, v: Value) {
        if value_is_zero(&v) {
            return;
        }
        match self.parts[block].get_mut(&tuple) {
            Some(old) => {
                let s = value_add(old, &v);
                if value_is_zero(&s) {
                    self.parts[block].remove(&tuple);
                } else {
                    *old = s;
                }
            }
            None => {
                self.parts[block].insert(tuple, v);
            }
        }
    }

    pub fn add(&self, other: &Cochain) -> Cochain {
        let mut out = self.clone();
        for (b, part) in other.parts.iter().enumerate() {
            for (t, v) in part {
                out.accumulate(b, t.clone(), v.clone());
            }
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> Cochain {
        let mut out = Cochain::zero(self.parts.len());
        if c.is_zero() {
            return out;
        }
        for (b, part) in self.parts.iter().enumerate() {
            for (t, v) in part {
                out.parts[b].insert(t.clone(), v.iter().map(|m| m.scale(c)).collect());
            }
        }
        out
    }

    pub fn neg(&self) -> Cochain {
        self.scale(&Rational::from_int(-1))
    }

    pub fn sub(&self, other: &Cochain) -> Cochain {
        self.add(&other.neg())
    }

    /// Concatenate block lists.
    pub fn concat(&self, other: &Cochain) -> Cochain {
        let mut parts = self.parts.clone();
        parts.extend(other.parts.iter().cloned());
        Cochain { parts }
    }

    /// Blocks `range` as a cochain of their own.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Cochain {
        Cochain { parts: self.parts[range].to_vec() }
    }

    pub fn get(&self, block: usize, tuple: &[usize]) -> Option<&Value> {
        self.parts[block].get(tuple)
    }

    /// Human-readable dump, one line per nonzero entry.
    pub fn dump(&self, blocks: &[Block]) -> Vec<String> {
        let mut out = Vec::new();
        for (b, part) in self.parts.iter().enumerate() {
            for (t, v) in part {
                for (c, m) in v.iter().enumerate() {
                    if m.is_zero() {
                        continue;
                    }
                    let tuple: Vec<String> = t.iter().map(|i| blocks[b].sheaf.cover().charts[*i].id.to_string()).collect();
                    let copy = if blocks[b].sheaf.copies() > 1 { format!(" e{}", c + 1) } else { String::new() };
                    out.push(format!("{} ({}){}: {}", blocks[b].label(), tuple.join(","), copy, m.entries_string("d").join("; ")));
                }
            }
        }
        out
    }
}

/// Čech coboundary of one block: `(dc)_{i0..i(q+1)} = sum_k (-1)^k c_{..^ik..}`,
/// with the k = 0 term moved from chart i1 to chart i0.
pub fn cech_delta(block: &Block, part: &BTreeMap<Vec<usize>, Value>) -> Result<BTreeMap<Vec<usize>, Value>> {
    let n = block.sheaf.cover().len();
    let mut out: BTreeMap<Vec<usize>, Value> = BTreeMap::new();
    if part.is_empty() {
        return Ok(out);
    }
    for t in chart_tuples(n, block.q + 2) {
        let mut acc = block.sheaf.zero_value(t[0], block.p);
        let mut any = false;
        for k in 0..t.len() {
            let face: Vec<usize> = t.iter().enumerate().filter(|(s, _)| *s != k).map(|(_, &x)| x).collect();
            let Some(v) = part.get(&face) else { continue };
            any = true;
            let moved = if k == 0 { block.sheaf.transport(v, t[1], t[0])? } else { v.clone() };
            acc = if k % 2 == 0 { value_add(&acc, &moved) } else { acc.iter().zip(&moved).map(|(x, y)| x.sub(y)).collect() };
        }
        if any && !value_is_zero(&acc) {
            out.insert(t, acc);
        }
    }
    Ok(out)
}

/// Coordinate of a cochain entry: block, tuple, copy, multi-index, monomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Key {
    pub block: usize,
    pub tuple: Vec<usize>,
    pub copy: usize,
    pub idx: Index,
    pub mono: Vec<i32>,
}

#[derive(Debug, Default)]
struct Coords {
    keys: Vec<Key>,
    map: HashMap<Key, usize>,
}

impl Coords {
    fn intern(&mut self, k: Key) -> usize {
        if let Some(&i) = self.map.get(&k) {
            return i;
        }
        let i = self.keys.len();
        self.keys.push(k.clone());
        self.map.insert(k, i);
        i
    }
}

/// Monomials of a box window: unit variables range over `[-d, d]`, the
/// others over `[0, d]`; ordered by total degree, then lexicographically.
pub fn window_monomials(n: usize, units: &[usize], d: i32) -> Vec<Vec<i32>> {
    let mut out: Vec<Vec<i32>> = vec![vec![]];
    for v in 0..n {
        let lo = if units.contains(&v) { -d } else { 0 };
        let mut next = Vec::new();
        for m in &out {
            for e in lo..=d {
                let mut m2 = m.clone();
                m2.push(e);
                next.push(m2);
            }
        }
        out = next;
    }
    out.sort_by(|a, b| {
        let da: i32 = a.iter().sum();
        let db: i32 = b.iter().sum();
        da.cmp(&db).then_with(|| b.cmp(a))
    });
    out
}

/// A direct sum of cochain blocks with a coordinate system. The keys of the
/// window-`window` basis are interned first, so coordinates below
/// [`Space::inside`] are exactly the window; other keys are appended as they
/// appear.
#[derive(Debug)]
pub struct Space {
    pub blocks: Vec<Block>,
    pub window: i32,
    inside: usize,
    coords: RefCell<Coords>,
}

impl Space {
    pub fn new(blocks: Vec<Block>, window: i32) -> Space {
        let s = Space { blocks, window, inside: 0, coords: RefCell::new(Coords::default()) };
        let keys = s.window_keys(window);
        let inside = keys.len();
        {
            let mut c = s.coords.borrow_mut();
            for k in keys {
                c.intern(k);
            }
        }
        Space { inside, ..s }
    }

    pub fn inside(&self) -> usize {
        self.inside
    }

    pub fn is_inside(&self, i: usize) -> bool {
        i < self.inside
    }

    pub fn key(&self, i: usize) -> Key {
        self.coords.borrow().keys[i].clone()
    }

    pub fn len_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Units on the overlap of a tuple for a block's cover.
    pub fn units(&self, block: usize, tuple: &[usize]) -> Vec<usize> {
        self.blocks[block].sheaf.cover().overlap_units(tuple)
    }

    /// Every basis key of the box window of size `d`, in canonical order.
    /// Window for coboundary preimages from this space into a window-`d`
    /// target: `2d` plus the frame weight of the blocks, at least 2.
    pub fn preimage_window(&self, d: i32) -> Result<i32> {
        let mut weight = 2;
        for b in &self.blocks {
            weight = weight.max(b.frame_weight()?);
        }
        Ok(2 * d + weight)
    }

    pub fn window_keys(&self, d: i32) -> Vec<Key> {
        let mut out = Vec::new();
        for (b, block) in self.blocks.iter().enumerate() {
            let cover = block.sheaf.cover();
            for t in block.tuples() {
                let units = cover.overlap_units(&t);
                let monos = window_monomials(cover.charts[t[0]].dim(), &units, d);
                for copy in 0..block.sheaf.copies() {
                    for idx in index_tuples(block.sheaf.frame(t[0]), block.p) {
                        for m in &monos {
                            out.push(Key { block: b, tuple: t.clone(), copy, idx: idx.clone(), mono: m.clone() });
                        }
                    }
                }
            }
        }
        out
    }

    /// Cochain with a single unit coefficient at `key`.
    pub fn unit(&self, key: &Key) -> Cochain {
        let block = &self.blocks[key.block];
        let cover = block.sheaf.cover();
        let i0 = key.tuple[0];
        let ctx = cover.ctx(i0);
        let mut v = block.sheaf.zero_value(i0, block.p);
        v[key.copy] = Multivector::basis_in_frame(
            &cover.charts[i0].id,
            ctx,
            block.sheaf.frame(i0),
            &key.idx,
            Poly::monomial(ctx, &key.mono, &vec![0; ctx.r()], Rational::one()),
        );
        let mut c = Cochain::zero(self.blocks.len());
        c.parts[key.block].insert(key.tuple.clone(), v);
        c
    }

    /// Coordinates of a cochain laid out on this space's blocks. Values must
    /// not involve deformation parameters, and negative exponents may only
    /// occur in variables that are units on the overlap.
    pub fn to_vec(&self, c: &Cochain) -> Result<SparseVec> {
        if c.parts.len() != self.blocks.len() {
            return Err(Error::ArityMismatch { expected: self.blocks.len(), got: c.parts.len() });
        }
        let mut entries: BTreeMap<usize, Rational> = BTreeMap::new();
        let mut coords = self.coords.borrow_mut();
        for (b, part) in c.parts.iter().enumerate() {
            for (t, v) in part {
                let units = self.blocks[b].sheaf.cover().overlap_units(t);
                for (copy, m) in v.iter().enumerate() {
                    for (idx, poly) in m.coeffs() {
                        for (chart, params, coef) in poly.terms() {
                            if params.iter().any(|&e| e != 0) {
                                return Err(Error::WrongRing("cochain coefficients must be parameter free".into()));
                            }
                            if let Some(v) = chart.iter().enumerate().find(|(v, &e)| e < 0 && !units.contains(v)).map(|(v, _)| v) {
                                return Err(Error::TransportFailure(format!(
                                    "negative power of {} on overlap {:?} in {}",
                                    m.ctx().vars()[v],
                                    t,
                                    self.blocks[b].label()
                                )));
                            }
                            let key = Key { block: b, tuple: t.clone(), copy, idx: idx.clone(), mono: chart.to_vec() };
                            let i = coords.intern(key);
                            *entries.entry(i).or_insert_with(Rational::zero) += coef;
                        }
                    }
                }
            }
        }
        Ok(SparseVec::from_map(entries))
    }

    pub fn from_vec(&self, v: &SparseVec) -> Cochain {
        let mut c = Cochain::zero(self.blocks.len());
        for (i, coef) in &v.0 {
            let key = self.key(*i);
            c = c.add(&self.unit(&key).scale(coef));
        }
        c
    }

    /// Linear combination of unit cochains, indexed by position in `keys`.
    pub fn combination(&self, keys: &[Key], v: &SparseVec) -> Cochain {
        let mut c = Cochain::zero(self.blocks.len());
        for (j, coef) in &v.0 {
            c = c.add(&self.unit(&keys[*j]).scale(coef));
        }
        c
    }

    /// Images of the given basis keys under a linear operator, in the
    /// coordinates of `dst`.
    pub fn images(&self, keys: &[Key], dst: &Space, op: &dyn Fn(&Cochain) -> Result<Cochain>) -> Result<Vec<SparseVec>> {
        keys.iter().map(|k| dst.to_vec(&op(&self.unit(k))?)).collect()
    }
}

impl fmt::Display for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "b{} {:?} c{} {:?} {:?}", self.block, self.tuple, self.copy, self.idx, self.mono)
    }
}
