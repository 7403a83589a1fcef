//! First-order classes, obstruction classes at small extensions, and the
//! one-step lifting solver.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::rc::Rc;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cech::cohomology::{solve, Audit, Audited};
use crate::cech::{Block, Cochain, Space};
use crate::error::{Error, Result};
use crate::exact_algebra::{ParamRing, Rational, SmallExtension, SparseVec};
use crate::geometry::{PoissonMapData, ValidationReport};

use super::complex::DefComplex;
use super::residual::{apply_correction, correction_of, residuals};
use super::{validate_deformation, DeformationDatum, Mode};

/// Largest absolute exponent of a chart variable in a cochain.
pub(crate) fn max_exponent(c: &Cochain) -> i32 {
    let mut m = 0;
    for part in &c.parts {
        for v in part.values() {
            for mv in v {
                for p in mv.coeffs().values() {
                    for (chart, _, _) in p.terms() {
                        m = chart.iter().fold(m, |acc, e| acc.max(e.abs()));
                    }
                }
            }
        }
    }
    m
}

pub(crate) fn rationals<S: serde::Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|r| r.to_string()))
}

pub(crate) fn same_ring(a: &ParamRing, b: &ParamRing) -> bool {
    a.names() == b.names() && a.basis() == b.basis()
}

/// The class of a first-order datum.
#[derive(Clone, Debug, Serialize)]
pub struct FirstOrderClass {
    pub mode: Mode,
    /// Representative in level 0, one line per entry.
    pub element: Vec<String>,
    #[serde(serialize_with = "rationals")]
    pub coords: Vec<Rational>,
    pub dim: usize,
    pub window: i32,
    pub audit: Audit,
    #[serde(skip)]
    pub cochain: Cochain,
}

impl FirstOrderClass {
    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }
}

/// The class obstructing a lift across a small extension.
#[derive(Clone, Debug, Serialize)]
pub struct ObstructionClass {
    pub mode: Mode,
    pub kernel: Vec<u32>,
    /// The stored tuple, one line per entry.
    pub raw: Vec<String>,
    #[serde(serialize_with = "rationals")]
    pub coords: Vec<Rational>,
    pub dim: usize,
    pub window: i32,
    pub audit: Audit,
    #[serde(skip)]
    pub cochain: Cochain,
}

impl ObstructionClass {
    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }
}

/// A lift together with the exact re-validation of every identity.
#[derive(Clone, Debug)]
pub struct LiftCertificate {
    pub datum: DeformationDatum,
    pub report: ValidationReport,
}

#[derive(Clone, Debug)]
pub enum LiftOutcome {
    Lifted(LiftCertificate),
    Obstructed(ObstructionClass),
}

/// Obstruction computations for one base map and mode, with the level-1
/// cohomology cached per window.
pub struct Obstructor {
    pub cx: DefComplex,
    pub mode: Mode,
    cache: RefCell<BTreeMap<i32, Rc<Audited>>>,
}

impl Obstructor {
    pub fn new(base: Arc<PoissonMapData>, mode: Mode) -> Result<Obstructor> {
        Ok(Obstructor { cx: DefComplex::new(base, mode.parts())?, mode, cache: RefCell::new(BTreeMap::new()) })
    }

    pub fn for_datum(d: &DeformationDatum) -> Result<Obstructor> {
        Obstructor::new(d.base.clone(), d.mode)
    }

    /// Level-1 cohomology at window `w`.
    pub fn h1(&self, w: i32) -> Result<Rc<Audited>> {
        if let Some(a) = self.cache.borrow().get(&w) {
            return Ok(a.clone());
        }
        let a = Rc::new(Audited::run(w, |w| self.cx.cohomology(1, w))?);
        self.cache.borrow_mut().insert(w, a.clone());
        Ok(a)
    }

    /// A lift of `d` to the total ring of `e`: the canonical lift, perturbed
    /// by `t^e` times a seeded level-0 cochain when a seed is given.
    pub fn lift(&self, d: &DeformationDatum, e: &SmallExtension, seed: Option<u64>) -> Result<DeformationDatum> {
        if !same_ring(&e.quotient, &d.ring) {
            return Err(Error::ExtensionMismatch(format!("datum over {} but extension of {}", d.ring.describe(), e.quotient.describe())));
        }
        let lift = d.canonical_lift(&e.total)?;
        let Some(seed) = seed else { return Ok(lift) };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = Space::new(self.cx.blocks(0), 1);
        let keys = space.window_keys(1);
        if keys.is_empty() {
            return Ok(lift);
        }
        let mut v = Vec::new();
        for _ in 0..3 {
            v.push((rng.gen_range(0..keys.len()), Rational::from_int(rng.gen_range(1..=3) * if rng.gen_bool(0.5) { 1 } else { -1 })));
        }
        v.sort_by_key(|x| x.0);
        v.dedup_by_key(|x| x.0);
        apply_correction(&lift, &e.kernel, &self.cx, &space.combination(&keys, &SparseVec(v)))
    }

    /// The stored tuple of a residual: its negative in fixed_both mode,
    /// itself otherwise.
    fn stored(&self, r: &Cochain) -> Cochain {
        if self.mode == Mode::FixedBoth {
            r.neg()
        } else {
            r.clone()
        }
    }

    /// Residual of a lift at the kernel monomial, checked against the
    /// relations it must satisfy.
    pub fn residual(&self, lift: &DeformationDatum, e: &SmallExtension) -> Result<Cochain> {
        let r = residuals(lift, &e.kernel, &self.cx)?;
        let rel = self.cx.rel(1, &r)?;
        if !rel.is_zero() {
            return Err(Error::InvariantViolation(format!("residual violates the cocycle relations: {:?}", rel.dump(&self.cx.blocks(2)))));
        }
        Ok(r)
    }

    pub fn class_of(&self, r: &Cochain, e: &SmallExtension, window: i32) -> Result<ObstructionClass> {
        let stored = self.stored(r);
        let w = window.max(max_exponent(&stored));
        let h = self.h1(w)?;
        let blocks: Vec<Block> = self.cx.blocks(1);
        Ok(ObstructionClass {
            mode: self.mode,
            kernel: e.kernel.clone(),
            raw: stored.dump(&blocks),
            coords: h.main.coords(&stored)?,
            dim: h.dim(),
            window: w,
            audit: h.audit.clone(),
            cochain: stored,
        })
    }

    pub fn obstruction(&self, d: &DeformationDatum, e: &SmallExtension, seed: Option<u64>, window: i32) -> Result<ObstructionClass> {
        let lift = self.lift(d, e, seed)?;
        let r = self.residual(&lift, e)?;
        self.class_of(&r, e, window)
    }

    /// Whether the difference of two stored tuples is hit by the incoming
    /// differential of level 1 at the given window.
    pub fn differ_by_coboundary(&self, a: &Cochain, b: &Cochain, window: i32) -> Result<bool> {
        Ok(self.solve_level0(&a.sub(b), window)?.is_some())
    }

    /// A level-0 cochain c with `cob_1(c) = target`, searched in the window
    /// `window` and then in the outer window.
    pub fn solve_level0(&self, target: &Cochain, window: i32) -> Result<Option<Cochain>> {
        let w = window.max(max_exponent(target));
        let dst = Space::new(self.cx.blocks(1), 0);
        let rhs = dst.to_vec(target)?;
        let outer = Space::new(self.cx.blocks(0), 0).preimage_window(w)?;
        for w in [w, outer] {
            let src = Space::new(self.cx.blocks(0), w);
            let keys = src.window_keys(w);
            let cols = src.images(&keys, &dst, &|c| self.cx.cob(1, c))?;
            if let Some(x) = solve(&cols, &rhs) {
                return Ok(Some(src.combination(&keys, &x)));
            }
        }
        Ok(None)
    }

    /// Lift across one small extension or report the obstruction.
    pub fn lift_step(&self, d: &DeformationDatum, e: &SmallExtension, window: i32) -> Result<LiftOutcome> {
        let lift = self.lift(d, e, None)?;
        let r = self.residual(&lift, e)?;
        let class = self.class_of(&r, e, window)?;
        if !class.is_zero() {
            return Ok(LiftOutcome::Obstructed(class));
        }
        let c = self
            .solve_level0(&r.neg(), class.window)?
            .ok_or_else(|| Error::WindowInsufficient(format!("no correction found up to the preimage window of D={}", class.window)))?;
        let datum = apply_correction(&lift, &e.kernel, &self.cx, &c)?;
        let report = validate_deformation(&datum);
        Ok(LiftOutcome::Lifted(LiftCertificate { datum, report }))
    }
}

/// Obstruction class of `d` at the small extension `e`.
pub fn obstruction_class(d: &DeformationDatum, e: &SmallExtension, seed: Option<u64>, window: i32) -> Result<ObstructionClass> {
    Obstructor::for_datum(d)?.obstruction(d, e, seed, window)
}

/// Lift `d` across `e`, or return the nonzero obstruction.
pub fn lift_step(d: &DeformationDatum, e: &SmallExtension, window: i32) -> Result<LiftOutcome> {
    Obstructor::for_datum(d)?.lift_step(d, e, window)
}

fn check_first_order(d: &DeformationDatum) -> Result<()> {
    if d.ring.r() != 1 || d.ring.mu() != 1 {
        return Err(Error::WrongRing(d.ring.describe()));
    }
    let rep = validate_deformation(d);
    if let Some(f) = rep.first_failure() {
        return Err(Error::InvalidDatum(f.to_string()));
    }
    Ok(())
}

/// Class of a first-order datum in the level-0 cohomology of its mode.
pub fn first_order_class(d: &DeformationDatum, window: i32) -> Result<FirstOrderClass> {
    check_first_order(d)?;
    let cx = DefComplex::new(d.base.clone(), d.mode.parts())?;
    let c = correction_of(d, &[1], &cx)?;
    let element = cx.flip(0, &c);
    let w = window.max(max_exponent(&element));
    let h = Audited::run(w, |w| cx.cohomology(0, w))?;
    Ok(FirstOrderClass {
        mode: d.mode,
        element: element.dump(&cx.blocks(0)),
        coords: h.main.coords(&element)?,
        dim: h.dim(),
        window: w,
        audit: h.audit.clone(),
        cochain: element,
    })
}

/// The first-order datum over `ring` (one parameter, order 1) whose class
/// representative is the given level-0 cocycle.
pub fn first_order_datum(name: &str, base: Arc<PoissonMapData>, mode: Mode, ring: Arc<ParamRing>, element: &Cochain) -> Result<DeformationDatum> {
    let cx = DefComplex::new(base.clone(), mode.parts())?;
    if !cx.rel(0, element)?.is_zero() {
        return Err(Error::NotACocycle(0));
    }
    if ring.r() != 1 || ring.mu() != 1 {
        return Err(Error::WrongRing(ring.describe()));
    }
    let trivial = DeformationDatum::trivial(name, base, ring, mode)?;
    apply_correction(&trivial, &[1], &cx, &cx.flip(0, element))
}
