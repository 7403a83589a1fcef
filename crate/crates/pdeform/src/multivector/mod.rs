//! Multivector fields on a chart: wedge, Schouten bracket, evaluation on
//! function tuples and transport along chart maps.
//!
//! Bivectors are stored on increasing index pairs with
//! `evaluate(d_a ^ d_b, (z^a, z^b)) = 1`. A coefficient table written as an
//! antisymmetric double sum converts by `internal[a<b] = 2 * table[a][b]`
//! (see [`from_double_sum`]).

pub mod chartmap;
pub mod random;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exact_algebra::{Poly, Rational, VarContext};

pub use chartmap::ChartMap;

/// Strictly increasing index tuple.
pub type Index = Vec<u16>;

/// Antisymmetric degree-p field: coefficients (functions in `ctx`) on the
/// exterior basis of a frame with `frame` directions. When `frame` equals the
/// number of chart variables the field is an honest multivector field of the
/// chart; otherwise it is a section of a pulled-back bundle.
#[derive(Clone)]
pub struct Multivector {
    chart: Arc<str>,
    ctx: Arc<VarContext>,
    frame: usize,
    degree: usize,
    coeffs: BTreeMap<Index, Poly>,
}

/// Zero fields compare equal regardless of their nominal degree.
impl PartialEq for Multivector {
    fn eq(&self, other: &Self) -> bool {
        self.chart == other.chart
            && self.frame == other.frame
            && (self.degree == other.degree || (self.is_zero() && other.is_zero()))
            && self.coeffs == other.coeffs
    }
}

impl Eq for Multivector {}

/// Sign of the permutation sorting the concatenation of two increasing
/// tuples, or None if they share an index.
pub fn merge_sign(a: &[u16], b: &[u16]) -> Option<(i32, Index)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    let mut inversions = 0usize;
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i] < b[j]) {
            out.push(a[i]);
            i += 1;
        } else if i == a.len() || b[j] < a[i] {
            inversions += a.len() - i;
            out.push(b[j]);
            j += 1;
        } else {
            return None;
        }
    }
    Some((if inversions % 2 == 0 { 1 } else { -1 }, out))
}

/// All increasing tuples of length p drawn from 0..n.
pub fn index_tuples(n: usize, p: usize) -> Vec<Index> {
    fn rec(start: usize, n: usize, p: usize, cur: &mut Index, out: &mut Vec<Index>) {
        if cur.len() == p {
            out.push(cur.clone());
            return;
        }
        for k in start..n {
            cur.push(k as u16);
            rec(k + 1, n, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, p, &mut Vec::new(), &mut out);
    out
}

/// Determinant of a small square matrix of polynomials (Leibniz expansion).
pub fn poly_det(ctx: &Arc<VarContext>, m: &[Vec<Poly>]) -> Poly {
    let n = m.len();
    if n == 0 {
        return Poly::one(ctx);
    }
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = Poly::zero(ctx);
    for col in 0..n {
        if m[0][col].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Poly>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|(c, _)| *c != col).map(|(_, p)| p.clone()).collect())
            .collect();
        let term = m[0][col].mul(&poly_det(ctx, &minor));
        if col % 2 == 0 {
            acc.add_assign(&term);
        } else {
            acc = acc.sub(&term);
        }
    }
    acc
}

impl Multivector {
    pub fn zero(chart: &Arc<str>, ctx: &Arc<VarContext>, frame: usize, degree: usize) -> Self {
        Multivector { chart: chart.clone(), ctx: ctx.clone(), frame, degree, coeffs: BTreeMap::new() }
    }

    /// Degree-0 field (a function).
    pub fn function(chart: &Arc<str>, f: Poly) -> Self {
        let mut m = Multivector::zero(chart, f.ctx(), f.ctx().n(), 0);
        m.set(vec![], f);
        m
    }

    /// Degree-0 element of a frame of arbitrary size.
    pub fn function_in_frame(chart: &Arc<str>, frame: usize, f: Poly) -> Self {
        let mut m = Multivector::zero(chart, f.ctx(), frame, 0);
        m.set(vec![], f);
        m
    }

    /// Tangent field `coef * d_{idx}` on a chart (frame = chart dimension).
    pub fn basis(chart: &Arc<str>, ctx: &Arc<VarContext>, idx: &[u16], coef: Poly) -> Self {
        Self::basis_in_frame(chart, ctx, ctx.n(), idx, coef)
    }

    /// `coef * e_{idx}` for an arbitrary frame; idx may be unsorted, the sign
    /// of the sorting permutation is applied, repeated indices give zero.
    pub fn basis_in_frame(chart: &Arc<str>, ctx: &Arc<VarContext>, frame: usize, idx: &[u16], coef: Poly) -> Self {
        let mut m = Multivector::zero(chart, ctx, frame, idx.len());
        let mut sorted = idx.to_vec();
        let mut sign = 1;
        for i in 0..sorted.len() {
            for j in 0..sorted.len() - 1 - i {
                if sorted[j] > sorted[j + 1] {
                    sorted.swap(j, j + 1);
                    sign = -sign;
                } else if sorted[j] == sorted[j + 1] {
                    return m;
                }
            }
        }
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return m;
        }
        let c = if sign > 0 { coef } else { coef.neg() };
        m.set(sorted, c);
        m
    }

    pub fn chart(&self) -> &Arc<str> {
        &self.chart
    }

    pub fn ctx(&self) -> &Arc<VarContext> {
        &self.ctx
    }

    pub fn frame(&self) -> usize {
        self.frame
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_tangent(&self) -> bool {
        self.frame == self.ctx.n()
    }

    pub fn coeffs(&self) -> &BTreeMap<Index, Poly> {
        &self.coeffs
    }

    pub fn coeff(&self, idx: &[u16]) -> Poly {
        self.coeffs.get(idx).cloned().unwrap_or_else(|| Poly::zero(&self.ctx))
    }

    /// Set a coefficient; `idx` must be strictly increasing.
    pub fn set(&mut self, idx: Index, p: Poly) {
        debug_assert!(idx.windows(2).all(|w| w[0] < w[1]));
        debug_assert_eq!(idx.len(), self.degree);
        if p.is_zero() {
            self.coeffs.remove(&idx);
        } else {
            self.coeffs.insert(idx, p);
        }
    }

    fn add_to(&mut self, idx: Index, p: &Poly) {
        if p.is_zero() {
            return;
        }
        let cur = self.coeffs.remove(&idx).unwrap_or_else(|| Poly::zero(&self.ctx));
        let s = cur.add(p);
        if !s.is_zero() {
            self.coeffs.insert(idx, s);
        }
    }

    fn compatible(&self, other: &Multivector) -> Result<()> {
        if self.chart != other.chart || self.frame != other.frame || !VarContext::same(&self.ctx, &other.ctx) {
            return Err(Error::ChartMismatch(self.chart.to_string(), other.chart.to_string()));
        }
        Ok(())
    }

    /// Sum of two fields of the same degree; a zero operand of any degree is
    /// accepted (brackets of functions produce an empty degree-0 result).
    pub fn add(&self, other: &Multivector) -> Multivector {
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() && self.degree != other.degree {
            return other.clone();
        }
        assert_eq!(self.degree, other.degree, "adding multivectors of different degree");
        self.compatible(other).expect("adding multivectors from different charts");
        let mut out = self.clone();
        for (k, p) in &other.coeffs {
            out.add_to(k.clone(), p);
        }
        out
    }

    pub fn sub(&self, other: &Multivector) -> Multivector {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Multivector {
        let mut out = self.clone();
        for p in out.coeffs.values_mut() {
            *p = p.neg();
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> Multivector {
        let mut out = Multivector::zero(&self.chart, &self.ctx, self.frame, self.degree);
        for (k, p) in &self.coeffs {
            out.set(k.clone(), p.scale(c));
        }
        out
    }

    /// Multiply every coefficient by a function.
    pub fn mul_fn(&self, f: &Poly) -> Multivector {
        let mut out = Multivector::zero(&self.chart, &self.ctx, self.frame, self.degree);
        for (k, p) in &self.coeffs {
            out.set(k.clone(), p.mul(f));
        }
        out
    }

    /// Apply a map to every coefficient (same chart and frame).
    pub fn map_coeffs(&self, ctx: &Arc<VarContext>, f: impl Fn(&Poly) -> Result<Poly>) -> Result<Multivector> {
        let mut out = Multivector::zero(&self.chart, ctx, self.frame, self.degree);
        for (k, p) in &self.coeffs {
            out.set(k.clone(), f(p)?);
        }
        Ok(out)
    }

    /// Relabel as living on another chart tag / context with the same frame.
    pub fn with_chart(&self, chart: &Arc<str>) -> Multivector {
        let mut m = self.clone();
        m.chart = chart.clone();
        m
    }

    pub fn wedge(&self, other: &Multivector) -> Result<Multivector> {
        self.compatible(other)?;
        let mut out = Multivector::zero(&self.chart, &self.ctx, self.frame, self.degree + other.degree);
        if self.degree + other.degree > self.frame {
            return Ok(out);
        }
        for (a, pa) in &self.coeffs {
            for (b, pb) in &other.coeffs {
                if let Some((s, idx)) = merge_sign(a, b) {
                    let c = pa.mul(pb);
                    out.add_to(idx, &if s > 0 { c } else { c.neg() });
                }
            }
        }
        Ok(out)
    }

    /// Schouten-Nijenhuis bracket in the convention where [X, f] = X(f),
    /// [X, Y] is the Lie bracket and [X, P] is the Lie derivative of P along X.
    /// In superfunction notation
    /// `[P, Q] = sum_i (P d/dtheta_i from the right)(d_i Q) - (d_i P)(d/dtheta_i Q from the left)`.
    pub fn schouten(&self, other: &Multivector) -> Result<Multivector> {
        self.compatible(other)?;
        if !self.is_tangent() {
            return Err(Error::Unsupported("Schouten bracket of pulled-back sections".into()));
        }
        let (p, q) = (self.degree, other.degree);
        if p + q == 0 {
            return Ok(Multivector::zero(&self.chart, &self.ctx, self.frame, 0));
        }
        let deg = p + q - 1;
        let mut out = Multivector::zero(&self.chart, &self.ctx, self.frame, deg);
        if deg > self.frame {
            return Ok(out);
        }
        let n = self.frame;
        // derivatives of the other's coefficients, computed lazily per variable
        let dq: Vec<BTreeMap<&Index, Poly>> =
            (0..n).map(|i| other.coeffs.iter().map(|(k, c)| (k, c.deriv(i))).collect()).collect();
        let dp: Vec<BTreeMap<&Index, Poly>> =
            (0..n).map(|i| self.coeffs.iter().map(|(k, c)| (k, c.deriv(i))).collect()).collect();
        for (a, pa) in &self.coeffs {
            for (pos, &i) in a.iter().enumerate() {
                let sign_r = if (p - 1 - pos) % 2 == 0 { 1 } else { -1 };
                let rest: Index = a.iter().filter(|&&x| x != i).copied().collect();
                for (b, _) in &other.coeffs {
                    let d = &dq[i as usize][b];
                    if d.is_zero() {
                        continue;
                    }
                    if let Some((s, idx)) = merge_sign(&rest, b) {
                        let c = pa.mul(d);
                        out.add_to(idx, &if s * sign_r > 0 { c } else { c.neg() });
                    }
                }
            }
        }
        for (b, qb) in &other.coeffs {
            for (pos, &i) in b.iter().enumerate() {
                let sign_l = if pos % 2 == 0 { 1 } else { -1 };
                let rest: Index = b.iter().filter(|&&x| x != i).copied().collect();
                for (a, _) in &self.coeffs {
                    let d = &dp[i as usize][a];
                    if d.is_zero() {
                        continue;
                    }
                    if let Some((s, idx)) = merge_sign(a, &rest) {
                        let c = d.mul(qb);
                        // subtracted term
                        out.add_to(idx, &if s * sign_l > 0 { c.neg() } else { c });
                    }
                }
            }
        }
        Ok(out)
    }

    /// Evaluate a tangent multivector on a tuple of functions of its chart:
    /// `sum_I a_I det(d_{I_l} f_k)`.
    pub fn evaluate(&self, fns: &[Poly]) -> Result<Poly> {
        if fns.len() != self.degree {
            return Err(Error::ArityMismatch { expected: self.degree, got: fns.len() });
        }
        for f in fns {
            if !VarContext::same(f.ctx(), &self.ctx) {
                return Err(Error::ChartMismatch(self.chart.to_string(), "function argument".into()));
            }
        }
        if !self.is_tangent() {
            return Err(Error::Unsupported("evaluate a pulled-back section with `evaluate_pullback`".into()));
        }
        let grads: Vec<Vec<Poly>> = fns.iter().map(|f| (0..self.frame).map(|i| f.deriv(i)).collect()).collect();
        Ok(self.contract_gradients(&grads))
    }

    /// Evaluate a section of a pulled-back bundle on target functions:
    /// `Q(a_1..a_q) = sum_J Q_J det((d a_k / d w^{J_l}) o f)`, where `f` gives
    /// the target coordinates as functions in the coefficient context.
    pub fn evaluate_pullback(&self, fns: &[Poly], f: &[Poly]) -> Result<Poly> {
        if fns.len() != self.degree {
            return Err(Error::ArityMismatch { expected: self.degree, got: fns.len() });
        }
        if f.len() != self.frame {
            return Err(Error::ArityMismatch { expected: self.frame, got: f.len() });
        }
        let mut grads = Vec::with_capacity(fns.len());
        for a in fns {
            let mut row = Vec::with_capacity(self.frame);
            for i in 0..self.frame {
                row.push(a.deriv(i).substitute(&self.ctx, f)?);
            }
            grads.push(row);
        }
        Ok(self.contract_gradients(&grads))
    }

    /// sum_I coef_I det(grads[k][I_l]) for precomputed gradient rows.
    pub fn contract_gradients(&self, grads: &[Vec<Poly>]) -> Poly {
        let mut acc = Poly::zero(&self.ctx);
        for (idx, c) in &self.coeffs {
            let m: Vec<Vec<Poly>> = grads.iter().map(|g| idx.iter().map(|&i| g[i as usize].clone()).collect()).collect();
            let d = poly_det(&self.ctx, &m);
            if !d.is_zero() {
                acc.add_assign(&c.mul(&d));
            }
        }
        acc
    }

    /// Transport along a chart map (source chart -> target chart) using the
    /// Jacobian rule, re-expressed in target coordinates through the map's
    /// inverse.
    pub fn pushforward(&self, map: &ChartMap) -> Result<Multivector> {
        if self.chart != map.source {
            return Err(Error::ChartMismatch(self.chart.to_string(), map.source.to_string()));
        }
        if !self.is_tangent() {
            return Err(Error::Unsupported("pushforward of pulled-back sections".into()));
        }
        let inverse = map.inverse.as_ref().ok_or_else(|| Error::NoInverse(format!("{} -> {}", map.source, map.target)))?;
        let tctx = map.target_ctx.clone();
        let mut out = Multivector::zero(&map.target, &tctx, tctx.n(), self.degree);
        let grads: Vec<Vec<Poly>> = map.components.iter().map(|c| (0..self.frame).map(|i| c.deriv(i)).collect()).collect();
        for idx in index_tuples(tctx.n(), self.degree) {
            let rows: Vec<Vec<Poly>> = idx.iter().map(|&j| grads[j as usize].clone()).collect();
            let v = self.contract_gradients(&rows);
            if v.is_zero() {
                continue;
            }
            out.set(idx, v.substitute(&tctx, inverse)?);
        }
        Ok(out)
    }

    /// Restrict coefficients by setting some chart variables to zero.
    pub fn set_vars_zero(&self, vars: &[usize]) -> Multivector {
        let mut out = Multivector::zero(&self.chart, &self.ctx, self.frame, self.degree);
        for (k, p) in &self.coeffs {
            out.set(k.clone(), p.set_vars_zero(vars));
        }
        out
    }

    /// Reinterpret coefficients in a context with the same variables.
    pub fn recontext(&self, ctx: &Arc<VarContext>) -> Multivector {
        let mut out = Multivector::zero(&self.chart, ctx, self.frame, self.degree);
        for (k, p) in &self.coeffs {
            out.set(k.clone(), p.recontext(ctx));
        }
        out
    }

    /// Entries as `d<frame>[a1,..,ap] : <poly>` lines using the given frame
    /// prefix (usually `dz` or the target chart's prefix).
    pub fn entries_string(&self, prefix: &str) -> Vec<String> {
        self.coeffs
            .iter()
            .map(|(k, p)| {
                let ids: Vec<String> = k.iter().map(|i| (i + 1).to_string()).collect();
                format!("{prefix}[{}] : {}", ids.join(","), p)
            })
            .collect()
    }
}

impl fmt::Debug for Multivector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        write!(f, "{}", self.entries_string("d").join("; "))
    }
}

/// Bracket with reversed arguments, `rbracket(a, b) = -[b, a]`, so that
/// `rbracket(Lambda, f)(g) = Lambda(f, g)` for a bivector and functions. The
/// Lichnerowicz differential and all deformation cocycle relations use it.
pub fn rbracket(a: &Multivector, b: &Multivector) -> Result<Multivector> {
    Ok(b.schouten(a)?.neg())
}

/// Build an internal bivector from an antisymmetric double-sum coefficient
/// table `table[a][b] = -table[b][a]`: internal coefficient is `2*table[a][b]`.
pub fn from_double_sum(chart: &Arc<str>, ctx: &Arc<VarContext>, table: &[Vec<Poly>]) -> Multivector {
    let n = ctx.n();
    let mut m = Multivector::zero(chart, ctx, n, 2);
    for a in 0..n {
        for b in a + 1..n {
            m.set(vec![a as u16, b as u16], table[a][b].scale(&Rational::from_int(2)));
        }
    }
    m
}

/// Parse multivector entries `d[a1,..,ap] : <poly>` (1-based indices; any
/// identifier prefix before `[` is accepted). Entries are separated by `;`.
pub fn parse_multivector(
    chart: &Arc<str>,
    ctx: &Arc<VarContext>,
    frame: usize,
    degree: usize,
    text: &str,
) -> std::result::Result<Multivector, String> {
    let mut m = Multivector::zero(chart, ctx, frame, degree);
    let text = text.trim();
    if text == "0" || text.is_empty() {
        return Ok(m);
    }
    for entry in text.split(';') {
        let entry = entry.trim();
        if entry.is_empty() {
            continue;
        }
        let (head, poly) = entry.split_once(':').ok_or_else(|| format!("missing `:` in `{entry}`"))?;
        let head = head.trim();
        let open = head.find('[').ok_or_else(|| format!("missing `[` in `{head}`"))?;
        let close = head.rfind(']').ok_or_else(|| format!("missing `]` in `{head}`"))?;
        let inner = &head[open + 1..close];
        let mut idx: Vec<u16> = Vec::new();
        for s in inner.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let k: usize = s.parse().map_err(|_| format!("bad index `{s}`"))?;
            if k == 0 || k > frame {
                return Err(format!("index {k} out of range 1..{frame}"));
            }
            idx.push((k - 1) as u16);
        }
        if idx.len() != degree {
            return Err(format!("entry `{head}` has {} indices, expected {degree}", idx.len()));
        }
        let p = crate::exact_algebra::parse_poly(ctx, poly)?;
        let term = Multivector::basis_in_frame(chart, ctx, frame, &idx, p);
        m = m.add(&term);
    }
    Ok(m)
}
