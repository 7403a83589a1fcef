use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use super::rational::Rational;
use super::ring::{param_monomial_string, VarContext, WindowPolicy};
use crate::error::{Error, Result};

/// Monomial key laid out as `[param degree, params.., chart degree, chart..]`
/// so that the derived lexicographic order is graded lex on parameter
/// exponents first and chart exponents second.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Mono(Vec<i32>);

impl Mono {
    pub fn new(chart: &[i32], params: &[u32]) -> Self {
        let mut v = Vec::with_capacity(chart.len() + params.len() + 2);
        v.push(params.iter().map(|&e| e as i32).sum());
        v.extend(params.iter().map(|&e| e as i32));
        v.push(chart.iter().sum());
        v.extend_from_slice(chart);
        Mono(v)
    }

    pub fn chart(&self, r: usize) -> &[i32] {
        &self.0[r + 2..]
    }

    pub fn params(&self, r: usize) -> &[i32] {
        &self.0[1..r + 1]
    }

    pub fn param_degree(&self) -> i32 {
        self.0[0]
    }

    fn mul(&self, other: &Mono) -> Mono {
        Mono(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

/// Exact multivariate Laurent polynomial over the rationals with coefficients
/// truncated in the parameter ring of its context.
#[derive(Clone)]
pub struct Poly {
    ctx: Arc<VarContext>,
    terms: BTreeMap<Mono, Rational>,
}

impl PartialEq for Poly {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms && self.ctx.n() == other.ctx.n() && self.ctx.r() == other.ctx.r()
    }
}

impl Eq for Poly {}

impl Poly {
    pub fn zero(ctx: &Arc<VarContext>) -> Self {
        Poly { ctx: ctx.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(ctx: &Arc<VarContext>, c: Rational) -> Self {
        let mut p = Poly::zero(ctx);
        if !c.is_zero() {
            p.terms.insert(Mono::new(&vec![0; ctx.n()], &vec![0; ctx.r()]), c);
        }
        p
    }

    pub fn one(ctx: &Arc<VarContext>) -> Self {
        Poly::constant(ctx, Rational::one())
    }

    pub fn var(ctx: &Arc<VarContext>, i: usize) -> Self {
        let mut e = vec![0; ctx.n()];
        e[i] = 1;
        Poly::monomial(ctx, &e, &vec![0; ctx.r()], Rational::one())
    }

    pub fn param(ctx: &Arc<VarContext>, k: usize) -> Self {
        let mut e = vec![0; ctx.r()];
        e[k] = 1;
        Poly::monomial(ctx, &vec![0; ctx.n()], &e, Rational::one())
    }

    /// c * z^chart * t^params, dropped if the parameter monomial vanishes in
    /// the ring.
    pub fn monomial(ctx: &Arc<VarContext>, chart: &[i32], params: &[u32], c: Rational) -> Self {
        let mut p = Poly::zero(ctx);
        if !c.is_zero() && ctx.ring().contains(params) {
            p.insert(Mono::new(chart, params), c);
        }
        p
    }

    pub fn ctx(&self) -> &Arc<VarContext> {
        &self.ctx
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms as (chart exponents, parameter exponents, coefficient), in the
    /// global monomial order.
    pub fn terms(&self) -> impl Iterator<Item = (&[i32], Vec<u32>, &Rational)> + '_ {
        let r = self.ctx.r();
        self.terms.iter().map(move |(m, c)| (m.chart(r), m.params(r).iter().map(|&e| e as u32).collect(), c))
    }

    pub fn raw_terms(&self) -> &BTreeMap<Mono, Rational> {
        &self.terms
    }

    fn keep(&self, m: &Mono) -> bool {
        let r = self.ctx.r();
        if m.param_degree() as u32 > self.ctx.ring().mu() {
            return false;
        }
        if !self.ctx.ring().ideal().is_empty() {
            let e: Vec<u32> = m.params(r).iter().map(|&x| x as u32).collect();
            if !self.ctx.ring().contains(&e) {
                return false;
            }
        }
        if self.ctx.policy() == WindowPolicy::Truncate {
            let w = self.ctx.window();
            if m.chart(r).iter().any(|&e| e < -w || e > w) {
                return false;
            }
        }
        true
    }

    fn insert(&mut self, m: Mono, c: Rational) {
        if c.is_zero() || !self.keep(&m) {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += &c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn assert_same(&self, other: &Poly) {
        assert!(
            VarContext::same(&self.ctx, &other.ctx),
            "context mismatch: {:?} vs {:?}",
            self.ctx,
            other.ctx
        );
    }

    pub fn checked_add(&self, other: &Poly) -> Result<Poly> {
        self.same_ctx(other)?;
        let out = self.add(other);
        out.check_window()?;
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Poly) -> Result<Poly> {
        self.same_ctx(other)?;
        let out = self.sub(other);
        out.check_window()?;
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Poly) -> Result<Poly> {
        self.same_ctx(other)?;
        let out = self.mul(other);
        out.check_window()?;
        Ok(out)
    }

    fn same_ctx(&self, other: &Poly) -> Result<()> {
        if VarContext::same(&self.ctx, &other.ctx) {
            Ok(())
        } else {
            Err(Error::ContextMismatch(format!("{:?} vs {:?}", self.ctx, other.ctx)))
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        self.assert_same(other);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.assert_same(other);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert(m.clone(), -c);
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly { ctx: self.ctx.clone(), terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero(&self.ctx);
        }
        Poly { ctx: self.ctx.clone(), terms: self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect() }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        self.assert_same(other);
        let mut out = Poly::zero(&self.ctx);
        let mu = self.ctx.ring().mu() as i32;
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if ma.param_degree() + mb.param_degree() > mu {
                    continue;
                }
                out.insert(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn add_assign(&mut self, other: &Poly) {
        self.assert_same(other);
        for (m, c) in &other.terms {
            self.insert(m.clone(), c.clone());
        }
    }

    /// self += c * other
    pub fn add_scaled(&mut self, other: &Poly, c: &Rational) {
        self.assert_same(other);
        if c.is_zero() {
            return;
        }
        for (m, x) in &other.terms {
            self.insert(m.clone(), x * c);
        }
    }

    /// Partial derivative with respect to chart variable `i`.
    pub fn deriv(&self, i: usize) -> Poly {
        let r = self.ctx.r();
        let mut out = Poly::zero(&self.ctx);
        for (m, c) in &self.terms {
            let e = m.chart(r)[i];
            if e == 0 {
                continue;
            }
            let mut chart = m.chart(r).to_vec();
            chart[i] -= 1;
            let params: Vec<u32> = m.params(r).iter().map(|&x| x as u32).collect();
            out.insert(Mono::new(&chart, &params), c * &Rational::from_int(e as i64));
        }
        out
    }

    /// Multiply by the parameter monomial t^e.
    pub fn times_param(&self, e: &[u32]) -> Poly {
        let r = self.ctx.r();
        let mut out = Poly::zero(&self.ctx);
        for (m, c) in &self.terms {
            let params: Vec<u32> = m.params(r).iter().zip(e).map(|(&a, &b)| a as u32 + b).collect();
            out.insert(Mono::new(m.chart(r), &params), c.clone());
        }
        out
    }

    /// Coefficient of t^e, as a parameter-free polynomial in the same context.
    pub fn param_coefficient(&self, e: &[u32]) -> Poly {
        let r = self.ctx.r();
        let mut out = Poly::zero(&self.ctx);
        for (m, c) in &self.terms {
            if m.params(r).iter().zip(e).all(|(&a, &b)| a as u32 == b) {
                out.insert(Mono::new(m.chart(r), &vec![0; r]), c.clone());
            }
        }
        out
    }

    /// Part of total parameter degree exactly `d`.
    pub fn param_degree_part(&self, d: u32) -> Poly {
        Poly {
            ctx: self.ctx.clone(),
            terms: self.terms.iter().filter(|(m, _)| m.param_degree() as u32 == d).map(|(m, c)| (m.clone(), c.clone())).collect(),
        }
    }

    /// Set every parameter to zero.
    pub fn at_params_zero(&self) -> Poly {
        self.param_degree_part(0)
    }

    pub fn max_param_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.param_degree() as u32).max()
    }

    /// Reinterpret in a context with the same chart variables (ring or window
    /// may differ); terms not surviving the new ring are dropped. Moving
    /// between a parameter-free context and a parameter ring embeds constants
    /// or keeps only the parameter-free part.
    pub fn recontext(&self, ctx: &Arc<VarContext>) -> Poly {
        assert_eq!(ctx.n(), self.ctx.n(), "recontext changes the variable count");
        let (from, to) = (self.ctx.r(), ctx.r());
        assert!(from == to || from == 0 || to == 0, "recontext changes the parameter count");
        let mut out = Poly::zero(ctx);
        for (m, c) in &self.terms {
            if from == to {
                out.insert(m.clone(), c.clone());
            } else if m.param_degree() == 0 {
                out.insert(Mono::new(m.chart(from), &vec![0; to]), c.clone());
            }
        }
        out
    }

    /// Smallest and largest exponent of chart variable `i` (None if zero).
    pub fn exponent_range(&self, i: usize) -> Option<(i32, i32)> {
        let r = self.ctx.r();
        let mut it = self.terms.keys().map(|m| m.chart(r)[i]);
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), e| (lo.min(e), hi.max(e))))
    }

    /// Report the first chart exponent outside the context window.
    pub fn check_window(&self) -> Result<()> {
        let r = self.ctx.r();
        let w = self.ctx.window();
        for m in self.terms.keys() {
            for (i, &e) in m.chart(r).iter().enumerate() {
                if e < -w || e > w {
                    return Err(Error::WindowOverflow {
                        var: self.ctx.vars()[i].clone(),
                        exponent: e as i64,
                        window: w as i64,
                    });
                }
            }
        }
        Ok(())
    }

    /// Constant term coefficient if the polynomial is a constant.
    pub fn as_constant(&self) -> Option<Rational> {
        if self.terms.is_empty() {
            return Some(Rational::zero());
        }
        if self.terms.len() == 1 {
            let (m, c) = self.terms.iter().next().unwrap();
            let r = self.ctx.r();
            if m.chart(r).iter().all(|&e| e == 0) && m.param_degree() == 0 {
                return Some(c.clone());
            }
        }
        None
    }

    /// Multiplicative inverse for polynomials whose parameter-free part is a
    /// single monomial; the remaining part is nilpotent in the parameter ring.
    pub fn inverse(&self) -> Result<Poly> {
        let base = self.at_params_zero();
        if base.terms.len() != 1 {
            return Err(Error::NoInverse(format!("`{self}` is not a unit")));
        }
        let r = self.ctx.r();
        let (m, c) = base.terms.iter().next().unwrap();
        let inv_chart: Vec<i32> = m.chart(r).iter().map(|e| -e).collect();
        let lead_inv = Poly::monomial(&self.ctx, &inv_chart, &vec![0; r], c.recip());
        let rest = self.sub(&base);
        if rest.is_zero() {
            return Ok(lead_inv);
        }
        // (m + n)^{-1} = m^{-1} * sum_k (-n m^{-1})^k
        let x = rest.mul(&lead_inv).neg();
        let mut acc = Poly::one(&self.ctx);
        let mut power = Poly::one(&self.ctx);
        for _ in 0..self.ctx.ring().mu() {
            power = power.mul(&x);
            if power.is_zero() {
                break;
            }
            acc.add_assign(&power);
        }
        Ok(acc.mul(&lead_inv))
    }

    pub fn pow(&self, e: i32) -> Result<Poly> {
        let base = if e < 0 { self.inverse()? } else { self.clone() };
        let mut acc = Poly::one(&self.ctx);
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(&base);
        }
        Ok(acc)
    }

    /// Substitute chart variable i by `images[i]` (all in context `target`);
    /// parameters are carried over unchanged.
    pub fn substitute(&self, target: &Arc<VarContext>, images: &[Poly]) -> Result<Poly> {
        assert_eq!(images.len(), self.ctx.n(), "substitution arity");
        assert_eq!(target.r(), self.ctx.r(), "substitution changes the parameter ring");
        let r = self.ctx.r();
        let mut out = Poly::zero(target);
        // fast path: every image is a single term
        let monomial_images = images.iter().all(|p| p.terms.len() == 1);
        let mut cache: HashMap<(usize, i32), Poly> = HashMap::new();
        for (m, c) in &self.terms {
            let params: Vec<u32> = m.params(r).iter().map(|&x| x as u32).collect();
            let mut acc = Poly::monomial(target, &vec![0; target.n()], &params, c.clone());
            if monomial_images {
                let mut coef = c.clone();
                let mut key = Mono::new(&vec![0; target.n()], &params);
                let mut ok = true;
                for (i, &e) in m.chart(r).iter().enumerate() {
                    if e == 0 {
                        continue;
                    }
                    let (mi, ci) = images[i].terms.iter().next().unwrap();
                    if e < 0 && mi.param_degree() > 0 {
                        ok = false;
                        break;
                    }
                    coef = coef * ci.pow(e);
                    let scaled = Mono(mi.0.iter().map(|x| x * e).collect());
                    key = key.mul(&scaled);
                }
                if ok {
                    out.insert(key, coef);
                    continue;
                }
            }
            for (i, &e) in m.chart(r).iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let pw = match cache.get(&(i, e)) {
                    Some(p) => p.clone(),
                    None => {
                        let p = images[i].pow(e)?;
                        cache.insert((i, e), p.clone());
                        p
                    }
                };
                acc = acc.mul(&pw);
                if acc.is_zero() {
                    break;
                }
            }
            out.add_assign(&acc);
        }
        Ok(out)
    }

    /// Evaluate at a rational point of the chart (parameters kept).
    pub fn eval_point(&self, target: &Arc<VarContext>, point: &[Rational]) -> Result<Poly> {
        let images: Vec<Poly> = point.iter().map(|c| Poly::constant(target, c.clone())).collect();
        self.substitute(target, &images)
    }

    /// Polynomial with every coefficient of `self` restricted to the listed
    /// chart variables set to zero.
    pub fn set_vars_zero(&self, vars: &[usize]) -> Poly {
        let r = self.ctx.r();
        Poly {
            ctx: self.ctx.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| vars.iter().all(|&v| m.chart(r)[v] == 0))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    fn term_string(&self, m: &Mono, c: &Rational) -> String {
        let r = self.ctx.r();
        let mut factors = Vec::new();
        for (name, &e) in self.ctx.vars().iter().zip(m.chart(r)) {
            match e {
                0 => {}
                1 => factors.push(name.clone()),
                _ => factors.push(format!("{name}^{e}")),
            }
        }
        let pe: Vec<u32> = m.params(r).iter().map(|&x| x as u32).collect();
        if pe.iter().any(|&x| x > 0) {
            factors.push(param_monomial_string(self.ctx.ring().names(), &pe));
        }
        if factors.is_empty() {
            return c.to_string();
        }
        let mono = factors.join("*");
        if c.is_one() {
            mono
        } else if *c == -Rational::one() {
            format!("-{mono}")
        } else {
            format!("{c}*{mono}")
        }
    }
}

impl fmt::Display for Poly {
    /// Terms from the highest to the lowest in the global order, joined by
    /// " + " or " - " according to the sign of each later term.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let term = self.term_string(m, c);
            match (i, term.strip_prefix('-')) {
                (0, _) => write!(f, "{term}")?,
                (_, Some(rest)) => write!(f, " - {rest}")?,
                (_, None) => write!(f, " + {term}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Parse the shared polynomial grammar: signed terms joined by `+` or `-`,
/// each a `*`-product of one optional rational and variable powers `v^e`.
pub fn parse_poly(ctx: &Arc<VarContext>, text: &str) -> std::result::Result<Poly, String> {
    let text = text.trim();
    if text.is_empty() {
        return Err("empty polynomial".into());
    }
    let mut terms: Vec<(bool, String)> = Vec::new();
    let mut cur = String::new();
    let mut neg = false;
    let mut prev: Option<char> = None;
    for ch in text.chars() {
        if ch.is_whitespace() {
            continue;
        }
        let at_term_start = cur.is_empty();
        let sep = (ch == '+' || ch == '-') && !matches!(prev, Some('^') | Some('*') | Some('/'));
        if sep && !at_term_start {
            terms.push((neg, std::mem::take(&mut cur)));
            neg = ch == '-';
        } else if sep && at_term_start {
            if ch == '-' {
                neg = !neg;
            }
        } else {
            cur.push(ch);
        }
        prev = Some(ch);
    }
    if cur.is_empty() {
        return Err("dangling sign".into());
    }
    terms.push((neg, cur));

    let n = ctx.n();
    let r = ctx.r();
    let mut out = Poly::zero(ctx);
    for (neg, t) in terms {
        let mut coef = Rational::one();
        let mut chart = vec![0i32; n];
        let mut params = vec![0u32; r];
        for factor in split_factors(&t) {
            if factor.is_empty() {
                return Err(format!("empty factor in `{t}`"));
            }
            let first = factor.chars().next().unwrap();
            if first.is_ascii_digit() {
                let q: Rational = factor.parse().map_err(|e| format!("{e} in `{t}`"))?;
                coef = coef * q;
                continue;
            }
            let (name, exp) = match factor.split_once('^') {
                Some((nm, e)) => (nm, e.parse::<i32>().map_err(|_| format!("bad exponent in `{factor}`"))?),
                None => (factor.as_str(), 1),
            };
            if let Some(i) = ctx.var_index(name) {
                chart[i] += exp;
            } else if let Some(k) = ctx.param_index(name) {
                if exp < 0 {
                    return Err(format!("negative parameter exponent in `{factor}`"));
                }
                params[k] += exp as u32;
            } else {
                return Err(format!("unknown variable `{name}`"));
            }
        }
        if neg {
            coef = -coef;
        }
        out.add_assign(&Poly::monomial(ctx, &chart, &params, coef));
    }
    Ok(out)
}

/// Split a term on `*`, keeping a rational `p/q` together.
fn split_factors(t: &str) -> Vec<String> {
    t.split('*').map(|s| s.to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::super::ring::ParamRing;
    use super::*;

    fn ctx(vars: &[&str], params: &[&str], mu: u32) -> Arc<VarContext> {
        let ring = Arc::new(ParamRing::new(params.iter().map(|s| s.to_string()).collect(), mu, vec![]).unwrap());
        VarContext::new(vars.iter().map(|s| s.to_string()).collect(), ring, 8, WindowPolicy::Strict)
    }

    #[test]
    fn difference_of_squares() {
        let c = ctx(&["x"], &[], 0);
        let a = parse_poly(&c, "x + 1/2").unwrap();
        let b = parse_poly(&c, "x - 1/2").unwrap();
        assert_eq!(a.mul(&b), parse_poly(&c, "x^2 - 1/4").unwrap());
    }

    #[test]
    fn laurent_unit_cancels() {
        let c = ctx(&["x"], &[], 0);
        let a = parse_poly(&c, "x^-1").unwrap();
        assert_eq!(a.mul(&Poly::var(&c, 0)), Poly::one(&c));
    }

    #[test]
    fn parameter_truncation() {
        let c = ctx(&["x"], &["t"], 2);
        let a = parse_poly(&c, "1 + t").unwrap();
        let b = parse_poly(&c, "1 - t + t^2").unwrap();
        assert_eq!(a.mul(&b), Poly::one(&c));
    }

    #[test]
    fn strict_window_overflow() {
        let c = ctx(&["x"], &[], 0).with_window(2, WindowPolicy::Strict);
        let a = parse_poly(&c, "x^2").unwrap();
        assert!(matches!(a.checked_mul(&a), Err(Error::WindowOverflow { .. })));
        let t = c.with_window(2, WindowPolicy::Truncate);
        let a = parse_poly(&t, "x^2 + 1").unwrap();
        assert_eq!(a.checked_mul(&a).unwrap(), parse_poly(&t, "2*x^2 + 1").unwrap());
    }

    #[test]
    fn display_and_parse_round_trip() {
        let c = ctx(&["z1", "w3"], &["t1"], 3);
        let p = parse_poly(&c, "z1^2*w3^-1*t1 - 3/2 + -z1").unwrap();
        let s = p.to_string();
        assert_eq!(parse_poly(&c, &s).unwrap(), p);
        assert_eq!(s, "z1^2*w3^-1*t1 - z1 - 3/2");
    }

    #[test]
    fn inverse_of_deformed_unit() {
        let c = ctx(&["x"], &["t"], 3);
        let p = parse_poly(&c, "x + t*x^2").unwrap();
        let inv = p.inverse().unwrap();
        assert_eq!(inv.mul(&p), Poly::one(&c));
        assert!(parse_poly(&c, "x + 1").unwrap().inverse().is_err());
    }

    #[test]
    fn substitution_p1_transition() {
        let c = ctx(&["z"], &[], 0);
        let d = ctx(&["w"], &[], 0);
        let p = parse_poly(&c, "z^2 + 3*z^-1").unwrap();
        let img = vec![parse_poly(&d, "w^-1").unwrap()];
        assert_eq!(p.substitute(&d, &img).unwrap(), parse_poly(&d, "w^-2 + 3*w").unwrap());
    }

    #[test]
    fn derivative() {
        let c = ctx(&["x", "y"], &[], 0);
        let p = parse_poly(&c, "x^3*y + x^-2").unwrap();
        assert_eq!(p.deriv(0), parse_poly(&c, "3*x^2*y - 2*x^-3").unwrap());
    }
}
