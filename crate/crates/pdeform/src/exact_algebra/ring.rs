use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Truncated parameter ring k[t_1..t_r] modulo all monomials of total degree
/// above `mu` and modulo the listed monomial generators.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ParamRing {
    names: Vec<String>,
    mu: u32,
    ideal: Vec<Vec<u32>>,
}

impl ParamRing {
    pub fn new(names: Vec<String>, mu: u32, ideal: Vec<Vec<u32>>) -> Result<Self> {
        for g in &ideal {
            if g.len() != names.len() {
                return Err(Error::InvariantViolation(format!(
                    "ideal generator has {} exponents for {} parameters",
                    g.len(),
                    names.len()
                )));
            }
            if g.iter().all(|&e| e == 0) {
                return Err(Error::InvariantViolation("ideal generator 1 kills the ring".into()));
            }
        }
        let mut ideal = ideal;
        ideal.sort();
        ideal.dedup();
        Ok(ParamRing { names, mu, ideal })
    }

    /// The ring with no parameters: just the ground field.
    pub fn field() -> Self {
        ParamRing { names: vec![], mu: 0, ideal: vec![] }
    }

    /// k[t]/(t^{mu+1}) in one parameter named `name`.
    pub fn truncated(name: &str, mu: u32) -> Self {
        ParamRing { names: vec![name.to_string()], mu, ideal: vec![] }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn r(&self) -> usize {
        self.names.len()
    }

    pub fn mu(&self) -> u32 {
        self.mu
    }

    pub fn ideal(&self) -> &[Vec<u32>] {
        &self.ideal
    }

    /// True when the monomial t^e survives in the quotient.
    pub fn contains(&self, e: &[u32]) -> bool {
        let deg: u32 = e.iter().sum();
        if deg > self.mu {
            return false;
        }
        !self.ideal.iter().any(|g| g.iter().zip(e).all(|(a, b)| b >= a))
    }

    /// Monomial basis of the ring, in the global graded order.
    pub fn basis(&self) -> Vec<Vec<u32>> {
        let r = self.r();
        let mut out = Vec::new();
        for d in 0..=self.mu {
            let mut layer = Vec::new();
            compositions(d, r, &mut vec![], &mut layer);
            layer.sort();
            for e in layer {
                if self.contains(&e) {
                    out.push(e);
                }
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.basis().len()
    }

    /// Basis monomials of the maximal ideal (positive degree).
    pub fn maximal_ideal_basis(&self) -> Vec<Vec<u32>> {
        self.basis().into_iter().filter(|e| e.iter().any(|&x| x > 0)).collect()
    }

    /// Chain of rings from the residue field up to this ring, each step adding
    /// one basis monomial in the global order. Every consecutive pair is a
    /// small extension.
    pub fn extension_chain(&self) -> Result<Vec<SmallExtension>> {
        let basis = self.basis();
        let mut chain = Vec::new();
        let mut kept: Vec<Vec<u32>> = vec![basis[0].clone()];
        let mut prev = self.sub_ring(&kept)?;
        for e in basis.iter().skip(1) {
            kept.push(e.clone());
            let next = self.sub_ring(&kept)?;
            chain.push(SmallExtension::new(Arc::new(next.clone()), Arc::new(prev), e.clone())?);
            prev = next;
        }
        Ok(chain)
    }

    /// Quotient of this ring whose basis is exactly `keep` (which must be an
    /// order ideal of the basis).
    fn sub_ring(&self, keep: &[Vec<u32>]) -> Result<ParamRing> {
        let mu = keep.iter().map(|e| e.iter().sum::<u32>()).max().unwrap_or(0);
        let mut ideal = self.ideal.clone();
        for e in self.basis() {
            let deg: u32 = e.iter().sum();
            if deg <= mu && !keep.contains(&e) {
                ideal.push(e);
            }
        }
        let ring = ParamRing::new(self.names.clone(), mu, ideal)?;
        let mut got = ring.basis();
        got.sort();
        let mut want = keep.to_vec();
        want.sort();
        if got != want {
            return Err(Error::InvariantViolation("monomial set is not an order ideal".into()));
        }
        Ok(ring)
    }

    pub fn describe(&self) -> String {
        if self.r() == 0 {
            return "k".to_string();
        }
        let mut s = format!("k[{}]/(deg>{}", self.names.join(","), self.mu);
        for g in &self.ideal {
            s.push_str(", ");
            s.push_str(&param_monomial_string(&self.names, g));
        }
        s.push(')');
        s
    }
}

impl fmt::Debug for ParamRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.describe())
    }
}

pub(crate) fn param_monomial_string(names: &[String], e: &[u32]) -> String {
    let mut parts = Vec::new();
    for (n, &x) in names.iter().zip(e) {
        match x {
            0 => {}
            1 => parts.push(n.clone()),
            _ => parts.push(format!("{n}^{x}")),
        }
    }
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

fn compositions(total: u32, parts: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if parts == 0 {
        if total == 0 {
            out.push(cur.clone());
        }
        return;
    }
    if parts == 1 {
        cur.push(total);
        out.push(cur.clone());
        cur.pop();
        return;
    }
    for x in 0..=total {
        cur.push(x);
        compositions(total - x, parts - 1, cur, out);
        cur.pop();
    }
}

/// A surjection of parameter rings whose kernel is spanned by one monomial
/// annihilated by the maximal ideal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmallExtension {
    pub total: Arc<ParamRing>,
    pub quotient: Arc<ParamRing>,
    pub kernel: Vec<u32>,
}

impl SmallExtension {
    pub fn new(total: Arc<ParamRing>, quotient: Arc<ParamRing>, kernel: Vec<u32>) -> Result<Self> {
        if total.names != quotient.names {
            return Err(Error::ExtensionMismatch("parameter names differ".into()));
        }
        if !total.contains(&kernel) || quotient.contains(&kernel) {
            return Err(Error::ExtensionMismatch("kernel generator is not the new monomial".into()));
        }
        let mut tb = total.basis();
        tb.retain(|e| e != &kernel);
        if tb != quotient.basis() {
            return Err(Error::ExtensionMismatch("kernel is not one-dimensional".into()));
        }
        for k in 0..total.r() {
            let mut e = kernel.clone();
            e[k] += 1;
            if total.contains(&e) {
                return Err(Error::ExtensionMismatch("kernel is not killed by the maximal ideal".into()));
            }
        }
        Ok(SmallExtension { total, quotient, kernel })
    }
}

/// How a context treats chart exponents that leave its window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WindowPolicy {
    /// Keep every term; `check_window` reports overflow.
    Strict,
    /// Silently drop terms outside the window.
    Truncate,
}

/// Variables of one chart together with the shared parameter ring.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VarContext {
    vars: Vec<String>,
    ring: Arc<ParamRing>,
    window: i32,
    policy: WindowPolicy,
}

/// Window used when a context should behave as if unbounded.
pub const WIDE_WINDOW: i32 = 1 << 20;

impl VarContext {
    pub fn new(vars: Vec<String>, ring: Arc<ParamRing>, window: i32, policy: WindowPolicy) -> Arc<Self> {
        Arc::new(VarContext { vars, ring, window, policy })
    }

    /// Context with a practically unbounded window.
    pub fn wide(vars: Vec<String>, ring: Arc<ParamRing>) -> Arc<Self> {
        Self::new(vars, ring, WIDE_WINDOW, WindowPolicy::Strict)
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn n(&self) -> usize {
        self.vars.len()
    }

    pub fn ring(&self) -> &Arc<ParamRing> {
        &self.ring
    }

    pub fn r(&self) -> usize {
        self.ring.r()
    }

    pub fn window(&self) -> i32 {
        self.window
    }

    pub fn policy(&self) -> WindowPolicy {
        self.policy
    }

    pub fn with_ring(&self, ring: Arc<ParamRing>) -> Arc<Self> {
        Arc::new(VarContext { vars: self.vars.clone(), ring, window: self.window, policy: self.policy })
    }

    pub fn with_window(&self, window: i32, policy: WindowPolicy) -> Arc<Self> {
        Arc::new(VarContext { vars: self.vars.clone(), ring: self.ring.clone(), window, policy })
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn param_index(&self, name: &str) -> Option<usize> {
        self.ring.names.iter().position(|v| v == name)
    }

    pub fn same(a: &Arc<Self>, b: &Arc<Self>) -> bool {
        Arc::ptr_eq(a, b) || **a == **b
    }
}

impl fmt::Debug for VarContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] over {:?} window {}", self.vars.join(","), self.ring, self.window)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_of_truncated_ring() {
        let r = ParamRing::new(vec!["t1".into(), "t2".into()], 2, vec![]).unwrap();
        assert_eq!(r.dim(), 6);
        let r = ParamRing::new(vec!["t1".into(), "t2".into()], 2, vec![vec![1, 1]]).unwrap();
        assert_eq!(r.dim(), 5);
        assert!(!r.contains(&[1, 1]));
    }

    #[test]
    fn extension_chain_one_parameter() {
        let r = ParamRing::truncated("t", 3);
        let chain = r.extension_chain().unwrap();
        assert_eq!(chain.len(), 3);
        assert_eq!(chain[0].kernel, vec![1]);
        assert_eq!(chain[2].kernel, vec![3]);
        assert_eq!(chain[2].total.dim(), 4);
        assert_eq!(chain[2].quotient.dim(), 3);
    }

    #[test]
    fn extension_chain_two_parameters() {
        let r = ParamRing::new(vec!["s".into(), "t".into()], 2, vec![]).unwrap();
        let chain = r.extension_chain().unwrap();
        assert_eq!(chain.len(), 5);
        for e in &chain {
            assert_eq!(e.total.dim(), e.quotient.dim() + 1);
        }
    }

    #[test]
    fn small_extension_rejects_non_square_zero_kernel() {
        let total = Arc::new(ParamRing::truncated("t", 2));
        let quot = Arc::new(ParamRing::truncated("t", 0));
        assert!(SmallExtension::new(total, quot, vec![1]).is_err());
    }
}
