use std::fmt;

use serde::Serialize;

/// One checked identity: its name, the chart indices involved and, on
/// failure, the first nonzero residual.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub indices: Vec<usize>,
    pub residual: Option<String>,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.residual.is_none()
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let idx: Vec<String> = self.indices.iter().map(|i| i.to_string()).collect();
        match &self.residual {
            None => write!(f, "CHECK {} [{}] PASS residual=0", self.name, idx.join(",")),
            Some(r) => write!(f, "CHECK {} [{}] FAIL residual={}", self.name, idx.join(","), r),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn push(&mut self, name: &str, indices: Vec<usize>, residual: Option<String>) {
        self.checks.push(Check { name: name.to_string(), indices, residual });
    }

    pub fn extend(&mut self, other: ValidationReport) {
        self.checks.extend(other.checks);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.failures().next()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}
