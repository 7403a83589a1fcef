//! Čech cochains over the chart cover of an atlas, total complexes with
//! multivector sheaf differentials, and exact windowed hypercohomology,
//! including the deformation spaces PD and PD^1 of a Poisson map.
//!
//! Every pair of charts of a cover is assumed to overlap, and the
//! coordinate ring of an overlap is the polynomial ring of the first chart
//! localized at the variables that become units there (those appearing with
//! negative exponents in a transition, plus declared invertible variables).

pub mod cohomology;
mod pd;
pub mod space;
pub mod total;

use crate::error::Result;

pub use cohomology::{induced_matrix, solve, Audit, Audited, Computation, DegreeReport};
pub use pd::{ExactnessReport, FamilySpace, MapComplexes, SequenceReport};
pub use space::{cech_delta, chart_tuples, Block, Cochain, Key, Sheaf, Space, Value};
pub use total::{ColumnComplex, Differential};

/// Hypercohomology in total degree k of a column complex, audited at D + 2.
pub fn hypercohomology(c: &ColumnComplex, k: i64, window: i32) -> Result<Audited> {
    Audited::run(window, |w| {
        cohomology::plain(w, c.blocks(k - 1), &|x| c.d(k - 1, x), c.blocks(k), &|x| c.d(k, x), c.blocks(k + 1))
    })
}

/// Reports for a range of degrees.
pub fn hypercohomology_report(c: &ColumnComplex, label: &str, degrees: std::ops::RangeInclusive<i64>, window: i32) -> Result<Vec<DegreeReport>> {
    degrees.map(|k| Ok(hypercohomology(c, k, window)?.report(label, k))).collect()
}
