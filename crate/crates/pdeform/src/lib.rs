//! Exact computation of the deformation theory of Poisson maps between
//! explicitly presented varieties.

pub mod cech;
pub mod cli;
pub mod complexes;
pub mod deformation;
pub mod error;
pub mod exact_algebra;
pub mod geometry;
pub mod multivector;
pub mod normal_cmp;

pub use error::{Error, Result};
