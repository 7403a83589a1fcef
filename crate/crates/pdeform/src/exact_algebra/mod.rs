//! Exact rationals, truncated Laurent polynomials and linear algebra over Q.

pub mod linalg;
pub mod poly;
pub mod rational;
pub mod ring;

pub use linalg::{intersect_with_coordinates, kernel_of_images, quotient_coords, Echelon, Quotient, RationalMatrix, SparseVec};
pub use poly::{parse_poly, Mono, Poly};
pub use rational::Rational;
pub use ring::{ParamRing, SmallExtension, VarContext, WindowPolicy, WIDE_WINDOW};
pub(crate) use ring::param_monomial_string;
