//! Numerical laboratory for the colored eigenvector moment flow.
//!
//! * [`ensembles`] samples the random matrix models.
//! * [`spectral`] holds eigendecompositions, resolvent forms and the free
//!   convolution with the semicircle.
//! * [`flow`] integrates the eigenvalue/eigenvector SDEs and estimates
//!   eigenvector moments by Monte Carlo.
//! * [`configspace`] builds the exact generator on even particle
//!   configurations together with its kernel and auxiliary operators.
//! * [`relaxation`] propagates functions and measures the relaxation
//!   inequalities.
//! * [`ansatz`] evaluates Wick moments and the Gaussian ansatz observable.
//! * [`harness`] runs experiments and writes reports.

pub mod ansatz;
pub mod configspace;
pub mod ensembles;
pub mod error;
pub mod flow;
pub mod harness;
pub mod linalg;
pub mod relaxation;
pub mod rng;
pub mod spectral;
pub mod scalar;
pub mod stats;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Exact rational scalar used for identities that should hold with no rounding.
pub type Rational = num_rational::Ratio<i64>;
/// Floating point operator used by the numerical routines.
pub type Operator = configspace::WeightedOperator<f64>;
/// Rational operator for exact checks.
pub type ExactOperator = configspace::WeightedOperator<Rational>;
/// Floating point site-pair coefficients.
pub type Coefficients = configspace::PairCoefficients<f64>;
