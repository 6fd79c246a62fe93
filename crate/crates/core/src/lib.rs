//! Numerical toolkit for sharp Hardy inequalities with logarithmic
//! remainder terms, taken with respect to the distance to a closed set `K`.

// `!(x > 0.0)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Quadrature nodes are kept at their published digits.
#![allow(clippy::excessive_precision)]

pub mod certificates;
mod error;
pub mod fit;
pub mod functionals;
pub mod geometry;
pub mod minimizing_sequences;
mod params;
pub mod profile;
pub mod quadrature;
pub mod solver;
pub mod weights;

pub use certificates::{CertificateReport, VectorFieldSpec};
pub use error::{HardyError, Result};
pub use fit::{Fitted, SweepReport, SweepRow};
pub use geometry::{ConditionCReport, KGeometry, Verdict};
pub use params::HardyParams;
pub use profile::{FnProfile, GridProfile, Jet, RadialFunction};
pub use quadrature::{Estimate, QuadOptions};
