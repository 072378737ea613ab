//! Numerical toolkit for zero multiplicity of Dirichlet series and
//! L-functions: evaluation, argument-principle zero location, pre-image curve
//! tracing and local conformal diagnostics near close zero pairs.

pub mod cli;
pub mod conformal;
pub mod error;
pub mod jet;
pub mod series;
pub mod trace;
pub mod zeros;

pub use error::{Error, Result};
pub use num_complex::Complex64;
