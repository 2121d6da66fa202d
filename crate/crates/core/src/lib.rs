pub mod cli;
pub mod error;
pub mod gaussfield;
pub mod polybasis;
pub mod rkhs;
pub mod singular_coeffs;
pub mod specfun;
pub mod sphere_geom;

pub use error::{Error, ErrorCategory, Result};
