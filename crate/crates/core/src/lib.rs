//! Smoothness of bounded linear operators between finite-dimensional `l_p`
//! spaces and diagonal operators on `l_p`.

pub mod citation;
pub mod diagonal;
pub mod error;
pub mod examples;
pub mod minimize;
pub mod operator;
pub mod oracle;
pub mod orthogonality;
pub mod report;
pub mod sampling;
pub mod space;
pub mod tolerance;

pub use citation::Citation;
pub use error::{Error, Result};
pub use report::{ExitStatus, Report, RunConfig};
pub use space::{Exponent, Vector};
pub use tolerance::Tolerances;
