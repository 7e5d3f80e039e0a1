//! Boundary tracing for possibly nonconvex image sets `D = cl f(A)` by
//! sweeping spherical-cone scalarization problems over a parameter grid,
//! with a brute-force geometric oracle for verification.

mod error;
pub mod geometry;
pub mod oracle;
pub mod problems;
pub mod reduction;
pub mod scalarization;
pub mod scan;
pub mod solver;

pub use error::{Error, Result};
