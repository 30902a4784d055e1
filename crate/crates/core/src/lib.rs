//! Exact enumeration of rational plane tropical curves through point and line
//! conditions, with refined broccoli and descendant invariants as Laurent
//! polynomials in `y`.

pub mod curve;
pub mod enumeration;
pub mod error;
pub mod invariants;
pub mod laurent;
pub mod parallel;
pub mod rational;
pub mod verification;

pub use error::{Error, Result};

pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");
