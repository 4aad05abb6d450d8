//! Memory-rate tradeoff of the modified coded caching scheme (MCCS) under
//! nonuniform file popularity.
//!
//! The crate computes MCCS delivery rates and converse bounds for uncoded
//! placement, optimizes placements with linear programs solved by an
//! embedded simplex, and checks the analytic rates against a bit-level
//! delivery simulator.

pub mod cli;
pub mod combinatorics;
pub mod error;
pub mod lp;
pub mod model;
pub mod rates;
pub mod simulator;

pub use error::{Error, Result};
pub use model::{validate_placement, zipf_popularity, Placement, ProblemInstance, ValidationReport};
