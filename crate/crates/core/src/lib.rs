//! Scenario-based testing of automated driving functions.
//!
//! Scenarios at functional, logical and concrete level, concretization,
//! test specifications with evaluation criteria, a deterministic
//! closed-loop test bench with a pluggable test object, and evaluation
//! into test reports.

pub mod cli;
pub mod concretize;
pub mod engine;
pub mod eval;
pub mod format;
pub mod product;
pub mod scenario;
pub mod spec;
pub mod speedcontrol;
pub mod units;
pub mod validation;

pub use validation::{ValidationReport, Violation};

/// Version recorded in report provenance.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
