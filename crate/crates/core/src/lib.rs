//! Kolmogorov-Arnold networks with B-spline edge activations, analytic
//! backpropagation, and a complexity layer that turns a parameter snapshot
//! into Lipschitz/norm statistics and closed-form generalization slacks.
//!
//! Module map:
//!
//! - [`numeric`]: dense matrices, norms, the seeded generator.
//! - [`spline`]: B-spline and SiLU bases with per-basis Lipschitz bounds.
//! - [`net`]: layers, networks, backprop, SGD, checkpoints.
//! - [`complexity`]: per-layer statistics and aggregate complexity measures.
//! - [`bounds`]: covering-number and slack evaluators, Maurey sparsifier,
//!   Monte-Carlo Rademacher estimators.
//! - [`experiments`]: synthetic setups, CSV ingestion, the training loop.
//! - [`verify`]: self-checks behind the `verify` CLI subcommand.

pub mod bounds;
pub mod complexity;
pub mod error;
pub mod experiments;
pub mod net;
pub mod numeric;
pub mod spline;
pub mod verify;

pub use error::{KanError, Result};
pub use numeric::{Matrix, RngState};
