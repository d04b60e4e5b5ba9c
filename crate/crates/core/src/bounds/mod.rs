//! Covering-number and generalization-slack formulas, plus constructive
//! checks (Maurey sparsification, Monte-Carlo Rademacher estimates).
//!
//! All logarithms are natural. Constants the theory leaves unspecified
//! (`C̃`, `C̃′`, the sub-exponential `C′`) are explicit inputs that default
//! to 1, so the values are bound shapes rather than certified numbers.

mod maurey;
mod rademacher;
mod slack;

pub use maurey::{maurey_sparsify, Sparsified};
pub use rademacher::{rademacher_linear_exact, rademacher_mc_class, McEstimate};
pub use slack::*;
