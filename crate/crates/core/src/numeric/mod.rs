//! Dense matrices, norms, and the seeded random generator shared by every
//! other module.

mod matrix;
mod norm;
mod rng;

pub use matrix::Matrix;
pub use norm::{
    frobenius_norm, spectral_norm, spectral_norm_default, SPECTRAL_MAX_ITER, SPECTRAL_TOL,
};
pub use rng::{sample_standard_normal, RngState};

/// Sum with a fixed pairwise reduction tree so that the result depends only on
/// the input order, never on how the work was scheduled.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 16;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}
