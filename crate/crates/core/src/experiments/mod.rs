//! Synthetic setups, feature-CSV ingestion, losses, and the instrumented
//! training loop.
//!
//! Setups (i) and (ii) are regressions `y = f(x)·exp(ε)` on `x ~ U(−1, 1)^d`
//! with `ε ~ N(−log(1.04)/2, log(1.04))`, so `exp(ε)` has mean 1 and standard
//! deviation 0.2. Setups (iii) and (iv) draw binary labels with
//! `P(y = 1 | x) = 1/(1 + f(x))`. (i)/(iii) use `f1` on 4 inputs, (ii)/(iv)
//! use `f2` on 100.

mod config;
mod data;
mod loss;
mod train;

pub use config::{ExperimentConfig, Setup};
pub use data::{
    f1, f2, load_feature_csv, make_dataset, noise_mean, noise_variance, sample_label,
    write_dataset_csv, Dataset, Task,
};
pub use loss::loss_and_grad;
pub use train::{
    csv_header, pearson, run_dropout_comparison, run_experiment, DropoutComparison, EpochRecord,
    LayerColumns,
};
