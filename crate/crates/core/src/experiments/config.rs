use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::complexity::ComplexityMode;
use crate::error::{KanError, Result};
use crate::net::BasisConfig;
use crate::spline::LipschitzMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Setup {
    I,
    Ii,
    Iii,
    Iv,
    Csv,
}

impl Setup {
    /// Input width of the synthetic setups.
    pub fn input_dim(self) -> Option<usize> {
        match self {
            Setup::I | Setup::Iii => Some(4),
            Setup::Ii | Setup::Iv => Some(100),
            Setup::Csv => None,
        }
    }

    pub fn is_classification(self) -> bool {
        matches!(self, Setup::Iii | Setup::Iv)
    }
}

fn default_setup() -> Setup {
    Setup::I
}
fn default_shape() -> Vec<usize> {
    vec![4, 8, 8, 1]
}
fn default_lr() -> f64 {
    0.1
}
fn default_batch() -> usize {
    32
}
fn default_epochs() -> usize {
    200
}
fn default_n() -> usize {
    2000
}
fn default_seed() -> u64 {
    7
}
fn default_momentum() -> f64 {
    0.0
}

/// Experiment configuration, read from JSON with unknown keys rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_setup")]
    pub setup: Setup,
    #[serde(default = "default_shape")]
    pub shape: Vec<usize>,
    #[serde(default)]
    pub spline: BasisConfig,
    #[serde(default = "default_lr")]
    pub lr: f64,
    #[serde(default = "default_momentum")]
    pub momentum: f64,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default)]
    pub dropout_rate: f64,
    #[serde(default = "default_n")]
    pub n_train: usize,
    #[serde(default = "default_n")]
    pub n_test: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub lipschitz_mode: LipschitzMode,
    #[serde(default)]
    pub complexity_mode: ComplexityMode,
    /// Per-epoch metrics CSV.
    #[serde(default)]
    pub output_csv: Option<PathBuf>,
    /// gnuplot script; defaults to the CSV path with a `.gp` extension.
    #[serde(default)]
    pub plot_script: Option<PathBuf>,
    /// Final-epoch network checkpoint.
    #[serde(default)]
    pub checkpoint: Option<PathBuf>,
    /// Feature files of the `csv` setup.
    #[serde(default)]
    pub train_csv: Option<PathBuf>,
    #[serde(default)]
    pub test_csv: Option<PathBuf>,
    #[serde(default)]
    pub label_column: Option<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("every field has a default")
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| KanError::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| KanError::Config(format!("{}: {e}", path.display())))
    }

    /// Checks everything that does not need the data files.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(KanError::Config(msg));
        if self.shape.len() < 2 || self.shape.contains(&0) {
            return bad(format!("shape must have >= 2 positive widths, got {:?}", self.shape));
        }
        if let Some(d) = self.setup.input_dim() {
            if self.shape[0] != d {
                return bad(format!("setup {:?} has {d} inputs but shape starts with {}", self.setup, self.shape[0]));
            }
            if self.shape[self.shape.len() - 1] != 1 {
                return bad("synthetic setups need a single output".into());
            }
        } else if self.train_csv.is_none() || self.test_csv.is_none() || self.label_column.is_none() {
            return bad("the csv setup needs train_csv, test_csv and label_column".into());
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return bad(format!("lr must be >= 0, got {}", self.lr));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad(format!("momentum must lie in [0, 1), got {}", self.momentum));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return bad(format!("dropout_rate must lie in [0, 1), got {}", self.dropout_rate));
        }
        if self.batch_size == 0 {
            return bad("batch_size must be >= 1".into());
        }
        if self.setup != Setup::Csv && (self.n_train == 0 || self.n_test == 0) {
            return bad("n_train and n_test must be >= 1".into());
        }
        self.spline.build().map(|_| ())
    }
}
