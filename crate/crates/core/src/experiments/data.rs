use std::f64::consts::PI;
use std::path::Path;

use super::Setup;
use crate::error::{KanError, Result};
use crate::numeric::{Matrix, RngState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Regression,
    /// Labels 0/1, one output logit.
    Binary,
    /// Labels `0..classes`, one logit per class.
    Multiclass { classes: usize },
}

impl Task {
    pub fn output_dim(self) -> usize {
        match self {
            Task::Regression | Task::Binary => 1,
            Task::Multiclass { classes } => classes,
        }
    }
}

/// Rows of `x` paired with `y`; class labels are stored as whole numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Matrix,
    pub y: Vec<f64>,
    pub task: Task,
}

impl Dataset {
    pub fn new(x: Matrix, y: Vec<f64>, task: Task) -> Result<Self> {
        if x.rows() != y.len() {
            return Err(KanError::DimensionMismatch(format!(
                "{} rows but {} labels",
                x.rows(),
                y.len()
            )));
        }
        let valid = |v: f64| match task {
            Task::Regression => v.is_finite(),
            Task::Binary => v == 0.0 || v == 1.0,
            Task::Multiclass { classes } => v >= 0.0 && v.fract() == 0.0 && v < classes as f64,
        };
        if let Some(i) = y.iter().position(|&v| !valid(v)) {
            return Err(KanError::InvalidArgument(format!(
                "label {} at row {i} is invalid for {task:?}",
                y[i]
            )));
        }
        Ok(Self { x, y, task })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

/// `exp(½{sin(π(x₁²+x₂²)) + sin(π(x₃²+x₄²))})`.
pub fn f1(x: &[f64; 4]) -> f64 {
    let a = (PI * (x[0] * x[0] + x[1] * x[1])).sin();
    let b = (PI * (x[2] * x[2] + x[3] * x[3])).sin();
    (0.5 * (a + b)).exp()
}

/// `exp((1/100) Σ sin²(πx_i/2))` on 100 inputs.
pub fn f2(x: &[f64]) -> Result<f64> {
    if x.len() != 100 {
        return Err(KanError::DimensionMismatch(format!("f2 takes 100 inputs, got {}", x.len())));
    }
    let s: f64 = x.iter().map(|v| (PI * v / 2.0).sin().powi(2)).sum();
    Ok((s / 100.0).exp())
}

/// Mean of the log-normal noise exponent, `−log(1.04)/2`.
pub fn noise_mean() -> f64 {
    -(1.04f64).ln() / 2.0
}

/// Variance of the noise exponent, `log(1.04)`.
pub fn noise_variance() -> f64 {
    (1.04f64).ln()
}

fn signal(setup: Setup, x: &[f64]) -> Result<f64> {
    match setup {
        Setup::I | Setup::Iii => {
            let v: &[f64; 4] = x.try_into().map_err(|_| {
                KanError::DimensionMismatch(format!("f1 takes 4 inputs, got {}", x.len()))
            })?;
            Ok(f1(v))
        }
        Setup::Ii | Setup::Iv => f2(x),
        Setup::Csv => Err(KanError::InvalidArgument("the csv setup has no generator".into())),
    }
}

/// One response at input `x`: `f(x)·exp(ε)` or a Bernoulli(`1/(1+f(x))`) label.
pub fn sample_label(setup: Setup, x: &[f64], rng: &mut RngState) -> Result<f64> {
    let f = signal(setup, x)?;
    if setup.is_classification() {
        Ok(if rng.bernoulli(1.0 / (1.0 + f)) { 1.0 } else { 0.0 })
    } else {
        Ok(f * rng.normal(noise_mean(), noise_variance().sqrt()).exp())
    }
}

/// `n` iid samples; each draws its inputs, then its response, from
/// `RngState::new(seed)`.
pub fn make_dataset(setup: Setup, n: usize, seed: u64) -> Result<Dataset> {
    let d = setup
        .input_dim()
        .ok_or_else(|| KanError::InvalidArgument("the csv setup has no generator".into()))?;
    if n == 0 {
        return Err(KanError::InvalidArgument("n must be >= 1".into()));
    }
    let mut rng = RngState::new(seed);
    let mut xs = Vec::with_capacity(n * d);
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        let start = xs.len();
        xs.extend((0..d).map(|_| rng.uniform_range(-1.0, 1.0)));
        ys.push(sample_label(setup, &xs[start..], &mut rng)?);
    }
    let task = if setup.is_classification() { Task::Binary } else { Task::Regression };
    Dataset::new(Matrix::new(n, d, xs)?, ys, task)
}

fn parse_error(path: &Path, line: u64, message: String) -> KanError {
    KanError::Parse {
        path: path.display().to_string(),
        line,
        message,
    }
}

/// Reads a headered numeric CSV. Every column except `label_column` is a
/// feature. When every label parses as an integer the task is multiclass
/// with `max + 1` classes; otherwise it is regression.
pub fn load_feature_csv(path: impl AsRef<Path>, label_column: &str) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_path(path)?;
    let headers = reader.headers()?.clone();
    let label_idx = headers
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| parse_error(path, 1, format!("no column named {label_column:?}")))?;
    let width = headers.len();
    let mut xs = Vec::new();
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != width {
            return Err(parse_error(
                path,
                line,
                format!("expected {width} fields, found {}", record.len()),
            ));
        }
        for (c, cell) in record.iter().enumerate() {
            let cell = cell.trim();
            if c == label_idx {
                labels.push(cell.to_string());
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| {
                parse_error(path, line, format!("column {:?}: {cell:?} is not a number", &headers[c]))
            })?;
            if !v.is_finite() {
                return Err(parse_error(
                    path,
                    line,
                    format!("column {:?}: non-finite value {cell:?}", &headers[c]),
                ));
            }
            xs.push(v);
        }
    }
    let n = labels.len();
    if n == 0 {
        return Err(parse_error(path, 1, "no data rows".into()));
    }
    if width < 2 {
        return Err(parse_error(path, 1, "no feature columns".into()));
    }
    let line_of = |i: usize| i as u64 + 2;
    let (y, task) = if labels.iter().all(|l| l.parse::<i64>().is_ok()) {
        let mut y = Vec::with_capacity(n);
        for (i, l) in labels.iter().enumerate() {
            let v: i64 = l.parse().expect("checked above");
            if v < 0 {
                return Err(parse_error(path, line_of(i), format!("negative class label {v}")));
            }
            y.push(v as f64);
        }
        let classes = y.iter().copied().fold(0.0, f64::max) as usize + 1;
        (y, Task::Multiclass { classes })
    } else {
        let mut y = Vec::with_capacity(n);
        for (i, l) in labels.iter().enumerate() {
            match l.parse::<f64>() {
                Ok(v) if v.is_finite() => y.push(v),
                _ => {
                    return Err(parse_error(
                        path,
                        line_of(i),
                        format!("label {l:?} is not a finite number"),
                    ))
                }
            }
        }
        (y, Task::Regression)
    };
    Dataset::new(Matrix::new(n, width - 1, xs)?, y, task)
}

/// Writes features `x1..xd` then `label_column`; floats in shortest
/// round-trip form, class labels as integers.
pub fn write_dataset_csv(data: &Dataset, path: impl AsRef<Path>, label_column: &str) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = (1..=data.x.cols()).map(|j| format!("x{j}")).collect();
    header.push(label_column.to_string());
    w.write_record(&header)?;
    for (row, &y) in data.x.iter_rows().zip(&data.y) {
        let mut rec: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        rec.push(match data.task {
            Task::Regression => format!("{y:?}"),
            _ => format!("{}", y as i64),
        });
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
