use std::fs;
use std::path::{Path, PathBuf};

use super::{load_feature_csv, loss_and_grad, make_dataset, Dataset, ExperimentConfig, Setup};
use crate::complexity::{complexity_report, data_norm, normalize_series};
use crate::error::{KanError, Result};
use crate::net::{
    init_network, network_backward, network_forward, sgd_step, Checkpoint, ForwardMode,
    ForwardTape, KanNetwork, Velocity,
};
use crate::numeric::RngState;

const TRAIN_DATA_STREAM: u64 = 2;
const TEST_DATA_STREAM: u64 = 3;
const SHUFFLE_STREAM: u64 = 4;
const DROPOUT_STREAM: u64 = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerColumns {
    pub b: f64,
    pub c: f64,
    pub rho: f64,
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub test_loss: f64,
    pub excess_loss: f64,
    pub complexity_raw: f64,
    pub complexity_normalized: f64,
    pub rho_prod: f64,
    pub sum_bc23: f64,
    pub d: f64,
    pub layers: Vec<LayerColumns>,
}

impl EpochRecord {
    fn fields(&self) -> Vec<String> {
        let mut out = vec![self.epoch.to_string()];
        let scalars = [
            self.train_loss,
            self.test_loss,
            self.excess_loss,
            self.complexity_raw,
            self.complexity_normalized,
            self.rho_prod,
            self.sum_bc23,
            self.d,
        ];
        out.extend(scalars.iter().map(|v| format!("{v:?}")));
        for l in &self.layers {
            out.extend([l.b, l.c, l.rho].iter().map(|v| format!("{v:?}")));
        }
        out
    }
}

/// Column names for a network with `depth` layers.
pub fn csv_header(depth: usize) -> Vec<String> {
    let mut h: Vec<String> = [
        "epoch",
        "train_loss",
        "test_loss",
        "excess_loss",
        "complexity_raw",
        "complexity_normalized",
        "rho_prod",
        "sum_BC23",
        "D",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for l in 1..=depth {
        h.extend([format!("B_{l}"), format!("c_{l}"), format!("rho_{l}")]);
    }
    h
}

fn stream_seed(seed: u64, stream: u64) -> u64 {
    RngState::derive(seed, stream).next_u64()
}

fn load_data(cfg: &ExperimentConfig) -> Result<(Dataset, Dataset)> {
    let (train, test) = if cfg.setup == Setup::Csv {
        let label = cfg.label_column.as_deref().expect("validated");
        let train = load_feature_csv(cfg.train_csv.as_ref().expect("validated"), label)?;
        let test = load_feature_csv(cfg.test_csv.as_ref().expect("validated"), label)?;
        (train, test)
    } else {
        (
            make_dataset(cfg.setup, cfg.n_train, stream_seed(cfg.seed, TRAIN_DATA_STREAM))?,
            make_dataset(cfg.setup, cfg.n_test, stream_seed(cfg.seed, TEST_DATA_STREAM))?,
        )
    };
    let out = cfg.shape[cfg.shape.len() - 1];
    if train.x.cols() != cfg.shape[0] || test.x.cols() != cfg.shape[0] {
        return Err(KanError::Config(format!(
            "shape starts with {} but the data have {} / {} features",
            cfg.shape[0],
            train.x.cols(),
            test.x.cols()
        )));
    }
    let task = match (train.task, test.task) {
        (super::Task::Multiclass { classes: a }, super::Task::Multiclass { classes: b }) => {
            super::Task::Multiclass { classes: a.max(b).max(out) }
        }
        (a, b) if a == b => a,
        (a, b) => {
            return Err(KanError::Config(format!("train task {a:?} differs from test task {b:?}")))
        }
    };
    if task.output_dim() != out {
        return Err(KanError::Config(format!(
            "shape ends with {out} but the task needs {} outputs",
            task.output_dim()
        )));
    }
    Ok((Dataset { task, ..train }, Dataset { task, ..test }))
}

fn eval_loss(net: &KanNetwork, data: &Dataset) -> Result<f64> {
    let pred = net.predict(&data.x)?;
    Ok(loss_and_grad(data.task, &pred, &data.y)?.0)
}

struct Trained {
    records: Vec<EpochRecord>,
    net: KanNetwork,
}

fn train(cfg: &ExperimentConfig) -> Result<Trained> {
    cfg.validate()?;
    let (train, test) = load_data(cfg)?;
    let basis = cfg.spline.build()?;
    let mut net = init_network(&cfg.shape, &basis, cfg.seed)?;
    let mut velocity = Velocity::zeros_like(&net);
    let mut shuffle_rng = RngState::derive(cfg.seed, SHUFFLE_STREAM);
    let mut dropout_rng = RngState::derive(cfg.seed, DROPOUT_STREAM);
    let mode = if cfg.dropout_rate > 0.0 {
        ForwardMode::Train { dropout_rate: cfg.dropout_rate }
    } else {
        ForwardMode::Eval
    };
    let d = data_norm(&train.x);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut tape = ForwardTape::new();
    let mut records = Vec::with_capacity(cfg.epochs);

    for epoch in 1..=cfg.epochs {
        shuffle_rng.shuffle(&mut order);
        for batch in order.chunks(cfg.batch_size) {
            let x = train.x.select_rows(batch)?;
            let y: Vec<f64> = batch.iter().map(|&i| train.y[i]).collect();
            let rng = (cfg.dropout_rate > 0.0).then_some(&mut dropout_rng);
            let pred = network_forward(&net, &x, mode, rng, Some(&mut tape))?;
            let (loss, grad) = loss_and_grad(train.task, &pred, &y)?;
            if !loss.is_finite() {
                return Err(KanError::NanLoss { epoch, what: "minibatch loss".into() });
            }
            let grads = network_backward(&net, &tape, &grad)?;
            sgd_step(&mut net, &grads, cfg.lr, cfg.momentum, &mut velocity)?;
        }
        let train_loss = eval_loss(&net, &train)?;
        let test_loss = eval_loss(&net, &test)?;
        if !train_loss.is_finite() || !test_loss.is_finite() {
            return Err(KanError::NanLoss { epoch, what: "evaluation loss".into() });
        }
        let report = complexity_report(&net, d, cfg.lipschitz_mode)?;
        records.push(EpochRecord {
            epoch,
            train_loss,
            test_loss,
            excess_loss: test_loss - train_loss,
            complexity_raw: report.value(cfg.complexity_mode),
            complexity_normalized: 0.0,
            rho_prod: report.rho_prod,
            sum_bc23: report.sum_bc23,
            d,
            layers: report
                .layer_stats
                .iter()
                .map(|s| LayerColumns { b: s.b_l, c: s.c_l, rho: s.rho_l })
                .collect(),
        });
    }

    if !records.is_empty() {
        let raw: Vec<f64> = records.iter().map(|r| r.complexity_raw).collect();
        let excess: Vec<f64> = records.iter().map(|r| r.excess_loss).collect();
        // A constant series cannot be rescaled; it stays at zero.
        if let Ok(norm) = normalize_series(&raw, &excess) {
            for (r, v) in records.iter_mut().zip(norm) {
                r.complexity_normalized = v;
            }
        }
    }
    Ok(Trained { records, net })
}

fn write_records(path: &Path, depth: usize, records: &[EpochRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(csv_header(depth))?;
    for r in records {
        w.write_record(r.fields())?;
    }
    w.flush()?;
    Ok(())
}

fn plot_script(csv: &Path) -> String {
    let name = csv.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
    let stem = csv.file_stem().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
    format!(
        "# Excess loss and normalized complexity per epoch.\n\
         # Run from the directory holding {name}: gnuplot {stem}.gp\n\
         set datafile separator \",\"\n\
         set key autotitle columnhead top left\n\
         set terminal pngcairo size 900,600\n\
         set output \"{stem}.png\"\n\
         set xlabel \"epoch\"\n\
         set ylabel \"loss\"\n\
         plot \"{name}\" using 1:4 with lines lw 2 title \"excess loss\", \\\n     \
         \"{name}\" using 1:6 with lines lw 2 dt 2 title \"normalized complexity\"\n"
    )
}

/// Trains per `cfg`, recording losses and complexity after every epoch.
///
/// Writes the metrics CSV and its gnuplot script when `output_csv` is set,
/// and a checkpoint of the final network when `checkpoint` is set.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<EpochRecord>> {
    let Trained { records, net } = train(cfg)?;
    if let Some(csv) = &cfg.output_csv {
        write_records(csv, net.depth(), &records)?;
        let script = cfg.plot_script.clone().unwrap_or_else(|| csv.with_extension("gp"));
        fs::write(script, plot_script(csv))?;
    }
    if let Some(path) = &cfg.checkpoint {
        Checkpoint::from_network(&net, cfg.seed, cfg.epochs)?.save(path)?;
    }
    Ok(records)
}

/// Paired runs with and without dropout.
#[derive(Debug, Clone, PartialEq)]
pub struct DropoutComparison {
    pub regularized: Vec<EpochRecord>,
    pub plain: Vec<EpochRecord>,
    /// `complexity_raw(regularized) / complexity_raw(plain)` per epoch.
    pub ratio: Vec<f64>,
}

fn suffixed(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    path.with_file_name(format!("{stem}_{suffix}.csv"))
}

/// Runs `cfg` as given and again with `dropout_rate = 0`.
///
/// When `output_csv` is set it receives the ratio series
/// (`epoch, complexity_dropout, complexity_plain, ratio, excess_loss_dropout,
/// excess_loss_plain`) and the two runs go to `<stem>_dropout.csv` and
/// `<stem>_plain.csv`.
pub fn run_dropout_comparison(cfg: &ExperimentConfig) -> Result<DropoutComparison> {
    let quiet = ExperimentConfig {
        output_csv: None,
        plot_script: None,
        checkpoint: None,
        ..cfg.clone()
    };
    let reg = train(&quiet)?;
    let plain = train(&ExperimentConfig { dropout_rate: 0.0, ..quiet })?;
    let ratio: Vec<f64> = reg
        .records
        .iter()
        .zip(&plain.records)
        .map(|(a, b)| a.complexity_raw / b.complexity_raw)
        .collect();
    if let Some(csv) = &cfg.output_csv {
        write_records(&suffixed(csv, "dropout"), reg.net.depth(), &reg.records)?;
        write_records(&suffixed(csv, "plain"), plain.net.depth(), &plain.records)?;
        let mut w = csv::Writer::from_path(csv)?;
        w.write_record([
            "epoch",
            "complexity_dropout",
            "complexity_plain",
            "ratio",
            "excess_loss_dropout",
            "excess_loss_plain",
        ])?;
        for ((a, b), r) in reg.records.iter().zip(&plain.records).zip(&ratio) {
            w.write_record([
                a.epoch.to_string(),
                format!("{:?}", a.complexity_raw),
                format!("{:?}", b.complexity_raw),
                format!("{r:?}"),
                format!("{:?}", a.excess_loss),
                format!("{:?}", b.excess_loss),
            ])?;
        }
        w.flush()?;
    }
    Ok(DropoutComparison {
        regularized: reg.records,
        plain: plain.records,
        ratio,
    })
}

/// Sample Pearson correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(KanError::DimensionMismatch(format!(
            "need two equal series of length >= 2, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(KanError::InvalidArgument("correlation of a constant series".into()));
    }
    Ok(sxy / (sxx * syy).sqrt())
}
