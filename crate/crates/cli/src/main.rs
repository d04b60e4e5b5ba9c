use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use kanbound::bounds::{evaluate_all, BoundsParams};
use kanbound::complexity::normalize_series;
use kanbound::experiments::{pearson, run_dropout_comparison, run_experiment, ExperimentConfig};

#[derive(Parser)]
#[command(
    name = "kanbound",
    version,
    about = "KAN training with complexity tracking and generalization-bound evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train per a JSON config, logging losses and complexity every epoch.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Train with and without dropout and report the complexity ratio.
    DropoutCompare {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print every slack term for a JSON parameter file.
    Bounds {
        #[arg(long)]
        params: PathBuf,
    },
    /// Run the gradient, Maurey and Rademacher self-checks.
    Verify,
    /// Rescale a complexity column so its maximum equals the last excess loss.
    Normalize {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        excess_col: String,
        #[arg(long)]
        complexity_col: String,
        /// Write here instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    Ok(ExperimentConfig::load(path)?)
}

fn run(path: &Path) -> Result<()> {
    let mut out = std::io::stdout().lock();
    let cfg = load_config(path)?;
    let records = run_experiment(&cfg)?;
    let Some(last) = records.last() else {
        writeln!(out, "0 epochs run")?;
        return Ok(());
    };
    writeln!(out, "epochs          {}", records.len())?;
    writeln!(out, "train_loss      {:.6}", last.train_loss)?;
    writeln!(out, "test_loss       {:.6}", last.test_loss)?;
    writeln!(out, "excess_loss     {:.6}", last.excess_loss)?;
    writeln!(out, "complexity_raw  {:.6e}", last.complexity_raw)?;
    let raw: Vec<f64> = records.iter().map(|r| r.complexity_raw).collect();
    let excess: Vec<f64> = records.iter().map(|r| r.excess_loss).collect();
    if let Ok(r) = pearson(&raw, &excess) {
        writeln!(out, "pearson(complexity_raw, excess_loss)  {r:.4}")?;
    }
    if let Some(csv) = &cfg.output_csv {
        writeln!(out, "metrics written to {}", csv.display())?;
    }
    if let Some(ck) = &cfg.checkpoint {
        writeln!(out, "checkpoint written to {}", ck.display())?;
    }
    Ok(())
}

fn dropout_compare(path: &Path) -> Result<()> {
    let mut out = std::io::stdout().lock();
    let cfg = load_config(path)?;
    let cmp = run_dropout_comparison(&cfg)?;
    match (cmp.regularized.last(), cmp.plain.last(), cmp.ratio.last()) {
        (Some(a), Some(b), Some(r)) => {
            writeln!(out, "dropout rate             {}", cfg.dropout_rate)?;
            writeln!(out, "final complexity ratio   {r:.6}")?;
            writeln!(out, "final excess (dropout)   {:.6}", a.excess_loss)?;
            writeln!(out, "final excess (plain)     {:.6}", b.excess_loss)?;
        }
        _ => writeln!(out, "0 epochs run")?,
    }
    if let Some(csv) = &cfg.output_csv {
        writeln!(out, "ratio series written to {}", csv.display())?;
    }
    Ok(())
}

fn bounds(path: &Path) -> Result<()> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let params: BoundsParams =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let (scalars, rows) = evaluate_all(&params)?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "{:<22} {:>16}", "quantity", "value")?;
    for (name, v) in scalars {
        writeln!(out, "{name:<22} {v:>16.6e}")?;
    }
    writeln!(out)?;
    writeln!(out, "{:<12} {:<12} {:>16}", "slack", "term", "value")?;
    for row in rows {
        match row.result {
            Ok(terms) => {
                for (label, v) in &terms.terms {
                    writeln!(out, "{:<12} {label:<12} {v:>16.6e}", row.name)?;
                }
                writeln!(
                    out,
                    "{:<12} {:<12} {:>16.6e}",
                    row.name,
                    "total",
                    terms.total()
                )?;
            }
            Err(e) => writeln!(out, "{:<12} {:<12} {e}", row.name, "n/a")?,
        }
    }
    Ok(())
}

fn verify() -> Result<bool> {
    let mut out = std::io::stdout().lock();
    let mut all = true;
    for c in kanbound::verify::run_all()? {
        writeln!(
            out,
            "{} {:<11} {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        )?;
        all &= c.passed;
    }
    Ok(all)
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h == name)
        .with_context(|| format!("no column named {name:?}"))
}

fn normalize(
    csv_path: &Path,
    excess_col: &str,
    complexity_col: &str,
    output: Option<&Path>,
) -> Result<()> {
    let mut reader = csv::Reader::from_path(csv_path)
        .with_context(|| format!("opening {}", csv_path.display()))?;
    let headers = reader.headers()?.clone();
    let (ei, ci) = (
        column(&headers, excess_col)?,
        column(&headers, complexity_col)?,
    );
    let mut records = Vec::new();
    let (mut excess, mut complexity) = (Vec::new(), Vec::new());
    for (row, rec) in reader.records().enumerate() {
        let rec = rec?;
        let parse = |i: usize| -> Result<f64> {
            rec[i].trim().parse().with_context(|| {
                format!(
                    "{}: line {}: {:?} is not a number",
                    csv_path.display(),
                    row + 2,
                    &rec[i]
                )
            })
        };
        excess.push(parse(ei)?);
        complexity.push(parse(ci)?);
        records.push(rec);
    }
    if records.is_empty() {
        bail!("{} has no data rows", csv_path.display());
    }
    let normalized = normalize_series(&complexity, &excess)?;
    let sink: Box<dyn Write> = match output {
        Some(p) => {
            Box::new(std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?)
        }
        None => Box::new(std::io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    let mut head: Vec<String> = headers.iter().map(str::to_string).collect();
    head.push(format!("{complexity_col}_normalized"));
    w.write_record(&head)?;
    for (rec, v) in records.iter().zip(normalized) {
        let mut fields: Vec<String> = rec.iter().map(str::to_string).collect();
        fields.push(format!("{v:?}"));
        w.write_record(&fields)?;
    }
    w.flush()?;
    Ok(())
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        let io = c
            .downcast_ref::<std::io::Error>()
            .map(|e| e.kind())
            .or_else(|| {
                c.downcast_ref::<csv::Error>().and_then(|e| match e.kind() {
                    csv::ErrorKind::Io(e) => Some(e.kind()),
                    _ => None,
                })
            });
        io == Some(std::io::ErrorKind::BrokenPipe)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config } => run(config).map(|_| true),
        Command::DropoutCompare { config } => dropout_compare(config).map(|_| true),
        Command::Bounds { params } => bounds(params).map(|_| true),
        Command::Verify => verify(),
        Command::Normalize {
            csv,
            excess_col,
            complexity_col,
            output,
        } => normalize(csv, excess_col, complexity_col, output.as_deref()).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
