use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use irs_covert_harness::emit::{write_records, write_summary_csv};
use irs_covert_harness::sweep::{has_hard_failure, run_sweep_detailed};
use irs_covert_harness::{aggregate, emit, validate, Algorithm, ExperimentConfig, Format, HarnessError, Sweep, SweepKind, SweepOptions};

#[derive(Parser)]
#[command(name = "irs-covert", version, about = "Covert IRS design sweeps and self-checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the selected algorithms on one channel draw; JSON to stdout.
    Solve(Common),
    /// Sweep the number of reflecting elements.
    SweepN(SweepArgs),
    /// Sweep the covertness level ε.
    SweepEps(SweepArgs),
    /// Sweep the IRS x coordinate.
    SweepLocation(SweepArgs),
    /// Run the oracle and invariant checks and print the report.
    Validate {
        #[arg(long, value_enum, default_value = "text")]
        format: ReportFormat,
        /// Exit with status 2 if any check fails.
        #[arg(long)]
        strict: bool,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Args)]
struct Common {
    /// JSON experiment configuration; defaults to the reference setup.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated algorithm names.
    #[arg(long, value_delimiter = ',')]
    algorithms: Option<Vec<Algorithm>>,
    /// Run SDP-based algorithms above 50 elements.
    #[arg(long)]
    allow_large: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated sweep values, replacing the config's list.
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Record file; stdout when absent and the config names none.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write per-cell means as CSV.
    #[arg(long)]
    summary: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    /// Fill wallclock_ms (output is then no longer reproducible).
    #[arg(long)]
    timing: bool,
    /// Exit with status 2 if any trial failed.
    #[arg(long)]
    strict: bool,
}

/// Writes a line to stdout; a closed pipe is not an error.
fn print_out(text: &str) -> std::io::Result<()> {
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => other,
    }
}

fn load(common: &Common) -> Result<ExperimentConfig, HarnessError> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(algs) = &common.algorithms {
        cfg.algorithms = algs.clone();
    }
    Ok(cfg)
}

fn sweep_for(kind: SweepKind, cfg: &ExperimentConfig, values: Option<&[f64]>) -> Result<Sweep, HarnessError> {
    if let Some(vs) = values {
        return Ok(match kind {
            SweepKind::Elements => Sweep::Elements(
                vs.iter()
                    .map(|&v| {
                        if v >= 0.0 && v.fract() == 0.0 {
                            Ok(v as usize)
                        } else {
                            Err(HarnessError::Config(format!("element count {v} is not an integer")))
                        }
                    })
                    .collect::<Result<_, _>>()?,
            ),
            SweepKind::Epsilon => Sweep::Epsilon(vs.to_vec()),
            SweepKind::IrsX => Sweep::IrsX(vs.to_vec()),
        });
    }
    match &cfg.sweep {
        None => Ok(Sweep::default_for(kind)),
        Some(s) if s.kind() == kind => Ok(s.clone()),
        Some(_) => Err(HarnessError::Config("config sweep does not match the subcommand".into())),
    }
}

fn run(cli: Cli) -> Result<ExitCode, HarnessError> {
    match cli.command {
        Command::Validate { format, strict } => {
            let report = validate();
            match format {
                ReportFormat::Json => print_out(&serde_json::to_string_pretty(&report)?)?,
                ReportFormat::Text => print_out(&report.to_string())?,
            }
            Ok(if strict && !report.all_passed() { ExitCode::from(2) } else { ExitCode::SUCCESS })
        }
        Command::Solve(common) => {
            let mut cfg = load(&common)?;
            cfg.sweep = None;
            cfg.trials = 1;
            let options = SweepOptions { allow_large: common.allow_large, ..Default::default() };
            let out = run_sweep_detailed(&cfg, &options)?;
            let doc: Vec<_> = out
                .iter()
                .map(|o| serde_json::json!({ "record": o.record, "design": o.design }))
                .collect();
            print_out(&serde_json::to_string_pretty(&doc)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::SweepN(args) => sweep(SweepKind::Elements, args),
        Command::SweepEps(args) => sweep(SweepKind::Epsilon, args),
        Command::SweepLocation(args) => sweep(SweepKind::IrsX, args),
    }
}

fn sweep(kind: SweepKind, args: SweepArgs) -> Result<ExitCode, HarnessError> {
    let mut cfg = load(&args.common)?;
    cfg.sweep = Some(sweep_for(kind, &cfg, args.values.as_deref())?);
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(out) = &args.out {
        cfg.output_path = Some(out.clone());
    }
    cfg.validate()?;
    let options = SweepOptions {
        allow_large: args.common.allow_large,
        timing: args.timing,
        workers: args.workers,
    };
    let records: Vec<_> = run_sweep_detailed(&cfg, &options)?.into_iter().map(|o| o.record).collect();
    let format = args.format.unwrap_or_else(|| match &cfg.output_path {
        Some(p) if p.extension().is_some_and(|e| e == "json") => Format::Json,
        _ => Format::Csv,
    });
    match &cfg.output_path {
        Some(path) => emit(&records, format, path)?,
        None => match write_records(&records, format, std::io::stdout().lock()) {
            Err(HarnessError::Write(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
            Err(HarnessError::Csv(e)) if matches!(e.kind(), csv::ErrorKind::Io(io) if io.kind() == std::io::ErrorKind::BrokenPipe) => {}
            other => other?,
        },
    }
    let rows = aggregate(&records);
    match &args.summary {
        Some(path) => {
            let file = std::fs::File::create(path).map_err(|source| HarnessError::Io { path: path.clone(), source })?;
            write_summary_csv(&rows, std::io::BufWriter::new(file))?;
        }
        None => {
            let mut err = std::io::stderr().lock();
            write_summary_csv(&rows, &mut err)?;
            err.flush()?;
        }
    }
    Ok(if args.strict && has_hard_failure(&records) { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
