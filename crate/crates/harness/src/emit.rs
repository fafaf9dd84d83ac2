//! CSV and JSON writers for trial records and aggregates.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::aggregate::AggregateRow;
use crate::error::{HarnessError, Result};
use crate::records::TrialRecord;

pub const CSV_HEADER: [&str; 9] = [
    "sweep_value",
    "trial",
    "algorithm",
    "bob_snr_db",
    "p_a_dbm",
    "willie_gain_db",
    "kl_value",
    "wallclock_ms",
    "status",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Rounds to 9 significant digits and prints the shortest form of the
/// rounded value; exponent notation outside `[1e-4, 1e9)`.
pub fn format_number(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.8e}").parse().unwrap_or(x);
    let mag = rounded.abs();
    if rounded == 0.0 {
        "0".into()
    } else if (1e-4..1e9).contains(&mag) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

fn cell(x: Option<f64>) -> String {
    x.map(format_number).unwrap_or_default()
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

pub fn write_csv<W: Write>(records: &[TrialRecord], out: W) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            format_number(r.sweep_value),
            r.trial.to_string(),
            r.algorithm.name().to_string(),
            cell(r.bob_snr_db),
            cell(r.p_a_dbm),
            cell(r.willie_gain_db),
            cell(r.kl_value),
            cell(r.wallclock_ms),
            r.status.as_str().to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Pretty-printed JSON array with a trailing newline. Floats round-trip exactly.
pub fn write_json<W: Write>(records: &[TrialRecord], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, records)?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn write_records<W: Write>(records: &[TrialRecord], format: Format, out: W) -> Result<()> {
    match format {
        Format::Csv => write_csv(records, out),
        Format::Json => write_json(records, out),
    }
}

/// Writes to `path`, attaching the path to any I/O error.
pub fn emit(records: &[TrialRecord], format: Format, path: &Path) -> Result<()> {
    let io = |source| HarnessError::Io { path: path.to_path_buf(), source };
    let file = File::create(path).map_err(io)?;
    let mut buf = BufWriter::new(file);
    write_records(records, format, &mut buf).map_err(|e| match e {
        HarnessError::Write(source) => io(source),
        HarnessError::Csv(c) => match c.into_kind() {
            csv::ErrorKind::Io(source) => io(source),
            other => HarnessError::Config(format!("{}: {other:?}", path.display())),
        },
        other => other,
    })?;
    buf.flush().map_err(io)
}

pub const SUMMARY_HEADER: [&str; 8] = [
    "sweep_value",
    "algorithm",
    "trials",
    "ok_fraction",
    "bob_snr_db",
    "p_a_dbm",
    "willie_gain_db",
    "kl_value",
];

pub fn write_summary_csv<W: Write>(rows: &[AggregateRow], out: W) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for r in rows {
        w.write_record([
            format_number(r.sweep_value),
            r.algorithm.name().to_string(),
            r.trials.to_string(),
            format_number(r.ok_fraction),
            cell(r.bob_snr_db),
            cell(r.p_a_dbm),
            cell(r.willie_gain_db),
            cell(r.kl_value),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
