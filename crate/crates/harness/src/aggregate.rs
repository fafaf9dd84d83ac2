//! Means over trials, taken in the linear domain.

use std::collections::BTreeMap;

use crate::algorithms::Algorithm;
use crate::config::from_db;
use crate::records::{to_db, Status, TrialRecord};

/// Mean over the `ok` records of one (sweep value, algorithm) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub sweep_value: f64,
    pub algorithm: Algorithm,
    /// Records in the cell, whatever their status.
    pub trials: usize,
    pub ok_fraction: f64,
    pub bob_snr_db: Option<f64>,
    pub p_a_dbm: Option<f64>,
    pub willie_gain_db: Option<f64>,
    pub kl_value: Option<f64>,
}

#[derive(Default)]
struct Acc {
    total: usize,
    ok: usize,
    snr: f64,
    p_a: f64,
    gain: f64,
    kl: f64,
}

/// Rows ordered by sweep value, then algorithm name. dB fields are converted
/// to linear, averaged and converted back.
pub fn aggregate(records: &[TrialRecord]) -> Vec<AggregateRow> {
    let mut cells: BTreeMap<(u64, &'static str), (f64, Algorithm, Acc)> = BTreeMap::new();
    for r in records {
        // order-preserving key for finite floats
        let bits = r.sweep_value.to_bits();
        let key = if r.sweep_value.is_sign_negative() { !bits } else { bits | (1 << 63) };
        let (_, _, acc) = cells
            .entry((key, r.algorithm.name()))
            .or_insert_with(|| (r.sweep_value, r.algorithm, Acc::default()));
        acc.total += 1;
        if r.status == Status::Ok && r.is_complete() {
            acc.ok += 1;
            acc.snr += from_db(r.bob_snr_db.unwrap_or_default());
            acc.p_a += from_db(r.p_a_dbm.unwrap_or_default() - 30.0);
            acc.gain += from_db(r.willie_gain_db.unwrap_or_default());
            acc.kl += r.kl_value.unwrap_or_default();
        }
    }
    cells
        .into_values()
        .map(|(sweep_value, algorithm, acc)| {
            let mean = |s: f64| (acc.ok > 0).then(|| s / acc.ok as f64);
            AggregateRow {
                sweep_value,
                algorithm,
                trials: acc.total,
                ok_fraction: acc.ok as f64 / acc.total as f64,
                bob_snr_db: mean(acc.snr).map(to_db),
                p_a_dbm: mean(acc.p_a).map(|p| to_db(p) + 30.0),
                willie_gain_db: mean(acc.gain).map(to_db),
                kl_value: mean(acc.kl),
            }
        })
        .collect()
}

/// The row for one cell, if present.
pub fn find(rows: &[AggregateRow], sweep_value: f64, algorithm: Algorithm) -> Option<&AggregateRow> {
    rows.iter().find(|r| r.sweep_value == sweep_value && r.algorithm == algorithm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::records::Outcome;

    fn rec(v: f64, alg: Algorithm, snr: f64, status: Status) -> TrialRecord {
        let o = Outcome { bob_snr: snr, p_a: 1.0, willie_gain: 1.0, kl_value: 0.1 };
        TrialRecord::new(v, 0, alg, status, Some(o))
    }

    #[test]
    fn linear_mean_over_ok_only() {
        let rs = [
            rec(2.0, Algorithm::NoIrs, 1.0, Status::Ok),
            rec(2.0, Algorithm::NoIrs, 100.0, Status::Ok),
            rec(2.0, Algorithm::NoIrs, 1e6, Status::MaxIter),
            rec(-1.0, Algorithm::TwoStage, 10.0, Status::Ok),
        ];
        let rows = aggregate(&rs);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].sweep_value, -1.0);
        let r = find(&rows, 2.0, Algorithm::NoIrs).unwrap();
        assert_eq!(r.trials, 3);
        assert!((r.ok_fraction - 2.0 / 3.0).abs() < 1e-15);
        // mean of 0 dB and 20 dB in linear terms is 50.5, not 10 dB
        assert!((r.bob_snr_db.unwrap() - to_db(50.5)).abs() < 1e-9);
        assert!((r.p_a_dbm.unwrap() - 30.0).abs() < 1e-9);
    }

    #[test]
    fn no_ok_records_leave_means_empty() {
        let rows = aggregate(&[TrialRecord::new(1.0, 0, Algorithm::Psca, Status::Skipped, None)]);
        assert_eq!(rows[0].ok_fraction, 0.0);
        assert!(rows[0].bob_snr_db.is_none());
    }
}
