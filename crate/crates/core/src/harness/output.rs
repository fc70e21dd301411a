use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::coded::WidthRow;
use crate::error::Result;

/// One receiver at one sweep point. BER is errors / bits; `insufficient` is
/// set when the trial budget ran out before `min_errors` errors were seen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scenario: String,
    pub n_pe_train: u64,
    pub n_pe_test: u64,
    pub t_train: f64,
    pub t_test: f64,
    pub detector: String,
    pub quantizer: String,
    /// Channel (pre-decoding) BER.
    pub raw_ber: f64,
    /// Decoded BER; empty for uncoded runs.
    pub coded_ber: Option<f64>,
    /// Bit errors behind the reported (coded if present, else raw) BER.
    pub errors: u64,
    pub bits: u64,
    pub trials: u64,
    pub insufficient: bool,
}

/// Wall-clock cost of one sweep point, kept apart from the results so the
/// results file is reproducible byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub scenario: String,
    pub n_pe_test: u64,
    pub t_test: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOutput {
    pub rows: Vec<ResultRow>,
    pub timings: Vec<TimingRow>,
    /// Soft-region widths chosen per training point (coded runs only).
    pub widths: Vec<WidthRow>,
}

impl RunOutput {
    pub fn extend(&mut self, other: RunOutput) {
        self.rows.extend(other.rows);
        self.timings.extend(other.timings);
        self.widths.extend(other.widths);
    }

    /// First row matching the predicate.
    pub fn find(&self, pred: impl Fn(&ResultRow) -> bool) -> Option<&ResultRow> {
        self.rows.iter().find(|r| pred(r))
    }
}

pub fn write_rows<T: Serialize>(path: impl AsRef<Path>, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Wide table for plotting: one row per `x`, one column per series, blank
/// cells for missing combinations.
pub fn write_wide(
    path: impl AsRef<Path>,
    x_name: &str,
    points: &[(f64, String, f64)],
) -> Result<()> {
    let mut series: Vec<String> = Vec::new();
    let mut table: BTreeMap<u64, BTreeMap<String, f64>> = BTreeMap::new();
    let mut xs: Vec<f64> = Vec::new();
    for (x, s, v) in points {
        if !series.contains(s) {
            series.push(s.clone());
        }
        let key = x.to_bits();
        if !table.contains_key(&key) {
            xs.push(*x);
        }
        table.entry(key).or_default().insert(s.clone(), *v);
    }
    xs.sort_by(f64::total_cmp);
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec![x_name.to_string()];
    header.extend(series.iter().cloned());
    w.write_record(&header)?;
    for x in xs {
        let row = &table[&x.to_bits()];
        let mut rec = vec![x.to_string()];
        for s in &series {
            rec.push(row.get(s).map(|v| v.to_string()).unwrap_or_default());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
