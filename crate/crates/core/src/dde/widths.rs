//! Soft-region width search: minimize the DDE error fraction over
//! `(W1, W2, W3)` with differential evolution.

use serde::{Deserialize, Serialize};

use super::density::{analytic_densities, ChannelDensities, LabeledSample};
use super::diffevo::DifferentialEvolution;
use super::evolution::{dde_run, ZeroMass};
use super::pmf::DdeGrid;
use crate::channel::StateMoments;
use crate::error::{Error, Result};
use crate::ldpc::DegreeDistributions;
use crate::soft::{soft_boundaries, SoftThresholds, Widths};
use crate::thresholds::HardThresholds;

/// Where channel densities come from while the widths vary.
#[derive(Debug, Clone)]
pub enum DensitySource {
    /// Exact Gaussian state moments (full channel knowledge).
    Analytic(StateMoments),
    /// A fixed labeled sample; every candidate sees the same cells.
    Sample(LabeledSample),
}

impl DensitySource {
    pub fn densities(&self, soft: &SoftThresholds) -> Result<ChannelDensities> {
        match self {
            Self::Analytic(m) => Ok(analytic_densities(m, soft)),
            Self::Sample(s) => s.densities(soft),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WidthSearch {
    /// Per-width box, volts.
    pub bounds: [(f64, f64); 3],
    pub alpha: f64,
    pub iterations: usize,
    pub zero: ZeroMass,
    pub grid: DdeGrid,
    pub de: DifferentialEvolution,
}

impl Default for WidthSearch {
    fn default() -> Self {
        Self {
            bounds: [(0.001, 1.0); 3],
            alpha: 0.5,
            iterations: 10,
            zero: ZeroMass::Half,
            grid: DdeGrid::default(),
            de: DifferentialEvolution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthResult {
    pub widths: Widths,
    pub soft: SoftThresholds,
    /// Error fraction after the last iteration.
    pub pe: f64,
    pub evaluations: usize,
}

/// Error fraction after `search.iterations` rounds for one width vector, or
/// `None` when the induced boundaries are not strictly increasing.
pub fn width_cost(
    source: &DensitySource,
    hard: &HardThresholds,
    widths: Widths,
    ensemble: &DegreeDistributions,
    search: &WidthSearch,
) -> Result<Option<f64>> {
    let soft = match soft_boundaries(hard, widths) {
        Ok(s) if s.is_strict() => s,
        _ => return Ok(None),
    };
    let pmf = source.densities(&soft)?.symmetrized(search.grid);
    let trace = dde_run(&pmf, ensemble, search.alpha, search.iterations, search.zero)?;
    Ok(trace.last().copied())
}

pub fn optimize_widths(
    source: &DensitySource,
    hard: &HardThresholds,
    ensemble: &DegreeDistributions,
    search: &WidthSearch,
) -> Result<WidthResult> {
    let bounds = feasible_box(hard, &search.bounds)?;
    let mut failure = None;
    let out = search.de.minimize(&bounds, |w| {
        match width_cost(source, hard, [w[0], w[1], w[2]], ensemble, search) {
            Ok(Some(pe)) => pe,
            Ok(None) => 1.0,
            Err(e) => {
                failure.get_or_insert(e);
                1.0
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e.context("width search"));
    }
    let widths = [out.best[0], out.best[1], out.best[2]];
    let soft = soft_boundaries(hard, widths)?;
    Ok(WidthResult {
        widths,
        soft,
        pe: out.cost,
        evaluations: out.evaluations,
    })
}

/// Intersects `bounds` with a box in which no two soft regions can overlap:
/// `W_i` stays below both gaps adjacent to `a_i`, so
/// `W_i / 2 + W_{i+1} / 2 < a_{i+1} - a_i`.
pub fn feasible_box(hard: &HardThresholds, bounds: &[(f64, f64); 3]) -> Result<[(f64, f64); 3]> {
    if hard.a.len() != 3 {
        return Err(Error::InvalidParameter(format!(
            "soft boundaries need 3 hard thresholds, got {}",
            hard.a.len()
        )));
    }
    let gaps = [hard.a[1] - hard.a[0], hard.a[2] - hard.a[1]];
    let limit = [gaps[0], gaps[0].min(gaps[1]), gaps[1]];
    let mut out = *bounds;
    for (b, l) in out.iter_mut().zip(limit) {
        b.1 = b.1.min(0.999 * l);
        if !(b.1 > b.0) {
            return Err(Error::InvalidParameter(format!(
                "no feasible widths: thresholds {:?} leave at most {l} V for a region",
                hard.a
            )));
        }
    }
    Ok(out)
}
