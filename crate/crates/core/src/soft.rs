//! Soft read thresholds and channel reliabilities.
//!
//! Six boundaries are placed symmetrically around the three hard thresholds
//! (`a_i -+ W_i / 2`), splitting the voltage axis into seven intervals. Each
//! interval maps to a fixed pair of small integers used as surrogate MSB and
//! LSB log-likelihood ratios; [`reference_llr`] gives the exact values when
//! the channel is known.
//!
//! LLR sign convention everywhere: `ln P(obs | bit = 0) / P(obs | bit = 1)`.

use serde::{Deserialize, Serialize};

use crate::channel::{lsb, msb, ChannelParams, StateMoments, NUM_STATES};
use crate::error::{Error, Result};
use crate::math::normal_interval;
use crate::thresholds::{dp_partition, HardThresholds, SearchGrid};

/// Saturation magnitude for LLRs of intervals one hypothesis cannot reach.
pub const LLR_MAX: f64 = 25.0;

/// Number of soft quantization intervals.
pub const SOFT_INTERVALS: usize = 7;

/// Integer MSB reliability per interval.
pub const MSB_RELIABILITY: [i8; SOFT_INTERVALS] = [-3, -2, -1, 0, 1, 2, 3];
/// Integer LSB reliability per interval.
pub const LSB_RELIABILITY: [i8; SOFT_INTERVALS] = [-1, 0, 1, 2, 1, 0, -1];

/// Region widths around the hard thresholds, volts.
pub type Widths = [f64; 3];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftThresholds {
    pub hard: [f64; 3],
    pub widths: Widths,
    /// `b_1..b_6`; `b_0 = -inf` and `b_7 = +inf` are implied.
    pub boundaries: [f64; 6],
}

/// Places the six soft boundaries; overlapping regions are rejected.
pub fn soft_boundaries(hard: &HardThresholds, widths: Widths) -> Result<SoftThresholds> {
    if hard.a.len() != 3 {
        return Err(Error::InvalidParameter(format!(
            "soft boundaries need 3 hard thresholds, got {}",
            hard.a.len()
        )));
    }
    if widths.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidParameter(format!(
            "widths must be finite and non-negative: {widths:?}"
        )));
    }
    let mut b = [0.0; 6];
    for i in 0..3 {
        b[2 * i] = hard.a[i] - widths[i] / 2.0;
        b[2 * i + 1] = hard.a[i] + widths[i] / 2.0;
    }
    for i in 0..2 {
        if b[2 * i + 1] > b[2 * i + 2] {
            return Err(Error::OverlappingRegions {
                first: i + 1,
                second: i + 2,
                upper: b[2 * i + 1],
                lower: b[2 * i + 2],
            });
        }
    }
    Ok(SoftThresholds {
        hard: [hard.a[0], hard.a[1], hard.a[2]],
        widths,
        boundaries: b,
    })
}

impl SoftThresholds {
    /// Interval `j` in `0..7` with `b_j <= v < b_{j+1}`.
    pub fn interval(&self, v: f64) -> usize {
        self.boundaries.partition_point(|&b| b <= v)
    }

    /// `true` when all six boundaries are strictly increasing.
    pub fn is_strict(&self) -> bool {
        self.boundaries.windows(2).all(|w| w[0] < w[1])
    }

    /// Interval edges including the infinite sentinels.
    pub fn edges(&self) -> [f64; 8] {
        let mut e = [f64::NEG_INFINITY; 8];
        e[1..7].copy_from_slice(&self.boundaries);
        e[7] = f64::INFINITY;
        e
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegerLlrPair {
    pub l_msb: i8,
    pub l_lsb: i8,
}

pub fn integer_llr_for_interval(j: usize) -> IntegerLlrPair {
    IntegerLlrPair {
        l_msb: MSB_RELIABILITY[j],
        l_lsb: LSB_RELIABILITY[j],
    }
}

pub fn map_integer_llr(v: f64, soft: &SoftThresholds) -> IntegerLlrPair {
    integer_llr_for_interval(soft.interval(v))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LlrPair {
    pub l_msb: f64,
    pub l_lsb: f64,
}

/// `P(v in [lo, hi) | state)` for every state.
pub fn interval_probabilities(m: &StateMoments, lo: f64, hi: f64) -> [f64; NUM_STATES] {
    std::array::from_fn(|s| normal_interval(m.mu[s], m.sigma[s], lo, hi))
}

fn saturating_llr(num: f64, den: f64) -> f64 {
    match (num > 0.0, den > 0.0) {
        (false, false) => 0.0,
        (true, false) => LLR_MAX,
        (false, true) => -LLR_MAX,
        (true, true) => (num / den).ln().clamp(-LLR_MAX, LLR_MAX),
    }
}

/// LLRs of an arbitrary interval `[lo, hi)` from per-state probabilities.
pub fn llr_from_probabilities(p: &[f64; NUM_STATES]) -> LlrPair {
    let bit_mass = |sel: fn(u8) -> u8, bit: u8| -> f64 {
        (0..NUM_STATES)
            .filter(|&s| sel(s as u8) == bit)
            .map(|s| p[s])
            .sum()
    };
    LlrPair {
        l_msb: saturating_llr(bit_mass(msb, 0), bit_mass(msb, 1)),
        l_lsb: saturating_llr(bit_mass(lsb, 0), bit_mass(lsb, 1)),
    }
}

/// Exact MSB/LSB LLRs of soft interval `j` under full channel knowledge.
pub fn reference_llr(params: &ChannelParams, soft: &SoftThresholds, j: usize) -> LlrPair {
    reference_llr_for(&params.state_moments(), &soft.edges(), j)
}

/// Exact LLRs of interval `j` of an arbitrary edge list (with sentinels).
pub fn reference_llr_for(m: &StateMoments, edges: &[f64], j: usize) -> LlrPair {
    llr_from_probabilities(&interval_probabilities(m, edges[j], edges[j + 1]))
}

/// Per-interval exact LLR table for an interior boundary list.
pub fn reference_llr_table(m: &StateMoments, boundaries: &[f64]) -> Vec<LlrPair> {
    let edges = with_sentinels(boundaries);
    (0..edges.len() - 1)
        .map(|j| reference_llr_for(m, &edges, j))
        .collect()
}

pub fn with_sentinels(boundaries: &[f64]) -> Vec<f64> {
    let mut e = Vec::with_capacity(boundaries.len() + 2);
    e.push(f64::NEG_INFINITY);
    e.extend_from_slice(boundaries);
    e.push(f64::INFINITY);
    e
}

fn interval_information(p: &[f64; NUM_STATES]) -> f64 {
    let q = p.iter().sum::<f64>() / NUM_STATES as f64;
    if q <= 0.0 {
        return 0.0;
    }
    p.iter()
        .filter(|&&px| px > 0.0)
        .map(|&px| px * (px / q).log2())
        .sum::<f64>()
        / NUM_STATES as f64
}

/// Mutual information in bits between an equiprobable state and its
/// quantization by the interior `boundaries` (any increasing list).
pub fn mutual_information(m: &StateMoments, boundaries: &[f64]) -> f64 {
    let edges = with_sentinels(boundaries);
    edges
        .windows(2)
        .map(|w| interval_information(&interval_probabilities(m, w[0], w[1])))
        .sum::<f64>()
        .clamp(0.0, 2.0)
}

/// MI-maximizing quantizer with `k` thresholds chosen on `grid`.
pub fn mmi_thresholds(m: &StateMoments, k: usize, grid: &SearchGrid) -> Result<Vec<f64>> {
    let b = grid.boundaries();
    let (indices, _) = dp_partition(grid.intervals(), k + 1, |_, j, l| {
        interval_information(&interval_probabilities(m, b[j], b[l]))
    })?;
    Ok(indices.iter().map(|&j| b[j]).collect())
}
