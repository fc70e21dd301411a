//! Channel L-value densities under the integer reliability mapping.
//!
//! Symmetrization maps both transmitted bit values onto "bit 0 sent", so a
//! correct message is positive: `f_s(L) = (f0(L) + f1(-L)) / 2`.

use serde::{Deserialize, Serialize};

use super::pmf::{DdeGrid, MessagePmf};
use crate::channel::{lsb, msb, ChannelParams, StateMoments, SymbolPage, NUM_STATES};
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::soft::{
    interval_probabilities, SoftThresholds, LSB_RELIABILITY, MSB_RELIABILITY, SOFT_INTERVALS,
};

/// Offset of `L = 0` in the per-plane arrays, which cover `L` in `-3..=3`.
const L_OFFSET: i32 = 3;
const L_VALUES: usize = 7;

/// Conditional PMFs of one bit plane's integer L-value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BitPlaneDensity {
    /// `f0[L + 3] = P(L | bit = 0)`.
    pub f0: [f64; L_VALUES],
    pub f1: [f64; L_VALUES],
}

impl BitPlaneDensity {
    fn from_interval_mass(
        mass: &[[f64; SOFT_INTERVALS]; NUM_STATES],
        bit: fn(u8) -> u8,
        rel: &[i8; SOFT_INTERVALS],
    ) -> Result<Self> {
        let mut f = [[0.0; L_VALUES]; 2];
        for (s, row) in mass.iter().enumerate() {
            let b = bit(s as u8) as usize;
            for (j, &p) in row.iter().enumerate() {
                f[b][(rel[j] as i32 + L_OFFSET) as usize] += p;
            }
        }
        for plane in &mut f {
            let total: f64 = plane.iter().sum();
            if !(total > 0.0) {
                return Err(Error::EmptyDataset.context("no samples for one bit value"));
            }
            plane.iter_mut().for_each(|p| *p /= total);
        }
        Ok(Self { f0: f[0], f1: f[1] })
    }

    pub fn symmetrized(&self, grid: DdeGrid) -> MessagePmf {
        let items = (0..L_VALUES).flat_map(|i| {
            let l = (i as i32 - L_OFFSET) as f64;
            [(l, 0.5 * self.f0[i]), (-l, 0.5 * self.f1[i])]
        });
        MessagePmf::from_weighted_values(grid, items).expect("normalized planes")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelDensities {
    pub msb: BitPlaneDensity,
    pub lsb: BitPlaneDensity,
}

impl ChannelDensities {
    /// Per-state interval mass (any non-negative weights, rows need not be
    /// normalized) to per-plane conditional densities.
    pub fn from_interval_mass(mass: &[[f64; SOFT_INTERVALS]; NUM_STATES]) -> Result<Self> {
        Ok(Self {
            msb: BitPlaneDensity::from_interval_mass(mass, msb, &MSB_RELIABILITY)?,
            lsb: BitPlaneDensity::from_interval_mass(mass, lsb, &LSB_RELIABILITY)?,
        })
    }

    /// Equal MSB/LSB mixture of the symmetrized plane densities.
    pub fn symmetrized(&self, grid: DdeGrid) -> MessagePmf {
        MessagePmf::mixture(&[
            (0.5, self.msb.symmetrized(grid)),
            (0.5, self.lsb.symmetrized(grid)),
        ])
    }
}

/// Exact densities from Gaussian state moments.
pub fn analytic_densities(m: &StateMoments, soft: &SoftThresholds) -> ChannelDensities {
    let e = soft.edges();
    let mut mass = [[0.0; SOFT_INTERVALS]; NUM_STATES];
    for j in 0..SOFT_INTERVALS {
        let p = interval_probabilities(m, e[j], e[j + 1]);
        for s in 0..NUM_STATES {
            mass[s][j] = p[s];
        }
    }
    ChannelDensities::from_interval_mass(&mass).expect("Gaussian mass is positive")
}

/// Labeled voltages kept sorted per state, so interval counts for any
/// boundary set cost a handful of binary searches.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    sorted: [Vec<f64>; NUM_STATES],
}

impl LabeledSample {
    pub fn new(voltages: &[f64], symbols: &[u8]) -> Result<Self> {
        if voltages.len() != symbols.len() {
            return Err(Error::LengthMismatch {
                what: "voltages vs symbols",
                left: voltages.len(),
                right: symbols.len(),
            });
        }
        if voltages.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut sorted: [Vec<f64>; NUM_STATES] = Default::default();
        for (&v, &s) in voltages.iter().zip(symbols) {
            if !v.is_finite() {
                return Err(Error::NonFinite("sample voltage"));
            }
            sorted[s as usize].push(v);
        }
        sorted.iter_mut().for_each(|v| v.sort_by(f64::total_cmp));
        Ok(Self { sorted })
    }

    /// Equiprobable random states drawn through `params`.
    pub fn from_channel(params: &ChannelParams, samples: usize, seed: u64) -> Result<Self> {
        let symbols = SymbolPage::random(samples, derive_seed(seed, &[0]));
        let page = params.sample_page(&symbols, derive_seed(seed, &[1]));
        Self::new(&page.voltages, &symbols.symbols)
    }

    pub fn len(&self) -> usize {
        self.sorted.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn interval_counts(&self, soft: &SoftThresholds) -> [[u64; SOFT_INTERVALS]; NUM_STATES] {
        let mut out = [[0u64; SOFT_INTERVALS]; NUM_STATES];
        for (s, v) in self.sorted.iter().enumerate() {
            // first index with voltage >= b (intervals are [b_j, b_{j+1}))
            let mut prev = 0usize;
            for (j, &b) in soft.boundaries.iter().enumerate() {
                let idx = v.partition_point(|&x| x < b);
                out[s][j] = (idx - prev) as u64;
                prev = idx;
            }
            out[s][SOFT_INTERVALS - 1] = (v.len() - prev) as u64;
        }
        out
    }

    pub fn densities(&self, soft: &SoftThresholds) -> Result<ChannelDensities> {
        let counts = self.interval_counts(soft);
        let mass = counts.map(|row| row.map(|c| c as f64));
        ChannelDensities::from_interval_mass(&mass)
    }
}

/// Histogram estimate of the channel densities from `samples` equiprobable
/// cells, plus the symmetrized DDE input.
pub fn channel_density(
    params: &ChannelParams,
    soft: &SoftThresholds,
    samples: usize,
    seed: u64,
    grid: DdeGrid,
) -> Result<(ChannelDensities, MessagePmf)> {
    let sample = LabeledSample::from_channel(params, samples, seed)?;
    let d = sample.densities(soft)?;
    let pmf = d.symmetrized(grid);
    Ok((d, pmf))
}
