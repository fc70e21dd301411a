//! Hard read thresholds.
//!
//! [`dp_thresholds`] picks the `n - 1` thresholds on a [`SearchGrid`] whose
//! threshold decisions agree with a reference labelling (the detector's
//! hardened outputs) on as many samples as possible. Agreement decomposes
//! over intervals, so the search is a partition DP over grid boundaries
//! ([`dp_partition`]), which the MMI quantizer reuses.
//!
//! [`optimum_sep`] is the full-knowledge baseline: it minimizes the
//! symbol-error probability of the Gaussian channel directly.

use serde::{Deserialize, Serialize};

use crate::channel::{bit_distance, ChannelParams, StateMoments, SymbolPage, VoltagePage, NUM_STATES};
use crate::error::{Error, Result};
use crate::math::{normal_cdf, normal_interval, normal_log_pdf, q_function};

/// Ordered read thresholds `a_1 < ... < a_{n-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardThresholds {
    pub a: Vec<f64>,
}

impl HardThresholds {
    pub fn new(a: Vec<f64>) -> Result<Self> {
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("hard thresholds"));
        }
        if !a.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidParameter(
                "hard thresholds must be strictly increasing".into(),
            ));
        }
        Ok(Self { a })
    }

    /// Label of one voltage: the number of thresholds at or below it.
    pub fn classify(&self, v: f64) -> u8 {
        self.a.partition_point(|&t| t <= v) as u8
    }
}

/// Threshold detector over a whole page.
pub fn threshold_detect(page: &VoltagePage, thr: &HardThresholds) -> SymbolPage {
    SymbolPage {
        symbols: page.voltages.iter().map(|&v| thr.classify(v)).collect(),
    }
}

/// Grid boundaries `b_0 = -inf < b_1 < ... < b_{m-1} < b_m = +inf` with the
/// interior points uniform on `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchGrid {
    boundaries: Vec<f64>,
}

impl SearchGrid {
    pub fn uniform(lo: f64, hi: f64, m: usize) -> Result<Self> {
        if m < 3 {
            return Err(Error::InvalidParameter(format!(
                "search grid needs at least 3 intervals, got {m}"
            )));
        }
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidParameter(format!(
                "bad search grid span [{lo}, {hi}]"
            )));
        }
        let step = (hi - lo) / (m - 2) as f64;
        let mut boundaries = Vec::with_capacity(m + 1);
        boundaries.push(f64::NEG_INFINITY);
        for j in 1..m {
            boundaries.push(if j == m - 1 { hi } else { lo + (j - 1) as f64 * step });
        }
        boundaries.push(f64::INFINITY);
        Ok(Self { boundaries })
    }

    /// Grid spanning the nominal erased-to-top range, widened by three erased
    /// standard deviations on each side so drifted states stay inside.
    pub fn from_nominal(params: &ChannelParams, m: usize) -> Result<Self> {
        let pad = 3.0 * params.sigma_e.max(params.sigma_p);
        Self::uniform(
            params.v_means[0] - pad,
            params.v_means[NUM_STATES - 1] + pad,
            m,
        )
    }

    /// Number of intervals `m`.
    pub fn intervals(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn boundary(&self, j: usize) -> f64 {
        self.boundaries[j]
    }

    /// Index `j` with `b_j <= v < b_{j+1}`.
    pub fn cell(&self, v: f64) -> usize {
        self.boundaries.partition_point(|&b| b <= v) - 1
    }
}

/// Per-symbol prefix counts over grid cells.
///
/// `count(i, j, k)` is the number of samples labelled `i` whose voltage lies
/// in `[b_j, b_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CountTable {
    m: usize,
    prefix: Vec<Vec<u64>>,
}

impl CountTable {
    /// Builds the table from per-cell histograms (`hist[i][cell]`).
    pub fn from_histograms(hist: &[Vec<u64>]) -> Self {
        let m = hist.first().map_or(0, |h| h.len());
        let prefix = hist
            .iter()
            .map(|h| {
                let mut p = Vec::with_capacity(m + 1);
                p.push(0u64);
                let mut acc = 0;
                for &c in h {
                    acc += c;
                    p.push(acc);
                }
                p
            })
            .collect();
        Self { m, prefix }
    }

    pub fn intervals(&self) -> usize {
        self.m
    }

    pub fn symbols(&self) -> usize {
        self.prefix.len()
    }

    pub fn count(&self, symbol: usize, j: usize, k: usize) -> u64 {
        self.prefix[symbol][k] - self.prefix[symbol][j]
    }

    pub fn total(&self) -> u64 {
        (0..self.symbols()).map(|i| self.count(i, 0, self.m)).sum()
    }
}

/// Histograms aligned voltage/label pages onto the grid.
pub fn build_counts(
    voltages: &[VoltagePage],
    labels: &[SymbolPage],
    grid: &SearchGrid,
) -> Result<CountTable> {
    if voltages.len() != labels.len() {
        return Err(Error::LengthMismatch {
            what: "page lists",
            left: voltages.len(),
            right: labels.len(),
        });
    }
    let mut hist = vec![vec![0u64; grid.intervals()]; NUM_STATES];
    for (v, x) in voltages.iter().zip(labels) {
        if v.len() != x.len() {
            return Err(Error::LengthMismatch {
                what: "voltage/label page",
                left: v.len(),
                right: x.len(),
            });
        }
        for (&volt, &sym) in v.voltages.iter().zip(&x.symbols) {
            hist[sym as usize][grid.cell(volt)] += 1;
        }
    }
    Ok(CountTable::from_histograms(&hist))
}

/// Maximizes `sum_{i<n} score(i, l_i, l_{i+1})` over boundary indices
/// `0 = l_0 < l_1 < ... < l_{n-1} < l_n = m`.
///
/// Returns the interior indices `l_1..l_{n-1}` and the optimum. Runs in
/// `O(m^2 n)` score evaluations; among equal optima each split is the
/// smallest boundary index reaching it.
pub fn dp_partition<F>(m: usize, n: usize, mut score: F) -> Result<(Vec<usize>, f64)>
where
    F: FnMut(usize, usize, usize) -> f64,
{
    if n < 1 || m < n {
        return Err(Error::InfeasibleGrid { m, n });
    }
    // best[i][k]: best score of intervals 0..i whose last one ends at b_k.
    let mut best = vec![vec![f64::NEG_INFINITY; m + 1]; n + 1];
    let mut arg = vec![vec![0usize; m + 1]; n + 1];
    for k in 1..=m {
        best[1][k] = score(0, 0, k);
    }
    for i in 2..=n {
        let k_lo = if i == n { m } else { i };
        let k_hi = if i == n { m } else { m - (n - i) };
        for k in k_lo..=k_hi {
            let mut b = f64::NEG_INFINITY;
            let mut a = 0;
            for j in (i - 1)..k {
                let c = best[i - 1][j] + score(i - 1, j, k);
                if c > b {
                    b = c;
                    a = j;
                }
            }
            best[i][k] = b;
            arg[i][k] = a;
        }
    }
    let mut idx = vec![0usize; n - 1];
    let mut k = m;
    for i in (2..=n).rev() {
        k = arg[i][k];
        idx[i - 2] = k;
    }
    Ok((idx, best[n][m]))
}

/// Result of the agreement-maximizing threshold search.
#[derive(Debug, Clone, PartialEq)]
pub struct DpSolution {
    pub thresholds: HardThresholds,
    /// Grid indices of the chosen boundaries.
    pub indices: Vec<usize>,
    /// Number of samples whose threshold decision matches their label.
    pub objective: u64,
}

/// Chooses `n - 1` thresholds maximizing label agreement.
pub fn dp_thresholds(counts: &CountTable, grid: &SearchGrid, n: usize) -> Result<DpSolution> {
    let m = counts.intervals();
    if m != grid.intervals() {
        return Err(Error::LengthMismatch {
            what: "count table vs grid",
            left: m,
            right: grid.intervals(),
        });
    }
    if n < 2 || n > counts.symbols() {
        return Err(Error::InvalidParameter(format!(
            "bin count {n} must lie in 2..={}",
            counts.symbols()
        )));
    }
    if m < n {
        return Err(Error::InfeasibleGrid { m, n });
    }
    let (indices, obj) = dp_partition(m, n, |i, j, k| counts.count(i, j, k) as f64)?;
    let thresholds = HardThresholds {
        a: indices.iter().map(|&j| grid.boundary(j)).collect(),
    };
    Ok(DpSolution {
        thresholds,
        indices,
        objective: obj as u64,
    })
}

/// Symbol-error probability of a threshold detector for equiprobable states.
///
/// Summed as per-state tail probabilities so values far below machine
/// epsilon keep their relative accuracy.
pub fn symbol_error_probability(m: &StateMoments, thr: &HardThresholds) -> f64 {
    let mut total = 0.0;
    for s in 0..NUM_STATES {
        let z = |t: f64| (t - m.mu[s]) / m.sigma[s];
        if s > 0 {
            total += normal_cdf(z(thr.a[s - 1]));
        }
        if s < NUM_STATES - 1 {
            total += q_function(z(thr.a[s]));
        }
    }
    total / NUM_STATES as f64
}

/// Exact bit-error probability of a threshold detector under Gray labels.
pub fn bit_error_probability(m: &StateMoments, thr: &HardThresholds) -> f64 {
    let mut edges = vec![f64::NEG_INFINITY];
    edges.extend_from_slice(&thr.a);
    edges.push(f64::INFINITY);
    let mut total = 0.0;
    for s in 0..NUM_STATES {
        for d in 0..NUM_STATES {
            if d != s {
                let p = normal_interval(m.mu[s], m.sigma[s], edges[d], edges[d + 1]);
                total += p * bit_distance(s as u8, d as u8) as f64;
            }
        }
    }
    total / (2.0 * NUM_STATES as f64)
}

/// Full-knowledge optimum of the symbol-error probability.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimumSep {
    pub thresholds: HardThresholds,
    pub sep: f64,
    /// `true` when some threshold came from the grid-scan fallback.
    pub fallback: bool,
}

const BISECTION_ITERS: usize = 200;

/// Minimizes the SEP over the three thresholds.
///
/// Each threshold enters only the two tail terms of its neighbouring
/// states, so the problem separates; threshold `i` solves
/// `p_{i-1}(a) = p_i(a)` by bisection on the log-density difference between
/// the two means. A missing sign change falls back to a fine scan of that
/// threshold's two SEP terms.
pub fn optimum_sep(params: &ChannelParams) -> OptimumSep {
    optimum_sep_for(&params.state_moments())
}

pub fn optimum_sep_for(m: &StateMoments) -> OptimumSep {
    let mut a = Vec::with_capacity(NUM_STATES - 1);
    let mut fallback = false;
    for i in 1..NUM_STATES {
        let (lo_s, hi_s) = (i - 1, i);
        let h = |v: f64| {
            normal_log_pdf(m.mu[hi_s], m.sigma[hi_s], v)
                - normal_log_pdf(m.mu[lo_s], m.sigma[lo_s], v)
        };
        let (mut lo, mut hi) = (m.mu[lo_s], m.mu[hi_s]);
        let root = if h(lo) < 0.0 && h(hi) > 0.0 {
            for _ in 0..BISECTION_ITERS {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if h(mid) > 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            Some(0.5 * (lo + hi))
        } else {
            None
        };
        let ai = root.unwrap_or_else(|| {
            fallback = true;
            pair_scan(m, lo_s, hi_s)
        });
        a.push(ai);
    }
    let thresholds = HardThresholds { a };
    let sep = symbol_error_probability(m, &thresholds);
    OptimumSep {
        thresholds,
        sep,
        fallback,
    }
}

fn pair_scan(m: &StateMoments, lo_s: usize, hi_s: usize) -> f64 {
    let cost = |v: f64| {
        q_function((v - m.mu[lo_s]) / m.sigma[lo_s]) + normal_cdf((v - m.mu[hi_s]) / m.sigma[hi_s])
    };
    let (lo, hi) = (m.mu[lo_s], m.mu[hi_s]);
    let steps = 100_000;
    (0..=steps)
        .map(|k| lo + (hi - lo) * k as f64 / steps as f64)
        .fold((lo, f64::INFINITY), |(bv, bc), v| {
            let c = cost(v);
            if c < bc {
                (v, c)
            } else {
                (bv, bc)
            }
        })
        .0
}
