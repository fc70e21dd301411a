use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelParams;
use crate::dde::WidthSearch;
use crate::detector::DetectorConfig;
use crate::error::{Error, Result};

/// LDPC code presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CodePreset {
    /// Rate-0.93 regular (5, 69) code, N = 8832.
    #[serde(rename = "r93")]
    R93,
    /// Small regular (3, 6) code, N = 1008, for fast tests only.
    #[serde(rename = "small")]
    Small,
}

impl CodePreset {
    pub fn n(self) -> usize {
        match self {
            Self::R93 => 8832,
            Self::Small => 1008,
        }
    }

    pub fn degrees(self) -> (usize, usize) {
        match self {
            Self::R93 => (5, 69),
            Self::Small => (3, 6),
        }
    }
}

/// Train/test offsets: test = train + mismatch.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Mismatch {
    pub delta_n_pe: i64,
    pub delta_t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StoppingRule {
    /// Stop a point once every compared receiver has this many bit errors.
    pub min_errors: u64,
    /// Upper bound on blocks (uncoded) or frames (coded) per point.
    pub max_trials: u64,
    /// Cells per uncoded block.
    pub block_symbols: usize,
}

impl Default for StoppingRule {
    fn default() -> Self {
        Self {
            min_errors: 100,
            max_trials: 200,
            block_symbols: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CodedSettings {
    pub code: CodePreset,
    /// PEG seed; the matrix is cached per (n, d_v, d_c, seed).
    pub peg_seed: u64,
    /// Directory for cached PEG matrices.
    pub cache_dir: String,
    pub alpha: f64,
    pub max_iterations: usize,
    /// Search the soft-region widths; when false, `fixed_widths` is used.
    pub optimize_widths: bool,
    pub fixed_widths: [f64; 3],
    pub width_search: WidthSearch,
    /// Soft boundaries of the MMI baselines (6 gives 7 intervals).
    pub mmi_levels: usize,
}

impl Default for CodedSettings {
    fn default() -> Self {
        Self {
            code: CodePreset::R93,
            peg_seed: 0,
            cache_dir: "peg-cache".into(),
            alpha: 0.5,
            max_iterations: 10,
            optimize_widths: true,
            fixed_widths: [0.3; 3],
            width_search: WidthSearch::default(),
            mmi_levels: 6,
        }
    }
}

/// One experiment: a sweep of test points sharing a detector recipe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSpec {
    pub scenario: String,
    pub channel: String,
    /// Test-point axes; the sweep is their Cartesian product, `t_ret`
    /// outermost.
    pub n_pe: Vec<u64>,
    pub t_ret: Vec<f64>,
    pub mismatch: Mismatch,
    pub label_error_rate: f64,
    pub detector: DetectorConfig,
    /// DP search grid size.
    pub grid_intervals: usize,
    pub stopping: StoppingRule,
    pub coded: CodedSettings,
    pub seed: u64,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            scenario: "custom".into(),
            channel: "mlc".into(),
            n_pe: vec![10_000],
            t_ret: vec![10_000.0],
            mismatch: Mismatch::default(),
            label_error_rate: 0.0,
            detector: DetectorConfig::default(),
            grid_intervals: 1000,
            stopping: StoppingRule::default(),
            coded: CodedSettings::default(),
            seed: 1,
        }
    }
}

/// A test point and the training point it is paired with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub n_pe_train: u64,
    pub n_pe_test: u64,
    pub t_train: f64,
    pub t_test: f64,
}

impl ExperimentSpec {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let spec: Self = toml::from_str(s)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_toml_str(&std::fs::read_to_string(path)?)
            .map_err(|e| e.context(format!("loading {}", path.display())))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn base_channel(&self) -> Result<ChannelParams> {
        ChannelParams::preset(&self.channel)
    }

    pub fn validate(&self) -> Result<()> {
        self.base_channel()?;
        self.detector.validate()?;
        if self.n_pe.is_empty() || self.t_ret.is_empty() {
            return Err(Error::InvalidParameter("sweep axes must not be empty".into()));
        }
        if self.t_ret.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
            return Err(Error::InvalidParameter("retention times must be finite and >= 0".into()));
        }
        if !self.mismatch.delta_t.is_finite() {
            return Err(Error::InvalidParameter("delta_t must be finite".into()));
        }
        if !(0.0..1.0).contains(&self.label_error_rate) {
            return Err(Error::InvalidParameter(format!(
                "label error rate {} outside [0, 1)",
                self.label_error_rate
            )));
        }
        if self.grid_intervals < 4 {
            return Err(Error::InfeasibleGrid { m: self.grid_intervals, n: 4 });
        }
        if self.stopping.max_trials == 0 || self.stopping.block_symbols == 0 {
            return Err(Error::InvalidParameter("trial budget must be positive".into()));
        }
        if !(self.coded.alpha > 0.0) || self.coded.max_iterations == 0 {
            return Err(Error::InvalidParameter("decoder needs alpha > 0 and >= 1 iteration".into()));
        }
        if self.coded.mmi_levels < 3 {
            return Err(Error::InvalidParameter("MMI baseline needs at least 3 boundaries".into()));
        }
        for p in self.points() {
            if p.t_train < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "test T = {} minus delta_t = {} is negative",
                    p.t_test, self.mismatch.delta_t
                )));
            }
        }
        for &n in &self.n_pe {
            if (n as i64) < self.mismatch.delta_n_pe {
                return Err(Error::InvalidParameter(format!(
                    "test N_PE = {n} minus delta_n_pe = {} is negative",
                    self.mismatch.delta_n_pe
                )));
            }
        }
        Ok(())
    }

    /// Sweep points in output order.
    pub fn points(&self) -> Vec<SweepPoint> {
        let mut out = Vec::with_capacity(self.n_pe.len() * self.t_ret.len());
        for &t in &self.t_ret {
            for &n in &self.n_pe {
                out.push(SweepPoint {
                    n_pe_train: (n as i64 - self.mismatch.delta_n_pe).max(0) as u64,
                    n_pe_test: n,
                    t_train: t - self.mismatch.delta_t,
                    t_test: t,
                });
            }
        }
        out
    }
}
