//! MLC flash threshold-voltage channel.
//!
//! Four states (labels 0..=3 for stored patterns 11, 10, 00, 01) are read
//! back as Gaussian voltages whose moments combine programming noise, a
//! wear-dependent telegraph-noise spread, and a state-dependent retention
//! drift that pulls programmed states toward the erased level.

use std::path::Path;

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::normal_pdf;
use crate::rng::rng_from_seed;

pub const NUM_STATES: usize = 4;

/// Gray labelling: symbol label -> (MSB, LSB).
pub const GRAY_BITS: [(u8, u8); NUM_STATES] = [(1, 1), (1, 0), (0, 0), (0, 1)];

pub fn msb(symbol: u8) -> u8 {
    GRAY_BITS[symbol as usize].0
}

pub fn lsb(symbol: u8) -> u8 {
    GRAY_BITS[symbol as usize].1
}

/// Inverse of [`GRAY_BITS`].
pub fn symbol_from_bits(msb: u8, lsb: u8) -> u8 {
    match (msb & 1, lsb & 1) {
        (1, 1) => 0,
        (1, 0) => 1,
        (0, 0) => 2,
        _ => 3,
    }
}

/// Hamming distance between the Gray patterns of two labels.
pub fn bit_distance(a: u8, b: u8) -> u32 {
    ((msb(a) ^ msb(b)) + (lsb(a) ^ lsb(b))) as u32
}

/// Telegraph-noise standard deviation after `n_pe` program/erase cycles.
pub fn rtn_sigma(n_pe: u64) -> f64 {
    if n_pe == 0 {
        return 0.0;
    }
    0.00027 * (n_pe as f64).powf(0.62)
}

/// Physical constants plus the wear point (`n_pe`, `t_ret` in hours).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelParams {
    /// Nominal state means for labels 0..=3, volts.
    pub v_means: [f64; NUM_STATES],
    pub delta_vpp: f64,
    pub sigma_e: f64,
    pub sigma_p: f64,
    pub x0: f64,
    pub a_t: f64,
    pub b_t: f64,
    pub alpha_i: f64,
    pub alpha_o: f64,
    pub n_pe: u64,
    pub t_ret: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            v_means: [1.4, 2.6, 3.2, 3.93],
            delta_vpp: 0.2,
            sigma_e: 0.35,
            sigma_p: 0.05,
            x0: 1.4,
            a_t: 0.000035,
            b_t: 0.000235,
            alpha_i: 0.62,
            alpha_o: 0.3,
            n_pe: 0,
            t_ret: 0.0,
        }
    }
}

/// Names accepted by [`ChannelParams::preset`].
pub const PRESETS: &[&str] = &["mlc", "low-noise"];

impl ChannelParams {
    /// Looks up a named preset. `"mlc"` is the default MLC parameter set at
    /// zero wear. `"low-noise"` keeps the means but shrinks both spreads to
    /// well under a millivolt and turns off retention drift: at low wear each
    /// state fits inside one cell of the default search grid, so every
    /// detector should be exact. Meant for sanity runs.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "mlc" => Ok(Self::default()),
            "low-noise" => Ok(Self {
                sigma_e: 1e-4,
                sigma_p: 5e-5,
                a_t: 0.0,
                b_t: 0.0,
                ..Self::default()
            }),
            other => Err(Error::InvalidParameter(format!(
                "unknown channel preset `{other}` (known: {})",
                PRESETS.join(", ")
            ))),
        }
    }

    /// Same constants at another wear point.
    pub fn at(&self, n_pe: u64, t_ret: f64) -> Self {
        Self {
            n_pe,
            t_ret,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.v_means.iter().all(|v| v.is_finite())
            && [
                self.delta_vpp,
                self.sigma_e,
                self.sigma_p,
                self.x0,
                self.a_t,
                self.b_t,
                self.alpha_i,
                self.alpha_o,
                self.t_ret,
            ]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::NonFinite("channel parameters"));
        }
        if !self.v_means.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidParameter(
                "state means must be strictly increasing".into(),
            ));
        }
        if self.delta_vpp <= 0.0 {
            return Err(Error::InvalidParameter("delta_vpp must be positive".into()));
        }
        if !(self.sigma_e > self.sigma_p && self.sigma_p > 0.0) {
            return Err(Error::InvalidParameter(
                "need sigma_e > sigma_p > 0".into(),
            ));
        }
        if self.t_ret < 0.0 {
            return Err(Error::InvalidParameter("t_ret must be non-negative".into()));
        }
        Ok(())
    }

    /// Retention drift `(mu_r, sigma_r)` for `state`, measured from the raw
    /// nominal mean (the programming offset is added separately).
    pub fn retention_moments(&self, state: usize) -> (f64, f64) {
        let n = self.n_pe as f64;
        let wear = if self.n_pe == 0 {
            0.0
        } else {
            self.a_t * n.powf(self.alpha_i) + self.b_t * n.powf(self.alpha_o)
        };
        let mu_r = (self.v_means[state] - self.x0) * wear * self.t_ret.ln_1p();
        (mu_r, 0.3 * mu_r.abs())
    }

    pub fn state_moments(&self) -> StateMoments {
        let sw2 = rtn_sigma(self.n_pe).powi(2);
        let mut mu = [0.0; NUM_STATES];
        let mut sigma = [0.0; NUM_STATES];
        for s in 0..NUM_STATES {
            let (mu_r, sigma_r) = self.retention_moments(s);
            if s == 0 {
                mu[s] = self.v_means[s] - mu_r;
                sigma[s] = (self.sigma_e.powi(2) + sw2 + sigma_r.powi(2)).sqrt();
            } else {
                mu[s] = self.v_means[s] + self.delta_vpp / 2.0 - mu_r;
                sigma[s] = (self.sigma_p.powi(2) + sw2 + sigma_r.powi(2)).sqrt();
            }
        }
        StateMoments { mu, sigma }
    }

    pub fn state_pdf(&self, state: usize, v: f64) -> f64 {
        self.state_moments().pdf(state, v)
    }

    /// Draws one voltage per symbol; identical seeds give identical pages.
    pub fn sample_page(&self, symbols: &SymbolPage, seed: u64) -> VoltagePage {
        self.state_moments().sample_page(symbols, seed)
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let p: Self = toml::from_str(s)?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::from(e).context(format!("reading {}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| e.context(format!("parsing {}", path.display())))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_toml_string()?)?;
        Ok(())
    }
}

/// Effective Gaussian mean and standard deviation of each state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateMoments {
    pub mu: [f64; NUM_STATES],
    pub sigma: [f64; NUM_STATES],
}

impl StateMoments {
    pub fn pdf(&self, state: usize, v: f64) -> f64 {
        normal_pdf(self.mu[state], self.sigma[state], v)
    }

    /// Multiplies every standard deviation by `factor`.
    pub fn scaled_sigma(&self, factor: f64) -> Self {
        let mut out = *self;
        out.sigma.iter_mut().for_each(|s| *s *= factor);
        out
    }

    pub fn sample_page(&self, symbols: &SymbolPage, seed: u64) -> VoltagePage {
        let mut rng = rng_from_seed(seed);
        let voltages = symbols
            .symbols
            .iter()
            .map(|&s| {
                let z: f64 = rng.sample(StandardNormal);
                self.mu[s as usize] + self.sigma[s as usize] * z
            })
            .collect();
        VoltagePage { voltages }
    }
}

/// A block of stored symbols, labels in `0..=3`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolPage {
    pub symbols: Vec<u8>,
}

impl SymbolPage {
    pub fn new(symbols: Vec<u8>) -> Result<Self> {
        if let Some(bad) = symbols.iter().find(|&&s| s as usize >= NUM_STATES) {
            return Err(Error::InvalidParameter(format!("symbol label {bad} out of range")));
        }
        Ok(Self { symbols })
    }

    /// Equiprobable i.i.d. symbols.
    pub fn random(len: usize, seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        Self {
            symbols: (0..len).map(|_| rng.random_range(0..NUM_STATES as u8)).collect(),
        }
    }

    /// Packs interleaved bits (MSB of cell k at `2k`, LSB at `2k + 1`).
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        if bits.len() % 2 != 0 {
            return Err(Error::InvalidParameter("bit count must be even".into()));
        }
        Ok(Self {
            symbols: bits
                .chunks_exact(2)
                .map(|b| symbol_from_bits(b[0], b[1]))
                .collect(),
        })
    }

    pub fn to_bits(&self) -> Vec<u8> {
        self.symbols
            .iter()
            .flat_map(|&s| [msb(s), lsb(s)])
            .collect()
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// Readback voltages aligned with a [`SymbolPage`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VoltagePage {
    pub voltages: Vec<f64>,
}

impl VoltagePage {
    pub fn new(voltages: Vec<f64>) -> Result<Self> {
        if voltages.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("voltage page"));
        }
        Ok(Self { voltages })
    }

    pub fn len(&self) -> usize {
        self.voltages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.voltages.is_empty()
    }
}

/// Counts symbol and bit disagreements between two aligned pages.
pub fn count_errors(truth: &SymbolPage, detected: &SymbolPage) -> Result<(u64, u64)> {
    if truth.len() != detected.len() {
        return Err(Error::LengthMismatch {
            what: "symbol pages",
            left: truth.len(),
            right: detected.len(),
        });
    }
    let mut sym = 0u64;
    let mut bits = 0u64;
    for (&a, &b) in truth.symbols.iter().zip(&detected.symbols) {
        if a != b {
            sym += 1;
            bits += bit_distance(a, b) as u64;
        }
    }
    Ok((sym, bits))
}
