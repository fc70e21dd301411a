//! Stacked two-layer GRU detector.
//!
//! One voltage enters per time step; each step emits a soft symbol estimate
//! through a shared affine head followed by softplus, so estimates are
//! non-negative. Each GRU layer exposes `relu(h)` to the next stage. The
//! recurrent state starts at zero for every window of `window_len` steps.

mod gru;
mod train;

use std::fs;
use std::path::Path;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::channel::{SymbolPage, VoltagePage, NUM_STATES};
use crate::error::{Error, Result};
use crate::math::{sigmoid, softplus};
use crate::rng::rng_from_seed;
use gru::{layer_len, Layer, LayerCache, LayerGrad};

pub use train::{corrupt_labels, train, write_trace_csv, EpochStats, TrainOutput};

/// Model file format version.
pub const MODEL_FORMAT: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectorConfig {
    pub window_len: usize,
    pub hidden_sizes: [usize; 2],
    pub batch_size: usize,
    /// Symbols of training data to generate (used by the experiment runner).
    pub train_symbols: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    /// Fraction of windows held out to pick the best epoch.
    pub validation_fraction: f64,
    pub seed: u64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            window_len: 50,
            hidden_sizes: [32, 32],
            batch_size: 100,
            train_symbols: 3_000_000,
            epochs: 10,
            learning_rate: 1e-3,
            validation_fraction: 0.1,
            seed: 0,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.window_len == 0 {
            return bad("window_len must be at least 1".into());
        }
        if self.hidden_sizes.contains(&0) {
            return bad("hidden sizes must be positive".into());
        }
        if self.batch_size == 0 || self.epochs == 0 {
            return bad("batch_size and epochs must be positive".into());
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return bad(format!("learning rate {} must be positive", self.learning_rate));
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return bad(format!("validation fraction {} outside [0, 1)", self.validation_fraction));
        }
        Ok(())
    }
}

/// Detector weights plus the input normalization learned from training data.
///
/// `params` holds layer 1, layer 2 (see the `gru` layout), then the head
/// weights (`hidden_sizes[1]` values) and the head bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorModel {
    pub format: u32,
    pub window_len: usize,
    pub hidden_sizes: [usize; 2],
    pub input_shift: f64,
    pub input_scale: f64,
    pub params: Vec<f64>,
}

/// Soft symbol estimates, one per input voltage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftEstimates {
    pub values: Vec<f64>,
}

pub(crate) fn param_count(hidden: [usize; 2]) -> usize {
    layer_len(1, hidden[0]) + layer_len(hidden[0], hidden[1]) + hidden[1] + 1
}

impl DetectorModel {
    /// All-zero weights: every output is `softplus(0) = ln 2`.
    pub fn zeros(window_len: usize, hidden_sizes: [usize; 2]) -> Self {
        Self {
            format: MODEL_FORMAT,
            window_len,
            hidden_sizes,
            input_shift: 0.0,
            input_scale: 1.0,
            params: vec![0.0; param_count(hidden_sizes)],
        }
    }

    /// Xavier-uniform weights, zero biases.
    pub fn xavier(window_len: usize, hidden_sizes: [usize; 2], seed: u64) -> Self {
        let mut m = Self::zeros(window_len, hidden_sizes);
        let mut rng = rng_from_seed(seed);
        let mut fill = |slice: &mut [f64], fan_in: usize, fan_out: usize| {
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            slice.iter_mut().for_each(|w| *w = rng.random_range(-limit..limit));
        };
        let [h1, h2] = hidden_sizes;
        let mut off = 0;
        for (i, h) in [(1, h1), (h1, h2)] {
            for g in 0..3 {
                fill(&mut m.params[off + g * h * i..off + (g + 1) * h * i], i, h);
            }
            let u0 = off + 3 * h * i;
            for g in 0..3 {
                fill(&mut m.params[u0 + g * h * h..u0 + (g + 1) * h * h], h, h);
            }
            off += layer_len(i, h);
        }
        fill(&mut m.params[off..off + h2], h2, 1);
        m
    }

    pub fn validate(&self) -> Result<()> {
        if self.format != MODEL_FORMAT {
            return Err(Error::Format {
                what: "detector model",
                detail: format!("unsupported format {}", self.format),
            });
        }
        if self.params.len() != param_count(self.hidden_sizes) {
            return Err(Error::LengthMismatch {
                what: "detector parameters",
                left: self.params.len(),
                right: param_count(self.hidden_sizes),
            });
        }
        if self.window_len == 0 || self.hidden_sizes.contains(&0) {
            return Err(Error::InvalidParameter("empty window or layer".into()));
        }
        if self.params.iter().any(|p| !p.is_finite())
            || !self.input_shift.is_finite()
            || !(self.input_scale > 0.0 && self.input_scale.is_finite())
        {
            return Err(Error::NonFinite("detector parameters"));
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let m: Self = serde_json::from_str(&fs::read_to_string(path)?)
            .map_err(|e| Error::from(e).context(format!("reading {}", path.display())))?;
        m.validate()?;
        Ok(m)
    }

    fn split(&self) -> (Layer<'_>, Layer<'_>, &[f64], f64) {
        let [h1, h2] = self.hidden_sizes;
        let (l1, rest) = self.params.split_at(layer_len(1, h1));
        let (l2, head) = rest.split_at(layer_len(h1, h2));
        (
            Layer::new(1, h1, l1),
            Layer::new(h1, h2, l2),
            &head[..h2],
            head[h2],
        )
    }
}

/// Reusable forward/backward buffers for one window.
#[derive(Debug, Default)]
pub(crate) struct Workspace {
    x: Vec<f64>,
    c1: LayerCache,
    c2: LayerCache,
    pre: Vec<f64>,
    pub out: Vec<f64>,
    dy2: Vec<f64>,
    dy1: Vec<f64>,
}

impl Workspace {
    /// Forward pass over one window of already-normalized inputs.
    pub fn forward(&mut self, m: &DetectorModel, xs: &[f64]) {
        let (l1, l2, w, c) = m.split();
        let steps = xs.len();
        self.x.clear();
        self.x.extend_from_slice(xs);
        gru::forward(l1, &self.x, steps, &mut self.c1);
        gru::forward(l2, &self.c1.y, steps, &mut self.c2);
        let h2 = l2.hidden;
        self.pre.clear();
        self.out.clear();
        for t in 0..steps {
            let a = c + w.iter().zip(&self.c2.y[t * h2..(t + 1) * h2]).map(|(a, b)| a * b).sum::<f64>();
            self.pre.push(a);
            self.out.push(softplus(a));
        }
    }

    /// Backward pass for the last forward call given `dout` (gradient of
    /// the loss with respect to each output); accumulates into `grad`.
    pub fn backward(&mut self, m: &DetectorModel, dout: &[f64], grad: &mut [f64]) {
        let (l1, l2, w, _) = m.split();
        let steps = dout.len();
        let [h1, h2] = m.hidden_sizes;
        let (g1, rest) = grad.split_at_mut(layer_len(1, h1));
        let (g2, gh) = rest.split_at_mut(layer_len(h1, h2));
        self.dy2.clear();
        self.dy2.resize(steps * h2, 0.0);
        for t in 0..steps {
            let dpre = dout[t] * sigmoid(self.pre[t]);
            let y = &self.c2.y[t * h2..(t + 1) * h2];
            for k in 0..h2 {
                gh[k] += dpre * y[k];
                self.dy2[t * h2 + k] = dpre * w[k];
            }
            gh[h2] += dpre;
        }
        self.dy1.clear();
        self.dy1.resize(steps * h1, 0.0);
        gru::backward(
            l2,
            &self.c1.y,
            steps,
            &self.c2,
            &self.dy2,
            &mut LayerGrad::new(h1, h2, g2),
            Some(&mut self.dy1),
        );
        gru::backward(l1, &self.x, steps, &self.c1, &self.dy1, &mut LayerGrad::new(1, h1, g1), None);
    }
}

/// Sum of squared errors over windows of already-normalized inputs, and its
/// gradient with respect to `model.params` (backpropagation through time).
pub fn squared_error_gradient(model: &DetectorModel, windows: &[(Vec<f64>, Vec<f64>)]) -> Result<(f64, Vec<f64>)> {
    model.validate()?;
    let mut ws = Workspace::default();
    let mut grad = vec![0.0; model.params.len()];
    let mut loss = 0.0;
    for (x, y) in windows {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch {
                what: "window targets",
                left: x.len(),
                right: y.len(),
            });
        }
        ws.forward(model, x);
        let dout: Vec<f64> = ws.out.iter().zip(y).map(|(a, b)| 2.0 * (a - b)).collect();
        loss += ws.out.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        ws.backward(model, &dout, &mut grad);
    }
    Ok((loss, grad))
}

/// Soft estimates for a page. Pages are cut into windows of the model's
/// length; a short final window is right-padded with the last voltage and
/// the padded outputs dropped.
pub fn detect(model: &DetectorModel, page: &VoltagePage) -> Result<SoftEstimates> {
    model.validate()?;
    if page.voltages.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("detector input voltage"));
    }
    let l = model.window_len;
    let mut ws = Workspace::default();
    let mut values = Vec::with_capacity(page.len());
    let mut xs = vec![0.0; l];
    for chunk in page.voltages.chunks(l) {
        let last = *chunk.last().unwrap();
        for (t, x) in xs.iter_mut().enumerate() {
            let v = chunk.get(t).copied().unwrap_or(last);
            *x = (v - model.input_shift) / model.input_scale;
        }
        ws.forward(model, &xs);
        values.extend_from_slice(&ws.out[..chunk.len()]);
    }
    Ok(SoftEstimates { values })
}

/// Nearest symbol for one estimate; halves round up, result clamped to 0..=3.
pub fn harden_value(x: f64) -> u8 {
    let r = (x + 0.5).floor();
    r.clamp(0.0, (NUM_STATES - 1) as f64) as u8
}

pub fn harden(estimates: &SoftEstimates) -> SymbolPage {
    SymbolPage {
        symbols: estimates.values.iter().map(|&x| harden_value(x)).collect(),
    }
}
