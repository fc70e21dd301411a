use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{harden_value, DetectorConfig, DetectorModel, Workspace};
use crate::channel::{SymbolPage, VoltagePage, NUM_STATES};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    /// Running SER over the epoch's batches, against the training labels.
    pub train_ser: f64,
    pub train_loss: f64,
    /// `NaN` when no validation windows are held out.
    pub val_loss: f64,
    pub val_ser: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    /// Parameters of the epoch with the lowest validation loss (the last
    /// epoch when nothing is held out).
    pub model: DetectorModel,
    pub trace: Vec<EpochStats>,
    pub best_epoch: usize,
}

struct Adam {
    lr: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    const B1: f64 = 0.9;
    const B2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(lr: f64, n: usize) -> Self {
        Self { lr, m: vec![0.0; n], v: vec![0.0; n], t: 0 }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - Self::B1.powi(self.t);
        let c2 = 1.0 - Self::B2.powi(self.t);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = Self::B1 * self.m[i] + (1.0 - Self::B1) * g;
            self.v[i] = Self::B2 * self.v[i] + (1.0 - Self::B2) * g * g;
            params[i] -= self.lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + Self::EPS);
        }
    }
}

/// Windows cut from the dataset; a page's incomplete tail is not used.
struct Windows {
    len: usize,
    x: Vec<f64>,
    y: Vec<f64>,
}

impl Windows {
    fn count(&self) -> usize {
        self.x.len() / self.len
    }

    fn get(&self, w: usize) -> (&[f64], &[f64]) {
        let r = w * self.len..(w + 1) * self.len;
        (&self.x[r.clone()], &self.y[r])
    }
}

/// Replaces each label with probability `rate` by one of the other three,
/// chosen uniformly.
pub fn corrupt_labels(symbols: &mut [u8], rate: f64, seed: u64) {
    if rate <= 0.0 {
        return;
    }
    let mut rng = rng_from_seed(seed);
    for s in symbols.iter_mut() {
        if rng.random::<f64>() < rate {
            let shift = rng.random_range(1..NUM_STATES as u8);
            *s = (*s + shift) % NUM_STATES as u8;
        }
    }
}

fn collect_windows(
    l: usize,
    dataset: &[(VoltagePage, SymbolPage)],
) -> Result<(Vec<f64>, Vec<u8>)> {
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (i, (v, s)) in dataset.iter().enumerate() {
        if v.len() != s.len() {
            return Err(Error::LengthMismatch {
                what: "training voltages vs labels",
                left: v.len(),
                right: s.len(),
            }
            .context(format!("dataset page {i}")));
        }
        let usable = v.len() / l * l;
        if v.voltages[..usable].iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("training voltage"));
        }
        x.extend_from_slice(&v.voltages[..usable]);
        y.extend_from_slice(&s.symbols[..usable]);
    }
    if x.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok((x, y))
}

fn evaluate(model: &DetectorModel, data: &Windows, ids: &[usize], ws: &mut Workspace) -> (f64, f64) {
    let (mut sq, mut wrong) = (0.0, 0usize);
    for &w in ids {
        let (x, y) = data.get(w);
        ws.forward(model, x);
        for (o, t) in ws.out.iter().zip(y) {
            sq += (o - t).powi(2);
            wrong += usize::from(harden_value(*o) as f64 != *t);
        }
    }
    let n = (ids.len() * data.len) as f64;
    (sq / n, wrong as f64 / n)
}

/// Fits the detector by minimizing the per-symbol squared error between the
/// soft estimates and the (optionally corrupted) labels with Adam.
pub fn train(
    config: &DetectorConfig,
    dataset: &[(VoltagePage, SymbolPage)],
    label_error_rate: f64,
) -> Result<TrainOutput> {
    config.validate()?;
    if !(0.0..1.0).contains(&label_error_rate) {
        return Err(Error::InvalidParameter(format!(
            "label error rate {label_error_rate} outside [0, 1)"
        )));
    }
    let l = config.window_len;
    let (x, mut labels) = collect_windows(l, dataset)?;
    corrupt_labels(&mut labels, label_error_rate, derive_seed(config.seed, &[1]));

    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let scale = if var > 0.0 { var.sqrt() } else { 1.0 };
    let data = Windows {
        len: l,
        x: x.iter().map(|v| (v - mean) / scale).collect(),
        y: labels.iter().map(|&s| s as f64).collect(),
    };

    let mut ids: Vec<usize> = (0..data.count()).collect();
    ids.shuffle(&mut rng_from_seed(derive_seed(config.seed, &[2])));
    let n_val = (config.validation_fraction * ids.len() as f64).floor() as usize;
    let (val_ids, train_ids) = ids.split_at(n_val);
    let mut train_ids = train_ids.to_vec();
    if train_ids.is_empty() {
        return Err(Error::EmptyDataset.context("no training windows after holdout"));
    }
    let batch = config.batch_size.min(train_ids.len());

    let mut model = DetectorModel::xavier(l, config.hidden_sizes, derive_seed(config.seed, &[0]));
    model.input_shift = mean;
    model.input_scale = scale;
    let mut adam = Adam::new(config.learning_rate, model.params.len());
    let mut grad = vec![0.0; model.params.len()];
    let mut ws = Workspace::default();
    let mut dout = vec![0.0; l];
    let mut order_rng = rng_from_seed(derive_seed(config.seed, &[3]));

    let mut trace = Vec::with_capacity(config.epochs);
    let mut best: Option<(f64, usize, DetectorModel)> = None;
    for epoch in 1..=config.epochs {
        train_ids.shuffle(&mut order_rng);
        let (mut sq_total, mut wrong, mut seen) = (0.0, 0usize, 0usize);
        for (b, chunk) in train_ids.chunks_exact(batch).enumerate() {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let norm = 2.0 / (chunk.len() * l) as f64;
            let mut sq = 0.0;
            for &w in chunk {
                let (xw, yw) = data.get(w);
                ws.forward(&model, xw);
                for t in 0..l {
                    let e = ws.out[t] - yw[t];
                    sq += e * e;
                    dout[t] = norm * e;
                    wrong += usize::from(harden_value(ws.out[t]) as f64 != yw[t]);
                }
                ws.backward(&model, &dout, &mut grad);
            }
            let loss = sq / (chunk.len() * l) as f64;
            if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::Diverged { epoch, batch: b, loss });
            }
            sq_total += sq;
            seen += chunk.len() * l;
            adam.step(&mut model.params, &grad);
        }
        let (val_loss, val_ser) = if val_ids.is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            evaluate(&model, &data, val_ids, &mut ws)
        };
        let stats = EpochStats {
            epoch,
            train_ser: wrong as f64 / seen as f64,
            train_loss: sq_total / seen as f64,
            val_loss,
            val_ser,
        };
        trace.push(stats);
        let score = if val_ids.is_empty() { f64::NEG_INFINITY } else { val_loss };
        if best.as_ref().is_none_or(|(s, _, _)| score <= *s) {
            best = Some((score, epoch, model.clone()));
        }
    }
    let (_, best_epoch, model) = best.expect("at least one epoch");
    Ok(TrainOutput { model, trace, best_epoch })
}

/// Writes the per-epoch trace as CSV with a header row.
pub fn write_trace_csv(path: impl AsRef<Path>, trace: &[EpochStats]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in trace {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
