//! Training-side pipeline: capture labeled cells, train the detector, and
//! derive RNNA thresholds by DP over the detector's own decisions.

use std::collections::HashMap;

use crate::channel::{ChannelParams, SymbolPage, VoltagePage};
use crate::dde::LabeledSample;
use crate::detector::{corrupt_labels, detect, harden, train, DetectorConfig, DetectorModel, EpochStats};
use crate::error::Result;
use crate::rng::derive_seed;
use crate::thresholds::{build_counts, dp_thresholds, HardThresholds, SearchGrid};

/// Seed streams under the master seed. Every stream is further keyed by the
/// sweep point (or training point) it belongs to.
pub mod stream {
    pub const TRAIN_SYMBOLS: u64 = 1;
    pub const TRAIN_VOLTAGES: u64 = 2;
    pub const LABEL_NOISE: u64 = 3;
    pub const DETECTOR: u64 = 4;
    pub const WIDTHS: u64 = 5;
    pub const TEST_SYMBOLS: u64 = 10;
    pub const TEST_VOLTAGES: u64 = 11;
    pub const FRAME_INFO: u64 = 20;
    pub const FRAME_VOLTAGES: u64 = 21;
}

/// Everything learned at one training point.
#[derive(Debug, Clone)]
pub struct Receiver {
    pub params: ChannelParams,
    pub model: DetectorModel,
    pub trace: Vec<EpochStats>,
    pub best_epoch: usize,
    /// Hard thresholds agreeing best with the detector on the capture.
    pub rnna: HardThresholds,
    pub dp_objective: u64,
    /// The capture with its (possibly corrupted) labels.
    pub sample: LabeledSample,
}

/// Identifies a training run for caching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ReceiverKey {
    pub n_pe: u64,
    pub t_bits: u64,
    pub label_rate_bits: u64,
    pub seed: u64,
}

impl ReceiverKey {
    pub fn new(n_pe: u64, t_ret: f64, label_error_rate: f64, seed: u64) -> Self {
        Self {
            n_pe,
            t_bits: t_ret.to_bits(),
            label_rate_bits: label_error_rate.to_bits(),
            seed,
        }
    }

    /// Per-training-point sub-seed for `stream`.
    pub fn seed_for(&self, stream: u64) -> u64 {
        derive_seed(self.seed, &[stream, self.n_pe, self.t_bits, self.label_rate_bits])
    }
}

pub fn train_receiver(
    base: &ChannelParams,
    key: ReceiverKey,
    config: &DetectorConfig,
    grid_intervals: usize,
) -> Result<Receiver> {
    let t_ret = f64::from_bits(key.t_bits);
    let label_error_rate = f64::from_bits(key.label_rate_bits);
    let params = base.at(key.n_pe, t_ret);
    let symbols = SymbolPage::random(config.train_symbols, key.seed_for(stream::TRAIN_SYMBOLS));
    let voltages = params.sample_page(&symbols, key.seed_for(stream::TRAIN_VOLTAGES));
    let mut labels = symbols;
    corrupt_labels(&mut labels.symbols, label_error_rate, key.seed_for(stream::LABEL_NOISE));

    let cfg = DetectorConfig {
        seed: key.seed_for(stream::DETECTOR),
        ..config.clone()
    };
    let out = train(&cfg, &[(voltages.clone(), labels.clone())], 0.0).map_err(|e| {
        e.context(format!("training detector at N_PE = {}, T = {t_ret}", key.n_pe))
    })?;
    let decisions = harden(&detect(&out.model, &voltages)?);
    let grid = SearchGrid::from_nominal(base, grid_intervals)?;
    let counts = build_counts(std::slice::from_ref(&voltages), &[decisions], &grid)?;
    let dp = dp_thresholds(&counts, &grid, 4)?;
    let sample = LabeledSample::new(&voltages.voltages, &labels.symbols)?;
    Ok(Receiver {
        params,
        model: out.model,
        trace: out.trace,
        best_epoch: out.best_epoch,
        rnna: dp.thresholds,
        dp_objective: dp.objective,
        sample,
    })
}

/// Trained receivers keyed by training point, so sweeps that share a
/// training point train once.
#[derive(Debug, Default)]
pub struct ReceiverCache {
    map: HashMap<(ReceiverKey, String), Receiver>,
}

impl ReceiverCache {
    pub fn get_or_train(
        &mut self,
        base: &ChannelParams,
        key: ReceiverKey,
        config: &DetectorConfig,
        grid_intervals: usize,
    ) -> Result<&Receiver> {
        // the detector recipe is part of the key
        let recipe = format!("{config:?}/{grid_intervals}/{base:?}");
        let k = (key, recipe);
        if !self.map.contains_key(&k) {
            let r = train_receiver(base, key, config, grid_intervals)?;
            self.map.insert(k.clone(), r);
        }
        Ok(&self.map[&k])
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Threshold decisions for a page.
pub fn rnna_detect(r: &Receiver, page: &VoltagePage) -> SymbolPage {
    crate::thresholds::threshold_detect(page, &r.rnna)
}
