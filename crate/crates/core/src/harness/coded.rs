use std::collections::HashMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::output::{ResultRow, RunOutput, TimingRow};
use super::receiver::{stream, Receiver, ReceiverCache, ReceiverKey};
use super::spec::{CodedSettings, ExperimentSpec, StoppingRule};
use crate::channel::{ChannelParams, StateMoments, SymbolPage, VoltagePage};
use crate::dde::{optimize_widths, DensitySource};
use crate::error::Result;
use crate::ldpc::{load_or_construct, DegreeDistributions, Encoder, NmsDecoder, ParityCheckMatrix};
use crate::rng::{derive_seed, rng_from_seed};
use crate::soft::{
    integer_llr_for_interval, mmi_thresholds, reference_llr_table, soft_boundaries, LlrPair,
    SoftThresholds, Widths, SOFT_INTERVALS,
};
use crate::thresholds::{HardThresholds, SearchGrid};

/// Maps a voltage to its interval, then to a per-interval MSB/LSB LLR pair.
#[derive(Debug, Clone, PartialEq)]
pub struct LlrQuantizer {
    pub boundaries: Vec<f64>,
    pub table: Vec<LlrPair>,
}

impl LlrQuantizer {
    /// Integer reliabilities on six soft boundaries.
    pub fn integer(soft: &SoftThresholds) -> Self {
        Self {
            boundaries: soft.boundaries.to_vec(),
            table: (0..SOFT_INTERVALS)
                .map(|j| {
                    let p = integer_llr_for_interval(j);
                    LlrPair {
                        l_msb: p.l_msb as f64,
                        l_lsb: p.l_lsb as f64,
                    }
                })
                .collect(),
        }
    }

    /// Exact LLRs of `boundaries` under the channel `m`.
    pub fn exact(m: &StateMoments, boundaries: Vec<f64>) -> Self {
        let table = reference_llr_table(m, &boundaries);
        Self { boundaries, table }
    }

    /// Appends two LLRs per cell (MSB, then LSB).
    pub fn llrs_into(&self, page: &VoltagePage, out: &mut Vec<f64>) {
        out.clear();
        for &v in &page.voltages {
            let j = self.boundaries.partition_point(|&b| b <= v);
            let p = self.table[j];
            out.push(p.l_msb);
            out.push(p.l_lsb);
        }
    }
}

/// Parity-check matrix with its encoder.
#[derive(Debug, Clone)]
pub struct CodedLink {
    pub h: ParityCheckMatrix,
    pub encoder: Encoder,
}

impl CodedLink {
    pub fn load(settings: &CodedSettings) -> Result<Self> {
        let (d_v, d_c) = settings.code.degrees();
        let h = load_or_construct(&settings.cache_dir, settings.code.n(), d_v, d_c, settings.peg_seed)?;
        let encoder = Encoder::new(&h);
        Ok(Self { h, encoder })
    }

    pub fn from_matrix(h: ParityCheckMatrix) -> Self {
        let encoder = Encoder::new(&h);
        Self { h, encoder }
    }

    pub fn ensemble(&self) -> DegreeDistributions {
        let d_v = self.h.cols().first().map_or(0, Vec::len);
        let d_c = self.h.rows().first().map_or(0, Vec::len);
        DegreeDistributions::regular(d_v, d_c)
    }
}

/// Error counts of one quantizer over a frame simulation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FrameCounts {
    pub raw_errors: u64,
    pub coded_errors: u64,
    pub failed_frames: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameReport {
    pub counts: Vec<FrameCounts>,
    pub bits: u64,
    pub frames: u64,
}

/// Simulates random codewords through `channel`; every quantizer decodes the
/// same frames. Errors are counted over all codeword bits. Stops once every
/// quantizer has `min_errors` decoded bit errors or `max_trials` frames ran.
#[allow(clippy::too_many_arguments)]
pub fn simulate_frames(
    link: &CodedLink,
    channel: &ChannelParams,
    quantizers: &[LlrQuantizer],
    alpha: f64,
    max_iterations: usize,
    stopping: &StoppingRule,
    seed: u64,
) -> Result<FrameReport> {
    use rand::Rng as _;
    let n = link.h.n();
    let k = link.encoder.k();
    let mut decoders: Vec<NmsDecoder<'_>> = quantizers.iter().map(|_| NmsDecoder::new(&link.h)).collect();
    let mut counts = vec![FrameCounts::default(); quantizers.len()];
    let mut llrs = Vec::with_capacity(n);
    let mut frames = 0u64;
    while frames < stopping.max_trials
        && counts.iter().any(|c| c.coded_errors < stopping.min_errors)
    {
        let mut rng = rng_from_seed(derive_seed(seed, &[stream::FRAME_INFO, frames]));
        let info: Vec<u8> = (0..k).map(|_| rng.random_range(0..2u8)).collect();
        let cw = link.encoder.encode(&info)?;
        let symbols = SymbolPage::from_bits(&cw)?;
        let page = channel.sample_page(&symbols, derive_seed(seed, &[stream::FRAME_VOLTAGES, frames]));
        for ((q, dec), c) in quantizers.iter().zip(&mut decoders).zip(&mut counts) {
            q.llrs_into(&page, &mut llrs);
            c.raw_errors += llrs
                .iter()
                .zip(&cw)
                .filter(|(l, &b)| u8::from(**l < 0.0) != b)
                .count() as u64;
            let r = dec.decode(&llrs, alpha, max_iterations);
            let e = r.bits.iter().zip(&cw).filter(|(a, b)| a != b).count() as u64;
            c.coded_errors += e;
            c.failed_frames += u64::from(e > 0);
        }
        frames += 1;
    }
    Ok(FrameReport {
        counts,
        bits: frames * n as u64,
        frames,
    })
}

/// Widths chosen for one training point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthRow {
    pub scenario: String,
    pub n_pe: u64,
    pub t_ret: f64,
    #[serde(rename = "W1")]
    pub w1: f64,
    #[serde(rename = "W2")]
    pub w2: f64,
    #[serde(rename = "W3")]
    pub w3: f64,
    pub pe_l: f64,
}

/// Widths for the RNNA soft regions: DE over the receiver's labeled capture,
/// or the fixed widths from the settings.
pub fn rnna_widths(
    rx: &Receiver,
    ensemble: &DegreeDistributions,
    settings: &CodedSettings,
    seed: u64,
) -> Result<(Widths, f64)> {
    if !settings.optimize_widths {
        return Ok((settings.fixed_widths, f64::NAN));
    }
    let mut search = settings.width_search.clone();
    search.alpha = settings.alpha;
    search.de.seed = seed;
    let src = DensitySource::Sample(rx.sample.clone());
    let r = optimize_widths(&src, &rx.rnna, ensemble, &search)?;
    Ok((r.widths, r.pe))
}

/// Coded receivers, in output order.
pub const CODED_QUANTIZERS: [(&str, &str); 3] = [
    ("rnna", "int-llr"),
    ("mmi", "exact-llr"),
    ("mmi-stale", "exact-llr"),
];

pub fn run_coded(spec: &ExperimentSpec) -> Result<RunOutput> {
    run_coded_with(spec, &mut ReceiverCache::default())
}

/// Per point decodes with (a) integer LLRs on the RNNA soft thresholds,
/// (b) exact LLRs on MMI boundaries of the test channel, (c) exact LLRs on
/// MMI boundaries designed for the fresh (N_PE = 0, T = 0) channel.
pub fn run_coded_with(spec: &ExperimentSpec, cache: &mut ReceiverCache) -> Result<RunOutput> {
    spec.validate()?;
    let base = spec.base_channel()?;
    let link = CodedLink::load(&spec.coded)?;
    let ensemble = link.ensemble();
    let grid = SearchGrid::from_nominal(&base, spec.grid_intervals)?;
    let stale = mmi_thresholds(&base.at(0, 0.0).state_moments(), spec.coded.mmi_levels, &grid)?;
    let mut widths_cache: HashMap<ReceiverKey, (Widths, f64)> = HashMap::new();
    let mut out = RunOutput::default();
    for (idx, pt) in spec.points().into_iter().enumerate() {
        let started = Instant::now();
        let key = ReceiverKey::new(pt.n_pe_train, pt.t_train, spec.label_error_rate, spec.seed);
        let rx = cache
            .get_or_train(&base, key, &spec.detector, spec.grid_intervals)
            .map_err(|e| e.context(format!("scenario {}", spec.scenario)))?;
        let (widths, _) = match widths_cache.get(&key) {
            Some(w) => *w,
            None => {
                let w = rnna_widths(rx, &ensemble, &spec.coded, key.seed_for(stream::WIDTHS))?;
                widths_cache.insert(key, w);
                out.widths.push(WidthRow {
                    scenario: spec.scenario.clone(),
                    n_pe: pt.n_pe_train,
                    t_ret: pt.t_train,
                    w1: w.0[0],
                    w2: w.0[1],
                    w3: w.0[2],
                    pe_l: w.1,
                });
                w
            }
        };
        let soft = soft_boundaries(&rx.rnna, widths)?;
        let test = base.at(pt.n_pe_test, pt.t_test);
        let m = test.state_moments();
        let mmi = mmi_thresholds(&m, spec.coded.mmi_levels, &grid)?;
        let quantizers = [
            LlrQuantizer::integer(&soft),
            LlrQuantizer::exact(&m, mmi),
            LlrQuantizer::exact(&m, stale.clone()),
        ];
        let report = simulate_frames(
            &link,
            &test,
            &quantizers,
            spec.coded.alpha,
            spec.coded.max_iterations,
            &spec.stopping,
            derive_seed(spec.seed, &[idx as u64]),
        )?;
        for ((det, quant), c) in CODED_QUANTIZERS.iter().zip(&report.counts) {
            out.rows.push(ResultRow {
                scenario: spec.scenario.clone(),
                n_pe_train: pt.n_pe_train,
                n_pe_test: pt.n_pe_test,
                t_train: pt.t_train,
                t_test: pt.t_test,
                detector: (*det).into(),
                quantizer: (*quant).into(),
                raw_ber: c.raw_errors as f64 / report.bits as f64,
                coded_ber: Some(c.coded_errors as f64 / report.bits as f64),
                errors: c.coded_errors,
                bits: report.bits,
                trials: report.frames,
                insufficient: c.coded_errors < spec.stopping.min_errors,
            });
        }
        out.timings.push(TimingRow {
            scenario: spec.scenario.clone(),
            n_pe_test: pt.n_pe_test,
            t_test: pt.t_test,
            seconds: started.elapsed().as_secs_f64(),
        });
    }
    Ok(out)
}

/// RNNA soft thresholds from hard thresholds and widths (helper for callers
/// that pick widths themselves).
pub fn rnna_quantizer(hard: &HardThresholds, widths: Widths) -> Result<LlrQuantizer> {
    Ok(LlrQuantizer::integer(&soft_boundaries(hard, widths)?))
}
