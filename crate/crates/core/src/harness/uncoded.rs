use std::time::Instant;

use super::output::{ResultRow, RunOutput, TimingRow};
use super::receiver::{rnna_detect, stream, ReceiverCache, ReceiverKey};
use super::spec::{ExperimentSpec, SweepPoint};
use crate::channel::{count_errors, SymbolPage};
use crate::detector::{detect, harden};
use crate::error::Result;
use crate::rng::derive_seed;
use crate::thresholds::{optimum_sep, threshold_detect};

/// Uncoded receivers, in output order.
pub const UNCODED_DETECTORS: [&str; 4] = ["original", "rnn", "rnna", "optimum"];

pub fn run_uncoded(spec: &ExperimentSpec) -> Result<RunOutput> {
    run_uncoded_with(spec, &mut ReceiverCache::default())
}

/// As [`run_uncoded`], reusing (and filling) a cache of trained receivers.
///
/// Per point, all four detectors see the same test blocks. Blocks are drawn
/// until every detector has `min_errors` bit errors or `max_trials` blocks
/// were used.
pub fn run_uncoded_with(spec: &ExperimentSpec, cache: &mut ReceiverCache) -> Result<RunOutput> {
    spec.validate()?;
    let base = spec.base_channel()?;
    let original = optimum_sep(&base.at(0, 0.0)).thresholds;
    let mut out = RunOutput::default();
    for (idx, pt) in spec.points().into_iter().enumerate() {
        let started = Instant::now();
        let key = ReceiverKey::new(pt.n_pe_train, pt.t_train, spec.label_error_rate, spec.seed);
        let rx = cache
            .get_or_train(&base, key, &spec.detector, spec.grid_intervals)
            .map_err(|e| e.context(format!("scenario {}", spec.scenario)))?;
        let test = base.at(pt.n_pe_test, pt.t_test);
        let optimum = optimum_sep(&test).thresholds;

        let mut errors = [0u64; 4];
        let mut bits = 0u64;
        let mut trials = 0u64;
        while trials < spec.stopping.max_trials
            && errors.iter().any(|&e| e < spec.stopping.min_errors)
        {
            let point = idx as u64;
            let symbols = SymbolPage::random(
                spec.stopping.block_symbols,
                derive_seed(spec.seed, &[stream::TEST_SYMBOLS, point, trials]),
            );
            let page = test.sample_page(&symbols, derive_seed(spec.seed, &[stream::TEST_VOLTAGES, point, trials]));
            let decisions = [
                threshold_detect(&page, &original),
                harden(&detect(&rx.model, &page)?),
                rnna_detect(rx, &page),
                threshold_detect(&page, &optimum),
            ];
            for (e, d) in errors.iter_mut().zip(&decisions) {
                *e += count_errors(&symbols, d)?.1;
            }
            bits += 2 * symbols.len() as u64;
            trials += 1;
        }
        for (name, &e) in UNCODED_DETECTORS.iter().zip(&errors) {
            out.rows.push(row(spec, &pt, name, "hard", e, bits, trials));
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

fn row(
    spec: &ExperimentSpec,
    pt: &SweepPoint,
    detector: &str,
    quantizer: &str,
    errors: u64,
    bits: u64,
    trials: u64,
) -> ResultRow {
    ResultRow {
        scenario: spec.scenario.clone(),
        n_pe_train: pt.n_pe_train,
        n_pe_test: pt.n_pe_test,
        t_train: pt.t_train,
        t_test: pt.t_test,
        detector: detector.into(),
        quantizer: quantizer.into(),
        raw_ber: errors as f64 / bits as f64,
        coded_ber: None,
        errors,
        bits,
        trials,
        insufficient: errors < spec.stopping.min_errors,
    }
}
