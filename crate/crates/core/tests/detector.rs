use proptest::prelude::*;
use rand::Rng as _;

use rnna::channel::{ChannelParams, SymbolPage, VoltagePage};
use rnna::detector::{
    corrupt_labels, detect, harden, harden_value, squared_error_gradient, train, DetectorConfig,
    DetectorModel,
};
use rnna::rng::rng_from_seed;

fn windows(len: usize, count: usize, seed: u64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut rng = rng_from_seed(seed);
    (0..count)
        .map(|_| {
            let y: Vec<f64> = (0..len).map(|_| rng.random_range(0..4) as f64).collect();
            let x = y.iter().map(|&s| (s - 1.5) + 0.3 * rng.random_range(-1.0..1.0)).collect();
            (x, y)
        })
        .collect()
}

#[test]
fn gradient_matches_central_differences() {
    let mut model = DetectorModel::xavier(8, [5, 4], 21);
    // nonzero biases so every parameter is exercised
    let mut rng = rng_from_seed(22);
    model.params.iter_mut().for_each(|p| *p += 0.1 * rng.random_range(-1.0..1.0));
    let data = windows(8, 3, 23);
    let (_, grad) = squared_error_gradient(&model, &data).unwrap();
    let h = 1e-6;
    let mut num = vec![0.0; grad.len()];
    for i in 0..grad.len() {
        let mut m = model.clone();
        m.params[i] += h;
        let up = squared_error_gradient(&m, &data).unwrap().0;
        m.params[i] -= 2.0 * h;
        let down = squared_error_gradient(&m, &data).unwrap().0;
        num[i] = (up - down) / (2.0 * h);
    }
    let diff: f64 = grad.iter().zip(&num).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let norm: f64 = num.iter().map(|x| x * x).sum::<f64>().sqrt();
    assert!(diff / norm < 1e-4, "relative gradient error {}", diff / norm);
}

#[test]
fn zero_model_outputs_ln2() {
    let m = DetectorModel::zeros(4, [3, 3]);
    let page = VoltagePage::new(vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
    let out = detect(&m, &page).unwrap();
    assert_eq!(out.values.len(), 6);
    assert!(out.values.iter().all(|&v| (v - 2f64.ln()).abs() < 1e-15));
}

#[test]
fn model_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    let m = DetectorModel::xavier(10, [6, 5], 3);
    m.save(&path).unwrap();
    assert_eq!(DetectorModel::load(&path).unwrap(), m);

    let mut bad = m.clone();
    bad.params.pop();
    bad.save(&path).unwrap();
    assert!(DetectorModel::load(&path).is_err());
    std::fs::write(&path, "{\"format\": 1}").unwrap();
    assert!(DetectorModel::load(&path).is_err());
}

#[test]
fn non_finite_input_is_rejected() {
    let m = DetectorModel::zeros(4, [2, 2]);
    let page = VoltagePage { voltages: vec![1.0, f64::NAN] };
    assert!(detect(&m, &page).is_err());
}

#[test]
fn learns_a_clean_channel() {
    let p = ChannelParams::preset("low-noise").unwrap().at(0, 0.0);
    let x = SymbolPage::random(100_000, 1);
    let y = p.sample_page(&x, 2);
    let cfg = DetectorConfig {
        window_len: 20,
        hidden_sizes: [8, 8],
        train_symbols: 100_000,
        epochs: 4,
        learning_rate: 1e-2,
        ..DetectorConfig::default()
    };
    let out = train(&cfg, &[(y, x)], 0.0).unwrap();
    assert_eq!(out.trace.len(), 4);
    let xt = SymbolPage::random(20_000, 3);
    let yt = p.sample_page(&xt, 4);
    let d = harden(&detect(&out.model, &yt).unwrap());
    let wrong = d.symbols.iter().zip(&xt.symbols).filter(|(a, b)| a != b).count();
    assert_eq!(wrong, 0);
}

#[test]
fn training_is_reproducible() {
    let p = ChannelParams::default().at(10_000, 1e4);
    let x = SymbolPage::random(5_000, 5);
    let y = p.sample_page(&x, 6);
    let cfg = DetectorConfig {
        window_len: 10,
        hidden_sizes: [4, 4],
        epochs: 2,
        seed: 77,
        ..DetectorConfig::default()
    };
    let a = train(&cfg, &[(y.clone(), x.clone())], 0.0).unwrap();
    let b = train(&cfg, &[(y, x)], 0.0).unwrap();
    assert_eq!(a.model, b.model);
    assert_eq!(a.best_epoch, b.best_epoch);
}

#[test]
fn hardening_rounds_half_up() {
    assert_eq!(harden_value(-7.0), 0);
    assert_eq!(harden_value(0.49), 0);
    assert_eq!(harden_value(0.5), 1);
    assert_eq!(harden_value(2.5), 3);
    assert_eq!(harden_value(99.0), 3);
}

proptest! {
    #[test]
    fn corrupted_labels_always_change(rate in 0.0f64..0.5, seed in any::<u64>()) {
        let clean = SymbolPage::random(4_000, seed).symbols;
        let mut noisy = clean.clone();
        corrupt_labels(&mut noisy, rate, seed ^ 0x55);
        let flipped = clean.iter().zip(&noisy).filter(|(a, b)| a != b).count() as f64;
        let n = clean.len() as f64;
        let sd = (rate * (1.0 - rate) / n).sqrt();
        prop_assert!((flipped / n - rate).abs() <= 5.0 * sd + 1e-9);
        prop_assert!(noisy.iter().all(|&s| s < 4));
    }
}
