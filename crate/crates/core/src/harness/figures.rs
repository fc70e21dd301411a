//! Preset figure runs. Each tag expands to one or more experiment specs; the
//! run writes a long results table, a plot-ready wide table, timings and a
//! manifest holding the seed and a content hash of the expanded config.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::coded::run_coded_with;
use super::mi::{mi_curve, MiRow};
use super::output::{write_rows, write_wide, ResultRow, RunOutput};
use super::receiver::{ReceiverCache, ReceiverKey};
use super::spec::{ExperimentSpec, Mismatch};
use super::uncoded::run_uncoded_with;
use crate::detector::write_trace_csv;
use crate::error::{Error, Result};

pub const FIGURE_TAGS: [&str; 7] = ["fig3", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10"];

/// Test-point sweep used by the uncoded figures.
const UNCODED_SWEEP: [u64; 5] = [6_000, 8_000, 10_000, 12_000, 14_000];
/// Test-point sweep used by the coded N_PE figure, around the waterfall of
/// the rate-0.93 code at T = 1e4 h.
const CODED_SWEEP: [u64; 4] = [9_000, 10_000, 11_000, 12_000];

/// Everything a figure run executes, in order. Serialized as TOML for the
/// manifest hash.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FigureConfig {
    pub tag: String,
    pub experiments: Vec<ExperimentSpec>,
}

impl FigureConfig {
    pub fn preset(tag: &str) -> Result<Self> {
        let uncoded = |scenario: &str, n_pe: &[u64]| ExperimentSpec {
            scenario: scenario.into(),
            n_pe: n_pe.to_vec(),
            t_ret: vec![1e4],
            ..ExperimentSpec::default()
        };
        let experiments = match tag {
            "fig3" => vec![ExperimentSpec {
                scenario: "training".into(),
                n_pe: vec![10_000],
                t_ret: vec![100.0],
                ..ExperimentSpec::default()
            }],
            "fig5" => vec![uncoded("mi", &[0, 5_000, 10_000, 15_000])],
            "fig6" => [0.0, 5e-3]
                .iter()
                .map(|&rate| ExperimentSpec {
                    label_error_rate: rate,
                    ..uncoded(&format!("label-{rate}"), &[9_000, 10_000, 11_000, 12_000])
                })
                .collect(),
            "fig7" => vec![uncoded("matched", &UNCODED_SWEEP)],
            "fig8" => [1_000, 2_000, 3_000]
                .iter()
                .map(|&d| ExperimentSpec {
                    mismatch: Mismatch { delta_n_pe: d, delta_t: 0.0 },
                    ..uncoded(&format!("dnpe-{d}"), &UNCODED_SWEEP)
                })
                .collect(),
            "fig9" => [0, 1_000, 2_000, 3_000]
                .iter()
                .map(|&d| ExperimentSpec {
                    mismatch: Mismatch { delta_n_pe: d, delta_t: 0.0 },
                    ..uncoded(&format!("dnpe-{d}"), &CODED_SWEEP)
                })
                .collect(),
            "fig10" => [168.0, 720.0, 2160.0]
                .iter()
                .map(|&dt| ExperimentSpec {
                    scenario: format!("dt-{dt}"),
                    n_pe: vec![11_000],
                    t_ret: vec![5e3, 7.5e3, 1e4, 1.25e4],
                    mismatch: Mismatch { delta_n_pe: 1_000, delta_t: dt },
                    ..ExperimentSpec::default()
                })
                .collect(),
            _ => {
                return Err(Error::UnknownFigure {
                    tag: tag.into(),
                    valid: FIGURE_TAGS.join(", "),
                })
            }
        };
        Ok(Self { tag: tag.into(), experiments })
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let c: Self = toml::from_str(s)?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if !FIGURE_TAGS.contains(&self.tag.as_str()) {
            return Err(Error::UnknownFigure {
                tag: self.tag.clone(),
                valid: FIGURE_TAGS.join(", "),
            });
        }
        if self.experiments.is_empty() {
            return Err(Error::InvalidParameter("figure has no experiments".into()));
        }
        self.experiments.iter().try_for_each(ExperimentSpec::validate)
    }

    /// Applies command-line overrides to every experiment.
    pub fn with_overrides(mut self, seed: Option<u64>, trials: Option<u64>) -> Self {
        for e in &mut self.experiments {
            if let Some(s) = seed {
                e.seed = s;
            }
            if let Some(t) = trials {
                e.stopping.max_trials = t;
            }
        }
        self
    }
}

/// Content hash in git's object format: SHA-256 over `blob <len>\0<bytes>`.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tag: String,
    pub seeds: Vec<u64>,
    pub config_hash: String,
    pub crate_version: String,
    pub files: Vec<String>,
}

/// Runs the preset for `tag` with optional seed and trial overrides.
pub fn run_figure(
    tag: &str,
    out_dir: impl AsRef<Path>,
    seed: Option<u64>,
    trials: Option<u64>,
) -> Result<Manifest> {
    let config = FigureConfig::preset(tag)?.with_overrides(seed, trials);
    run_figure_config(&config, out_dir)
}

/// Runs an explicit figure config and writes its files into `out_dir`.
pub fn run_figure_config(config: &FigureConfig, out_dir: impl AsRef<Path>) -> Result<Manifest> {
    config.validate()?;
    let dir = out_dir.as_ref();
    fs::create_dir_all(dir)?;
    let toml = config.to_toml_string()?;
    let tag = config.tag.as_str();
    let mut files: Vec<PathBuf> = Vec::new();
    let mut cache = ReceiverCache::default();
    let path = |name: &str| dir.join(format!("{tag}_{name}"));

    let config_path = path("config.toml");
    fs::write(&config_path, &toml)?;
    files.push(config_path);

    match tag {
        "fig3" => {
            let spec = &config.experiments[0];
            let base = spec.base_channel()?;
            let pt = spec.points()[0];
            let key = ReceiverKey::new(pt.n_pe_train, pt.t_train, spec.label_error_rate, spec.seed);
            let rx = cache.get_or_train(&base, key, &spec.detector, spec.grid_intervals)?;
            let p = path("training.csv");
            write_trace_csv(&p, &rx.trace)?;
            files.push(p);
        }
        "fig5" => {
            let mut rows: Vec<MiRow> = Vec::new();
            for spec in &config.experiments {
                rows.extend(mi_curve(spec, &mut cache)?);
            }
            let p = path("mi.csv");
            write_rows(&p, &rows)?;
            files.push(p);
            let wide: Vec<(f64, String, f64)> = rows
                .iter()
                .flat_map(|r| {
                    [
                        (r.n_pe as f64, format!("{}-3", r.quantizer_tag), r.mi_3lvl),
                        (r.n_pe as f64, format!("{}-6", r.quantizer_tag), r.mi_6lvl),
                    ]
                })
                .collect();
            let p = path("wide.csv");
            write_wide(&p, "n_pe", &wide)?;
            files.push(p);
        }
        _ => {
            let coded = matches!(tag, "fig9" | "fig10");
            let mut out = RunOutput::default();
            for spec in &config.experiments {
                out.extend(if coded {
                    run_coded_with(spec, &mut cache)?
                } else {
                    run_uncoded_with(spec, &mut cache)?
                });
            }
            let p = path("results.csv");
            write_rows(&p, &out.rows)?;
            files.push(p);
            let x_name = if tag == "fig10" { "t_test" } else { "n_pe_test" };
            let wide: Vec<(f64, String, f64)> = out
                .rows
                .iter()
                .map(|r| (wide_x(tag, r), format!("{}/{}", r.scenario, r.detector), wide_y(r)))
                .collect();
            let p = path("wide.csv");
            write_wide(&p, x_name, &wide)?;
            files.push(p);
            if coded {
                let p = path("widths.csv");
                write_rows(&p, &out.widths)?;
                files.push(p);
            }
            let p = path("timings.csv");
            write_rows(&p, &out.timings)?;
            files.push(p);
        }
    }

    let manifest = Manifest {
        tag: tag.into(),
        seeds: config.experiments.iter().map(|e| e.seed).collect(),
        config_hash: content_hash(toml.as_bytes()),
        crate_version: env!("CARGO_PKG_VERSION").into(),
        files: files
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect(),
    };
    fs::write(path("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}

fn wide_x(tag: &str, r: &ResultRow) -> f64 {
    if tag == "fig10" {
        r.t_test
    } else {
        r.n_pe_test as f64
    }
}

fn wide_y(r: &ResultRow) -> f64 {
    r.coded_ber.unwrap_or(r.raw_ber)
}
