use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rnna::channel::SymbolPage;
use rnna::dde::{optimize_widths, DensitySource};
use rnna::detector::{detect, harden, write_trace_csv, DetectorModel};
use rnna::harness::{
    mi_curve, run_coded, run_figure, run_figure_config, run_uncoded, stream, train_receiver,
    write_rows, ExperimentSpec, FigureConfig, ReceiverCache, ReceiverKey, RunOutput, WidthRow,
};
use rnna::ldpc::DegreeDistributions;
use rnna::thresholds::{build_counts, dp_thresholds, optimum_sep, symbol_error_probability, SearchGrid};
use rnna::Result;

#[derive(Parser)]
#[command(name = "rnna", version, about = "MLC flash read-threshold workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment spec (TOML). Defaults are used when omitted.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, short, default_value = "out")]
    out: PathBuf,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Trial budget override (blocks or frames per point).
    #[arg(long)]
    trials: Option<u64>,
}

impl Common {
    fn spec(&self) -> Result<ExperimentSpec> {
        let mut spec = match &self.config {
            Some(p) => ExperimentSpec::load(p)?,
            None => ExperimentSpec::default(),
        };
        if let Some(s) = self.seed {
            spec.seed = s;
        }
        if let Some(t) = self.trials {
            spec.stopping.max_trials = t;
        }
        spec.validate()?;
        Ok(spec)
    }

    fn out_dir(&self) -> Result<&Path> {
        fs::create_dir_all(&self.out)?;
        Ok(&self.out)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Source {
    /// Gaussian densities of the training channel.
    Analytic,
    /// Labeled capture of a trained receiver.
    Sample,
}

#[derive(Subcommand)]
enum Command {
    /// Uncoded BER of the original, RNN, RNNA and optimum detectors.
    SimulateUncoded(Common),
    /// LDPC-coded BER with RNNA, MMI and stale-MMI quantizers.
    SimulateCoded(Common),
    /// Train the detector at the first sweep point; writes model and trace.
    TrainDetector(Common),
    /// RNNA thresholds at the first sweep point.
    FindThresholds {
        #[command(flatten)]
        common: Common,
        /// Use this model instead of training one.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Soft-region widths minimizing the predicted decoder error fraction.
    OptimizeWidths {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "analytic")]
        source: Source,
    },
    /// Mutual information of MMI and RNNA quantizers over the sweep.
    MiCurve(Common),
    /// Run a preset figure (fig3, fig5, ..., fig10).
    Figure {
        tag: String,
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::SimulateUncoded(c) => {
            let out = run_uncoded(&c.spec()?)?;
            write_run(c.out_dir()?, &out)
        }
        Command::SimulateCoded(c) => {
            let out = run_coded(&c.spec()?)?;
            write_run(c.out_dir()?, &out)
        }
        Command::TrainDetector(c) => {
            let spec = c.spec()?;
            let pt = spec.points()[0];
            let key = ReceiverKey::new(pt.n_pe_train, pt.t_train, spec.label_error_rate, spec.seed);
            let rx = train_receiver(&spec.base_channel()?, key, &spec.detector, spec.grid_intervals)?;
            let dir = c.out_dir()?;
            rx.model.save(dir.join("model.json"))?;
            write_trace_csv(dir.join("trace.csv"), &rx.trace)?;
            for s in &rx.trace {
                println!(
                    "epoch {:>3}  train SER {:.5}  val SER {:.5}  val loss {:.5}",
                    s.epoch, s.train_ser, s.val_ser, s.val_loss
                );
            }
            println!("best epoch {}", rx.best_epoch);
            Ok(())
        }
        Command::FindThresholds { common, model } => {
            let spec = common.spec()?;
            let base = spec.base_channel()?;
            let pt = spec.points()[0];
            let params = base.at(pt.n_pe_train, pt.t_train);
            let (thr, objective) = match model {
                Some(path) => {
                    let model = DetectorModel::load(path)?;
                    let key = ReceiverKey::new(pt.n_pe_train, pt.t_train, spec.label_error_rate, spec.seed);
                    let symbols = SymbolPage::random(spec.detector.train_symbols, key.seed_for(stream::TRAIN_SYMBOLS));
                    let page = params.sample_page(&symbols, key.seed_for(stream::TRAIN_VOLTAGES));
                    let grid = SearchGrid::from_nominal(&base, spec.grid_intervals)?;
                    let decisions = harden(&detect(&model, &page)?);
                    let counts = build_counts(&[page], &[decisions], &grid)?;
                    let dp = dp_thresholds(&counts, &grid, 4)?;
                    (dp.thresholds, dp.objective)
                }
                None => {
                    let mut cache = ReceiverCache::default();
                    let key = ReceiverKey::new(pt.n_pe_train, pt.t_train, spec.label_error_rate, spec.seed);
                    let rx = cache.get_or_train(&base, key, &spec.detector, spec.grid_intervals)?;
                    (rx.rnna.clone(), rx.dp_objective)
                }
            };
            let m = params.state_moments();
            println!("a1 {:.6}  a2 {:.6}  a3 {:.6}", thr.a[0], thr.a[1], thr.a[2]);
            println!("objective {objective}");
            println!("SEP {:.6e}", symbol_error_probability(&m, &thr));
            println!("optimum SEP {:.6e}", optimum_sep(&params).sep);
            let dir = common.out_dir()?;
            fs::write(dir.join("thresholds.toml"), toml::to_string(&thr)?)?;
            Ok(())
        }
        Command::OptimizeWidths { common, source } => {
            let spec = common.spec()?;
            let base = spec.base_channel()?;
            let (d_v, d_c) = spec.coded.code.degrees();
            let ensemble = DegreeDistributions::regular(d_v, d_c);
            let mut search = spec.coded.width_search.clone();
            search.alpha = spec.coded.alpha;
            let mut cache = ReceiverCache::default();
            let mut rows = Vec::new();
            for pt in spec.points() {
                let params = base.at(pt.n_pe_train, pt.t_train);
                let key = ReceiverKey::new(pt.n_pe_train, pt.t_train, spec.label_error_rate, spec.seed);
                search.de.seed = key.seed_for(stream::WIDTHS);
                let r = match source {
                    Source::Analytic => {
                        let src = DensitySource::Analytic(params.state_moments());
                        optimize_widths(&src, &optimum_sep(&params).thresholds, &ensemble, &search)?
                    }
                    Source::Sample => {
                        let rx = cache.get_or_train(&base, key, &spec.detector, spec.grid_intervals)?;
                        let src = DensitySource::Sample(rx.sample.clone());
                        optimize_widths(&src, &rx.rnna, &ensemble, &search)?
                    }
                };
                println!(
                    "N_PE {:>6}  T {:>8}  W = ({:.4}, {:.4}, {:.4})  P_e {:.4e}",
                    pt.n_pe_train, pt.t_train, r.widths[0], r.widths[1], r.widths[2], r.pe
                );
                rows.push(WidthRow {
                    scenario: spec.scenario.clone(),
                    n_pe: pt.n_pe_train,
                    t_ret: pt.t_train,
                    w1: r.widths[0],
                    w2: r.widths[1],
                    w3: r.widths[2],
                    pe_l: r.pe,
                });
            }
            write_rows(common.out_dir()?.join("widths.csv"), &rows)
        }
        Command::MiCurve(c) => {
            let rows = mi_curve(&c.spec()?, &mut ReceiverCache::default())?;
            for r in &rows {
                println!(
                    "N_PE {:>6}  T {:>8}  {:<5} MI3 {:.5}  MI6 {:.5}",
                    r.n_pe, r.t_ret, r.quantizer_tag, r.mi_3lvl, r.mi_6lvl
                );
            }
            write_rows(c.out_dir()?.join("mi.csv"), &rows)
        }
        Command::Figure { tag, common } => {
            let manifest = match &common.config {
                Some(p) => {
                    let cfg = FigureConfig::from_toml_str(&fs::read_to_string(p)?)?
                        .with_overrides(common.seed, common.trials);
                    if cfg.tag != tag {
                        return Err(rnna::Error::InvalidParameter(format!(
                            "config is for {}, not {tag}",
                            cfg.tag
                        )));
                    }
                    run_figure_config(&cfg, &common.out)?
                }
                None => run_figure(&tag, &common.out, common.seed, common.trials)?,
            };
            for f in &manifest.files {
                println!("{}", common.out.join(f).display());
            }
            println!("config hash {}", manifest.config_hash);
            Ok(())
        }
    }
}

fn write_run(dir: &Path, out: &RunOutput) -> Result<()> {
    write_rows(dir.join("results.csv"), &out.rows)?;
    write_rows(dir.join("timings.csv"), &out.timings)?;
    if !out.widths.is_empty() {
        write_rows(dir.join("widths.csv"), &out.widths)?;
    }
    for r in &out.rows {
        let ber = r.coded_ber.unwrap_or(r.raw_ber);
        println!(
            "{:<10} N_PE {:>6}/{:<6} T {:>8}/{:<8} {:<10} {:<9} BER {:.4e}{}",
            r.scenario,
            r.n_pe_train,
            r.n_pe_test,
            r.t_train,
            r.t_test,
            r.detector,
            r.quantizer,
            ber,
            if r.insufficient { "  (insufficient events)" } else { "" }
        );
    }
    Ok(())
}
