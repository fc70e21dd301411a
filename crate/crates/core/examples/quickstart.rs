//! Full-knowledge design at one wear point: optimum hard thresholds, soft
//! widths chosen by density evolution, and the resulting LLR table.
//!
//! cargo run --release --example quickstart -- 11000 10000

use rnna::channel::ChannelParams;
use rnna::dde::{optimize_widths, DensitySource, WidthSearch};
use rnna::ldpc::DegreeDistributions;
use rnna::soft::{mutual_information, reference_llr_table, LSB_RELIABILITY, MSB_RELIABILITY};
use rnna::thresholds::{bit_error_probability, optimum_sep};

fn main() -> rnna::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let n_pe = args.first().copied().unwrap_or(10_000.0) as u64;
    let t_ret = args.get(1).copied().unwrap_or(10_000.0);

    let params = ChannelParams::default().at(n_pe, t_ret);
    let m = params.state_moments();
    let opt = optimum_sep(&params);
    println!("N_PE {n_pe}, T {t_ret} h");
    println!("  state means  {:.4?}", m.mu);
    println!("  state sigmas {:.4?}", m.sigma);
    println!("  optimum thresholds {:.4?}", opt.thresholds.a);
    println!("  SEP {:.4e}  BER {:.4e}", opt.sep, bit_error_probability(&m, &opt.thresholds));

    let ensemble = DegreeDistributions::regular(5, 69);
    let w = optimize_widths(&DensitySource::Analytic(m), &opt.thresholds, &ensemble, &WidthSearch::default())?;
    println!("  widths {:.4?}  predicted P_e after 10 rounds {:.3e}", w.widths, w.pe);
    println!(
        "  MI: hard {:.4} bits, soft {:.4} bits",
        mutual_information(&m, &opt.thresholds.a),
        mutual_information(&m, &w.soft.boundaries)
    );
    println!("  interval  int MSB/LSB   exact MSB/LSB");
    for (j, l) in reference_llr_table(&m, &w.soft.boundaries).iter().enumerate() {
        println!(
            "  {j:>8}  {:>3} / {:>3}    {:>7.3} / {:>7.3}",
            MSB_RELIABILITY[j], LSB_RELIABILITY[j], l.l_msb, l.l_lsb
        );
    }
    Ok(())
}
