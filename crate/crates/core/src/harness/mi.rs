use serde::{Deserialize, Serialize};

use super::coded::rnna_widths;
use super::receiver::{stream, ReceiverCache, ReceiverKey};
use super::spec::ExperimentSpec;
use crate::error::Result;
use crate::soft::{mmi_thresholds, mutual_information, soft_boundaries};
use crate::thresholds::SearchGrid;

/// Quantizer mutual information at one test point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiRow {
    pub n_pe: u64,
    pub t_ret: f64,
    pub mi_3lvl: f64,
    pub mi_6lvl: f64,
    /// `mmi` or `rnna`.
    pub quantizer_tag: String,
}

/// MI of the MMI and RNNA quantizers (3 and 6 boundaries) on the test channel
/// at every sweep point. RNNA soft widths come from the coded settings (DE
/// search or fixed widths), exactly as in a coded run.
pub fn mi_curve(spec: &ExperimentSpec, cache: &mut ReceiverCache) -> Result<Vec<MiRow>> {
    spec.validate()?;
    let base = spec.base_channel()?;
    let grid = SearchGrid::from_nominal(&base, spec.grid_intervals)?;
    let (d_v, d_c) = spec.coded.code.degrees();
    let ensemble = crate::ldpc::DegreeDistributions::regular(d_v, d_c);
    let mut rows = Vec::new();
    for pt in spec.points() {
        let m = base.at(pt.n_pe_test, pt.t_test).state_moments();
        let mmi3 = mmi_thresholds(&m, 3, &grid)?;
        let mmi6 = mmi_thresholds(&m, 6, &grid)?;
        rows.push(MiRow {
            n_pe: pt.n_pe_test,
            t_ret: pt.t_test,
            mi_3lvl: mutual_information(&m, &mmi3),
            mi_6lvl: mutual_information(&m, &mmi6),
            quantizer_tag: "mmi".into(),
        });

        let key = ReceiverKey::new(pt.n_pe_train, pt.t_train, spec.label_error_rate, spec.seed);
        let rx = cache.get_or_train(&base, key, &spec.detector, spec.grid_intervals)?;
        let (widths, _) = rnna_widths(rx, &ensemble, &spec.coded, key.seed_for(stream::WIDTHS))?;
        let soft = soft_boundaries(&rx.rnna, widths)?;
        rows.push(MiRow {
            n_pe: pt.n_pe_test,
            t_ret: pt.t_test,
            mi_3lvl: mutual_information(&m, &rx.rnna.a),
            mi_6lvl: mutual_information(&m, &soft.boundaries),
            quantizer_tag: "rnna".into(),
        });
    }
    Ok(rows)
}

