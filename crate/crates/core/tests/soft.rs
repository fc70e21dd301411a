use proptest::prelude::*;

use rnna::channel::ChannelParams;
use rnna::dde::{feasible_box, optimize_widths, DensitySource, WidthSearch};
use rnna::ldpc::DegreeDistributions;
use rnna::soft::{
    interval_probabilities, map_integer_llr, mutual_information, reference_llr_table, soft_boundaries,
    with_sentinels, SOFT_INTERVALS,
};
use rnna::thresholds::{optimum_sep, HardThresholds};

fn sorted_boundaries(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.5f64..4.5, n).prop_map(|mut v| {
        v.sort_by(f64::total_cmp);
        v
    })
}

proptest! {
    #[test]
    fn interval_masses_sum_to_one(b in sorted_boundaries(6), n_pe in 0u64..20_000) {
        let m = ChannelParams::default().at(n_pe, 1e4).state_moments();
        let e = with_sentinels(&b);
        let mut total = [0.0; 4];
        for w in e.windows(2) {
            let p = interval_probabilities(&m, w[0], w[1]);
            for s in 0..4 {
                total[s] += p[s];
            }
        }
        for t in total {
            prop_assert!((t - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn refinement_never_loses_information(b in sorted_boundaries(3), extra in 0.5f64..4.5, n_pe in 0u64..20_000) {
        let m = ChannelParams::default().at(n_pe, 1e4).state_moments();
        let coarse = mutual_information(&m, &b);
        let mut fine = b.clone();
        fine.push(extra);
        fine.sort_by(f64::total_cmp);
        prop_assert!(mutual_information(&m, &fine) >= coarse - 1e-12);
        prop_assert!((0.0..=2.0).contains(&coarse));
    }

    #[test]
    fn widths_inside_feasible_box_never_overlap(
        a in sorted_boundaries(3).prop_filter("distinct", |a| a[1] - a[0] > 1e-3 && a[2] - a[1] > 1e-3),
        u in prop::array::uniform3(0.0f64..1.0),
    ) {
        let hard = HardThresholds::new(a).unwrap();
        let bx = feasible_box(&hard, &[(0.0, 2.0); 3]).unwrap();
        let w = [0, 1, 2].map(|i| bx[i].0 + u[i] * (bx[i].1 - bx[i].0));
        let soft = soft_boundaries(&hard, w).unwrap();
        prop_assert!(soft.is_strict() || w.iter().any(|&x| x == 0.0));
    }
}

#[test]
fn zero_width_limit_is_continuous() {
    let p = ChannelParams::default().at(10_000, 1e4);
    let m = p.state_moments();
    let hard = optimum_sep(&p).thresholds;
    let mi_hard = mutual_information(&m, &hard.a);
    let soft = soft_boundaries(&hard, [1e-9; 3]).unwrap();
    assert!((mutual_information(&m, &soft.boundaries) - mi_hard).abs() < 1e-6);
    let zero = soft_boundaries(&hard, [0.0; 3]).unwrap();
    assert!((mutual_information(&m, &zero.boundaries) - mi_hard).abs() < 1e-12);
}

#[test]
fn integer_and_exact_llrs_agree_in_sign() {
    let p = ChannelParams::default().at(10_000, 1e4);
    let m = p.state_moments();
    let hard = optimum_sep(&p).thresholds;
    let search = WidthSearch::default();
    let r = optimize_widths(
        &DensitySource::Analytic(m),
        &hard,
        &DegreeDistributions::regular(5, 69),
        &search,
    )
    .unwrap();
    let exact = reference_llr_table(&m, &r.soft.boundaries);
    let edges = r.soft.edges();
    for j in 0..SOFT_INTERVALS {
        // a point inside interval j
        let v = match j {
            0 => edges[1] - 1.0,
            6 => edges[6] + 1.0,
            _ => 0.5 * (edges[j] + edges[j + 1]),
        };
        let int = map_integer_llr(v, &r.soft);
        for (i, x) in [(int.l_msb, exact[j].l_msb), (int.l_lsb, exact[j].l_lsb)] {
            if i != 0 {
                assert_eq!(i > 0, x > 0.0, "interval {j}: integer {i}, exact {x}");
            }
        }
    }
}

#[test]
fn overlapping_widths_are_rejected() {
    let hard = HardThresholds::new(vec![2.0, 3.0, 3.6]).unwrap();
    assert!(soft_boundaries(&hard, [0.2, 0.9, 0.5]).is_err());
    assert!(feasible_box(&hard, &[(0.7, 1.0); 3]).is_err());
}
