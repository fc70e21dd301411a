use serde::{Deserialize, Serialize};

use super::pmf::MessagePmf;
use crate::error::{Error, Result};
use crate::ldpc::DegreeDistributions;

/// How the atom at exactly zero counts toward the error fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZeroMass {
    /// Zero counts one half (a coin-flip decision).
    #[default]
    Half,
    /// Only mass strictly below zero counts.
    Strict,
}

pub fn error_fraction(pmf: &MessagePmf, zero: ZeroMass) -> f64 {
    let below = pmf.mass_below_zero();
    match zero {
        ZeroMass::Half => below + 0.5 * pmf.mass_at_zero(),
        ZeroMass::Strict => below,
    }
}

/// Check-node output density: `alpha * (product of signs) * (min magnitude)`
/// over `d_c - 1` independent inputs, requantized to the grid.
///
/// With per-sign tail masses `A(t) = P(X >= t)`, `B(t) = P(X <= -t)`, the
/// probability that all `n` magnitudes are at least `t` with an even
/// (odd) number of negatives is `((A+B)^n +- (A-B)^n) / 2`; differencing in
/// `t` gives the exact minimum distribution.
pub fn check_update(pmf: &MessagePmf, d_c: usize, alpha: f64) -> MessagePmf {
    assert!(d_c >= 2, "check degree must be at least 2");
    let grid = pmf.grid();
    let p = pmf.probs();
    let s = grid.half;
    let n = (d_c - 1) as i32;

    // tails[t] for t in 1..=s, plus a zero sentinel at s + 1
    let mut a = vec![0.0; s + 2];
    let mut b = vec![0.0; s + 2];
    for t in (1..=s).rev() {
        a[t] = a[t + 1] + p[s + t];
        b[t] = b[t + 1] + p[s - t];
    }
    let g = |t: usize| -> (f64, f64) {
        if t > s {
            return (0.0, 0.0);
        }
        let sum = (a[t] + b[t]).powi(n);
        let diff = (a[t] - b[t]).powi(n);
        (0.5 * (sum + diff), 0.5 * (sum - diff))
    };

    let mut out = vec![0.0; grid.len()];
    out[s] = (1.0 - (a[1] + b[1]).powi(n)).max(0.0);
    let mut upper = g(1);
    for t in 1..=s {
        let next = g(t + 1);
        let pos = (upper.0 - next.0).max(0.0);
        let neg = (upper.1 - next.1).max(0.0);
        let mag = alpha * t as f64 * grid.step;
        out[grid.index_of(mag)] += pos;
        out[grid.index_of(-mag)] += neg;
        upper = next;
    }
    MessagePmf::from_raw(grid, out)
}

/// Variable-node output density: channel plus `d_v - 1` check messages.
pub fn variable_update(channel: &MessagePmf, check: &MessagePmf, d_v: usize) -> MessagePmf {
    let mut acc = channel.clone();
    for _ in 1..d_v {
        acc = acc.convolve(check);
    }
    acc
}

/// Runs `iterations` rounds of density evolution from the symmetrized
/// channel density and returns the message error fraction after each round.
pub fn dde_run(
    channel: &MessagePmf,
    ensemble: &DegreeDistributions,
    alpha: f64,
    iterations: usize,
    zero: ZeroMass,
) -> Result<Vec<f64>> {
    ensemble.validate()?;
    if iterations == 0 {
        return Err(Error::InvalidParameter("need at least one iteration".into()));
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    let mut v = channel.clone();
    let mut trace = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let u = mix(ensemble.rho.iter().map(|&(d, w)| (w, check_update(&v, d, alpha))));
        v = mix(ensemble.lambda.iter().map(|&(d, w)| (w, variable_update(channel, &u, d))));
        trace.push(error_fraction(&v, zero));
    }
    Ok(trace)
}

fn mix(parts: impl Iterator<Item = (f64, MessagePmf)>) -> MessagePmf {
    let parts: Vec<_> = parts.collect();
    if parts.len() == 1 {
        return parts.into_iter().next().unwrap().1;
    }
    MessagePmf::mixture(&parts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dde::DdeGrid;

    fn toy() -> MessagePmf {
        let g = DdeGrid::default();
        MessagePmf::from_weighted_values(
            g,
            [(3.0, 0.4), (1.0, 0.2), (0.0, 0.1), (-1.0, 0.15), (-2.0, 0.1), (0.5, 0.05)],
        )
        .unwrap()
    }

    #[test]
    fn point_mass_maps_to_scaled_point() {
        let g = DdeGrid::default();
        for d_c in [2, 6, 69] {
            let out = check_update(&MessagePmf::point_mass(g, 3.0), d_c, 0.5);
            assert_eq!(out.probs()[g.index_of(1.5)], 1.0);
        }
        // 0.5 * 0.0625 = 0.03125 rounds away from zero
        let out = check_update(&MessagePmf::point_mass(g, -0.0625), 2, 0.5);
        assert!((out.probs()[g.index_of(-0.0625)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn degree_two_is_scaling() {
        let p = toy();
        let out = check_update(&p, 2, 1.0);
        for (a, b) in out.probs().iter().zip(p.probs()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn odd_symmetry() {
        let p = toy();
        for d_c in [3, 4, 7] {
            let a = check_update(&p.flipped(), d_c, 0.5);
            let b = check_update(&p, d_c, 0.5);
            if d_c % 2 == 0 {
                // odd number of inputs: flipping every input flips the product
                for (x, y) in a.probs().iter().zip(b.flipped().probs()) {
                    assert!((x - y).abs() < 1e-15);
                }
            } else {
                for (x, y) in a.probs().iter().zip(b.probs()) {
                    assert!((x - y).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn mass_is_conserved() {
        let p = toy();
        assert!((check_update(&p, 69, 0.5).total() - 1.0).abs() < 1e-12);
        assert!((variable_update(&p, &p, 5).total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_check_returns_channel() {
        let g = DdeGrid::default();
        let p = toy();
        let out = variable_update(&p, &MessagePmf::point_mass(g, 0.0), 5);
        assert_eq!(out.probs(), p.probs());
    }

    #[test]
    fn positive_channel_never_errs() {
        let g = DdeGrid::default();
        let ch = MessagePmf::point_mass(g, 2.0);
        let trace = dde_run(&ch, &DegreeDistributions::regular(5, 69), 0.5, 10, ZeroMass::Half).unwrap();
        assert!(trace.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn rejects_bad_arguments() {
        let ch = toy();
        let e = DegreeDistributions::regular(3, 6);
        assert!(dde_run(&ch, &e, 0.5, 0, ZeroMass::Half).is_err());
        assert!(dde_run(&ch, &e, 0.0, 3, ZeroMass::Half).is_err());
    }

    #[test]
    fn zero_conventions() {
        let g = DdeGrid::default();
        let p = MessagePmf::from_weighted_values(g, [(0.0, 0.5), (-1.0, 0.25), (1.0, 0.25)]).unwrap();
        assert_eq!(error_fraction(&p, ZeroMass::Strict), 0.25);
        assert_eq!(error_fraction(&p, ZeroMass::Half), 0.5);
    }
}
