//! Small numeric helpers shared across modules.

use libm::erfc;

/// Gaussian tail probability `Q(x) = P(Z > x)` for standard normal `Z`.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    q_function(-x)
}

/// `P(lo <= X < hi)` for `X ~ N(mean, sd^2)`.
///
/// Chooses the tail whose difference does not cancel, so tiny interval
/// probabilities far from the mean stay accurate.
pub fn normal_interval(mean: f64, sd: f64, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let zl = (lo - mean) / sd;
    let zh = (hi - mean) / sd;
    let p = if zl >= 0.0 {
        q_function(zl) - q_function(zh)
    } else {
        normal_cdf(zh) - normal_cdf(zl)
    };
    p.max(0.0)
}

pub fn normal_pdf(mean: f64, sd: f64, v: f64) -> f64 {
    let z = (v - mean) / sd;
    (-0.5 * z * z).exp() / ((2.0 * std::f64::consts::PI).sqrt() * sd)
}

/// Natural log of the normal density, finite for any finite argument.
pub fn normal_log_pdf(mean: f64, sd: f64, v: f64) -> f64 {
    let z = (v - mean) / sd;
    -0.5 * z * z - sd.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
}

pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^t)` without overflow.
pub fn softplus(t: f64) -> f64 {
    if t > 30.0 {
        t + (-t).exp()
    } else {
        t.exp().ln_1p()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_function_reference_values() {
        assert!((q_function(0.0) - 0.5).abs() < 1e-15);
        // Q(1.959963984540054) = 0.025
        let q = q_function(1.959963984540054); assert!((q - 0.025).abs() < 1e-12, "{q:e}");
        // deep tail stays relative-accurate
        let q8 = q_function(8.0);
        assert!((q8 / 6.220960574271785e-16 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn interval_matches_cdf_difference() {
        let p = normal_interval(1.0, 0.5, 0.2, 1.7);
        let direct = normal_cdf((1.7 - 1.0) / 0.5) - normal_cdf((0.2 - 1.0) / 0.5);
        assert!((p - direct).abs() < 1e-14);
        assert_eq!(normal_interval(0.0, 1.0, 1.0, 1.0), 0.0);
        assert!((normal_interval(0.0, 1.0, f64::NEG_INFINITY, f64::INFINITY) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn softplus_and_sigmoid() {
        assert!((softplus(0.0) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((softplus(100.0) - 100.0).abs() < 1e-12);
        assert!(softplus(-100.0) > 0.0);
        assert!((sigmoid(0.0) - 0.5).abs() < 1e-15);
        assert!((sigmoid(-800.0)).abs() < 1e-300);
    }
}
