use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform message grid: values `k * step` for `k` in `-half..=half`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DdeGrid {
    pub step: f64,
    pub half: usize,
}

impl Default for DdeGrid {
    /// Step 1/16 with saturation at +-32. Integer channel LLRs and
    /// alpha = 0.5 stay on-grid for four check rounds; after that the
    /// requantization error is small enough that refining further moves
    /// P_e by about 1%.
    fn default() -> Self {
        Self { step: 0.0625, half: 512 }
    }
}

impl DdeGrid {
    pub fn len(&self) -> usize {
        2 * self.half + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index of the grid value nearest to `x` (ties away from zero),
    /// saturated at the grid edges.
    pub fn index_of(&self, x: f64) -> usize {
        let k = (x.abs() / self.step + 0.5).floor();
        let k = if k > self.half as f64 { self.half as f64 } else { k };
        let k = k as usize;
        if x < 0.0 {
            self.half - k
        } else {
            self.half + k
        }
    }

    pub fn value(&self, index: usize) -> f64 {
        (index as f64 - self.half as f64) * self.step
    }

    /// Finer grid with half the step and the same saturation level.
    pub fn refined(&self) -> Self {
        Self {
            step: self.step / 2.0,
            half: self.half * 2,
        }
    }
}

/// Probability mass function over a [`DdeGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MessagePmf {
    grid: DdeGrid,
    probs: Vec<f64>,
}

impl MessagePmf {
    pub fn point_mass(grid: DdeGrid, value: f64) -> Self {
        let mut probs = vec![0.0; grid.len()];
        probs[grid.index_of(value)] = 1.0;
        Self { grid, probs }
    }

    /// Wraps raw probabilities; they must be non-negative and sum to one.
    pub fn from_probs(grid: DdeGrid, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != grid.len() {
            return Err(Error::LengthMismatch {
                what: "pmf vs grid",
                left: probs.len(),
                right: grid.len(),
            });
        }
        if probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidParameter("pmf entries must be finite and >= 0".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!("pmf sums to {total}")));
        }
        Ok(Self { grid, probs })
    }

    /// Accumulates `(value, weight)` pairs onto the grid and normalizes.
    pub fn from_weighted_values(
        grid: DdeGrid,
        items: impl IntoIterator<Item = (f64, f64)>,
    ) -> Result<Self> {
        let mut probs = vec![0.0; grid.len()];
        for (v, w) in items {
            probs[grid.index_of(v)] += w;
        }
        let total: f64 = probs.iter().sum();
        if !(total > 0.0) {
            return Err(Error::EmptyDataset);
        }
        probs.iter_mut().for_each(|p| *p /= total);
        Ok(Self { grid, probs })
    }

    pub(crate) fn from_raw(grid: DdeGrid, probs: Vec<f64>) -> Self {
        Self { grid, probs }
    }

    pub fn grid(&self) -> DdeGrid {
        self.grid
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn mass_below_zero(&self) -> f64 {
        self.probs[..self.grid.half].iter().sum()
    }

    pub fn mass_at_zero(&self) -> f64 {
        self.probs[self.grid.half]
    }

    /// Mirror image about zero.
    pub fn flipped(&self) -> Self {
        let mut probs = self.probs.clone();
        probs.reverse();
        Self { grid: self.grid, probs }
    }

    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(i, p)| p * self.grid.value(i))
            .sum()
    }

    /// Distribution of the sum of independent draws from `self` and `other`,
    /// saturated at the grid edges.
    pub fn convolve(&self, other: &Self) -> Self {
        let n = self.grid.len();
        let h = self.grid.half as isize;
        let mut out = vec![0.0; n];
        for (i, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let di = i as isize - h;
            for (j, &q) in other.probs.iter().enumerate() {
                if q == 0.0 {
                    continue;
                }
                let k = (di + j as isize).clamp(0, 2 * h) as usize;
                out[k] += p * q;
            }
        }
        Self { grid: self.grid, probs: out }
    }

    /// Weighted mixture `sum w_i * pmf_i` (weights should sum to one).
    pub fn mixture(parts: &[(f64, MessagePmf)]) -> Self {
        let grid = parts[0].1.grid;
        let mut probs = vec![0.0; grid.len()];
        for (w, p) in parts {
            for (o, &x) in probs.iter_mut().zip(&p.probs) {
                *o += w * x;
            }
        }
        Self { grid, probs }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantization_rounds_half_away_from_zero() {
        let g = DdeGrid { step: 0.25, half: 128 };
        assert_eq!(g.value(g.index_of(0.125)), 0.25);
        assert_eq!(g.value(g.index_of(-0.125)), -0.25);
        assert_eq!(g.value(g.index_of(0.12)), 0.0);
        assert_eq!(g.value(g.index_of(100.0)), 32.0);
        assert_eq!(g.value(g.index_of(-100.0)), -32.0);
        assert_eq!(g.len(), 257);
        assert_eq!(DdeGrid::default().len(), 1025);
    }

    #[test]
    fn convolution_saturates() {
        let g = DdeGrid::default();
        let a = MessagePmf::point_mass(g, 20.0);
        let b = MessagePmf::point_mass(g, 30.0);
        let c = a.convolve(&b);
        assert_eq!(c.probs()[g.index_of(32.0)], 1.0);
        let d = a.convolve(&MessagePmf::point_mass(g, -5.0));
        assert_eq!(d.probs()[g.index_of(15.0)], 1.0);
    }

    #[test]
    fn validation() {
        let g = DdeGrid { step: 1.0, half: 2 };
        assert!(MessagePmf::from_probs(g, vec![0.2; 5]).is_ok());
        assert!(MessagePmf::from_probs(g, vec![0.25; 4]).is_err());
        assert!(MessagePmf::from_probs(g, vec![0.5, 0.5, 0.5, -0.5, 0.0]).is_err());
        assert!(MessagePmf::from_weighted_values(g, []).is_err());
    }
}
