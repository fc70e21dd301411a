//! Classic differential evolution (rand/1/bin) over a box.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DifferentialEvolution {
    pub population: usize,
    pub mutation: f64,
    pub crossover: f64,
    pub generations: usize,
    pub seed: u64,
}

impl Default for DifferentialEvolution {
    fn default() -> Self {
        Self {
            population: 20,
            mutation: 0.5,
            crossover: 0.9,
            generations: 50,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeOutcome {
    pub best: Vec<f64>,
    pub cost: f64,
    pub evaluations: usize,
    /// Best cost after initialization and after each generation.
    pub history: Vec<f64>,
}

impl DifferentialEvolution {
    pub fn validate(&self, bounds: &[(f64, f64)]) -> Result<()> {
        if self.population < 4 {
            return Err(Error::InvalidParameter("population must be at least 4".into()));
        }
        if !(self.mutation > 0.0 && self.mutation <= 2.0) {
            return Err(Error::InvalidParameter(format!("mutation {} outside (0, 2]", self.mutation)));
        }
        if !(0.0..=1.0).contains(&self.crossover) {
            return Err(Error::InvalidParameter(format!("crossover {} outside [0, 1]", self.crossover)));
        }
        if bounds.is_empty() || bounds.iter().any(|&(lo, hi)| !(lo <= hi) || !lo.is_finite() || !hi.is_finite()) {
            return Err(Error::InvalidParameter(format!("bad search box {bounds:?}")));
        }
        Ok(())
    }

    /// Minimizes `cost` over `bounds`. Ties in selection favor the trial
    /// vector, which lets the population drift across flat regions.
    pub fn minimize<F>(&self, bounds: &[(f64, f64)], mut cost: F) -> Result<DeOutcome>
    where
        F: FnMut(&[f64]) -> f64,
    {
        self.validate(bounds)?;
        let dim = bounds.len();
        let np = self.population;
        let mut rng = rng_from_seed(self.seed);
        let mut pop: Vec<Vec<f64>> = (0..np)
            .map(|_| bounds.iter().map(|&(lo, hi)| lo + (hi - lo) * rng.random::<f64>()).collect())
            .collect();
        let mut costs: Vec<f64> = pop.iter().map(|x| cost(x)).collect();
        let mut evaluations = np;
        let best_of = |c: &[f64]| -> usize {
            (0..c.len()).min_by(|&a, &b| c[a].total_cmp(&c[b])).unwrap()
        };
        let mut history = vec![costs[best_of(&costs)]];

        let mut trial = vec![0.0; dim];
        for _ in 0..self.generations {
            for i in 0..np {
                let mut pick = |taken: &[usize]| loop {
                    let r = rng.random_range(0..np);
                    if !taken.contains(&r) {
                        break r;
                    }
                };
                let r1 = pick(&[i]);
                let r2 = pick(&[i, r1]);
                let r3 = pick(&[i, r1, r2]);
                let forced = rng.random_range(0..dim);
                for d in 0..dim {
                    if d == forced || rng.random::<f64>() < self.crossover {
                        let (lo, hi) = bounds[d];
                        let base = pop[r1][d];
                        let v = base + self.mutation * (pop[r2][d] - pop[r3][d]);
                        // out-of-box components land halfway between base and bound
                        trial[d] = if v < lo {
                            0.5 * (lo + base)
                        } else if v > hi {
                            0.5 * (hi + base)
                        } else {
                            v
                        };
                    } else {
                        trial[d] = pop[i][d];
                    }
                }
                let c = cost(&trial);
                evaluations += 1;
                if c <= costs[i] {
                    pop[i].copy_from_slice(&trial);
                    costs[i] = c;
                }
            }
            history.push(costs[best_of(&costs)]);
        }
        let b = best_of(&costs);
        Ok(DeOutcome {
            best: pop[b].clone(),
            cost: costs[b],
            evaluations,
            history,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_quadratic_minimum() {
        let target = [0.21, 0.37, 0.55];
        let de = DifferentialEvolution { seed: 4, ..Default::default() };
        let out = de
            .minimize(&[(0.0, 1.0); 3], |x| {
                x.iter().zip(&target).map(|(a, b)| (a - b).powi(2)).sum()
            })
            .unwrap();
        for (a, b) in out.best.iter().zip(&target) {
            assert!((a - b).abs() < 1e-3, "{:?}", out.best);
        }
        assert_eq!(out.evaluations, 20 * 51);
        assert!(out.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn stays_in_box() {
        let de = DifferentialEvolution { generations: 10, ..Default::default() };
        let out = de.minimize(&[(0.5, 0.7), (-1.0, -0.9)], |x| x[0] + x[1]).unwrap();
        assert!((0.5..=0.7).contains(&out.best[0]));
        assert!((-1.0..=-0.9).contains(&out.best[1]));
    }

    #[test]
    fn validates() {
        let de = DifferentialEvolution { population: 3, ..Default::default() };
        assert!(de.minimize(&[(0.0, 1.0)], |_| 0.0).is_err());
        assert!(DifferentialEvolution::default().minimize(&[(1.0, 0.0)], |_| 0.0).is_err());
    }
}
