//! Regular LDPC codes: PEG construction, systematic GF(2) encoding, and
//! flooding normalized min-sum decoding.
//!
//! Codeword bits map to cells pairwise: bit `2k` is the MSB and bit `2k + 1`
//! the LSB of cell `k`.

mod cache;
mod decoder;
mod encoder;
mod peg;

pub use cache::{cache_file_name, load_or_construct, read_matrix, write_matrix, PegHeader};
pub use decoder::{nms_decode, DecodeResult, NmsDecoder};
pub use encoder::Encoder;
pub use peg::peg_construct;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sparse binary parity-check matrix with adjacency in both directions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityCheckMatrix {
    n: usize,
    rows: Vec<Vec<u32>>,
    cols: Vec<Vec<u32>>,
}

impl ParityCheckMatrix {
    /// Builds the matrix from row adjacency lists over `n` columns.
    pub fn from_rows(n: usize, mut rows: Vec<Vec<u32>>) -> Result<Self> {
        let mut cols = vec![Vec::new(); n];
        for (r, row) in rows.iter_mut().enumerate() {
            row.sort_unstable();
            if row.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InfeasibleCode(format!("parallel edge in row {r}")));
            }
            for &c in row.iter() {
                let c = c as usize;
                if c >= n {
                    return Err(Error::InfeasibleCode(format!(
                        "column {c} out of range in row {r}"
                    )));
                }
                cols[c].push(r as u32);
            }
        }
        Ok(Self { n, rows, cols })
    }

    /// Number of columns (code length).
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of parity checks.
    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub fn cols(&self) -> &[Vec<u32>] {
        &self.cols
    }

    pub fn edges(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// `true` when `bits` satisfies every check.
    pub fn is_codeword(&self, bits: &[u8]) -> bool {
        bits.len() == self.n
            && self
                .rows
                .iter()
                .all(|row| row.iter().fold(0u8, |acc, &c| acc ^ (bits[c as usize] & 1)) == 0)
    }

    /// Number of unsatisfied checks.
    pub fn syndrome_weight(&self, bits: &[u8]) -> usize {
        self.rows
            .iter()
            .filter(|row| row.iter().fold(0u8, |acc, &c| acc ^ (bits[c as usize] & 1)) != 0)
            .count()
    }

    /// Counts length-4 cycles (pairs of columns sharing two or more rows).
    pub fn four_cycles(&self) -> usize {
        let mut count = 0;
        let mut seen = vec![u32::MAX; self.n];
        let mut hits = vec![0u32; self.n];
        for c in 0..self.n {
            let mut touched = Vec::new();
            for &r in &self.cols[c] {
                for &c2 in &self.rows[r as usize] {
                    let c2 = c2 as usize;
                    if c2 <= c {
                        continue;
                    }
                    if seen[c2] != c as u32 {
                        seen[c2] = c as u32;
                        hits[c2] = 0;
                        touched.push(c2);
                    }
                    hits[c2] += 1;
                }
            }
            for c2 in touched {
                let k = hits[c2] as usize;
                count += k * (k - 1) / 2;
            }
        }
        count
    }
}

/// Edge-perspective degree distributions: `lambda[(j, frac)]` is the fraction
/// of edges on degree-`j` variable nodes, `rho` likewise for checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeDistributions {
    pub lambda: Vec<(usize, f64)>,
    pub rho: Vec<(usize, f64)>,
}

impl DegreeDistributions {
    pub fn regular(d_v: usize, d_c: usize) -> Self {
        Self {
            lambda: vec![(d_v, 1.0)],
            rho: vec![(d_c, 1.0)],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, dist) in [("lambda", &self.lambda), ("rho", &self.rho)] {
            if dist.is_empty() {
                return Err(Error::InvalidParameter(format!("{name} is empty")));
            }
            if dist.iter().any(|&(d, f)| d < 2 || !(f >= 0.0)) {
                return Err(Error::InvalidParameter(format!(
                    "{name} needs degrees >= 2 and non-negative fractions"
                )));
            }
            let total: f64 = dist.iter().map(|&(_, f)| f).sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidParameter(format!(
                    "{name} fractions sum to {total}, not 1"
                )));
            }
        }
        Ok(())
    }

    /// `1 - (sum rho_i / i) / (sum lambda_j / j)`.
    pub fn design_rate(&self) -> f64 {
        let inv = |d: &[(usize, f64)]| d.iter().map(|&(k, f)| f / k as f64).sum::<f64>();
        1.0 - inv(&self.rho) / inv(&self.lambda)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regular_distribution() {
        let d = DegreeDistributions::regular(5, 69);
        d.validate().unwrap();
        assert!((d.design_rate() - (1.0 - 5.0 / 69.0)).abs() < 1e-12);
        let bad = DegreeDistributions {
            lambda: vec![(2, 0.5), (3, 0.4)],
            rho: vec![(6, 1.0)],
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn four_cycle_count() {
        // columns 0 and 1 share rows 0 and 1
        let h = ParityCheckMatrix::from_rows(3, vec![vec![0, 1], vec![0, 1, 2], vec![2]]).unwrap();
        assert_eq!(h.four_cycles(), 1);
        assert!(ParityCheckMatrix::from_rows(3, vec![vec![0, 0]]).is_err());
        assert!(ParityCheckMatrix::from_rows(3, vec![vec![3]]).is_err());
    }
}
