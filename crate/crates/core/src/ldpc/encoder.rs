use super::ParityCheckMatrix;
use crate::error::{Error, Result};

/// Systematic encoder from the reduced row echelon form of `H` over GF(2).
///
/// Pivot columns carry parity; the remaining `k = n - rank(H)` columns carry
/// information bits in increasing column order.
#[derive(Debug, Clone)]
pub struct Encoder {
    n: usize,
    info_positions: Vec<usize>,
    parity_positions: Vec<usize>,
    /// Row `r`: bitset over info indices whose XOR gives parity bit `r`.
    parity_rows: Vec<Vec<u64>>,
}

fn words(bits: usize) -> usize {
    bits.div_ceil(64)
}

impl Encoder {
    pub fn new(h: &ParityCheckMatrix) -> Self {
        let n = h.n();
        let w = words(n);
        let mut dense: Vec<Vec<u64>> = h
            .rows()
            .iter()
            .map(|row| {
                let mut bits = vec![0u64; w];
                for &c in row {
                    bits[c as usize / 64] ^= 1 << (c % 64);
                }
                bits
            })
            .collect();

        let mut pivots = Vec::new();
        let mut rank = 0;
        for c in 0..n {
            if rank == dense.len() {
                break;
            }
            let (word, bit) = (c / 64, 1u64 << (c % 64));
            let Some(p) = (rank..dense.len()).find(|&r| dense[r][word] & bit != 0) else {
                continue;
            };
            dense.swap(rank, p);
            let pivot_row = dense[rank].clone();
            for (r, row) in dense.iter_mut().enumerate() {
                if r != rank && row[word] & bit != 0 {
                    row.iter_mut().zip(&pivot_row).for_each(|(a, b)| *a ^= b);
                }
            }
            pivots.push(c);
            rank += 1;
        }

        let mut is_pivot = vec![false; n];
        pivots.iter().for_each(|&c| is_pivot[c] = true);
        let info_positions: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();
        let kw = words(info_positions.len());
        let parity_rows = dense[..rank]
            .iter()
            .map(|row| {
                let mut out = vec![0u64; kw];
                for (i, &c) in info_positions.iter().enumerate() {
                    if row[c / 64] >> (c % 64) & 1 == 1 {
                        out[i / 64] |= 1 << (i % 64);
                    }
                }
                out
            })
            .collect();

        Self {
            n,
            info_positions,
            parity_positions: pivots,
            parity_rows,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Effective information length `n - rank(H)`.
    pub fn k(&self) -> usize {
        self.info_positions.len()
    }

    pub fn rank(&self) -> usize {
        self.parity_positions.len()
    }

    pub fn info_positions(&self) -> &[usize] {
        &self.info_positions
    }

    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        if info.len() != self.k() {
            return Err(Error::LengthMismatch {
                what: "information word",
                left: info.len(),
                right: self.k(),
            });
        }
        let mut packed = vec![0u64; words(info.len())];
        for (i, &b) in info.iter().enumerate() {
            if b & 1 == 1 {
                packed[i / 64] |= 1 << (i % 64);
            }
        }
        let mut word = vec![0u8; self.n];
        for (&pos, &b) in self.info_positions.iter().zip(info) {
            word[pos] = b & 1;
        }
        for (&pos, row) in self.parity_positions.iter().zip(&self.parity_rows) {
            let ones: u32 = row.iter().zip(&packed).map(|(a, b)| (a & b).count_ones()).sum();
            word[pos] = (ones & 1) as u8;
        }
        Ok(word)
    }

    /// Information bits back out of a codeword.
    pub fn extract_info(&self, codeword: &[u8]) -> Vec<u8> {
        self.info_positions.iter().map(|&p| codeword[p]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ldpc::peg_construct;
    use crate::rng::rng_from_seed;
    use rand::Rng;

    #[test]
    fn zero_info_zero_word() {
        let h = peg_construct(96, 3, 6, 2).unwrap();
        let enc = Encoder::new(&h);
        let cw = enc.encode(&vec![0; enc.k()]).unwrap();
        assert!(cw.iter().all(|&b| b == 0));
        assert!(enc.encode(&[0; 3]).is_err());
    }

    #[test]
    fn codewords_satisfy_checks() {
        let h = peg_construct(240, 4, 8, 5).unwrap();
        let enc = Encoder::new(&h);
        // even column weight: the rows sum to zero, so rank < m
        assert!(enc.rank() < h.m());
        assert_eq!(enc.k(), 240 - enc.rank());
        let mut rng = rng_from_seed(1);
        for _ in 0..20 {
            let info: Vec<u8> = (0..enc.k()).map(|_| rng.random_range(0..2)).collect();
            let cw = enc.encode(&info).unwrap();
            assert!(h.is_codeword(&cw));
            assert_eq!(enc.extract_info(&cw), info);
        }
    }

    #[test]
    fn matches_brute_force_parity_solve() {
        let h = peg_construct(12, 2, 3, 3).unwrap();
        let enc = Encoder::new(&h);
        let parity: Vec<usize> = (0..12)
            .filter(|p| !enc.info_positions().contains(p))
            .collect();
        let mut rng = rng_from_seed(8);
        for _ in 0..10 {
            let info: Vec<u8> = (0..enc.k()).map(|_| rng.random_range(0..2)).collect();
            let mut solutions = Vec::new();
            for mask in 0u32..(1 << parity.len()) {
                let mut word = vec![0u8; 12];
                for (&p, &b) in enc.info_positions().iter().zip(&info) {
                    word[p] = b;
                }
                for (i, &p) in parity.iter().enumerate() {
                    word[p] = (mask >> i & 1) as u8;
                }
                if h.is_codeword(&word) {
                    solutions.push(word);
                }
            }
            assert_eq!(solutions.len(), 1);
            assert_eq!(solutions[0], enc.encode(&info).unwrap());
        }
    }
}
