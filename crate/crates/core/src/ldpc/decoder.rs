use super::ParityCheckMatrix;

/// Output of one decode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeResult {
    pub bits: Vec<u8>,
    /// Iterations run; 0 when the channel hard decisions already satisfy `H`.
    pub iterations: usize,
    /// `true` exactly when `bits` has zero syndrome.
    pub converged: bool,
}

/// Flooding normalized min-sum decoder.
///
/// Check update: `alpha * prod sign * min |.|` over the other incoming
/// messages. Variable update: channel LLR plus the other incoming check
/// messages. Hard decision is bit 1 iff the total LLR is negative.
#[derive(Debug, Clone)]
pub struct NmsDecoder<'h> {
    h: &'h ParityCheckMatrix,
    /// Column of each edge; edges are stored row by row.
    edge_col: Vec<u32>,
    row_start: Vec<usize>,
    /// Edge ids touching each column.
    col_edges: Vec<Vec<u32>>,
    v2c: Vec<f64>,
    c2v: Vec<f64>,
    total: Vec<f64>,
}

impl<'h> NmsDecoder<'h> {
    pub fn new(h: &'h ParityCheckMatrix) -> Self {
        let mut edge_col = Vec::with_capacity(h.edges());
        let mut row_start = Vec::with_capacity(h.m() + 1);
        let mut col_edges = vec![Vec::new(); h.n()];
        for row in h.rows() {
            row_start.push(edge_col.len());
            for &c in row {
                col_edges[c as usize].push(edge_col.len() as u32);
                edge_col.push(c);
            }
        }
        row_start.push(edge_col.len());
        let e = edge_col.len();
        Self {
            h,
            edge_col,
            row_start,
            col_edges,
            v2c: vec![0.0; e],
            c2v: vec![0.0; e],
            total: vec![0.0; h.n()],
        }
    }

    fn initialize(&mut self, llrs: &[f64]) {
        for (e, &c) in self.edge_col.iter().enumerate() {
            self.v2c[e] = llrs[c as usize];
        }
        self.c2v.iter_mut().for_each(|m| *m = 0.0);
    }

    fn check_update(&mut self, alpha: f64) {
        for r in 0..self.row_start.len() - 1 {
            let edges = self.row_start[r]..self.row_start[r + 1];
            let mut neg = false;
            let (mut min1, mut min2, mut arg) = (f64::INFINITY, f64::INFINITY, usize::MAX);
            for e in edges.clone() {
                let m = self.v2c[e];
                neg ^= m < 0.0;
                let a = m.abs();
                if a < min1 {
                    min2 = min1;
                    min1 = a;
                    arg = e;
                } else if a < min2 {
                    min2 = a;
                }
            }
            for e in edges {
                let mag = if e == arg { min2 } else { min1 };
                let negative = neg ^ (self.v2c[e] < 0.0);
                let out = alpha * mag;
                self.c2v[e] = if negative { -out } else { out };
            }
        }
    }

    fn variable_update(&mut self, llrs: &[f64]) {
        for (c, edges) in self.col_edges.iter().enumerate() {
            let t = llrs[c] + edges.iter().map(|&e| self.c2v[e as usize]).sum::<f64>();
            self.total[c] = t;
            for &e in edges {
                self.v2c[e as usize] = t - self.c2v[e as usize];
            }
        }
    }

    fn hard(values: &[f64]) -> Vec<u8> {
        values.iter().map(|&t| u8::from(t < 0.0)).collect()
    }

    pub fn decode(&mut self, llrs: &[f64], alpha: f64, max_iter: usize) -> DecodeResult {
        assert_eq!(llrs.len(), self.h.n(), "LLR length must equal code length");
        let bits = Self::hard(llrs);
        if self.h.is_codeword(&bits) {
            return DecodeResult {
                bits,
                iterations: 0,
                converged: true,
            };
        }
        self.initialize(llrs);
        let mut bits = bits;
        for it in 1..=max_iter {
            self.check_update(alpha);
            self.variable_update(llrs);
            bits = Self::hard(&self.total);
            if self.h.is_codeword(&bits) {
                return DecodeResult {
                    bits,
                    iterations: it,
                    converged: true,
                };
            }
        }
        DecodeResult {
            bits,
            iterations: max_iter,
            converged: false,
        }
    }

    /// Runs exactly `iterations` rounds without early stopping and returns,
    /// per round, the fraction of variable-to-check messages whose sign
    /// disagrees with `truth` (a zero message counts one half).
    pub fn message_error_trace(
        &mut self,
        llrs: &[f64],
        truth: &[u8],
        alpha: f64,
        iterations: usize,
    ) -> Vec<f64> {
        self.initialize(llrs);
        let mut trace = Vec::with_capacity(iterations);
        for _ in 0..iterations {
            self.check_update(alpha);
            self.variable_update(llrs);
            let mut wrong = 0.0;
            for (e, &c) in self.edge_col.iter().enumerate() {
                let m = self.v2c[e];
                let signed = if truth[c as usize] == 1 { -m } else { m };
                if signed < 0.0 {
                    wrong += 1.0;
                } else if signed == 0.0 {
                    wrong += 0.5;
                }
            }
            trace.push(wrong / self.edge_col.len() as f64);
        }
        trace
    }
}

/// One-shot convenience wrapper around [`NmsDecoder`].
pub fn nms_decode(h: &ParityCheckMatrix, llrs: &[f64], alpha: f64, max_iter: usize) -> DecodeResult {
    NmsDecoder::new(h).decode(llrs, alpha, max_iter)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ldpc::{peg_construct, Encoder};

    #[test]
    fn clean_codeword_stops_at_zero() {
        let h = peg_construct(96, 3, 6, 0).unwrap();
        let enc = Encoder::new(&h);
        let info: Vec<u8> = (0..enc.k()).map(|i| (i % 3 == 0) as u8).collect();
        let cw = enc.encode(&info).unwrap();
        let llrs: Vec<f64> = cw.iter().map(|&b| if b == 1 { -25.0 } else { 25.0 }).collect();
        let r = nms_decode(&h, &llrs, 0.5, 10);
        assert!(r.converged);
        assert_eq!(r.iterations, 0);
        assert_eq!(r.bits, cw);
    }

    #[test]
    fn corrects_single_flip() {
        let h = peg_construct(1008, 3, 6, 0).unwrap();
        let enc = Encoder::new(&h);
        let info: Vec<u8> = (0..enc.k()).map(|i| (i % 5 == 1) as u8).collect();
        let cw = enc.encode(&info).unwrap();
        for flip in [0usize, 17, 500, 1007] {
            let mut llrs: Vec<f64> = cw.iter().map(|&b| if b == 1 { -3.0 } else { 3.0 }).collect();
            llrs[flip] = -llrs[flip];
            let r = nms_decode(&h, &llrs, 0.5, 10);
            assert!(r.converged);
            assert!(r.iterations >= 1);
            assert_eq!(r.bits, cw);
        }
    }

    #[test]
    fn zero_llr_decides_zero() {
        let h = ParityCheckMatrix::from_rows(2, vec![vec![0, 1]]).unwrap();
        let r = nms_decode(&h, &[0.0, 0.0], 0.5, 5);
        assert_eq!(r.bits, vec![0, 0]);
        assert!(r.converged);
    }
}
