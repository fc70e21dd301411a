//! Gated recurrent layer: forward pass with cache and backpropagation
//! through time.
//!
//! Parameters of one layer with input size `I` and hidden size `H` are
//! stored contiguously as `W` (3H x I), `U` (3H x H), `b` (3H), row-major,
//! with gate blocks in the order update `z`, reset `r`, candidate `n`:
//!
//! ```text
//! z  = sigmoid(Wz x + Uz h + bz)
//! r  = sigmoid(Wr x + Ur h + br)
//! n  = tanh(Wn x + Un (r * h) + bn)
//! h' = (1 - z) * h + z * n
//! ```
//!
//! The layer exposes `relu(h')` to the next stage; the raw `h'` recurs.

use crate::math::sigmoid;

pub(crate) fn layer_len(input: usize, hidden: usize) -> usize {
    3 * hidden * (input + hidden + 1)
}

#[derive(Clone, Copy)]
pub(crate) struct Layer<'a> {
    pub input: usize,
    pub hidden: usize,
    w: &'a [f64],
    u: &'a [f64],
    b: &'a [f64],
}

impl<'a> Layer<'a> {
    pub fn new(input: usize, hidden: usize, params: &'a [f64]) -> Self {
        debug_assert_eq!(params.len(), layer_len(input, hidden));
        let (w, rest) = params.split_at(3 * hidden * input);
        let (u, b) = rest.split_at(3 * hidden * hidden);
        Self { input, hidden, w, u, b }
    }
}

pub(crate) struct LayerGrad<'a> {
    w: &'a mut [f64],
    u: &'a mut [f64],
    b: &'a mut [f64],
}

impl<'a> LayerGrad<'a> {
    pub fn new(input: usize, hidden: usize, grads: &'a mut [f64]) -> Self {
        let (w, rest) = grads.split_at_mut(3 * hidden * input);
        let (u, b) = rest.split_at_mut(3 * hidden * hidden);
        Self { w, u, b }
    }
}

/// Per-sequence activations kept for the backward pass.
#[derive(Debug, Default, Clone)]
pub(crate) struct LayerCache {
    /// `(T + 1) x H`, row 0 is the zero initial state.
    pub h: Vec<f64>,
    pub z: Vec<f64>,
    pub r: Vec<f64>,
    pub n: Vec<f64>,
    /// `T x H` exposed outputs `relu(h_{t+1})`.
    pub y: Vec<f64>,
    rh: Vec<f64>,
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Runs the layer over `steps` inputs (`xs` is `steps x I`).
pub(crate) fn forward(p: Layer<'_>, xs: &[f64], steps: usize, c: &mut LayerCache) {
    let (ni, nh) = (p.input, p.hidden);
    c.h.clear();
    c.h.resize((steps + 1) * nh, 0.0);
    for v in [&mut c.z, &mut c.r, &mut c.n, &mut c.y, &mut c.rh] {
        v.clear();
        v.resize(steps * nh, 0.0);
    }
    let row_w = |g: usize, j: usize| &p.w[(g * nh + j) * ni..(g * nh + j + 1) * ni];
    let row_u = |g: usize, j: usize| &p.u[(g * nh + j) * nh..(g * nh + j + 1) * nh];
    for t in 0..steps {
        let x = &xs[t * ni..(t + 1) * ni];
        let (hs, hn) = c.h.split_at_mut((t + 1) * nh);
        let hp = &hs[t * nh..];
        let h_new = &mut hn[..nh];
        let o = t * nh;
        for j in 0..nh {
            c.z[o + j] = sigmoid(p.b[j] + dot(row_w(0, j), x) + dot(row_u(0, j), hp));
            let r = sigmoid(p.b[nh + j] + dot(row_w(1, j), x) + dot(row_u(1, j), hp));
            c.r[o + j] = r;
            c.rh[o + j] = r * hp[j];
        }
        let rh = &c.rh[o..o + nh];
        for j in 0..nh {
            let n = (p.b[2 * nh + j] + dot(row_w(2, j), x) + dot(row_u(2, j), rh)).tanh();
            c.n[o + j] = n;
            let z = c.z[o + j];
            let h = (1.0 - z) * hp[j] + z * n;
            h_new[j] = h;
            c.y[o + j] = h.max(0.0);
        }
    }
}

/// Accumulates parameter gradients given `dy` (gradient of the loss with
/// respect to the exposed outputs, `steps x H`). Writes the input gradient
/// into `dxs` when provided.
pub(crate) fn backward(
    p: Layer<'_>,
    xs: &[f64],
    steps: usize,
    c: &LayerCache,
    dy: &[f64],
    g: &mut LayerGrad<'_>,
    mut dxs: Option<&mut [f64]>,
) {
    let (ni, nh) = (p.input, p.hidden);
    let mut dh = vec![0.0; nh];
    let mut dh_prev = vec![0.0; nh];
    let mut da = vec![0.0; 3 * nh]; // pre-activation grads for z, r, n
    let mut drh = vec![0.0; nh];
    for t in (0..steps).rev() {
        let o = t * nh;
        let hp = &c.h[o..o + nh];
        let hcur = &c.h[o + nh..o + 2 * nh];
        for j in 0..nh {
            if hcur[j] > 0.0 {
                dh[j] += dy[o + j];
            }
        }
        for j in 0..nh {
            let (z, n) = (c.z[o + j], c.n[o + j]);
            da[j] = dh[j] * (n - hp[j]) * z * (1.0 - z);
            da[2 * nh + j] = dh[j] * z * (1.0 - n * n);
            dh_prev[j] = dh[j] * (1.0 - z);
        }
        // through Un (r * h)
        drh.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..nh {
            let a = da[2 * nh + j];
            let row = &p.u[(2 * nh + j) * nh..(2 * nh + j + 1) * nh];
            let grow = &mut g.u[(2 * nh + j) * nh..(2 * nh + j + 1) * nh];
            let rh = &c.rh[o..o + nh];
            for k in 0..nh {
                drh[k] += row[k] * a;
                grow[k] += a * rh[k];
            }
        }
        for j in 0..nh {
            let r = c.r[o + j];
            da[nh + j] = drh[j] * hp[j] * r * (1.0 - r);
            dh_prev[j] += drh[j] * r;
        }
        // through Uz h and Ur h
        for gate in 0..2 {
            for j in 0..nh {
                let a = da[gate * nh + j];
                let base = (gate * nh + j) * nh;
                let row = &p.u[base..base + nh];
                let grow = &mut g.u[base..base + nh];
                for k in 0..nh {
                    dh_prev[k] += row[k] * a;
                    grow[k] += a * hp[k];
                }
            }
        }
        let x = &xs[t * ni..(t + 1) * ni];
        for (q, &a) in da.iter().enumerate() {
            g.b[q] += a;
            let gw = &mut g.w[q * ni..(q + 1) * ni];
            for k in 0..ni {
                gw[k] += a * x[k];
            }
        }
        if let Some(dx) = dxs.as_deref_mut() {
            let dx = &mut dx[t * ni..(t + 1) * ni];
            for (q, &a) in da.iter().enumerate() {
                let row = &p.w[q * ni..(q + 1) * ni];
                for k in 0..ni {
                    dx[k] += row[k] * a;
                }
            }
        }
        std::mem::swap(&mut dh, &mut dh_prev);
    }
}
