//! Progressive edge growth for regular codes.
//!
//! Variable nodes are processed in index order. The first edge of each
//! variable goes to the lowest-degree check; every later edge goes to the
//! check farthest from the variable in the current graph (unreachable
//! counts as farthest), among checks that still have row capacity and are
//! not already adjacent. Ties go to the lowest current degree, then to the
//! lowest rank in a seed-dependent permutation of the checks.

use rand::seq::SliceRandom;

use super::ParityCheckMatrix;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

pub fn peg_construct(n: usize, d_v: usize, d_c: usize, seed: u64) -> Result<ParityCheckMatrix> {
    if n == 0 || d_v == 0 || d_c < 2 {
        return Err(Error::InfeasibleCode(format!(
            "degenerate parameters n = {n}, d_v = {d_v}, d_c = {d_c}"
        )));
    }
    if (n * d_v) % d_c != 0 {
        return Err(Error::InfeasibleCode(format!(
            "n * d_v = {} is not divisible by d_c = {d_c}",
            n * d_v
        )));
    }
    let m = n * d_v / d_c;
    if d_v > m || d_c > n {
        return Err(Error::InfeasibleCode(format!(
            "degree pair ({d_v}, {d_c}) does not fit {m} x {n}"
        )));
    }

    let mut rank: Vec<usize> = (0..m).collect();
    rank.shuffle(&mut rng_from_seed(seed));

    let mut rows: Vec<Vec<u32>> = vec![Vec::with_capacity(d_c); m];
    let mut cols: Vec<Vec<u32>> = vec![Vec::with_capacity(d_v); n];
    let mut open = m; // checks below capacity

    // per-BFS scratch, epoch-stamped to avoid clearing
    let mut check_epoch = vec![0u32; m];
    let mut check_depth = vec![0u32; m];
    let mut var_epoch = vec![0u32; n];
    let mut epoch = 0u32;
    let mut frontier: Vec<u32> = Vec::new();
    let mut next: Vec<u32> = Vec::new();

    for v in 0..n {
        for k in 0..d_v {
            let pick = if k == 0 {
                (0..m)
                    .filter(|&c| rows[c].len() < d_c)
                    .min_by_key(|&c| (rows[c].len(), rank[c]))
            } else {
                epoch += 1;
                let mut reached_open = 0usize;
                var_epoch[v] = epoch;
                frontier.clear();
                for &c in &cols[v] {
                    check_epoch[c as usize] = epoch;
                    check_depth[c as usize] = 0;
                    if rows[c as usize].len() < d_c {
                        reached_open += 1;
                    }
                    frontier.push(c);
                }
                let mut depth = 0u32;
                'bfs: while reached_open < open {
                    depth += 1;
                    next.clear();
                    for &c in &frontier {
                        for &u in &rows[c as usize] {
                            let u = u as usize;
                            if var_epoch[u] == epoch {
                                continue;
                            }
                            var_epoch[u] = epoch;
                            for &c2 in &cols[u] {
                                let c2i = c2 as usize;
                                if check_epoch[c2i] == epoch {
                                    continue;
                                }
                                check_epoch[c2i] = epoch;
                                check_depth[c2i] = depth;
                                next.push(c2);
                                if rows[c2i].len() < d_c {
                                    reached_open += 1;
                                    if reached_open == open {
                                        break 'bfs;
                                    }
                                }
                            }
                        }
                    }
                    if next.is_empty() {
                        break;
                    }
                    std::mem::swap(&mut frontier, &mut next);
                }
                let key = |c: usize| -> u32 {
                    if check_epoch[c] == epoch {
                        check_depth[c]
                    } else {
                        u32::MAX
                    }
                };
                (0..m)
                    .filter(|&c| rows[c].len() < d_c && !(check_epoch[c] == epoch && check_depth[c] == 0))
                    .min_by_key(|&c| (std::cmp::Reverse(key(c)), rows[c].len(), rank[c]))
            };
            let c = pick.ok_or_else(|| {
                Error::InfeasibleCode(format!(
                    "PEG stalled at variable {v}, edge {k}: no open non-adjacent check left"
                ))
            })?;
            rows[c].push(v as u32);
            cols[v].push(c as u32);
            if rows[c].len() == d_c {
                open -= 1;
            }
        }
    }
    ParityCheckMatrix::from_rows(n, rows)
}
