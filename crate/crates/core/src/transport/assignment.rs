//! Exact linear assignment by shortest augmenting paths (Hungarian method
//! with row and column potentials), on the same integer cost lattice as the
//! network simplex.

use super::network_simplex::scaled_cost;
use crate::error::{Error, Result};

/// Minimum-cost perfect matching of a square `n x n` cost matrix.
///
/// Returns `sigma` with row `i` matched to column `sigma[i]`.
pub fn solve_assignment(n: usize, cost: &[f64]) -> Result<Vec<usize>> {
    if cost.len() != n * n {
        return Err(Error::SizeMismatch(cost.len(), n * n));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let c: Vec<i64> = cost.iter().map(|&x| scaled_cost(x)).collect::<Result<_>>()?;
    let inf = i128::MAX / 4;
    // 1-based potentials; column 0 is a sentinel
    let mut u = vec![0i128; n + 1];
    let mut v = vec![0i128; n + 1];
    let mut matched_row = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        matched_row[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = c[(i0 - 1) * n + (j - 1)] as i128 - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut sigma = vec![0usize; n];
    for j in 1..=n {
        sigma[matched_row[j] - 1] = j - 1;
    }
    Ok(sigma)
}
