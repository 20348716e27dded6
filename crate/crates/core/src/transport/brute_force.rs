//! Vertex enumeration of the transportation polytope.
//!
//! Every vertex is a basic feasible solution whose basis is a spanning tree of
//! the complete bipartite graph on the two supports (m + n - 1 cells). The
//! oracle walks every (m + n - 1)-subset of cells, keeps the spanning trees,
//! solves the tree flows by leaf peeling and takes the cheapest feasible one.
//! It shares no code with the simplex.

use crate::error::{Error, Result};

/// Upper bound on the number of candidate bases the oracle will visit.
pub const MAX_BASES: u128 = 5_000_000;

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Number of candidate bases for an `m x n` support.
pub fn candidate_bases(m: usize, n: usize) -> u128 {
    binomial(m * n, m + n - 1)
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    let mut y = x;
    while parent[y] != r {
        let next = parent[y];
        parent[y] = r;
        y = next;
    }
    r
}

/// Flow on a spanning tree of cells, or `None` if some flow is negative.
fn tree_flow(cells: &[usize], a: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    let (m, n) = (a.len(), b.len());
    let mut imbalance: Vec<f64> = a.iter().copied().chain(b.iter().map(|x| -x)).collect();
    let mut degree = vec![0usize; m + n];
    for &c in cells {
        degree[c / n] += 1;
        degree[m + c % n] += 1;
    }
    let mut flow = vec![f64::NAN; cells.len()];
    let mut done = vec![false; cells.len()];
    for _ in 0..cells.len() {
        let (k, leaf) = cells
            .iter()
            .enumerate()
            .filter(|(k, _)| !done[*k])
            .find_map(|(k, &c)| {
                let (r, s) = (c / n, m + c % n);
                if degree[r] == 1 {
                    Some((k, r))
                } else if degree[s] == 1 {
                    Some((k, s))
                } else {
                    None
                }
            })?;
        let c = cells[k];
        let (r, s) = (c / n, m + c % n);
        let x = if leaf == r { imbalance[r] } else { -imbalance[s] };
        flow[k] = x;
        imbalance[r] -= x;
        imbalance[s] += x;
        degree[r] -= 1;
        degree[s] -= 1;
        done[k] = true;
    }
    let tol = 1e-12;
    if flow.iter().any(|&x| x < -tol) {
        return None;
    }
    Some(flow.into_iter().map(|x| x.max(0.0)).collect())
}

/// Minimum of `sum cost * flow` over all vertices of the transportation
/// polytope with marginals `a` and `b` (both positive, equal totals).
pub fn enumerate_min_cost(a: &[f64], b: &[f64], cost: &[f64]) -> Result<f64> {
    let (m, n) = (a.len(), b.len());
    if m == 0 || n == 0 {
        return Err(Error::InvalidInput("empty marginal".into()));
    }
    let count = candidate_bases(m, n);
    if count > MAX_BASES {
        return Err(Error::TooLarge(count));
    }
    let cells = m * n;
    let k = m + n - 1;
    let mut pick: Vec<usize> = (0..k).collect();
    let mut best = f64::INFINITY;
    loop {
        let mut parent: Vec<usize> = (0..m + n).collect();
        let spanning = pick.iter().all(|&c| {
            let (r, s) = (find(&mut parent, c / n), find(&mut parent, m + c % n));
            if r == s {
                false
            } else {
                parent[r] = s;
                true
            }
        });
        if spanning {
            if let Some(flow) = tree_flow(&pick, a, b) {
                let total: f64 = pick.iter().zip(&flow).map(|(&c, x)| cost[c] * x).sum();
                best = best.min(total);
            }
        }
        // next k-combination of 0..cells in lexicographic order
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(best);
            }
            i -= 1;
            if pick[i] < cells - k + i {
                break;
            }
        }
        pick[i] += 1;
        for t in i + 1..k {
            pick[t] = pick[t - 1] + 1;
        }
    }
}
