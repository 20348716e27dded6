//! Primal network simplex for the dense transportation problem.
//!
//! Costs and masses are scaled to integers before pivoting, so every pricing
//! decision and every ratio test is exact. The tree is kept strongly feasible
//! (artificial root, leaving arc chosen as the last blocking arc of the
//! cycle), which rules out cycling under degeneracy. Once the optimal basis is
//! known, the floating point plan is recovered from it by peeling leaves with
//! the original masses.

use crate::error::{Error, Result};

/// Multiplier turning costs into integers.
pub const COST_SCALE: f64 = 1e9;

/// Total integer mass of each side.
const MASS_SCALE: f64 = (1u64 << 52) as f64;

/// Scales a nonnegative cost to the integer lattice used for pivoting.
pub fn scaled_cost(c: f64) -> Result<i64> {
    let s = (c * COST_SCALE).round();
    if !(c >= 0.0) || !s.is_finite() || s > 9.0e18 {
        return Err(Error::SolverFailure(format!("cost {c} cannot be scaled to an integer")));
    }
    Ok(s as i64)
}

/// Integer masses summing exactly to `2^52`; the rounding defect is put on
/// the largest entry.
fn scaled_masses(w: &[f64]) -> Vec<i64> {
    let total: f64 = w.iter().sum();
    let mut out: Vec<i64> = w.iter().map(|x| (x / total * MASS_SCALE).round() as i64).collect();
    let sum: i64 = out.iter().sum();
    let largest = (0..w.len())
        .max_by(|&a, &b| w[a].total_cmp(&w[b]).then(b.cmp(&a)))
        .expect("nonempty");
    out[largest] += MASS_SCALE as i64 - sum;
    out
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum State {
    Tree,
    Lower,
}

/// Solver state over `m` sources, `n` sinks and an artificial root.
#[derive(Clone, Debug)]
pub struct NetworkSimplex {
    m: usize,
    n: usize,
    cost: Vec<i128>,
    source: Vec<usize>,
    target: Vec<usize>,
    flow: Vec<i64>,
    state: Vec<State>,
    parent: Vec<usize>,
    pred: Vec<usize>,
    // true when pred[u] is directed u -> parent[u]
    pred_up: Vec<bool>,
    depth: Vec<usize>,
    pi: Vec<i128>,
    supply: Vec<f64>,
    demand: Vec<f64>,
    next_arc: usize,
    block_size: usize,
    pub pivots: usize,
}

const NONE: usize = usize::MAX;

impl NetworkSimplex {
    /// `supply` and `demand` must be positive with equal totals; `cost` is
    /// row-major `m x n`.
    pub fn new(supply: &[f64], demand: &[f64], cost: &[f64]) -> Result<Self> {
        let (m, n) = (supply.len(), demand.len());
        if m == 0 || n == 0 || cost.len() != m * n {
            return Err(Error::SolverFailure("empty problem or malformed cost matrix".into()));
        }
        if supply.iter().chain(demand).any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::SolverFailure("masses must be positive and finite".into()));
        }
        let real = m * n;
        let nodes = m + n;
        let root = nodes;
        let mut icost = Vec::with_capacity(real + nodes);
        let mut max_cost: i128 = 0;
        for &c in cost {
            let s = scaled_cost(c)? as i128;
            max_cost = max_cost.max(s);
            icost.push(s);
        }
        let art = (max_cost + 1) * (nodes as i128 + 1);
        let mut source = Vec::with_capacity(real + nodes);
        let mut target = Vec::with_capacity(real + nodes);
        for i in 0..m {
            for j in 0..n {
                source.push(i);
                target.push(m + j);
            }
        }
        let a = scaled_masses(supply);
        let b = scaled_masses(demand);
        let mut flow = vec![0i64; real + nodes];
        let mut state = vec![State::Lower; real + nodes];
        let mut parent = vec![root; nodes + 1];
        let mut pred = vec![NONE; nodes + 1];
        let mut pred_up = vec![false; nodes + 1];
        let mut depth = vec![1usize; nodes + 1];
        let mut pi = vec![0i128; nodes + 1];
        for u in 0..nodes {
            let e = real + u;
            icost.push(art);
            pred[u] = e;
            state[e] = State::Tree;
            if u < m {
                source.push(u);
                target.push(root);
                flow[e] = a[u];
                pred_up[u] = true;
                pi[u] = -art;
            } else {
                source.push(root);
                target.push(u);
                flow[e] = b[u - m];
                pi[u] = art;
            }
        }
        parent[root] = NONE;
        depth[root] = 0;
        let arcs = real + nodes;
        let block_size = ((arcs as f64).sqrt().ceil() as usize).max(10);
        Ok(NetworkSimplex {
            m,
            n,
            cost: icost,
            source,
            target,
            flow,
            state,
            parent,
            pred,
            pred_up,
            depth,
            pi,
            supply: supply.to_vec(),
            demand: demand.to_vec(),
            next_arc: 0,
            block_size,
            pivots: 0,
        })
    }

    #[inline]
    fn reduced_cost(&self, e: usize) -> i128 {
        self.cost[e] + self.pi[self.source[e]] - self.pi[self.target[e]]
    }

    fn find_entering(&mut self) -> Option<usize> {
        let arcs = self.cost.len();
        let mut best: i128 = 0;
        let mut best_arc = NONE;
        let mut cnt = self.block_size;
        for k in 0..arcs {
            let e = (self.next_arc + k) % arcs;
            if self.state[e] == State::Lower {
                let rc = self.reduced_cost(e);
                if rc < best {
                    best = rc;
                    best_arc = e;
                }
            }
            cnt -= 1;
            if cnt == 0 {
                if best < 0 {
                    self.next_arc = (e + 1) % arcs;
                    return Some(best_arc);
                }
                cnt = self.block_size;
            }
        }
        if best < 0 {
            self.next_arc = (best_arc + 1) % arcs;
            Some(best_arc)
        } else {
            None
        }
    }

    fn join(&self, mut u: usize, mut v: usize) -> usize {
        while u != v {
            if self.depth[u] > self.depth[v] {
                u = self.parent[u];
            } else if self.depth[v] > self.depth[u] {
                v = self.parent[v];
            } else {
                u = self.parent[u];
                v = self.parent[v];
            }
        }
        u
    }

    /// Pushes flow around the cycle closed by `in_arc` and updates the tree.
    /// Returns the amount of (integer) flow moved.
    fn pivot(&mut self, in_arc: usize) -> Result<i64> {
        let first = self.source[in_arc];
        let second = self.target[in_arc];
        let join = self.join(first, second);

        let mut delta = i64::MAX;
        let mut u_out = NONE;
        let mut from_first = true;
        let mut u = first;
        while u != join {
            let e = self.pred[u];
            let d = if self.pred_up[u] { self.flow[e] } else { i64::MAX };
            if d < delta {
                delta = d;
                u_out = u;
                from_first = true;
            }
            u = self.parent[u];
        }
        let mut u = second;
        while u != join {
            let e = self.pred[u];
            let d = if self.pred_up[u] { i64::MAX } else { self.flow[e] };
            if d <= delta {
                delta = d;
                u_out = u;
                from_first = false;
            }
            u = self.parent[u];
        }
        if u_out == NONE || delta == i64::MAX {
            return Err(Error::SolverFailure("unbounded pivot".into()));
        }

        if delta > 0 {
            self.flow[in_arc] += delta;
            let mut u = first;
            while u != join {
                let e = self.pred[u];
                if self.pred_up[u] {
                    self.flow[e] -= delta;
                } else {
                    self.flow[e] += delta;
                }
                u = self.parent[u];
            }
            let mut u = second;
            while u != join {
                let e = self.pred[u];
                if self.pred_up[u] {
                    self.flow[e] += delta;
                } else {
                    self.flow[e] -= delta;
                }
                u = self.parent[u];
            }
        }

        let out_arc = self.pred[u_out];
        let (u_in, v_in) = if from_first { (first, second) } else { (second, first) };

        // reverse the path u_in .. u_out and hang it below v_in
        let mut w = u_in;
        let mut new_parent = v_in;
        let mut new_pred = in_arc;
        let mut new_up = self.source[in_arc] == u_in;
        loop {
            let old_parent = self.parent[w];
            let old_pred = self.pred[w];
            let old_up = self.pred_up[w];
            self.parent[w] = new_parent;
            self.pred[w] = new_pred;
            self.pred_up[w] = new_up;
            if w == u_out {
                break;
            }
            new_parent = w;
            new_pred = old_pred;
            new_up = !old_up;
            w = old_parent;
        }
        self.state[in_arc] = State::Tree;
        self.state[out_arc] = State::Lower;
        self.refresh_tree();
        self.pivots += 1;
        Ok(delta)
    }

    /// Recomputes depths and potentials from the parent pointers.
    fn refresh_tree(&mut self) {
        let root = self.m + self.n;
        let count = root + 1;
        let mut start = vec![0usize; count + 1];
        for u in 0..root {
            start[self.parent[u] + 1] += 1;
        }
        for i in 0..count {
            start[i + 1] += start[i];
        }
        let mut fill = start.clone();
        let mut children = vec![0usize; root];
        for u in 0..root {
            let p = self.parent[u];
            children[fill[p]] = u;
            fill[p] += 1;
        }
        let mut stack = vec![root];
        self.depth[root] = 0;
        self.pi[root] = 0;
        while let Some(p) = stack.pop() {
            for &c in &children[start[p]..start[p + 1]] {
                let e = self.pred[c];
                self.depth[c] = self.depth[p] + 1;
                self.pi[c] = if self.pred_up[c] {
                    self.pi[p] - self.cost[e]
                } else {
                    self.pi[p] + self.cost[e]
                };
                stack.push(c);
            }
        }
    }

    /// Runs to optimality.
    pub fn solve(&mut self) -> Result<()> {
        let limit = 50 * self.cost.len() + 1000;
        while let Some(e) = self.find_entering() {
            self.pivot(e)?;
            if self.pivots > limit {
                return Err(Error::SolverFailure("pivot limit exceeded".into()));
            }
        }
        let real = self.m * self.n;
        if self.flow[real..].iter().any(|&f| f != 0) {
            return Err(Error::SolverFailure("artificial arcs carry flow at optimum".into()));
        }
        Ok(())
    }

    /// Nonbasic real arcs with zero reduced cost at the current basis.
    pub fn zero_reduced_arcs(&self) -> Vec<(usize, usize)> {
        (0..self.m * self.n)
            .filter(|&e| self.state[e] == State::Lower && self.reduced_cost(e) == 0)
            .map(|e| (e / self.n, e % self.n))
            .collect()
    }

    /// Enters the real arc `(i, j)` and returns the new solver together with
    /// the integer flow moved.
    pub fn pivot_on(&self, i: usize, j: usize) -> Result<(Self, i64)> {
        let mut next = self.clone();
        let moved = next.pivot(i * self.n + j)?;
        Ok((next, moved))
    }

    /// Floating point plan carried by the current basis, as `(i, j, mass)`
    /// triples sorted by `(i, j)`, computed from the original masses.
    pub fn plan(&self) -> Vec<(usize, usize, f64)> {
        let root = self.m + self.n;
        let total_supply: f64 = self.supply.iter().sum();
        let total_demand: f64 = self.demand.iter().sum();
        let mut imbalance: Vec<f64> = self
            .supply
            .iter()
            .copied()
            .chain(self.demand.iter().map(|b| -b * total_supply / total_demand))
            .chain(std::iter::once(0.0))
            .collect();
        // leaves first: process nodes by decreasing depth
        let mut order: Vec<usize> = (0..root).collect();
        order.sort_by(|&a, &b| self.depth[b].cmp(&self.depth[a]).then(a.cmp(&b)));
        let mut plan = Vec::new();
        for u in order {
            let e = self.pred[u];
            let p = self.parent[u];
            let carried = if self.pred_up[u] { imbalance[u] } else { -imbalance[u] };
            imbalance[p] += imbalance[u];
            imbalance[u] = 0.0;
            if e < self.m * self.n && carried > 0.0 {
                plan.push((self.source[e], self.target[e] - self.m, carried));
            }
        }
        plan.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        plan
    }

    pub fn basis(&self) -> Vec<(usize, usize)> {
        let mut b: Vec<_> = (0..self.m * self.n)
            .filter(|&e| self.state[e] == State::Tree)
            .map(|e| (e / self.n, e % self.n))
            .collect();
        b.sort();
        b
    }

    /// Integer objective of the current basis in scaled units.
    pub fn scaled_objective(&self) -> i128 {
        (0..self.m * self.n).map(|e| self.cost[e] * self.flow[e] as i128).sum()
    }
}
