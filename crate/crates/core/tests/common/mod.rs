#![allow(dead_code)]

use std::sync::Arc;

use rand::Rng;
use wasserlim_core::measures::seeded_rng;
use wasserlim_core::{DiscreteMeasure, FiniteMetricSpace};

pub type Rng8 = rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> Rng8 {
    seeded_rng(seed, 99)
}

/// `n` points in the square `[0, 10]^2` with the Euclidean metric.
pub fn planar_space(rng: &mut Rng8, n: usize) -> Arc<FiniteMetricSpace> {
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0))).collect();
    let m = pts
        .iter()
        .map(|a| pts.iter().map(|b| (a.0 - b.0).hypot(a.1 - b.1)).collect())
        .collect();
    Arc::new(FiniteMetricSpace::from_matrix(m, 0).unwrap())
}

/// Random connected weighted graph: a random tree plus a few chords.
pub fn graph_edges(rng: &mut Rng8, n: usize) -> Vec<(usize, usize, f64)> {
    let mut edges: Vec<(usize, usize, f64)> =
        (1..n).map(|v| (rng.gen_range(0..v), v, rng.gen_range(0.1..2.0))).collect();
    for _ in 0..n {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v {
            edges.push((u, v, rng.gen_range(0.1..2.0)));
        }
    }
    edges
}

pub fn graph_space(rng: &mut Rng8, n: usize) -> Arc<FiniteMetricSpace> {
    let edges = graph_edges(rng, n);
    Arc::new(FiniteMetricSpace::from_graph(n, &edges, 0).unwrap())
}

/// Random weights with roughly `zeros` of the entries set to zero.
pub fn measure(rng: &mut Rng8, space: &Arc<FiniteMetricSpace>, zeros: f64) -> DiscreteMeasure {
    let n = space.len();
    let mut w: Vec<f64> = (0..n)
        .map(|_| if rng.gen::<f64>() < zeros { 0.0 } else { rng.gen_range(0.01..1.0) })
        .collect();
    let k = rng.gen_range(0..n);
    w[k] += 0.5;
    DiscreteMeasure::new(space.clone(), w).unwrap()
}

/// Measure with exactly `k` support points chosen at random.
pub fn measure_with_support(rng: &mut Rng8, space: &Arc<FiniteMetricSpace>, k: usize) -> DiscreteMeasure {
    let n = space.len();
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.gen_range(i..n);
        idx.swap(i, j);
    }
    let mut w = vec![0.0; n];
    for &i in &idx[..k] {
        w[i] = rng.gen_range(0.05..1.0);
    }
    DiscreteMeasure::new(space.clone(), w).unwrap()
}

/// `W_p` between measures on the real line, integrating
/// `|F^-1(u) - G^-1(u)|^p` over the merged quantile breakpoints.
pub fn quantile_wasserstein(xa: &[f64], wa: &[f64], xb: &[f64], wb: &[f64], p: f64) -> f64 {
    let cdf = |x: &[f64], w: &[f64]| {
        let total: f64 = w.iter().sum();
        let mut v: Vec<(f64, f64)> = x.iter().zip(w).filter(|(_, w)| **w > 0.0).map(|(x, w)| (*x, *w)).collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut c = 0.0;
        v.into_iter()
            .map(|(x, w)| {
                c += w / total;
                (x, c)
            })
            .collect::<Vec<_>>()
    };
    let a = cdf(xa, wa);
    let b = cdf(xb, wb);
    let quantile = |f: &[(f64, f64)], u: f64| f.iter().find(|(_, c)| *c > u).unwrap_or(f.last().unwrap()).0;
    let mut cuts: Vec<f64> = a.iter().chain(&b).map(|(_, c)| c.min(1.0)).collect();
    cuts.push(0.0);
    cuts.sort_by(f64::total_cmp);
    let acc: f64 = cuts
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            (w[1] - w[0]) * (quantile(&a, mid) - quantile(&b, mid)).abs().powf(p)
        })
        .sum();
    acc.powf(1.0 / p)
}

/// Coordinates of the dyadic grid at `level`.
pub fn dyadic_coords(level: u32) -> Vec<f64> {
    let n = 1usize << level;
    (0..=n).map(|i| i as f64 / n as f64).collect()
}
