//! Shared fixtures for the benchmarks.

use std::sync::Arc;

use rand::Rng;
use wasserlim_core::measures::seeded_rng;
use wasserlim_core::{DiscreteMeasure, FiniteMetricSpace, UniformCloud};

/// `n` seeded points in the square `[0, 10]^2` with the Euclidean metric.
pub fn planar_space(n: usize, seed: u64) -> Arc<FiniteMetricSpace> {
    let mut rng = seeded_rng(seed, 0);
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0))).collect();
    let m = pts
        .iter()
        .map(|a| pts.iter().map(|b| (a.0 - b.0).hypot(a.1 - b.1)).collect())
        .collect();
    Arc::new(FiniteMetricSpace::from_matrix(m, 0).expect("euclidean metric"))
}

/// A seeded measure with full support on `space`.
pub fn random_measure(space: &Arc<FiniteMetricSpace>, seed: u64) -> DiscreteMeasure {
    let mut rng = seeded_rng(seed, 1);
    let w = (0..space.len()).map(|_| rng.gen_range(0.01..1.0)).collect();
    DiscreteMeasure::new(space.clone(), w).expect("positive weights")
}

/// A seeded cloud of `n` atoms on `space`.
pub fn random_cloud(space: &Arc<FiniteMetricSpace>, n: usize, seed: u64) -> UniformCloud {
    let mut rng = seeded_rng(seed, 2);
    let atoms = (0..n).map(|_| rng.gen_range(0..space.len())).collect();
    UniformCloud::new(space.clone(), atoms).expect("atoms in range")
}
