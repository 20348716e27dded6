mod common;

use proptest::prelude::*;
use wasserlim_core::spaces::{dyadic_interval_space, graph_metric, validate_metric};
use wasserlim_core::{Error, FiniteMetricSpace};

use common::*;

/// Floyd-Warshall closure of an edge list.
fn floyd(n: usize, edges: &[(usize, usize, f64)]) -> Vec<Vec<f64>> {
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for &(u, v, w) in edges {
        d[u][v] = d[u][v].min(w);
        d[v][u] = d[v][u].min(w);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn graph_metric_is_the_path_metric(seed in any::<u64>(), n in 1usize..15) {
        let mut r = rng(seed);
        let edges = graph_edges(&mut r, n);
        let s = graph_metric(n, &edges).unwrap();
        let d = floyd(n, &edges);
        for &(u, v, w) in &edges {
            prop_assert!(s.dist(u, v) <= w);
        }
        for i in 0..n {
            for j in 0..n {
                prop_assert!((s.dist(i, j) - d[i][j]).abs() <= 1e-12);
            }
        }
        prop_assert!(validate_metric(&s.matrix()).is_ok());
    }

    #[test]
    fn greedy_covering_is_valid_and_monotone(seed in any::<u64>(), n in 1usize..14) {
        let mut r = rng(seed);
        let s = planar_space(&mut r, n);
        let mut last = usize::MAX;
        for eps in [0.5, 1.0, 2.0, 4.0, 8.0, 16.0] {
            let c = s.covering_number(eps).unwrap();
            prop_assert!(s.certifies(&c));
            prop_assert!(c.k <= last);
            prop_assert_eq!(c.centers[0], s.base());
            let exact = s.exact_covering_number(eps / 2.0).unwrap();
            prop_assert!(c.k <= exact.k, "greedy {} exceeds N(eps/2) = {}", c.k, exact.k);
            prop_assert!(s.exact_covering_number(eps).unwrap().k <= c.k);
            last = c.k;
        }
    }

    #[test]
    fn perturbed_metrics_are_rejected(seed in any::<u64>(), n in 3usize..8) {
        let mut r = rng(seed);
        let s = planar_space(&mut r, n);
        let mut m = s.matrix();
        m[0][1] += 1.0;
        prop_assert_eq!(validate_metric(&m).unwrap_err(), Error::Asymmetric(0, 1));
        m[1][0] += 1.0;
        // lengthening one side can only break the triangle inequality
        let r = validate_metric(&m);
        prop_assert!(r.is_ok() || matches!(r, Err(Error::TriangleViolation(..))));
    }
}

#[test]
fn dyadic_spaces() {
    for level in 0..6 {
        let s = dyadic_interval_space(level);
        assert_eq!(s.len(), (1 << level) + 1);
        assert_eq!(s.diameter(None).unwrap(), 1.0);
        assert_eq!(s.mesh().unwrap_or(1.0), 1.0 / (1 << level) as f64);
        assert_eq!(s.base(), 0);
    }
}

#[test]
fn validation_examples() {
    let ok = validate_metric(&[vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]]).unwrap();
    assert_eq!(ok.diameter(None).unwrap(), 2.0);
    let bad = validate_metric(&[vec![0.0, 1.0, 3.0], vec![1.0, 0.0, 1.0], vec![3.0, 1.0, 0.0]]);
    assert_eq!(bad.unwrap_err(), Error::TriangleViolation(0, 2, 1));
    assert_eq!(
        FiniteMetricSpace::from_graph(3, &[(0, 1, 1.0)], 0).unwrap_err(),
        Error::Disconnected(2)
    );
}
