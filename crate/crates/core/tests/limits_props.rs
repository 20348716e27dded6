mod common;

use std::sync::Arc;

use wasserlim_core::curvature::{estimate_k, PairGenerator, ENTROPY_TOL};
use wasserlim_core::limits::{
    escaping_mass_family, quantization_uniformity_audit, sequence_cd, sequence_total_variation,
    sequence_wasserstein, Entry, SpaceSequence,
};
use wasserlim_core::spaces::dyadic_interval_space;
use wasserlim_core::DiscreteMeasure;

use common::*;

#[test]
fn escaping_mass_verdicts() {
    let ns = [4, 16, 256, 65536];
    let fam = escaping_mass_family(&ns).unwrap();
    let w2 = sequence_wasserstein(&fam.sequence, &fam.diracs, &fam.escaping, 2.0, 1e-9).unwrap();
    assert!(w2.stabilized);
    assert!(w2.values.iter().all(|v| (v - 1.0).abs() <= 1e-9));
    assert!((w2.limit_estimate - 1.0).abs() <= 1e-9);

    // 1/N_max = 1.5e-5: stabilised at 0 once tol covers it, and not before
    let tol_ok = 2.0 / 256.0;
    let tv = sequence_total_variation(&fam.sequence, &fam.diracs, &fam.escaping, tol_ok).unwrap();
    assert!(tv.stabilized && tv.limit_estimate <= tol_ok);
    let tv_tight = sequence_total_variation(&fam.sequence, &fam.diracs, &fam.escaping, 1e-6).unwrap();
    assert!(!tv_tight.stabilized);

    let w1 = sequence_wasserstein(&fam.sequence, &fam.diracs, &fam.escaping, 1.0, 1e-9).unwrap();
    for (n, v) in ns.iter().zip(&w1.values) {
        assert!((v - (*n as f64).sqrt() / *n as f64).abs() <= 1e-12);
    }
}

#[test]
fn dyadic_w2_refines_toward_the_continuum() {
    let f = |x: f64| 1.0 + x;
    let g = |x: f64| 0.5 + (3.0 * x).sin().powi(2);
    let seq = SpaceSequence::dyadic(2..=8).unwrap();
    let mu = seq.sample_density(f).unwrap();
    let nu = seq.sample_density(g).unwrap();
    let v = sequence_wasserstein(&seq, &mu, &nu, 2.0, 1e-3).unwrap();

    for (level, value) in (2..=8).zip(&v.values) {
        let x = dyadic_coords(level);
        let wa: Vec<f64> = x.iter().map(|&t| f(t)).collect();
        let wb: Vec<f64> = x.iter().map(|&t| g(t)).collect();
        assert!((value - quantile_wasserstein(&x, &wa, &x, &wb, 2.0)).abs() <= 1e-9);
    }
    let x = dyadic_coords(10);
    let proxy = quantile_wasserstein(
        &x,
        &x.iter().map(|&t| f(t)).collect::<Vec<_>>(),
        &x,
        &x.iter().map(|&t| g(t)).collect::<Vec<_>>(),
        2.0,
    );
    let finest = *v.values.last().unwrap();
    let mesh = 1.0 / 256.0;
    assert!((v.limit_estimate - finest).abs() <= mesh);
    assert!((proxy - finest).abs() <= mesh);
    let diffs: Vec<f64> = v.values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    for d in diffs[1..].windows(2) {
        assert!(d[1] < d[0], "{diffs:?}");
    }
}

#[test]
fn quantization_is_uniform_in_level() {
    let audit = quantization_uniformity_audit(&SpaceSequence::dyadic(2..=9).unwrap(), 0.05, 1.0).unwrap();
    assert_eq!(audit.uniform_atoms, 32);
    assert!(audit.rows.iter().all(|r| r.achieved_error <= 0.05));
    assert_eq!(audit.max_covering_k, 17);
}

fn entry(level: u32) -> Entry {
    let space = Arc::new(dyadic_interval_space(level));
    Entry { label: format!("level-{level}"), reference: DiscreteMeasure::uniform(space.clone()), space }
}

#[test]
fn constant_sequence_matches_single_estimate() {
    let gen = PairGenerator::new(12, 7);
    let single = estimate_k(&entry(4).reference, &gen, ENTROPY_TOL).unwrap();
    let seq = SpaceSequence::constant(entry(4), 3).unwrap();
    let cd = sequence_cd(&seq, &gen, 1e-9).unwrap();
    assert!(cd.verdict.values.iter().all(|&k| k == single.k_witnessed));
    assert!(cd.verdict.stabilized);
    assert_eq!(cd.verdict.tail_start, 0);

    let one = sequence_cd(&SpaceSequence::constant(entry(3), 1).unwrap(), &gen, 1e-12).unwrap();
    assert!(one.verdict.stabilized);
}

#[test]
fn dyadic_cd_is_positive_and_settling() {
    let gen = PairGenerator::new(50, 7);
    let seq = SpaceSequence::dyadic(3..=7).unwrap();
    let cd = sequence_cd(&seq, &gen, 0.1).unwrap();
    let pinned = [2.664, 2.274, 2.147, 2.054, 2.018];
    for (k, p) in cd.verdict.values.iter().zip(pinned) {
        assert!((k - p).abs() < 5e-4, "{:?}", cd.verdict.values);
    }
    assert!(cd.verdict.stabilized);
    assert!(cd.verdict.tail_min > 0.0);
}
