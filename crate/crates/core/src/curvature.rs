//! Relative entropy and synthetic Ricci curvature checks.
//!
//! A space with reference measure `lambda` satisfies CD(K, infinity) when the
//! relative entropy is K-convex along some W2 geodesic between any two
//! absolutely continuous measures. Here this is tested at the midpoint:
//!
//! `H(mid) <= H(nu0)/2 + H(nu1)/2 - K/8 * W2(nu0, nu1)^2`.
//!
//! The midpoint comes from displacement interpolation along an optimal
//! coupling. When the optimal coupling is not unique, the alternative optimal
//! bases found by the solver are also tried and the midpoint of least
//! entropy is kept, since the condition only asks for one good midpoint.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geodesics::{self, MidpointReport, WassersteinPath};
use crate::measures::{seeded_rng, Density, DiscreteMeasure};
use crate::spaces::FiniteMetricSpace;
use crate::transport;
use rand::Rng;

/// Default absolute tolerance on entropy comparisons.
pub const ENTROPY_TOL: f64 = 1e-7;

/// Pairs with W2 below this are skipped when estimating K.
pub const MIN_PAIR_DISTANCE: f64 = 1e-9;

/// Number of optimal couplings tried per midpoint.
const ALTERNATE_COUPLINGS: usize = 8;

/// `H(nu | lambda) = sum_j lambda_j f_j log f_j` with `f = d nu / d lambda`,
/// or `+inf` when `nu` charges a point outside the support of `lambda`.
pub fn relative_entropy(nu: &DiscreteMeasure, lambda: &DiscreteMeasure) -> Result<f64> {
    match Density::of(nu, lambda) {
        Ok(f) => Ok(f.entropy()),
        Err(Error::AbsoluteContinuityFailure(_)) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

/// `sum_j lambda_j phi(f_j)` with `phi(x) = x log x - x + 1`. Agrees with
/// [`relative_entropy`] for probability measures.
pub fn relative_entropy_phi(nu: &DiscreteMeasure, lambda: &DiscreteMeasure) -> Result<f64> {
    match Density::of(nu, lambda) {
        Ok(f) => Ok(f.entropy_phi()),
        Err(Error::AbsoluteContinuityFailure(_)) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

/// Outcome of a midpoint convexity test.
#[derive(Debug, Clone)]
pub struct MidpointCheck {
    pub holds: bool,
    /// `H0/2 + H1/2 - K/8 W2^2 - H(mid)`; the check holds when `slack >= -tol`.
    pub slack: f64,
    pub h0: f64,
    pub h1: f64,
    pub h_mid: f64,
    pub w2: f64,
    pub midpoint: DiscreteMeasure,
    pub report: MidpointReport,
}

impl MidpointCheck {
    /// Right-hand side of the convexity inequality at curvature `k`.
    pub fn rhs(&self, k: f64) -> f64 {
        0.5 * self.h0 + 0.5 * self.h1 - k / 8.0 * self.w2 * self.w2
    }

    pub fn slack_at(&self, k: f64) -> f64 {
        self.rhs(k) - self.h_mid
    }

    /// Largest K for which this midpoint satisfies the inequality exactly.
    pub fn k_bound(&self) -> f64 {
        8.0 * (0.5 * self.h0 + 0.5 * self.h1 - self.h_mid) / (self.w2 * self.w2)
    }
}

/// Midpoint of least relative entropy among the optimal couplings tried,
/// each interpolated with rounding ties toward either endpoint.
fn best_midpoint(
    nu0: &DiscreteMeasure,
    nu1: &DiscreteMeasure,
    lambda: &DiscreteMeasure,
) -> Result<(DiscreteMeasure, MidpointReport, f64)> {
    if !nu0.space().has_geodesic_structure() {
        return Err(Error::NoGeodesicStructure);
    }
    let couplings = transport::optimal_couplings(nu0, nu1, 2.0, ALTERNATE_COUPLINGS)?;
    let mut best: Option<(usize, DiscreteMeasure, f64, f64)> = None;
    for (k, c) in couplings.iter().enumerate() {
        for reversed in [false, true] {
            let (mid, rounding) = geodesics::interpolate_plan(c, 0.5, reversed)?;
            let h = relative_entropy(&mid, lambda)?;
            if best.as_ref().map_or(true, |b| h < b.3) {
                best = Some((k, mid, rounding, h));
            }
        }
    }
    let (k, mid, rounding, h) = best.expect("at least one optimal coupling");
    let (mid, report) = geodesics::midpoint_report(nu0, nu1, &couplings[k], mid, rounding)?;
    Ok((mid, report, h))
}

fn midpoint_check(
    nu0: &DiscreteMeasure,
    nu1: &DiscreteMeasure,
    lambda: &DiscreteMeasure,
    k: f64,
    tol: f64,
) -> Result<MidpointCheck> {
    nu0.check_same_space(lambda)?;
    nu1.check_same_space(lambda)?;
    let h0 = relative_entropy(nu0, lambda)?;
    let h1 = relative_entropy(nu1, lambda)?;
    if !(h0.is_finite() && h1.is_finite()) {
        return Err(Error::InfiniteEntropy);
    }
    let (midpoint, report, h_mid) = best_midpoint(nu0, nu1, lambda)?;
    let w2 = report.w2;
    let mut check = MidpointCheck { holds: false, slack: 0.0, h0, h1, h_mid, w2, midpoint, report };
    check.slack = check.slack_at(k);
    check.holds = check.slack >= -tol;
    Ok(check)
}

/// Midpoint form of CD(K, infinity) for one pair, with the default tolerance.
pub fn cd_midpoint_check(
    nu0: &DiscreteMeasure,
    nu1: &DiscreteMeasure,
    lambda: &DiscreteMeasure,
    k: f64,
) -> Result<MidpointCheck> {
    midpoint_check(nu0, nu1, lambda, k, ENTROPY_TOL)
}

/// Same as [`cd_midpoint_check`] with an explicit tolerance.
pub fn cd_midpoint_check_tol(
    nu0: &DiscreteMeasure,
    nu1: &DiscreteMeasure,
    lambda: &DiscreteMeasure,
    k: f64,
    tol: f64,
) -> Result<MidpointCheck> {
    midpoint_check(nu0, nu1, lambda, k, tol)
}

/// Convexity slack at an arbitrary time `t`, for diagnostics:
/// `(1-t) H0 + t H1 - K t(1-t)/2 W2^2 - H(mu_t)`.
pub fn convexity_slack_at(
    nu0: &DiscreteMeasure,
    nu1: &DiscreteMeasure,
    lambda: &DiscreteMeasure,
    k: f64,
    t: f64,
) -> Result<f64> {
    let h0 = relative_entropy(nu0, lambda)?;
    let h1 = relative_entropy(nu1, lambda)?;
    let (w2, coupling) = transport::wasserstein_p(nu0, nu1, 2.0)?;
    let (mu_t, _) = geodesics::interpolate_coupling(&coupling, t)?;
    let ht = relative_entropy(&mu_t, lambda)?;
    Ok((1.0 - t) * h0 + t * h1 - k * t * (1.0 - t) / 2.0 * w2 * w2 - ht)
}

/// Seeded family of random bounded-density pairs on the support of a
/// reference measure.
///
/// Pair `i` draws from `seeded_rng(seed, i)`. Each endpoint has density
/// proportional to `floor + exp(-(d(c, x) / w)^2)` relative to `lambda`, with
/// the center `c` placed at a fraction `r` of the largest distance from the
/// base point and the width `w` uniform in `[0.1, 0.3]` times that distance.
/// The first fraction is uniform in `[0, 1)` and the second is offset from it
/// by a uniform amount in `[0.25, 0.75)` modulo one, which keeps the two
/// centers at least a quarter of the range apart. Pairs are therefore matched across spaces that share a base
/// point and a coordinate along it, such as the dyadic grids.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairGenerator {
    pub pairs: usize,
    pub seed: u64,
    pub floor: f64,
}

impl PairGenerator {
    pub fn new(pairs: usize, seed: u64) -> Self {
        PairGenerator { pairs, seed, floor: 0.05 }
    }

    fn bump(
        &self,
        rng: &mut impl Rng,
        r: f64,
        lambda: &DiscreteMeasure,
        support: &[usize],
        reach: f64,
    ) -> Result<DiscreteMeasure> {
        let space = lambda.space();
        let width = (0.1 + 0.2 * rng.gen::<f64>()) * reach.max(f64::MIN_POSITIVE);
        let base = space.base();
        let center = support
            .iter()
            .copied()
            .min_by(|&a, &b| {
                let ga = (space.dist(base, a) - r * reach).abs();
                let gb = (space.dist(base, b) - r * reach).abs();
                ga.total_cmp(&gb).then(a.cmp(&b))
            })
            .expect("nonempty support");
        let mut w = vec![0.0; space.len()];
        for &x in support {
            let z = space.dist(center, x) / width;
            w[x] = lambda.weight(x) * (self.floor + (-z * z).exp());
        }
        DiscreteMeasure::new(space.clone(), w)
    }

    /// Pair number `index` on `lambda`.
    pub fn pair(&self, lambda: &DiscreteMeasure, index: usize) -> Result<(DiscreteMeasure, DiscreteMeasure)> {
        let support = lambda.support();
        let space = lambda.space();
        let base = space.base();
        let reach = support.iter().map(|&x| space.dist(base, x)).fold(0.0, f64::max);
        let mut rng = seeded_rng(self.seed, index as u64);
        let r0: f64 = rng.gen();
        let r1 = (r0 + 0.25 + 0.5 * rng.gen::<f64>()).fract();
        let a = self.bump(&mut rng, r0, lambda, &support, reach)?;
        let b = self.bump(&mut rng, r1, lambda, &support, reach)?;
        Ok((a, b))
    }

    pub fn generate(&self, lambda: &DiscreteMeasure) -> Result<Vec<(DiscreteMeasure, DiscreteMeasure)>> {
        (0..self.pairs).map(|i| self.pair(lambda, i)).collect()
    }
}

/// Per-pair record inside a [`CurvatureReport`].
#[derive(Debug, Clone)]
pub struct PairRecord {
    pub index: usize,
    pub h0: f64,
    pub h1: f64,
    pub h_mid: f64,
    pub w2: f64,
    /// `None` when the pair was skipped for having `W2 < 1e-9`.
    pub k_bound: Option<f64>,
    pub midpoint_defect: f64,
}

impl PairRecord {
    pub fn slack_at(&self, k: f64) -> f64 {
        0.5 * self.h0 + 0.5 * self.h1 - k / 8.0 * self.w2 * self.w2 - self.h_mid
    }
}

/// The pair that fixes the witnessed curvature.
#[derive(Debug, Clone)]
pub struct WorstPair {
    pub index: usize,
    pub nu0: DiscreteMeasure,
    pub nu1: DiscreteMeasure,
    pub midpoint: DiscreteMeasure,
    pub lhs: f64,
    pub rhs: f64,
}

/// Largest K consistent with every tested pair.
#[derive(Debug, Clone)]
pub struct CurvatureReport {
    pub k_witnessed: f64,
    pub pairs_tested: usize,
    pub pairs_skipped: usize,
    pub worst_pair: WorstPair,
    pub tolerance: f64,
    pub records: Vec<PairRecord>,
}

/// Estimates K from explicitly supplied pairs.
pub fn estimate_k_from_pairs(
    lambda: &DiscreteMeasure,
    pairs: &[(DiscreteMeasure, DiscreteMeasure)],
    tolerance: f64,
) -> Result<CurvatureReport> {
    let checks: Vec<MidpointCheck> = pairs
        .par_iter()
        .map(|(a, b)| midpoint_check(a, b, lambda, 0.0, tolerance))
        .collect::<Result<_>>()?;
    let mut records = Vec::with_capacity(pairs.len());
    let mut worst: Option<(usize, f64)> = None;
    for (index, c) in checks.iter().enumerate() {
        let k_bound = (c.w2 >= MIN_PAIR_DISTANCE).then(|| c.k_bound());
        if let Some(k) = k_bound {
            if worst.map_or(true, |(_, w)| k < w) {
                worst = Some((index, k));
            }
        }
        records.push(PairRecord {
            index,
            h0: c.h0,
            h1: c.h1,
            h_mid: c.h_mid,
            w2: c.w2,
            k_bound,
            midpoint_defect: c.report.max_defect(),
        });
    }
    let (index, k_witnessed) = worst.ok_or(Error::NoValidPairs)?;
    let c = &checks[index];
    let pairs_tested = records.iter().filter(|r| r.k_bound.is_some()).count();
    Ok(CurvatureReport {
        k_witnessed,
        pairs_tested,
        pairs_skipped: records.len() - pairs_tested,
        worst_pair: WorstPair {
            index,
            nu0: pairs[index].0.clone(),
            nu1: pairs[index].1.clone(),
            midpoint: c.midpoint.clone(),
            lhs: c.h_mid,
            rhs: c.rhs(k_witnessed),
        },
        tolerance,
        records,
    })
}

/// Witnessed curvature over a seeded family of random pairs.
pub fn estimate_k(lambda: &DiscreteMeasure, generator: &PairGenerator, tolerance: f64) -> Result<CurvatureReport> {
    let pairs = generator.generate(lambda)?;
    estimate_k_from_pairs(lambda, &pairs, tolerance)
}

/// Discrete descending slope `max_y max(f(x) - f(y), 0) / d(x, y)`, over graph
/// neighbours when the space has a geodesic structure and over all other
/// points otherwise.
pub fn descending_slope(f: &[f64], space: &FiniteMetricSpace, x: usize) -> f64 {
    let drop = |y: usize, d: f64| if d > 0.0 { (f[x] - f[y]).max(0.0) / d } else { 0.0 };
    match space.neighbors(x) {
        Some(neighbors) => neighbors.iter().map(|&(y, _)| drop(y, space.dist(x, y))).fold(0.0, f64::max),
        None => (0..space.len())
            .filter(|&y| y != x)
            .map(|y| drop(y, space.dist(x, y)))
            .fold(0.0, f64::max),
    }
}

/// Outcome of a log-Sobolev test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogSobolevCheck {
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
}

/// Tests `H(nu | lambda) <= 1/(2K) sum_{f > 0} lambda_j |grad^- f|^2(x_j) / f_j`.
///
/// The discrete slope can make the inequality fail on coarse spaces; the
/// verdict is reported, not enforced.
pub fn log_sobolev_check(nu: &DiscreteMeasure, lambda: &DiscreteMeasure, k: f64) -> Result<LogSobolevCheck> {
    if !(k > 0.0) {
        return Err(Error::NonpositiveK);
    }
    let density = Density::of(nu, lambda)?;
    let f: Vec<f64> = (0..density.values().len()).map(|j| density.value(j)).collect();
    let space = lambda.space();
    let fisher: f64 = (0..f.len())
        .filter(|&j| f[j] > 0.0 && lambda.weight(j) > 0.0)
        .map(|j| {
            let s = descending_slope(&f, space, j);
            lambda.weight(j) * s * s / f[j]
        })
        .sum();
    let lhs = density.entropy();
    let rhs = fisher / (2.0 * k);
    Ok(LogSobolevCheck { holds: lhs <= rhs + ENTROPY_TOL, lhs, rhs })
}

/// Outcome of the sup-norm bound along a path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RajalaCheck {
    pub holds: bool,
    pub max_density: f64,
    pub bound: f64,
    pub diameter: f64,
}

/// Checks `||f_t||_inf <= exp(K^- D^2 / 12) (||f_0||_inf + ||f_1||_inf)` for
/// every interior measure of `path`, where `D` is the diameter of the union of
/// the endpoint supports.
pub fn rajala_bound_check(path: &WassersteinPath, lambda: &DiscreteMeasure, k: f64, tol: f64) -> Result<RajalaCheck> {
    let first = path.measures.first().ok_or(Error::InvalidInput("empty path".into()))?;
    let last = path.measures.last().expect("nonempty");
    let f0 = Density::of(first, lambda)?.sup_norm();
    let f1 = Density::of(last, lambda)?.sup_norm();
    let mut union = first.support();
    union.extend(last.support());
    union.sort_unstable();
    union.dedup();
    let diameter = lambda.space().diameter(Some(&union))?;
    let k_minus = (-k).max(0.0);
    let bound = if k_minus == 0.0 {
        f0 + f1
    } else {
        (k_minus * diameter * diameter / 12.0).exp() * (f0 + f1)
    };
    let mut max_density: f64 = 0.0;
    for m in &path.measures[1..path.measures.len() - 1] {
        max_density = max_density.max(Density::of(m, lambda)?.sup_norm());
    }
    Ok(RajalaCheck { holds: max_density <= bound + tol, max_density, bound, diameter })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::dyadic_interval_space;
    use std::sync::Arc;

    fn line(coords: &[f64]) -> Arc<FiniteMetricSpace> {
        Arc::new(FiniteMetricSpace::line(coords, 0).unwrap())
    }

    #[test]
    fn entropy_examples() {
        let s = line(&[0.0, 1.0, 2.0, 3.0]);
        let lambda = DiscreteMeasure::uniform(s.clone());
        assert_eq!(relative_entropy(&lambda, &lambda).unwrap(), 0.0);
        let d = DiscreteMeasure::dirac(s.clone(), 2).unwrap();
        assert!((relative_entropy(&d, &lambda).unwrap() - 4f64.ln()).abs() < 1e-15);
        assert!((relative_entropy_phi(&d, &lambda).unwrap() - 4f64.ln()).abs() < 1e-15);
        let partial = DiscreteMeasure::uniform_on(s.clone(), &[0, 1]).unwrap();
        assert_eq!(relative_entropy(&d, &partial).unwrap(), f64::INFINITY);
    }

    #[test]
    fn midpoint_check_trivial_cases() {
        let s = Arc::new(dyadic_interval_space(3));
        let lambda = DiscreteMeasure::uniform(s.clone());
        let c = cd_midpoint_check(&lambda, &lambda, &lambda, 5.0).unwrap();
        assert!(c.holds);
        assert!(c.slack.abs() < 1e-12);

        let (a, b) = PairGenerator::new(1, 3).pair(&lambda, 0).unwrap();
        let c = cd_midpoint_check(&a, &b, &lambda, -1e6).unwrap();
        assert!(c.w2 > 0.0);
        assert!(c.holds);

        let partial = DiscreteMeasure::uniform_on(s.clone(), &[0, 1, 2]).unwrap();
        let d = DiscreteMeasure::dirac(s, 8).unwrap();
        assert!(matches!(
            cd_midpoint_check(&d, &partial, &partial, 0.0),
            Err(Error::InfiniteEntropy)
        ));
    }

    #[test]
    fn no_valid_pairs() {
        let s = Arc::new(dyadic_interval_space(2));
        let lambda = DiscreteMeasure::uniform(s);
        let pairs = vec![(lambda.clone(), lambda.clone())];
        assert!(matches!(
            estimate_k_from_pairs(&lambda, &pairs, ENTROPY_TOL),
            Err(Error::NoValidPairs)
        ));
    }

    #[test]
    fn slopes() {
        let s = FiniteMetricSpace::from_matrix(vec![vec![0.0, 2.0], vec![2.0, 0.0]], 0).unwrap();
        assert_eq!(descending_slope(&[1.0, 0.0], &s, 0), 0.5);
        assert_eq!(descending_slope(&[1.0, 0.0], &s, 1), 0.0);
        assert_eq!(descending_slope(&[3.0, 3.0], &s, 0), 0.0);
        let one = FiniteMetricSpace::from_matrix(vec![vec![0.0]], 0).unwrap();
        assert_eq!(descending_slope(&[2.0], &one, 0), 0.0);
    }

    #[test]
    fn log_sobolev_two_points() {
        let s = Arc::new(FiniteMetricSpace::from_matrix(vec![vec![0.0, 1.0], vec![1.0, 0.0]], 0).unwrap());
        let lambda = DiscreteMeasure::uniform(s.clone());
        let nu = DiscreteMeasure::new(s, vec![0.9, 0.1]).unwrap();
        let c = log_sobolev_check(&nu, &lambda, 1.0).unwrap();
        // f = (1.8, 0.2); H = (1.8 ln 1.8 + 0.2 ln 0.2) / 2; slope at x0 is 1.6
        let lhs = 0.5 * (1.8 * 1.8f64.ln() + 0.2 * 0.2f64.ln());
        let rhs = 0.5 * 0.5 * 1.6 * 1.6 / 1.8;
        assert!((c.lhs - lhs).abs() < 1e-14);
        assert!((c.rhs - rhs).abs() < 1e-14);
        assert!(!c.holds);

        let same = log_sobolev_check(&lambda, &lambda, 1.0).unwrap();
        assert_eq!((same.lhs, same.rhs, same.holds), (0.0, 0.0, true));
        assert_eq!(log_sobolev_check(&lambda, &lambda, 0.0), Err(Error::NonpositiveK));

        let one = Arc::new(FiniteMetricSpace::from_matrix(vec![vec![0.0]], 0).unwrap());
        let l1 = DiscreteMeasure::uniform(one);
        let c = log_sobolev_check(&l1, &l1, 2.0).unwrap();
        assert_eq!((c.lhs, c.rhs), (0.0, 0.0));
    }

    #[test]
    fn rajala_trivial() {
        let s = Arc::new(dyadic_interval_space(3));
        let lambda = DiscreteMeasure::uniform(s);
        let path = geodesics::displacement_path(&lambda, &lambda, &[0.0, 0.5, 1.0]).unwrap();
        let r = rajala_bound_check(&path, &lambda, -2.0, 1e-9).unwrap();
        assert!(r.holds);
        assert!(r.bound >= 2.0);
        assert!((r.max_density - 1.0).abs() < 1e-12);
        let r = rajala_bound_check(&path, &lambda, 3.0, 1e-9).unwrap();
        assert_eq!(r.bound, 2.0);
    }

    #[test]
    fn general_t_matches_midpoint() {
        let s = Arc::new(dyadic_interval_space(5));
        let lambda = DiscreteMeasure::uniform(s);
        let (a, b) = PairGenerator::new(1, 11).pair(&lambda, 0).unwrap();
        let c = cd_midpoint_check(&a, &b, &lambda, 0.0).unwrap();
        let s_half = convexity_slack_at(&a, &b, &lambda, 0.0, 0.5).unwrap();
        if !c.report.possibly_non_unique {
            assert!((s_half - c.slack).abs() < 1e-12);
        }
    }
}
