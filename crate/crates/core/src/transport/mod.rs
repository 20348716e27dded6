//! Exact p-Wasserstein distances and optimal couplings.
//!
//! The general solver is a network simplex over the bipartite graph between
//! the two supports. Uniform clouds of equal size can also be matched by an
//! assignment solver, and small instances can be checked against a
//! vertex-enumeration oracle.

mod assignment;
mod brute_force;
mod network_simplex;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::measures::{DiscreteMeasure, UniformCloud};
use crate::spaces::FiniteMetricSpace;

pub use assignment::solve_assignment;
pub use brute_force::{candidate_bases, enumerate_min_cost, MAX_BASES};
pub use network_simplex::{scaled_cost, NetworkSimplex, COST_SCALE};

/// `d^p`, with integer exponents 1, 2, 3 evaluated by multiplication.
#[inline]
pub fn pow_p(d: f64, p: f64) -> f64 {
    if p == 1.0 {
        d
    } else if p == 2.0 {
        d * d
    } else if p == 3.0 {
        d * d * d
    } else {
        d.powf(p)
    }
}

fn check_p(p: f64) -> Result<()> {
    if p.is_finite() && p >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("p must be a finite real >= 1, got {p}")))
    }
}

/// A transport plan between two measures on a shared space.
#[derive(Debug, Clone)]
pub struct Coupling {
    pub row_space: Arc<FiniteMetricSpace>,
    pub col_space: Arc<FiniteMetricSpace>,
    /// Nonzero entries `(x, y, mass)` in point ids, sorted by `(x, y)`.
    pub plan: Vec<(usize, usize, f64)>,
    /// `(sum gamma d^p)^(1/p)`.
    pub cost_p: f64,
    pub p: f64,
    /// Some nonbasic arc had zero reduced cost at the optimum, so another
    /// optimal basis may exist.
    pub possibly_non_unique: bool,
}

impl Coupling {
    pub fn dense(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.col_space.len()]; self.row_space.len()];
        for &(i, j, x) in &self.plan {
            m[i][j] += x;
        }
        m
    }

    pub fn row_sums(&self) -> Vec<f64> {
        let mut r = vec![0.0; self.row_space.len()];
        for &(i, _, x) in &self.plan {
            r[i] += x;
        }
        r
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.col_space.len()];
        for &(_, j, x) in &self.plan {
            c[j] += x;
        }
        c
    }
}

/// Optimal permutation between two uniform clouds.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub sigma: Vec<usize>,
    pub cost_p: f64,
}

struct Reduced {
    rows: Vec<usize>,
    cols: Vec<usize>,
    supply: Vec<f64>,
    demand: Vec<f64>,
    cost: Vec<f64>,
}

fn reduce(mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: f64) -> Result<Reduced> {
    check_p(p)?;
    mu.check_same_space(nu)?;
    let space = mu.space();
    let rows = mu.support();
    let cols = nu.support();
    let supply = rows.iter().map(|&i| mu.weight(i)).collect();
    let demand = cols.iter().map(|&j| nu.weight(j)).collect();
    let mut cost = Vec::with_capacity(rows.len() * cols.len());
    for &i in &rows {
        for &j in &cols {
            cost.push(pow_p(space.dist(i, j), p));
        }
    }
    Ok(Reduced { rows, cols, supply, demand, cost })
}

fn coupling_from(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    r: &Reduced,
    solver: &NetworkSimplex,
    p: f64,
) -> Coupling {
    let plan: Vec<(usize, usize, f64)> = solver
        .plan()
        .into_iter()
        .map(|(i, j, x)| (r.rows[i], r.cols[j], x))
        .collect();
    let space = mu.space();
    let total: f64 = plan.iter().map(|&(i, j, x)| x * pow_p(space.dist(i, j), p)).sum();
    Coupling {
        row_space: mu.space().clone(),
        col_space: nu.space().clone(),
        plan,
        cost_p: total.max(0.0).powf(1.0 / p),
        p,
        possibly_non_unique: !solver.zero_reduced_arcs().is_empty(),
    }
}

fn solved(r: &Reduced) -> Result<NetworkSimplex> {
    let mut solver = NetworkSimplex::new(&r.supply, &r.demand, &r.cost)?;
    solver.solve()?;
    Ok(solver)
}

/// Exact `W_p(mu, nu)` and an optimal coupling. Deterministic.
pub fn wasserstein_p(mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: f64) -> Result<(f64, Coupling)> {
    let r = reduce(mu, nu, p)?;
    let solver = solved(&r)?;
    let c = coupling_from(mu, nu, &r, &solver, p);
    Ok((c.cost_p, c))
}

/// The optimal coupling followed by up to `limit - 1` distinct alternative
/// optimal couplings, each obtained by one pivot on a zero reduced cost arc.
pub fn optimal_couplings(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    p: f64,
    limit: usize,
) -> Result<Vec<Coupling>> {
    let r = reduce(mu, nu, p)?;
    let solver = solved(&r)?;
    let first = coupling_from(mu, nu, &r, &solver, p);
    let target = solver.scaled_objective();
    let mut out = vec![first];
    for (i, j) in solver.zero_reduced_arcs() {
        if out.len() >= limit {
            break;
        }
        let (alt, moved) = solver.pivot_on(i, j)?;
        if moved == 0 || alt.scaled_objective() != target {
            continue;
        }
        let c = coupling_from(mu, nu, &r, &alt, p);
        if out.iter().all(|o| o.plan != c.plan) {
            out.push(c);
        }
    }
    Ok(out)
}

/// `W_p` between two uniform clouds of equal size via an optimal permutation.
///
/// The optimal coupling between two `N`-atom uniform clouds can always be
/// taken to be a permutation, since permutation matrices are the vertices of
/// the doubly stochastic polytope.
pub fn assignment_wasserstein(a: &UniformCloud, b: &UniformCloud, p: f64) -> Result<(f64, Assignment)> {
    check_p(p)?;
    if !crate::measures::same_space(a.space(), b.space()) {
        return Err(Error::SpaceMismatch);
    }
    if a.len() != b.len() {
        return Err(Error::SizeMismatch(a.len(), b.len()));
    }
    let n = a.len();
    let space = a.space();
    let mut cost = Vec::with_capacity(n * n);
    for &x in a.atoms() {
        for &y in b.atoms() {
            cost.push(pow_p(space.dist(x, y), p));
        }
    }
    let sigma = solve_assignment(n, &cost)?;
    let total: f64 = sigma.iter().enumerate().map(|(i, &j)| cost[i * n + j]).sum();
    let cost_p = (total / n as f64).powf(1.0 / p);
    Ok((cost_p, Assignment { sigma, cost_p }))
}

/// `W_p` by exhaustive vertex enumeration; a slow test oracle.
pub fn brute_force_wasserstein(mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: f64) -> Result<f64> {
    let r = reduce(mu, nu, p)?;
    let total = enumerate_min_cost(&r.supply, &r.demand, &r.cost)?;
    Ok(total.max(0.0).powf(1.0 / p))
}

/// Nearest-atom map onto a finite cloud and its pushforward.
#[derive(Debug, Clone)]
pub struct Projection {
    /// `map[x]` is the image of each `x` in the support of the source measure.
    pub map: Vec<Option<usize>>,
    pub pushforward: DiscreteMeasure,
    /// `(int d(x, tau(x))^p dmu)^(1/p)`.
    pub cost: f64,
}

/// Sends every point of `supp(mu)` to its nearest atom of `cloud`, ties going
/// to the atom with the lowest point id.
///
/// For any cloud, `W_p(mu, pushforward) <= cost <= W_p(mu, cloud)`.
pub fn nearest_atom_projection(mu: &DiscreteMeasure, cloud: &DiscreteMeasure, p: f64) -> Result<Projection> {
    check_p(p)?;
    mu.check_same_space(cloud)?;
    let atoms = cloud.support();
    let space = mu.space();
    let mut map = vec![None; space.len()];
    let mut push = vec![0.0; space.len()];
    let mut total = 0.0;
    for x in mu.support() {
        let mut best = atoms[0];
        let mut best_cost = pow_p(space.dist(x, best), p);
        for &y in &atoms[1..] {
            let c = pow_p(space.dist(x, y), p);
            if c < best_cost {
                best = y;
                best_cost = c;
            }
        }
        map[x] = Some(best);
        push[best] += mu.weight(x);
        total += mu.weight(x) * best_cost;
    }
    Ok(Projection {
        map,
        pushforward: DiscreteMeasure::new(space.clone(), push)?,
        cost: total.powf(1.0 / p),
    })
}

/// `D * TV(mu, nu)^(1/p)`, where `D` is the diameter of the union of the supports.
///
/// This bounds `W_p(mu, nu)` for every `p >= 1`. The linear form `D * TV`
/// is only valid at `p = 1`: two points at distance `sqrt(N)` carrying
/// `delta_0` and `(1 - 1/N) delta_0 + (1/N) delta_sqrt(N)` have `W_2 = 1` but
/// `D * TV = N^(-1/2)`.
pub fn total_variation_bound(mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: f64) -> Result<f64> {
    check_p(p)?;
    let tv = crate::measures::total_variation(mu, nu)?;
    let mut union = mu.support();
    union.extend(nu.support());
    union.sort_unstable();
    union.dedup();
    let d = mu.space().diameter(Some(&union))?;
    Ok(d * tv.powf(1.0 / p))
}

/// Error budget `((D^p + 1)^(1/p) + D + 1) * eps` for lifting a measure of
/// diameter below `D` through an `eps`-accurate nearest-atom projection.
pub fn lifting_error_bound(diameter: f64, p: f64, eps: f64) -> f64 {
    ((pow_p(diameter, p) + 1.0).powf(1.0 / p) + diameter + 1.0) * eps
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(coords: &[f64]) -> Arc<FiniteMetricSpace> {
        Arc::new(FiniteMetricSpace::line(coords, 0).unwrap())
    }

    #[test]
    fn diracs() {
        let s = line(&[0.0, 2.5]);
        let a = DiscreteMeasure::dirac(s.clone(), 0).unwrap();
        let b = DiscreteMeasure::dirac(s, 1).unwrap();
        for p in [1.0, 2.0, 3.5] {
            let (w, c) = wasserstein_p(&a, &b, p).unwrap();
            assert!((w - 2.5).abs() < 1e-12);
            assert_eq!(c.plan, vec![(0, 1, 1.0)]);
            assert!((brute_force_wasserstein(&a, &b, p).unwrap() - 2.5).abs() < 1e-12);
        }
        assert_eq!(wasserstein_p(&a, &a, 2.0).unwrap().0, 0.0);
        assert_eq!(brute_force_wasserstein(&a, &a, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn escaping_mass_value() {
        for n in [4.0f64, 100.0, 1e4] {
            let s = line(&[0.0, n.sqrt()]);
            let d0 = DiscreteMeasure::dirac(s.clone(), 0).unwrap();
            let nu = DiscreteMeasure::new(s, vec![1.0 - 1.0 / n, 1.0 / n]).unwrap();
            let (w, _) = wasserstein_p(&d0, &nu, 2.0).unwrap();
            assert!((w - 1.0).abs() < 1e-9, "N = {n}: {w}");
        }
    }

    #[test]
    fn shifted_uniform_pair() {
        let s = line(&[0.0, 1.0, 2.0]);
        let a = DiscreteMeasure::uniform_on(s.clone(), &[0, 1]).unwrap();
        let b = DiscreteMeasure::uniform_on(s, &[1, 2]).unwrap();
        let (w, _) = wasserstein_p(&a, &b, 1.0).unwrap();
        assert!((w - 1.0).abs() < 1e-12);
        assert!((brute_force_wasserstein(&a, &b, 1.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cloud_assignment() {
        let s = line(&[0.0, 1.0, 2.0, 3.0]);
        let a = UniformCloud::new(s.clone(), vec![0, 2]).unwrap();
        let b = UniformCloud::new(s.clone(), vec![1, 3]).unwrap();
        let (w, asg) = assignment_wasserstein(&a, &b, 2.0).unwrap();
        assert_eq!(asg.sigma, vec![0, 1]);
        assert!((w - 1.0).abs() < 1e-12);

        let one = UniformCloud::new(s.clone(), vec![3]).unwrap();
        let zero = UniformCloud::new(s.clone(), vec![0]).unwrap();
        assert_eq!(assignment_wasserstein(&zero, &one, 1.0).unwrap().0, 3.0);
        assert_eq!(assignment_wasserstein(&a, &a, 3.0).unwrap().0, 0.0);
        assert_eq!(assignment_wasserstein(&a, &one, 1.0), Err(Error::SizeMismatch(2, 1)));

        let uneven = DiscreteMeasure::new(s, vec![0.3, 0.7, 0.0, 0.0]).unwrap();
        assert_eq!(UniformCloud::from_measure(&uneven, 2), Err(Error::NotUniformCloud));
    }

    #[test]
    fn projection_example() {
        let s = line(&[0.0, 0.4, 1.0]);
        let mu = DiscreteMeasure::uniform(s.clone());
        let cloud = DiscreteMeasure::uniform_on(s.clone(), &[0, 2]).unwrap();
        let proj = nearest_atom_projection(&mu, &cloud, 2.0).unwrap();
        assert_eq!(proj.map, vec![Some(0), Some(0), Some(2)]);
        assert!((proj.pushforward.weight(0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((proj.pushforward.weight(2) - 1.0 / 3.0).abs() < 1e-15);
        assert!((proj.cost - (0.16f64 / 3.0).sqrt()).abs() < 1e-15);
        let (w_push, _) = wasserstein_p(&mu, &proj.pushforward, 2.0).unwrap();
        let (w_cloud, _) = wasserstein_p(&mu, &cloud, 2.0).unwrap();
        assert!(w_push <= proj.cost + 1e-12 && proj.cost <= w_cloud + 1e-12);

        let single = DiscreteMeasure::dirac(s.clone(), 1).unwrap();
        let proj = nearest_atom_projection(&mu, &single, 1.0).unwrap();
        assert_eq!(proj.pushforward, single);
        assert!((proj.cost - (0.4 + 0.0 + 0.6) / 3.0).abs() < 1e-15);

        let proj = nearest_atom_projection(&mu, &mu, 2.0).unwrap();
        assert_eq!(proj.cost, 0.0);
        assert_eq!(proj.pushforward, mu);
    }

    #[test]
    fn projection_ties_go_to_lowest_atom() {
        let s = line(&[0.0, 1.0, 2.0]);
        let mu = DiscreteMeasure::dirac(s.clone(), 1).unwrap();
        let cloud = DiscreteMeasure::uniform_on(s, &[2, 0]).unwrap();
        let proj = nearest_atom_projection(&mu, &cloud, 2.0).unwrap();
        assert_eq!(proj.map[1], Some(0));
    }

    #[test]
    fn space_mismatch() {
        let a = DiscreteMeasure::uniform(line(&[0.0, 1.0]));
        let b = DiscreteMeasure::uniform(line(&[0.0, 2.0]));
        assert!(matches!(wasserstein_p(&a, &b, 1.0), Err(Error::SpaceMismatch)));
        assert!(matches!(wasserstein_p(&a, &a, 0.5), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn lifting_bound_formula() {
        assert_eq!(lifting_error_bound(0.0, 2.0, 0.1), 0.2);
        assert!((lifting_error_bound(2.0, 1.0, 0.5) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn alternates_share_the_optimal_cost() {
        // symmetric square: both matchings of the diagonal are optimal for p = 1
        let s = Arc::new(
            FiniteMetricSpace::from_matrix(
                vec![
                    vec![0.0, 1.0, 1.0, 1.0],
                    vec![1.0, 0.0, 1.0, 1.0],
                    vec![1.0, 1.0, 0.0, 1.0],
                    vec![1.0, 1.0, 1.0, 0.0],
                ],
                0,
            )
            .unwrap(),
        );
        let a = DiscreteMeasure::uniform_on(s.clone(), &[0, 1]).unwrap();
        let b = DiscreteMeasure::uniform_on(s, &[2, 3]).unwrap();
        let all = optimal_couplings(&a, &b, 1.0, 4).unwrap();
        assert!(all.len() >= 2);
        assert!(all[0].possibly_non_unique);
        for c in &all {
            assert!((c.cost_p - 1.0).abs() < 1e-12);
        }
    }
}
