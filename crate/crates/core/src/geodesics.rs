//! Displacement interpolation on graph metrics.
//!
//! Each coupled pair `(x, y)` of an optimal W2 coupling is moved along a
//! vertex shortest path, and the interpolated mass is placed at the path
//! vertex closest to the exact fractional position. The rounding this causes
//! is always reported.

use crate::error::{Error, Result};
use crate::measures::DiscreteMeasure;
use crate::spaces::{FiniteMetricSpace, METRIC_TOL};
use crate::transport::{self, Coupling};

/// Vertex sequence of the lexicographically smallest shortest path from `x`
/// to `y`, with cumulative distances from `x`.
pub fn shortest_path(space: &FiniteMetricSpace, x: usize, y: usize) -> Result<Vec<(usize, f64)>> {
    if x >= space.len() || y >= space.len() {
        return Err(Error::InvalidInput("point out of range".into()));
    }
    let total = space.dist(x, y);
    let mut path = vec![(x, 0.0)];
    let mut u = x;
    let mut s = 0.0;
    while u != y {
        let neighbors = space.neighbors(u).ok_or(Error::NoGeodesicStructure)?;
        let &(w, len) = neighbors
            .iter()
            .find(|&&(w, len)| s + len + space.dist(w, y) <= total + METRIC_TOL)
            .ok_or_else(|| Error::SolverFailure("no shortest-path successor".into()))?;
        s += len;
        u = w;
        path.push((u, s));
    }
    Ok(path)
}

/// A vertex on a shortest `x`-`y` path nearest to the point at fraction `t`,
/// with its rounding defect `|d(x, z) - t d(x, y)|`. Ties go toward `x`.
pub fn point_interpolate(space: &FiniteMetricSpace, x: usize, y: usize, t: f64) -> Result<(usize, f64)> {
    if !space.has_geodesic_structure() {
        return Err(Error::NoGeodesicStructure);
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidInput(format!("t = {t} outside [0, 1]")));
    }
    if t == 0.0 {
        return Ok((x, 0.0));
    }
    if t == 1.0 {
        return Ok((y, 0.0));
    }
    let target = t * space.dist(x, y);
    let path = shortest_path(space, x, y)?;
    let mut best = path[0].0;
    let mut best_gap = (path[0].1 - target).abs();
    for &(v, s) in &path[1..] {
        let gap = (s - target).abs();
        if gap < best_gap - 1e-12 {
            best = v;
            best_gap = gap;
        }
    }
    Ok((best, best_gap))
}

/// Pushes the coupling through the interpolation map at time `t`.
/// Returns the interpolated measure and the largest vertex rounding.
pub fn interpolate_coupling(coupling: &Coupling, t: f64) -> Result<(DiscreteMeasure, f64)> {
    interpolate_plan(coupling, t, false)
}

/// As [`interpolate_coupling`]; with `reversed` each pair is walked from its
/// target back to its source, so rounding ties go toward the target instead.
pub fn interpolate_plan(coupling: &Coupling, t: f64, reversed: bool) -> Result<(DiscreteMeasure, f64)> {
    let space = &coupling.row_space;
    let mut w = vec![0.0; space.len()];
    let mut rounding: f64 = 0.0;
    for &(x, y, m) in &coupling.plan {
        let (z, r) = if reversed {
            point_interpolate(space, y, x, 1.0 - t)?
        } else {
            point_interpolate(space, x, y, t)?
        };
        w[z] += m;
        rounding = rounding.max(r);
    }
    Ok((DiscreteMeasure::new(space.clone(), w)?, rounding))
}

/// Diagnostics attached to a computed midpoint.
#[derive(Debug, Clone)]
pub struct MidpointReport {
    pub w2: f64,
    /// `|W2(mu0, mid) - W2(mu0, mu1) / 2|`
    pub left_defect: f64,
    /// `|W2(mid, mu1) - W2(mu0, mu1) / 2|`
    pub right_defect: f64,
    pub rounding: f64,
    pub possibly_non_unique: bool,
}

impl MidpointReport {
    pub fn max_defect(&self) -> f64 {
        self.left_defect.max(self.right_defect)
    }
}

fn require_geodesic(mu0: &DiscreteMeasure, mu1: &DiscreteMeasure) -> Result<()> {
    mu0.check_same_space(mu1)?;
    if mu0.space().has_geodesic_structure() {
        Ok(())
    } else {
        Err(Error::NoGeodesicStructure)
    }
}

/// Midpoint built from a given W2 coupling between `mu0` and `mu1`.
pub fn midpoint_from_coupling(
    mu0: &DiscreteMeasure,
    mu1: &DiscreteMeasure,
    coupling: &Coupling,
) -> Result<(DiscreteMeasure, MidpointReport)> {
    require_geodesic(mu0, mu1)?;
    let (mid, rounding) = interpolate_coupling(coupling, 0.5)?;
    midpoint_report(mu0, mu1, coupling, mid, rounding)
}

/// Defect report for a candidate midpoint `mid` of `mu0` and `mu1`.
pub fn midpoint_report(
    mu0: &DiscreteMeasure,
    mu1: &DiscreteMeasure,
    coupling: &Coupling,
    mid: DiscreteMeasure,
    rounding: f64,
) -> Result<(DiscreteMeasure, MidpointReport)> {
    let half = 0.5 * coupling.cost_p;
    let (left, _) = transport::wasserstein_p(mu0, &mid, 2.0)?;
    let (right, _) = transport::wasserstein_p(&mid, mu1, 2.0)?;
    let report = MidpointReport {
        w2: coupling.cost_p,
        left_defect: (left - half).abs(),
        right_defect: (right - half).abs(),
        rounding,
        possibly_non_unique: coupling.possibly_non_unique,
    };
    Ok((mid, report))
}

/// W2 midpoint by displacement interpolation along the solver's optimal coupling.
pub fn w2_midpoint(mu0: &DiscreteMeasure, mu1: &DiscreteMeasure) -> Result<(DiscreteMeasure, MidpointReport)> {
    require_geodesic(mu0, mu1)?;
    let (_, coupling) = transport::wasserstein_p(mu0, mu1, 2.0)?;
    midpoint_from_coupling(mu0, mu1, &coupling)
}

/// Discretised W2 geodesic.
#[derive(Debug, Clone)]
pub struct WassersteinPath {
    pub times: Vec<f64>,
    pub measures: Vec<DiscreteMeasure>,
    pub endpoints_cost: f64,
    pub coupling_used: Coupling,
    /// `(s, t, |W2(mu_s, mu_t) - |s - t| W2(mu_0, mu_1)|)` for every grid pair.
    pub speed_defects: Vec<(f64, f64, f64)>,
    pub rounding: f64,
}

impl WassersteinPath {
    pub fn max_speed_defect(&self) -> f64 {
        self.speed_defects.iter().map(|d| d.2).fold(0.0, f64::max)
    }
}

/// Interpolates every coupled pair at each grid time and measures how far
/// the result is from constant speed.
pub fn displacement_path(mu0: &DiscreteMeasure, mu1: &DiscreteMeasure, grid: &[f64]) -> Result<WassersteinPath> {
    require_geodesic(mu0, mu1)?;
    let mut times = grid.to_vec();
    if times.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(Error::InvalidInput("grid times must lie in [0, 1]".into()));
    }
    times.sort_by(f64::total_cmp);
    times.dedup();
    if times.first() != Some(&0.0) || times.last() != Some(&1.0) {
        return Err(Error::InvalidInput("grid must contain 0 and 1".into()));
    }
    let (w, coupling) = transport::wasserstein_p(mu0, mu1, 2.0)?;
    let mut measures = Vec::with_capacity(times.len());
    let mut rounding: f64 = 0.0;
    for &t in &times {
        if t == 0.0 {
            measures.push(mu0.clone());
        } else if t == 1.0 {
            measures.push(mu1.clone());
        } else {
            let (m, r) = interpolate_coupling(&coupling, t)?;
            rounding = rounding.max(r);
            measures.push(m);
        }
    }
    let mut speed_defects = Vec::new();
    for a in 0..times.len() {
        for b in a + 1..times.len() {
            let (d, _) = transport::wasserstein_p(&measures[a], &measures[b], 2.0)?;
            speed_defects.push((times[a], times[b], (d - (times[b] - times[a]) * w).abs()));
        }
    }
    Ok(WassersteinPath {
        times,
        measures,
        endpoints_cost: w,
        coupling_used: coupling,
        speed_defects,
        rounding,
    })
}
