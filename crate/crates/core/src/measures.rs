//! Finitely supported probability measures and densities.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::spaces::{CoveringCertificate, FiniteMetricSpace};
use crate::transport;

/// Tolerance on total mass after normalisation.
pub const MASS_TOL: f64 = 1e-12;

/// Hard cap on the number of atoms a quantization may use.
pub const MAX_CLOUD_ATOMS: usize = 1_000_000;

/// A probability measure `sum_j w_j delta_{x_j}` on a finite metric space.
#[derive(Debug, Clone)]
pub struct DiscreteMeasure {
    space: Arc<FiniteMetricSpace>,
    weights: Vec<f64>,
    defect: f64,
}

impl PartialEq for DiscreteMeasure {
    fn eq(&self, other: &Self) -> bool {
        same_space(&self.space, &other.space) && self.weights == other.weights
    }
}

pub(crate) fn same_space(a: &Arc<FiniteMetricSpace>, b: &Arc<FiniteMetricSpace>) -> bool {
    Arc::ptr_eq(a, b) || a.same_metric(b)
}

impl DiscreteMeasure {
    /// Builds a measure from nonnegative weights, renormalising to total mass one.
    ///
    /// The pre-normalisation defect `sum(w) - 1` is kept for diagnostics.
    pub fn new(space: Arc<FiniteMetricSpace>, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != space.len() {
            return Err(Error::SizeMismatch(weights.len(), space.len()));
        }
        if let Some(j) = weights.iter().position(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidInput(format!("weight {j} is negative or not finite")));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::ZeroMass);
        }
        let weights = weights.into_iter().map(|w| w / total).collect();
        Ok(DiscreteMeasure { space, weights, defect: total - 1.0 })
    }

    pub fn dirac(space: Arc<FiniteMetricSpace>, x: usize) -> Result<Self> {
        if x >= space.len() {
            return Err(Error::InvalidInput(format!("point {x} out of range")));
        }
        let mut w = vec![0.0; space.len()];
        w[x] = 1.0;
        Self::new(space, w)
    }

    pub fn uniform(space: Arc<FiniteMetricSpace>) -> Self {
        let n = space.len();
        Self::new(space, vec![1.0; n]).expect("uniform weights are valid")
    }

    /// Uniform measure on the listed points; repeated points count repeatedly.
    pub fn uniform_on(space: Arc<FiniteMetricSpace>, points: &[usize]) -> Result<Self> {
        let mut w = vec![0.0; space.len()];
        for &x in points {
            *w.get_mut(x)
                .ok_or_else(|| Error::InvalidInput(format!("point {x} out of range")))? += 1.0;
        }
        Self::new(space, w)
    }

    pub fn space(&self) -> &Arc<FiniteMetricSpace> {
        &self.space
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, x: usize) -> f64 {
        self.weights[x]
    }

    pub fn normalization_defect(&self) -> f64 {
        self.defect
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.weights.len()).filter(|&j| self.weights[j] > 0.0).collect()
    }

    pub fn check_same_space(&self, other: &Self) -> Result<()> {
        if same_space(&self.space, &other.space) {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }

    /// `t * self + (1 - t) * other`.
    pub fn mix(&self, other: &Self, t: f64) -> Result<Self> {
        self.check_same_space(other)?;
        let w = self
            .weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| t * a + (1.0 - t) * b)
            .collect();
        Self::new(self.space.clone(), w)
    }
}

/// `sum_j w_j d(e, x_j)^p` about the base point `e`.
pub fn pth_moment(mu: &DiscreteMeasure, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidInput("p must be at least 1".into()));
    }
    let base = mu.space.row(mu.space.base());
    Ok(mu
        .weights
        .iter()
        .zip(base)
        .filter(|(w, _)| **w > 0.0)
        .map(|(w, d)| w * transport::pow_p(*d, p))
        .sum())
}

/// Half the l1 distance between weight vectors.
pub fn total_variation(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<f64> {
    mu.check_same_space(nu)?;
    let s: f64 = mu.weights.iter().zip(&nu.weights).map(|(a, b)| (a - b).abs()).sum();
    Ok((0.5 * s).min(1.0))
}

/// Deterministic random stream for a seed.
///
/// The stream is ChaCha8 keyed by `seed_from_u64(seed)`; independent sub-streams
/// for the same seed are selected with `stream`.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Empirical measure `(1/n) sum_j delta_{X_j}` of `n` i.i.d. draws from `mu`.
///
/// Each draw takes one `f64` from the generator (53-bit uniform in `[0,1)`) and
/// inverts the cumulative weights in point order.
pub fn empirical_sample(mu: &DiscreteMeasure, n: usize, seed: u64) -> Result<DiscreteMeasure> {
    if n == 0 {
        return Err(Error::InvalidInput("sample size must be at least 1".into()));
    }
    let mut rng = seeded_rng(seed, 0);
    let support = mu.support();
    let mut cumulative = Vec::with_capacity(support.len());
    let mut acc = 0.0;
    for &j in &support {
        acc += mu.weights[j];
        cumulative.push(acc);
    }
    let mut counts = vec![0.0; mu.space.len()];
    for _ in 0..n {
        let u: f64 = rng.gen::<f64>() * acc;
        let k = cumulative.partition_point(|&c| c <= u).min(support.len() - 1);
        counts[support[k]] += 1.0;
    }
    DiscreteMeasure::new(mu.space.clone(), counts)
}

/// A density `f = d nu / d lambda` with respect to a reference measure.
///
/// Values exist only on the support of the reference measure, so `nu << lambda`
/// holds by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    base: DiscreteMeasure,
    values: Vec<Option<f64>>,
    normalized: bool,
}

impl Density {
    /// Density values for `base`. Entries where the reference weight is zero
    /// are discarded.
    pub fn new(base: DiscreteMeasure, values: Vec<f64>) -> Result<Self> {
        if values.len() != base.weights.len() {
            return Err(Error::SizeMismatch(values.len(), base.weights.len()));
        }
        if let Some(j) = values.iter().position(|f| !f.is_finite() || *f < 0.0) {
            return Err(Error::InvalidInput(format!("density value {j} is negative or not finite")));
        }
        let values: Vec<Option<f64>> = values
            .into_iter()
            .zip(&base.weights)
            .map(|(f, &w)| (w > 0.0).then_some(f))
            .collect();
        let mut d = Density { base, values, normalized: false };
        d.normalized = (d.mass() - 1.0).abs() <= MASS_TOL;
        Ok(d)
    }

    /// Radon-Nikodym derivative of `nu` with respect to `lambda`.
    pub fn of(nu: &DiscreteMeasure, lambda: &DiscreteMeasure) -> Result<Self> {
        nu.check_same_space(lambda)?;
        let mut values = Vec::with_capacity(nu.weights.len());
        for (j, (&a, &l)) in nu.weights.iter().zip(&lambda.weights).enumerate() {
            if l > 0.0 {
                values.push(Some(a / l));
            } else if a > 0.0 {
                return Err(Error::AbsoluteContinuityFailure(j));
            } else {
                values.push(None);
            }
        }
        Ok(Density { base: lambda.clone(), values, normalized: true })
    }

    pub fn reference(&self) -> &DiscreteMeasure {
        &self.base
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    /// Value at `x`, reading zero off the reference support.
    pub fn value(&self, x: usize) -> f64 {
        self.values[x].unwrap_or(0.0)
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// `int f d lambda`.
    pub fn mass(&self) -> f64 {
        self.iter().map(|(_, l, f)| l * f).sum()
    }

    pub fn sup_norm(&self) -> f64 {
        self.iter().map(|(_, _, f)| f).fold(0.0, f64::max)
    }

    /// `int f log f d lambda` with `0 log 0 = 0`; meaningful without normalisation.
    pub fn entropy(&self) -> f64 {
        self.iter().filter(|(_, _, f)| *f > 0.0).map(|(_, l, f)| l * f * f.ln()).sum()
    }

    /// `int phi(f) d lambda` with `phi(x) = x log x - x + 1`.
    pub fn entropy_phi(&self) -> f64 {
        self.iter()
            .map(|(_, l, f)| {
                let xlogx = if f > 0.0 { f * f.ln() } else { 0.0 };
                l * (xlogx - f + 1.0)
            })
            .sum()
    }

    /// The measure `f lambda`; requires positive mass and renormalises.
    pub fn to_measure(&self) -> Result<DiscreteMeasure> {
        let w: Vec<f64> = (0..self.values.len())
            .map(|j| self.base.weights[j] * self.value(j))
            .collect();
        DiscreteMeasure::new(self.base.space.clone(), w)
    }

    fn iter(&self) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(move |(j, f)| f.map(|f| (j, self.base.weights[j], f)))
    }
}

/// `min(m, f)` on `mask` and zero elsewhere, left unnormalised.
pub fn truncate_density(f: &Density, m: f64, mask: &[usize]) -> Result<Density> {
    if !(m > 0.0) {
        return Err(Error::InvalidInput("truncation level must be positive".into()));
    }
    let mut keep = vec![false; f.values.len()];
    for &x in mask {
        match f.values.get(x) {
            Some(Some(_)) => keep[x] = true,
            Some(None) => {
                return Err(Error::InvalidInput(format!("mask point {x} is outside the reference support")))
            }
            None => return Err(Error::InvalidInput(format!("mask point {x} out of range"))),
        }
    }
    let values: Vec<Option<f64>> = f
        .values
        .iter()
        .zip(&keep)
        .map(|(v, &k)| v.map(|v| if k { v.min(m) } else { 0.0 }))
        .collect();
    let mut out = Density { base: f.base.clone(), values, normalized: false };
    let mass = out.mass();
    if mass <= 0.0 {
        return Err(Error::EmptyTruncation);
    }
    out.normalized = (mass - 1.0).abs() <= MASS_TOL;
    Ok(out)
}

/// Rescales `f` to unit mass.
pub fn normalize_density(f: &Density) -> Result<Density> {
    let mass = f.mass();
    if !(mass > 0.0) {
        return Err(Error::ZeroMass);
    }
    if f.normalized {
        return Ok(f.clone());
    }
    let values = f.values.iter().map(|v| v.map(|v| v / mass)).collect();
    Ok(Density { base: f.base.clone(), values, normalized: true })
}

/// Multiset of `N` atoms, each carrying mass `1/N`.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformCloud {
    space: Arc<FiniteMetricSpace>,
    atoms: Vec<usize>,
}

impl UniformCloud {
    pub fn new(space: Arc<FiniteMetricSpace>, atoms: Vec<usize>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidInput("cloud needs at least one atom".into()));
        }
        if let Some(&x) = atoms.iter().find(|&&x| x >= space.len()) {
            return Err(Error::InvalidInput(format!("atom {x} out of range")));
        }
        Ok(UniformCloud { space, atoms })
    }

    /// Reads a measure as an `n`-atom uniform cloud, failing unless every
    /// weight is a multiple of `1/n` (within 1e-9).
    pub fn from_measure(mu: &DiscreteMeasure, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::NotUniformCloud);
        }
        let mut atoms = Vec::with_capacity(n);
        for (x, &w) in mu.weights.iter().enumerate() {
            let c = w * n as f64;
            let r = c.round();
            if (c - r).abs() > 1e-9 * n as f64 {
                return Err(Error::NotUniformCloud);
            }
            atoms.extend(std::iter::repeat(x).take(r as usize));
        }
        if atoms.len() != n {
            return Err(Error::NotUniformCloud);
        }
        Ok(UniformCloud { space: mu.space.clone(), atoms })
    }

    pub fn space(&self) -> &Arc<FiniteMetricSpace> {
        &self.space
    }

    pub fn atoms(&self) -> &[usize] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn to_measure(&self) -> DiscreteMeasure {
        DiscreteMeasure::uniform_on(self.space.clone(), &self.atoms).expect("atoms are in range")
    }
}

/// Result of [`uniform_quantization`].
#[derive(Debug, Clone)]
pub struct Quantization {
    pub cloud: UniformCloud,
    pub measure: DiscreteMeasure,
    pub atoms: usize,
    /// Exact `W_p(cloud, mu)`.
    pub achieved_error: f64,
    /// Greedy covering of the support of `mu` at radius `delta`.
    pub covering_budget: CoveringCertificate,
    pub support_diameter: f64,
}

/// Rounds `weights` to multiples of `1/n` by largest remainder, ties to the
/// lowest index.
pub fn largest_remainder_counts(weights: &[f64], n: usize) -> Vec<usize> {
    let scaled: Vec<f64> = weights.iter().map(|w| w * n as f64).collect();
    let mut counts: Vec<usize> = scaled.iter().map(|s| s.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).filter(|&j| weights[j] > 0.0).collect();
    order.sort_by(|&a, &b| {
        let ra = scaled[a] - scaled[a].floor();
        let rb = scaled[b] - scaled[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &j in order.iter().cycle().take(n.saturating_sub(assigned)) {
        counts[j] += 1;
    }
    counts
}

/// Approximates `mu` by a uniform Dirac cloud.
///
/// For `N = 1, 2, 4, ...` two candidates are rounded to multiples of `1/N` by
/// largest remainder: `mu` itself, and the push-forward of `mu` onto a greedy
/// `delta/2`-covering of its support. The first `N` at which one of them is
/// within `delta` in exact `W_p` is returned, preferring the first candidate
/// on ties. Fine grids therefore do not force `N` up to the support size.
pub fn uniform_quantization(mu: &DiscreteMeasure, delta: f64, p: f64) -> Result<Quantization> {
    if !(delta > 0.0) {
        return Err(Error::InvalidInput("delta must be positive".into()));
    }
    let support = mu.support();
    let support_diameter = mu.space.diameter(Some(&support))?;
    let sub = FiniteMetricSpace::from_matrix(
        support
            .iter()
            .map(|&i| support.iter().map(|&j| mu.space.dist(i, j)).collect())
            .collect(),
        0,
    )?;
    let lift = |c: CoveringCertificate| CoveringCertificate {
        centers: c.centers.iter().map(|&c| support[c]).collect(),
        ..c
    };
    let covering_budget = lift(sub.covering_number(delta)?);
    let half = lift(sub.covering_number(delta / 2.0)?);
    let centers = DiscreteMeasure::uniform_on(mu.space.clone(), &half.centers)?;
    let pushed = transport::nearest_atom_projection(mu, &centers, p)?.pushforward;

    let round = |w: &DiscreteMeasure, n: usize| -> Result<(UniformCloud, DiscreteMeasure, f64)> {
        let counts = largest_remainder_counts(w.weights(), n);
        let atoms: Vec<usize> = counts
            .iter()
            .enumerate()
            .flat_map(|(x, &c)| std::iter::repeat(x).take(c))
            .collect();
        let cloud = UniformCloud::new(mu.space.clone(), atoms)?;
        let measure = cloud.to_measure();
        let (err, _) = transport::wasserstein_p(&measure, mu, p)?;
        Ok((cloud, measure, err))
    };

    let mut n = 1;
    while n <= MAX_CLOUD_ATOMS {
        let direct = round(mu, n)?;
        let best = if direct.2 <= delta || half.k == support.len() {
            direct
        } else {
            let via = round(&pushed, n)?;
            if via.2 < direct.2 {
                via
            } else {
                direct
            }
        };
        if best.2 <= delta {
            let (cloud, measure, achieved_error) = best;
            return Ok(Quantization {
                cloud,
                measure,
                atoms: n,
                achieved_error,
                covering_budget,
                support_diameter,
            });
        }
        n *= 2;
    }
    Err(Error::QuantizationBudgetExceeded(MAX_CLOUD_ATOMS))
}
