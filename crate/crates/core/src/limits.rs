//! Sequences of pointed metric measure spaces and tail stabilisation.
//!
//! A derived quantity (a transport distance, a witnessed curvature, an atom
//! count) is computed at every index of a sequence. The quantity is declared
//! stabilised when the last `ceil(n/2)` values all lie within `tol` of their
//! median, which is then reported as the limit estimate. This is a finite
//! surrogate for "eventually" statements and nothing more.

use std::sync::Arc;

use rayon::prelude::*;

use crate::curvature::{self, CurvatureReport, PairGenerator};
use crate::error::{Error, Result};
use crate::measures::{self, total_variation, DiscreteMeasure};
use crate::spaces::{dyadic_interval_space, FiniteMetricSpace};
use crate::transport;

/// One pointed metric measure space of a sequence.
#[derive(Debug, Clone)]
pub struct Entry {
    pub label: String,
    pub space: Arc<FiniteMetricSpace>,
    pub reference: DiscreteMeasure,
}

/// A nonempty indexed family of pointed metric measure spaces.
#[derive(Debug, Clone)]
pub struct SpaceSequence {
    entries: Vec<Entry>,
}

impl SpaceSequence {
    pub fn new(entries: Vec<Entry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidInput("a sequence needs at least one entry".into()));
        }
        for e in &entries {
            if !measures::same_space(&e.space, e.reference.space()) {
                return Err(Error::SpaceMismatch);
            }
        }
        Ok(SpaceSequence { entries })
    }

    /// The dyadic grids of `[0, 1]` at the given levels, with uniform reference measures.
    pub fn dyadic(levels: impl IntoIterator<Item = u32>) -> Result<Self> {
        let entries = levels
            .into_iter()
            .map(|level| {
                let space = Arc::new(dyadic_interval_space(level));
                Entry {
                    label: format!("level-{level}"),
                    reference: DiscreteMeasure::uniform(space.clone()),
                    space,
                }
            })
            .collect();
        Self::new(entries)
    }

    /// `len` copies of the same entry.
    pub fn constant(entry: Entry, len: usize) -> Result<Self> {
        Self::new(vec![entry; len])
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Measure with weights proportional to `density(d(e, x)) * lambda(x)` on
    /// every entry, where `e` is the base point.
    pub fn sample_density(&self, density: impl Fn(f64) -> f64 + Sync) -> Result<Vec<DiscreteMeasure>> {
        self.entries
            .iter()
            .map(|e| {
                let base = e.space.base();
                let w = (0..e.space.len())
                    .map(|x| e.reference.weight(x) * density(e.space.dist(base, x)))
                    .collect();
                DiscreteMeasure::new(e.space.clone(), w)
            })
            .collect()
    }
}

/// Tail-stabilisation verdict for one quantity along a sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilizationVerdict {
    pub quantity: String,
    pub labels: Vec<String>,
    pub values: Vec<f64>,
    pub stabilized: bool,
    pub limit_estimate: f64,
    /// First index from which every value is within `tolerance` of the
    /// estimate (only meaningful when stabilised).
    pub tail_start: usize,
    pub tolerance: f64,
    /// Smallest value over the last `ceil(n/2)` indices.
    pub tail_min: f64,
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Applies the last-half rule to `values`.
pub fn stabilization(quantity: &str, labels: Vec<String>, values: Vec<f64>, tol: f64) -> Result<StabilizationVerdict> {
    if values.is_empty() {
        return Err(Error::InvalidInput("no values".into()));
    }
    if labels.len() != values.len() {
        return Err(Error::FamilyLengthMismatch(labels.len(), values.len()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    let n = values.len();
    let half = n.div_ceil(2);
    let tail = &values[n - half..];
    let limit_estimate = median(tail);
    let within = |v: f64| v.is_finite() && (v - limit_estimate).abs() <= tol;
    let stabilized = limit_estimate.is_finite() && tail.iter().all(|&v| within(v));
    let tail_start = if stabilized {
        values.iter().rposition(|&v| !within(v)).map_or(0, |i| i + 1)
    } else {
        n - half
    };
    let tail_min = tail.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(StabilizationVerdict {
        quantity: quantity.to_string(),
        labels,
        values,
        stabilized,
        limit_estimate,
        tail_start,
        tolerance: tol,
        tail_min,
    })
}

fn check_families(seq: &SpaceSequence, mu: &[DiscreteMeasure], nu: &[DiscreteMeasure]) -> Result<()> {
    if mu.len() != seq.len() {
        return Err(Error::FamilyLengthMismatch(mu.len(), seq.len()));
    }
    if nu.len() != seq.len() {
        return Err(Error::FamilyLengthMismatch(nu.len(), seq.len()));
    }
    for ((e, a), b) in seq.entries.iter().zip(mu).zip(nu) {
        if !measures::same_space(&e.space, a.space()) || !measures::same_space(&e.space, b.space()) {
            return Err(Error::SpaceMismatch);
        }
    }
    Ok(())
}

fn labels(seq: &SpaceSequence) -> Vec<String> {
    seq.entries.iter().map(|e| e.label.clone()).collect()
}

/// `W_p(mu_i, nu_i)` along the sequence.
pub fn sequence_wasserstein(
    seq: &SpaceSequence,
    mu: &[DiscreteMeasure],
    nu: &[DiscreteMeasure],
    p: f64,
    tol: f64,
) -> Result<StabilizationVerdict> {
    check_families(seq, mu, nu)?;
    let values: Vec<f64> = mu
        .par_iter()
        .zip(nu)
        .map(|(a, b)| transport::wasserstein_p(a, b, p).map(|r| r.0))
        .collect::<Result<_>>()?;
    stabilization(&format!("w{p}"), labels(seq), values, tol)
}

/// `TV(mu_i, nu_i)` along the sequence.
pub fn sequence_total_variation(
    seq: &SpaceSequence,
    mu: &[DiscreteMeasure],
    nu: &[DiscreteMeasure],
    tol: f64,
) -> Result<StabilizationVerdict> {
    check_families(seq, mu, nu)?;
    let values = mu.iter().zip(nu).map(|(a, b)| total_variation(a, b)).collect::<Result<_>>()?;
    stabilization("tv", labels(seq), values, tol)
}

/// Two-point line spaces `{0, sqrt(N)}` carrying `delta_0` and
/// `(1 - 1/N) delta_0 + (1/N) delta_sqrt(N)`.
///
/// The W2 distance between the two is exactly 1 for every `N` while their
/// total variation distance is `1/N`.
#[derive(Debug, Clone)]
pub struct EscapingMassFamily {
    pub n_values: Vec<u64>,
    pub sequence: SpaceSequence,
    pub diracs: Vec<DiscreteMeasure>,
    pub escaping: Vec<DiscreteMeasure>,
}

pub fn escaping_mass_family(n_values: &[u64]) -> Result<EscapingMassFamily> {
    if n_values.is_empty() {
        return Err(Error::InvalidInput("no N values".into()));
    }
    let mut entries = Vec::with_capacity(n_values.len());
    let mut diracs = Vec::with_capacity(n_values.len());
    let mut escaping = Vec::with_capacity(n_values.len());
    for &n in n_values {
        if n == 0 {
            return Err(Error::InvalidInput("N must be a positive integer".into()));
        }
        let nf = n as f64;
        let space = Arc::new(FiniteMetricSpace::line(&[0.0, nf.sqrt()], 0)?);
        diracs.push(DiscreteMeasure::dirac(space.clone(), 0)?);
        escaping.push(DiscreteMeasure::new(space.clone(), vec![1.0 - 1.0 / nf, 1.0 / nf])?);
        entries.push(Entry {
            label: format!("N={n}"),
            reference: DiscreteMeasure::uniform(space.clone()),
            space,
        });
    }
    Ok(EscapingMassFamily {
        n_values: n_values.to_vec(),
        sequence: SpaceSequence::new(entries)?,
        diracs,
        escaping,
    })
}

/// Witnessed curvature along a sequence, with the same pair seeds at every index.
#[derive(Debug, Clone)]
pub struct SequenceCurvature {
    pub verdict: StabilizationVerdict,
    pub reports: Vec<CurvatureReport>,
}

pub fn sequence_cd(seq: &SpaceSequence, generator: &PairGenerator, tol: f64) -> Result<SequenceCurvature> {
    let reports: Vec<CurvatureReport> = seq
        .entries
        .par_iter()
        .map(|e| curvature::estimate_k(&e.reference, generator, curvature::ENTROPY_TOL))
        .collect::<Result<_>>()?;
    let values = reports.iter().map(|r| r.k_witnessed).collect();
    let verdict = stabilization("k", labels(seq), values, tol)?;
    Ok(SequenceCurvature { verdict, reports })
}

/// One row of a quantization audit.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizationRow {
    pub index: usize,
    pub label: String,
    pub atoms: usize,
    pub covering_k: usize,
    pub achieved_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantizationAudit {
    pub rows: Vec<QuantizationRow>,
    /// Largest atom count over the sequence; one cloud size that works everywhere.
    pub uniform_atoms: usize,
    pub max_covering_k: usize,
}

/// Quantizes the given measures (one per entry) at accuracy `delta`.
pub fn quantization_audit_of(
    seq: &SpaceSequence,
    family: &[DiscreteMeasure],
    delta: f64,
    p: f64,
) -> Result<QuantizationAudit> {
    if family.len() != seq.len() {
        return Err(Error::FamilyLengthMismatch(family.len(), seq.len()));
    }
    let rows: Vec<QuantizationRow> = family
        .par_iter()
        .enumerate()
        .map(|(index, mu)| {
            let q = measures::uniform_quantization(mu, delta, p)?;
            Ok(QuantizationRow {
                index,
                label: seq.entries[index].label.clone(),
                atoms: q.atoms,
                covering_k: q.covering_budget.k,
                achieved_error: q.achieved_error,
            })
        })
        .collect::<Result<_>>()?;
    let uniform_atoms = rows.iter().map(|r| r.atoms).max().unwrap_or(0);
    let max_covering_k = rows.iter().map(|r| r.covering_k).max().unwrap_or(0);
    Ok(QuantizationAudit { rows, uniform_atoms, max_covering_k })
}

/// Quantizes every reference measure of the sequence at accuracy `delta`.
pub fn quantization_uniformity_audit(seq: &SpaceSequence, delta: f64, p: f64) -> Result<QuantizationAudit> {
    let family: Vec<DiscreteMeasure> = seq.entries.iter().map(|e| e.reference.clone()).collect();
    quantization_audit_of(seq, &family, delta, p)
}
