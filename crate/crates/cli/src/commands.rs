use std::path::{Path, PathBuf};
use std::time::Instant;

use wasserlim_core::curvature::{estimate_k, PairGenerator, ENTROPY_TOL};
use wasserlim_core::geodesics::displacement_path;
use wasserlim_core::io::Loader;
use wasserlim_core::limits::{
    escaping_mass_family, sequence_cd, sequence_total_variation, sequence_wasserstein, Entry, SequenceCurvature,
    SpaceSequence, StabilizationVerdict,
};
use wasserlim_core::measures::uniform_quantization;
use wasserlim_core::transport::wasserstein_p;
use wasserlim_core::{DiscreteMeasure, Error};

use crate::args::{Command, Quantity};
use crate::emit::{self, num, obj, Json, Series};
use crate::CliError;

const DEFAULT_GRID: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];
const DEFAULT_ESCAPING: [u64; 4] = [4, 16, 256, 65536];

/// Fully resolved invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub task: Task,
    pub verbose: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Task {
    Validate {
        space: PathBuf,
    },
    Transport {
        mu: PathBuf,
        nu: PathBuf,
        p: f64,
        coupling: Option<PathBuf>,
    },
    Geodesic {
        mu0: PathBuf,
        mu1: PathBuf,
        grid: Vec<f64>,
        out: Option<PathBuf>,
    },
    Cd {
        lambda: PathBuf,
        pairs: usize,
        seed: u64,
        k_hint: f64,
        tol: f64,
        out: Option<PathBuf>,
    },
    Sequence {
        dir: PathBuf,
        quantity: Quantity,
        p: f64,
        tol: f64,
        pairs: usize,
        seed: u64,
        csv: Option<PathBuf>,
        out: Option<PathBuf>,
        svg: Option<PathBuf>,
    },
    Counterexample {
        n: Vec<u64>,
        tol: f64,
        csv: Option<PathBuf>,
        out: Option<PathBuf>,
        svg: Option<PathBuf>,
    },
    Quantize {
        mu: PathBuf,
        delta: f64,
        p: f64,
        out: Option<PathBuf>,
    },
}

fn need<T>(value: Option<T>, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::usage(flag, "required flag is missing"))
}

fn exponent(p: Option<f64>) -> Result<f64, CliError> {
    let p = p.unwrap_or(2.0);
    if p.is_finite() && p >= 1.0 {
        Ok(p)
    } else {
        Err(CliError::usage("p", format!("must be a finite number >= 1, got {p}")))
    }
}

fn positive(value: Option<f64>, default: f64, flag: &str) -> Result<f64, CliError> {
    let v = value.unwrap_or(default);
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::usage(flag, format!("must be a finite number > 0, got {v}")))
    }
}

fn at_least_one(value: Option<usize>, default: usize, flag: &str) -> Result<usize, CliError> {
    match value.unwrap_or(default) {
        0 => Err(CliError::usage(flag, "must be at least 1")),
        n => Ok(n),
    }
}

impl RunConfig {
    pub fn new(command: Command, verbose: u8) -> Result<Self, CliError> {
        let task = match command {
            Command::Validate(a) => Task::Validate { space: need(a.space, "space")? },
            Command::Transport(a) => Task::Transport {
                mu: need(a.mu, "mu")?,
                nu: need(a.nu, "nu")?,
                p: exponent(a.p)?,
                coupling: a.coupling,
            },
            Command::Geodesic(a) => {
                let grid = a.grid.unwrap_or_else(|| DEFAULT_GRID.to_vec());
                if grid.iter().any(|t| !(0.0..=1.0).contains(t)) {
                    return Err(CliError::usage("grid", "times must lie in [0, 1]"));
                }
                if !grid.contains(&0.0) || !grid.contains(&1.0) {
                    return Err(CliError::usage("grid", "times must include 0 and 1"));
                }
                Task::Geodesic { mu0: need(a.mu0, "mu0")?, mu1: need(a.mu1, "mu1")?, grid, out: a.out }
            }
            Command::Cd(a) => {
                let k_hint = a.k_hint.unwrap_or(0.0);
                if !k_hint.is_finite() {
                    return Err(CliError::usage("k-hint", "must be a finite number"));
                }
                Task::Cd {
                    lambda: need(a.lambda, "lambda")?,
                    pairs: at_least_one(a.pairs, 50, "pairs")?,
                    seed: a.seed.unwrap_or(0),
                    k_hint,
                    tol: positive(a.tol, ENTROPY_TOL, "tol")?,
                    out: a.out,
                }
            }
            Command::Sequence(a) => {
                let quantity = need(a.quantity, "quantity")?;
                let p = match (quantity, a.p) {
                    (Quantity::W1, Some(p)) if p != 1.0 => return Err(CliError::usage("p", "w1 fixes p = 1")),
                    (Quantity::W2, Some(p)) if p != 2.0 => return Err(CliError::usage("p", "w2 fixes p = 2")),
                    (Quantity::W1, _) => 1.0,
                    (Quantity::W2, _) => 2.0,
                    (_, p) => exponent(p)?,
                };
                Task::Sequence {
                    dir: need(a.dir, "dir")?,
                    quantity,
                    p,
                    tol: positive(a.tol, 1e-3, "tol")?,
                    pairs: at_least_one(a.pairs, 50, "pairs")?,
                    seed: a.seed.unwrap_or(0),
                    csv: a.csv,
                    out: a.out,
                    svg: a.svg,
                }
            }
            Command::Counterexample(a) => {
                let n = a.n.unwrap_or_else(|| DEFAULT_ESCAPING.to_vec());
                if n.is_empty() || n.contains(&0) {
                    return Err(CliError::usage("n", "values must be positive integers"));
                }
                Task::Counterexample { n, tol: positive(a.tol, 1e-9, "tol")?, csv: a.csv, out: a.out, svg: a.svg }
            }
            Command::Quantize(a) => Task::Quantize {
                mu: need(a.mu, "mu")?,
                delta: positive(Some(need(a.delta, "delta")?), 1.0, "delta")?,
                p: exponent(a.p)?,
                out: a.out,
            },
        };
        Ok(RunConfig { task, verbose })
    }
}

fn weights(m: &DiscreteMeasure) -> Json {
    m.weights().into()
}

fn verdict_json(v: &StabilizationVerdict) -> Vec<(String, Json)> {
    vec![
        ("quantity".into(), v.quantity.as_str().into()),
        ("tolerance".into(), v.tolerance.into()),
        ("stabilized".into(), v.stabilized.into()),
        ("limit_estimate".into(), v.limit_estimate.into()),
        ("tail_start".into(), v.tail_start.into()),
        ("tail_min".into(), v.tail_min.into()),
        ("labels".into(), v.labels.clone().into()),
        ("values".into(), v.values.as_slice().into()),
    ]
}

fn verdict_line(v: &StabilizationVerdict) -> String {
    if v.stabilized {
        format!(
            "{}: stabilized at {} (tail from index {}, tol {})",
            v.quantity, v.limit_estimate, v.tail_start, v.tolerance
        )
    } else {
        format!("{}: not stabilized (tail median {}, tol {})", v.quantity, v.limit_estimate, v.tolerance)
    }
}

fn chart(path: &Path, title: &str, y_label: &str, series: &[Series]) -> Result<(), Error> {
    emit::write_file(path, &emit::line_chart(title, "index", y_label, series))
}

fn indexed(values: &[f64]) -> Vec<(f64, f64)> {
    values.iter().enumerate().map(|(i, &v)| (i as f64, v)).collect()
}

/// Executes a resolved invocation and returns the one-line summary.
pub fn run(cfg: &RunConfig) -> Result<String, CliError> {
    let started = Instant::now();
    let summary = execute(cfg)?;
    if cfg.verbose > 0 {
        eprintln!("done in {:.3} s", started.elapsed().as_secs_f64());
    }
    Ok(summary)
}

fn execute(cfg: &RunConfig) -> Result<String, CliError> {
    let mut loader = Loader::new();
    let verbose = cfg.verbose;
    match &cfg.task {
        Task::Validate { space } => {
            let s = loader.space(space)?;
            Ok(format!("metric OK (n={}, diam={})", s.len(), s.diameter(None)?))
        }

        Task::Transport { mu, nu, p, coupling } => {
            let mu = loader.measure(mu)?;
            let nu = loader.measure(nu)?;
            let (w, plan) = wasserstein_p(&mu, &nu, *p)?;
            if let Some(path) = coupling {
                let entries: Vec<Json> = plan
                    .plan
                    .iter()
                    .map(|&(i, j, m)| Json::Arr(vec![i.into(), j.into(), m.into()]))
                    .collect();
                let j = obj([
                    ("p", (*p).into()),
                    ("cost", w.into()),
                    ("possibly_non_unique", plan.possibly_non_unique.into()),
                    ("plan", Json::Arr(entries)),
                ]);
                emit::write_file(path, &j.render())?;
            }
            Ok(format!(
                "W_{p} = {w} ({} plan entries{})",
                plan.plan.len(),
                if plan.possibly_non_unique { ", optimum possibly not unique" } else { "" }
            ))
        }

        Task::Geodesic { mu0, mu1, grid, out } => {
            let a = loader.measure(mu0)?;
            let b = loader.measure(mu1)?;
            let path = displacement_path(&a, &b, grid)?;
            if let Some(file) = out {
                let measures: Vec<Json> = path
                    .times
                    .iter()
                    .zip(&path.measures)
                    .map(|(&t, m)| obj([("t", t.into()), ("weights", weights(m))]))
                    .collect();
                let defects: Vec<Json> = path
                    .speed_defects
                    .iter()
                    .map(|&(s, t, d)| Json::Arr(vec![s.into(), t.into(), d.into()]))
                    .collect();
                let j = obj([
                    ("cost", path.endpoints_cost.into()),
                    ("grid", path.times.as_slice().into()),
                    ("rounding", path.rounding.into()),
                    ("max_speed_defect", path.max_speed_defect().into()),
                    ("mesh", a.space().mesh().into()),
                    ("measures", Json::Arr(measures)),
                    ("speed_defects", Json::Arr(defects)),
                ]);
                emit::write_file(file, &j.render())?;
            }
            Ok(format!(
                "geodesic with {} measures, W_2 = {}, max speed defect {}",
                path.measures.len(),
                path.endpoints_cost,
                path.max_speed_defect()
            ))
        }

        Task::Cd { lambda, pairs, seed, k_hint, tol, out } => {
            let lambda = loader.measure(lambda)?;
            let report = estimate_k(&lambda, &PairGenerator::new(*pairs, *seed), *tol)?;
            let holds = report.records.iter().all(|r| r.slack_at(*k_hint) >= -tol);
            if verbose > 0 {
                for r in &report.records {
                    eprintln!("pair {}: w2 {} k_bound {:?}", r.index, r.w2, r.k_bound);
                }
            }
            if let Some(file) = out {
                let records: Vec<Json> = report
                    .records
                    .iter()
                    .map(|r| {
                        obj([
                            ("index", r.index.into()),
                            ("w2", r.w2.into()),
                            ("h0", r.h0.into()),
                            ("h1", r.h1.into()),
                            ("h_mid", r.h_mid.into()),
                            ("k_bound", r.k_bound.into()),
                            ("slack", r.slack_at(*k_hint).into()),
                            ("midpoint_defect", r.midpoint_defect.into()),
                        ])
                    })
                    .collect();
                let w = &report.worst_pair;
                let j = obj([
                    ("k_witnessed", report.k_witnessed.into()),
                    ("k_hint", (*k_hint).into()),
                    ("holds_at_hint", holds.into()),
                    ("tolerance", report.tolerance.into()),
                    ("seed", (*seed).into()),
                    ("pairs_tested", report.pairs_tested.into()),
                    ("pairs_skipped", report.pairs_skipped.into()),
                    (
                        "worst_pair",
                        obj([
                            ("index", w.index.into()),
                            ("lhs", w.lhs.into()),
                            ("rhs", w.rhs.into()),
                            ("nu0", weights(&w.nu0)),
                            ("nu1", weights(&w.nu1)),
                            ("midpoint", weights(&w.midpoint)),
                        ]),
                    ),
                    ("pairs", Json::Arr(records)),
                ]);
                emit::write_file(file, &j.render())?;
            }
            Ok(format!(
                "K_witnessed = {:.3} over {} pairs ({} skipped); K = {} {}",
                report.k_witnessed,
                report.pairs_tested,
                report.pairs_skipped,
                k_hint,
                if holds { "holds" } else { "fails" }
            ))
        }

        Task::Sequence { dir, quantity, p, tol, pairs, seed, csv, out, svg } => {
            let instances = loader.instances(dir)?;
            let mut entries = Vec::with_capacity(instances.len());
            for inst in &instances {
                entries.push(Entry { label: inst.label.clone(), space: inst.space()?, reference: inst.reference()? });
            }
            let seq = SpaceSequence::new(entries)?;
            let family = |field: &str| -> Result<Vec<DiscreteMeasure>, Error> {
                instances.iter().map(|i| i.require(field).cloned()).collect()
            };
            let verdict = match quantity {
                Quantity::Tv => sequence_total_variation(&seq, &family("mu")?, &family("nu")?, *tol)?,
                Quantity::K => {
                    let SequenceCurvature { verdict, .. } = sequence_cd(&seq, &PairGenerator::new(*pairs, *seed), *tol)?;
                    verdict
                }
                _ => sequence_wasserstein(&seq, &family("mu")?, &family("nu")?, *p, *tol)?,
            };
            if let Some(file) = csv {
                let rows: Vec<Vec<String>> = verdict
                    .values
                    .iter()
                    .zip(&verdict.labels)
                    .enumerate()
                    .map(|(i, (v, l))| vec![i.to_string(), l.clone(), num(*v)])
                    .collect();
                emit::write_file(file, &emit::csv(&["index", "label", "value"], &rows))?;
            }
            if let Some(file) = out {
                let mut fields = verdict_json(&verdict);
                if matches!(quantity, Quantity::W1 | Quantity::W2 | Quantity::Wp) {
                    fields.insert(1, ("p".into(), (*p).into()));
                }
                if *quantity == Quantity::K {
                    fields.insert(1, ("pairs".into(), (*pairs).into()));
                    fields.insert(2, ("seed".into(), (*seed).into()));
                }
                emit::write_file(file, &Json::Obj(fields).render())?;
            }
            if let Some(file) = svg {
                let name = verdict.quantity.clone();
                chart(file, &format!("{name} along the sequence"), &name, &[Series {
                    name: &name,
                    points: indexed(&verdict.values),
                }])?;
            }
            Ok(verdict_line(&verdict))
        }

        Task::Counterexample { n, tol, csv, out, svg } => {
            let fam = escaping_mass_family(n)?;
            let w2 = sequence_wasserstein(&fam.sequence, &fam.diracs, &fam.escaping, 2.0, *tol)?;
            let tv = sequence_total_variation(&fam.sequence, &fam.diracs, &fam.escaping, *tol)?;
            if let Some(file) = csv {
                let rows: Vec<Vec<String>> = n
                    .iter()
                    .zip(w2.values.iter().zip(&tv.values))
                    .map(|(n, (w, t))| vec![n.to_string(), num(*w), num(*t)])
                    .collect();
                emit::write_file(file, &emit::csv(&["N", "w2", "tv"], &rows))?;
            }
            if let Some(file) = out {
                let j = obj([
                    ("n", n.clone().into()),
                    ("w2", Json::Obj(verdict_json(&w2))),
                    ("tv", Json::Obj(verdict_json(&tv))),
                ]);
                emit::write_file(file, &j.render())?;
            }
            if let Some(file) = svg {
                chart(file, "escaping mass", "distance", &[
                    Series { name: "w2", points: indexed(&w2.values) },
                    Series { name: "tv", points: indexed(&tv.values) },
                ])?;
            }
            Ok(format!("{}; {}", verdict_line(&w2), verdict_line(&tv)))
        }

        Task::Quantize { mu, delta, p, out } => {
            let mu = loader.measure(mu)?;
            let q = uniform_quantization(&mu, *delta, *p)?;
            if let Some(file) = out {
                let j = obj([
                    ("p", (*p).into()),
                    ("delta", (*delta).into()),
                    ("atoms", q.atoms.into()),
                    ("achieved_error", q.achieved_error.into()),
                    ("support_diameter", q.support_diameter.into()),
                    (
                        "covering",
                        obj([
                            ("epsilon", q.covering_budget.epsilon.into()),
                            ("k", q.covering_budget.k.into()),
                            ("centers", q.covering_budget.centers.as_slice().into()),
                        ]),
                    ),
                    ("cloud", q.cloud.atoms().into()),
                    ("weights", weights(&q.measure)),
                ]);
                emit::write_file(file, &j.render())?;
            }
            Ok(format!(
                "{} atoms, W_{p} error {} <= {delta} (greedy k = {})",
                q.atoms, q.achieved_error, q.covering_budget.k
            ))
        }
    }
}
