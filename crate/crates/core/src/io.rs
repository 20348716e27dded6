//! JSON input formats.
//!
//! A space is either a distance matrix or a weighted edge list:
//!
//! ```json
//! {"points": ["a", "b", "c"], "base": 0, "metric": [[0, 1, 2], [1, 0, 1], [2, 1, 0]]}
//! {"points": ["a", "b", "c"], "base": 0, "edges": [[0, 1, 1.0], [1, 2, 1.0]]}
//! ```
//!
//! A measure names its space inline or by a path relative to the measure
//! file, and lists one weight per point:
//!
//! ```json
//! {"space": "line.json", "weights": [0.5, 0.5, 0]}
//! ```
//!
//! A density replaces `weights` by a reference measure (weights, a measure
//! object or a path to one) and one density value per point:
//!
//! ```json
//! {"space": "line.json", "reference": [0.25, 0.5, 0.25], "values": [2, 1, 0]}
//! ```
//!
//! One index of a sequence is a file holding any of `mu`, `nu` (measures to
//! compare) and `lambda` (the reference measure), plus an optional label:
//!
//! ```json
//! {"label": "level-3", "mu": {"space": "grid3.json", "weights": [...]}, "nu": {...}}
//! ```

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{Density, DiscreteMeasure};
use crate::spaces::FiniteMetricSpace;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<String>>,
    #[serde(default)]
    pub base: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<(usize, usize, f64)>>,
}

impl SpaceFile {
    pub fn build(&self) -> Result<FiniteMetricSpace> {
        let space = match (&self.metric, &self.edges) {
            (Some(m), None) => FiniteMetricSpace::from_matrix(m.clone(), self.base)?,
            (None, Some(edges)) => {
                let n = match &self.points {
                    Some(p) => p.len(),
                    None => edges.iter().map(|e| e.0.max(e.1) + 1).max().unwrap_or(0),
                };
                FiniteMetricSpace::from_graph(n, edges, self.base)?
            }
            _ => return Err(Error::Parse("a space needs exactly one of \"metric\" or \"edges\"".into())),
        };
        match &self.points {
            Some(names) => space.with_names(names.clone()),
            None => Ok(space),
        }
    }

    /// Matrix form of `space`, or edge-list form if it carries a graph.
    pub fn from_space(space: &FiniteMetricSpace) -> Self {
        let edges = space
            .edges()
            .map(|es| es.iter().map(|e| (e.u, e.v, e.weight)).collect());
        SpaceFile {
            points: Some(space.names().to_vec()),
            base: space.base(),
            metric: if edges.is_none() { Some(space.matrix()) } else { None },
            edges,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpaceRef {
    Path(String),
    Inline(SpaceFile),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureFile {
    pub space: SpaceRef,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ReferenceRef {
    Weights(Vec<f64>),
    Path(String),
    Inline(MeasureFile),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityFile {
    pub space: SpaceRef,
    pub reference: ReferenceRef,
    pub values: Vec<f64>,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn resolve(relative_to: Option<&Path>, name: &str) -> PathBuf {
    let p = Path::new(name);
    match relative_to.and_then(Path::parent) {
        Some(dir) if p.is_relative() => dir.join(p),
        _ => p.to_path_buf(),
    }
}

/// Reads spaces and measures, sharing one `Arc` per space file so that
/// measures loaded from the same file compare as living on the same space.
#[derive(Debug, Default)]
pub struct Loader {
    spaces: HashMap<PathBuf, Arc<FiniteMetricSpace>>,
}

impl Loader {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn space(&mut self, path: &Path) -> Result<Arc<FiniteMetricSpace>> {
        let key = fs::canonicalize(path).unwrap_or_else(|_| path.to_path_buf());
        if let Some(s) = self.spaces.get(&key) {
            return Ok(s.clone());
        }
        let file: SpaceFile = read_json(path)?;
        let space = Arc::new(file.build()?);
        self.spaces.insert(key, space.clone());
        Ok(space)
    }

    fn space_ref(&mut self, r: &SpaceRef, origin: Option<&Path>) -> Result<Arc<FiniteMetricSpace>> {
        match r {
            SpaceRef::Path(p) => self.space(&resolve(origin, p)),
            SpaceRef::Inline(f) => Ok(Arc::new(f.build()?)),
        }
    }

    /// Builds a measure from its parsed form; `origin` anchors relative space paths.
    pub fn measure_from(&mut self, file: &MeasureFile, origin: Option<&Path>) -> Result<DiscreteMeasure> {
        let space = self.space_ref(&file.space, origin)?;
        DiscreteMeasure::new(space, file.weights.clone())
    }

    pub fn measure(&mut self, path: &Path) -> Result<DiscreteMeasure> {
        let file: MeasureFile = read_json(path)?;
        self.measure_from(&file, Some(path))
    }

    pub fn density(&mut self, path: &Path) -> Result<Density> {
        let file: DensityFile = read_json(path)?;
        let space = self.space_ref(&file.space, Some(path))?;
        let reference = match &file.reference {
            ReferenceRef::Weights(w) => DiscreteMeasure::new(space.clone(), w.clone())?,
            ReferenceRef::Path(p) => self.measure(&resolve(Some(path), p))?,
            ReferenceRef::Inline(m) => self.measure_from(m, Some(path))?,
        };
        if !crate::measures::same_space(&space, reference.space()) {
            return Err(Error::SpaceMismatch);
        }
        Density::new(reference, file.values)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub mu: Option<MeasureFile>,
    #[serde(default)]
    pub nu: Option<MeasureFile>,
    #[serde(default)]
    pub lambda: Option<MeasureFile>,
}

/// One loaded index of a sequence directory.
#[derive(Debug, Clone)]
pub struct Instance {
    pub label: String,
    pub path: PathBuf,
    pub mu: Option<DiscreteMeasure>,
    pub nu: Option<DiscreteMeasure>,
    pub lambda: Option<DiscreteMeasure>,
}

impl Instance {
    /// The space shared by every measure of the instance.
    pub fn space(&self) -> Result<Arc<FiniteMetricSpace>> {
        let measures: Vec<&DiscreteMeasure> = [&self.mu, &self.nu, &self.lambda].into_iter().flatten().collect();
        let first = measures
            .first()
            .ok_or_else(|| Error::Parse(format!("{}: instance holds no measure", self.path.display())))?;
        for m in &measures[1..] {
            first.check_same_space(m)?;
        }
        Ok(first.space().clone())
    }

    /// `lambda` if given, otherwise the uniform measure on the instance space.
    pub fn reference(&self) -> Result<DiscreteMeasure> {
        match &self.lambda {
            Some(l) => Ok(l.clone()),
            None => Ok(DiscreteMeasure::uniform(self.space()?)),
        }
    }

    pub fn require(&self, field: &str) -> Result<&DiscreteMeasure> {
        let m = match field {
            "mu" => &self.mu,
            "nu" => &self.nu,
            "lambda" => &self.lambda,
            _ => &None,
        };
        m.as_ref()
            .ok_or_else(|| Error::Parse(format!("{}: missing \"{field}\"", self.path.display())))
    }
}

impl Loader {
    pub fn instance(&mut self, path: &Path) -> Result<Instance> {
        let file: InstanceFile = read_json(path)?;
        let mut load = |m: &Option<MeasureFile>| m.as_ref().map(|m| self.measure_from(m, Some(path))).transpose();
        let (mu, nu, lambda) = (load(&file.mu)?, load(&file.nu)?, load(&file.lambda)?);
        let label = file.label.unwrap_or_else(|| {
            path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
        });
        let instance = Instance { label, path: path.to_path_buf(), mu, nu, lambda };
        instance.space()?;
        Ok(instance)
    }

    /// Every JSON file of `dir`, in lexical order of file names.
    pub fn instances(&mut self, dir: &Path) -> Result<Vec<Instance>> {
        let files = sorted_json_files(dir)?;
        if files.is_empty() {
            return Err(Error::Io(format!("{}: no JSON instances", dir.display())));
        }
        files.iter().map(|f| self.instance(f)).collect()
    }
}

/// JSON files of `dir` in lexical order of their file names.
pub fn sorted_json_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::Io(e.to_string()))?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "json") {
            files.push(path);
        }
    }
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(files)
}
