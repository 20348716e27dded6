//! Finite pointed metric spaces.
//!
//! Points are dense indices `0..n`. External names are carried alongside for
//! I/O only. A space built from a weighted graph keeps its edge list so that
//! geodesics can be traced later; a space built from a bare distance matrix
//! does not.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Absolute tolerance for metric axioms and shortest-path equalities.
///
/// Distances are assumed to be of order 1 to 10^3. Callers working at other
/// scales should rescale first.
pub const METRIC_TOL: f64 = 1e-9;

/// An undirected weighted edge of a geodesic structure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

/// A finite pointed metric space `(X, d, e)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMetricSpace {
    names: Vec<String>,
    dist: Vec<f64>,
    base: usize,
    edges: Option<Vec<Edge>>,
    // sorted by neighbour index, present iff `edges` is
    adjacency: Option<Vec<Vec<(usize, f64)>>>,
}

/// Certificate that every point lies within `epsilon` of some center.
#[derive(Debug, Clone, PartialEq)]
pub struct CoveringCertificate {
    pub epsilon: f64,
    pub centers: Vec<usize>,
    pub k: usize,
}

fn default_names(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

/// Validates a square distance matrix and builds a space based at point 0.
pub fn validate_metric(matrix: &[Vec<f64>]) -> Result<FiniteMetricSpace> {
    FiniteMetricSpace::from_matrix(matrix.to_vec(), 0)
}

impl FiniteMetricSpace {
    /// Builds a space from a distance matrix, checking every metric axiom.
    ///
    /// The first violated axiom is reported, checked in the order: shape and
    /// finiteness, zero diagonal, nonnegativity, symmetry, triangle inequality.
    pub fn from_matrix(matrix: Vec<Vec<f64>>, base: usize) -> Result<Self> {
        let n = matrix.len();
        if n == 0 {
            return Err(Error::InvalidInput("empty distance matrix".into()));
        }
        if let Some(row) = matrix.iter().position(|r| r.len() != n) {
            return Err(Error::InvalidInput(format!(
                "row {row} has {} entries, expected {n}",
                matrix[row].len()
            )));
        }
        if base >= n {
            return Err(Error::InvalidInput(format!("base point {base} out of range")));
        }
        for (i, row) in matrix.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                if !x.is_finite() {
                    return Err(Error::InvalidInput(format!("d({i},{j}) is not finite")));
                }
            }
        }
        for (i, row) in matrix.iter().enumerate() {
            if row[i].abs() > METRIC_TOL {
                return Err(Error::NonzeroDiagonal(i));
            }
        }
        for (i, row) in matrix.iter().enumerate() {
            if let Some(j) = row.iter().position(|&x| x < 0.0) {
                return Err(Error::NegativeDistance(i, j));
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if (matrix[i][j] - matrix[j][i]).abs() > METRIC_TOL {
                    return Err(Error::Asymmetric(i, j));
                }
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                for k in 0..n {
                    if matrix[i][j] > matrix[i][k] + matrix[k][j] + METRIC_TOL {
                        return Err(Error::TriangleViolation(i, j, k));
                    }
                }
            }
        }
        let mut dist = Vec::with_capacity(n * n);
        for (i, row) in matrix.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                // store the exact symmetrisation so later lookups agree both ways
                dist.push(if i == j { 0.0 } else { 0.5 * (x + matrix[j][i]) });
            }
        }
        Ok(FiniteMetricSpace {
            names: default_names(n),
            dist,
            base,
            edges: None,
            adjacency: None,
        })
    }

    /// Builds the shortest-path metric of a connected weighted graph.
    ///
    /// Parallel edges keep the smallest weight. The edge list is retained as
    /// the geodesic structure of the space.
    pub fn from_graph(n: usize, edges: &[(usize, usize, f64)], base: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("graph has no vertices".into()));
        }
        if base >= n {
            return Err(Error::InvalidInput(format!("base point {base} out of range")));
        }
        let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut kept = Vec::with_capacity(edges.len());
        for &(u, v, w) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidInput(format!("edge ({u},{v}) out of range")));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::NonpositiveWeight(u, v));
            }
            if u == v {
                continue;
            }
            kept.push(Edge { u, v, weight: w });
            for (a, b) in [(u, v), (v, u)] {
                match adjacency[a].iter_mut().find(|(x, _)| *x == b) {
                    Some(slot) => slot.1 = slot.1.min(w),
                    None => adjacency[a].push((b, w)),
                }
            }
        }
        for list in &mut adjacency {
            list.sort_by_key(|&(x, _)| x);
        }
        let mut dist = vec![f64::INFINITY; n * n];
        for s in 0..n {
            let row = dijkstra(&adjacency, s);
            if let Some(t) = row.iter().position(|x| x.is_infinite()) {
                return Err(Error::Disconnected(t));
            }
            dist[s * n..(s + 1) * n].copy_from_slice(&row);
        }
        // Dijkstra from each end can round differently; pin exact symmetry.
        for i in 0..n {
            for j in i + 1..n {
                let d = dist[i * n + j].min(dist[j * n + i]);
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        Ok(FiniteMetricSpace {
            names: default_names(n),
            dist,
            base,
            edges: Some(kept),
            adjacency: Some(adjacency),
        })
    }

    /// Points of the real line with the absolute-difference metric, joined
    /// as a path graph in the given order when the coordinates are sorted.
    pub fn line(coords: &[f64], base: usize) -> Result<Self> {
        let sorted = coords.windows(2).all(|w| w[0] < w[1]);
        if sorted && coords.len() > 1 {
            let edges: Vec<_> = coords
                .windows(2)
                .enumerate()
                .map(|(i, w)| (i, i + 1, w[1] - w[0]))
                .collect();
            let mut space = Self::from_graph(coords.len(), &edges, base)?;
            // overwrite with directly computed differences to avoid summed rounding
            let n = coords.len();
            for i in 0..n {
                for j in 0..n {
                    space.dist[i * n + j] = (coords[i] - coords[j]).abs();
                }
            }
            Ok(space)
        } else {
            let matrix = coords
                .iter()
                .map(|a| coords.iter().map(|b| (a - b).abs()).collect())
                .collect();
            Self::from_matrix(matrix, base)
        }
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.len() {
            return Err(Error::SizeMismatch(names.len(), self.len()));
        }
        self.names = names;
        Ok(self)
    }

    pub fn with_base(mut self, base: usize) -> Result<Self> {
        if base >= self.len() {
            return Err(Error::InvalidInput(format!("base point {base} out of range")));
        }
        self.base = base;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn base(&self) -> usize {
        self.base
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.len();
        &self.dist[i * n..(i + 1) * n]
    }

    pub fn matrix(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn edges(&self) -> Option<&[Edge]> {
        self.edges.as_deref()
    }

    pub fn has_geodesic_structure(&self) -> bool {
        self.adjacency.is_some()
    }

    /// Graph neighbours of `x` sorted by index, if the space came from a graph.
    pub fn neighbors(&self, x: usize) -> Option<&[(usize, f64)]> {
        self.adjacency.as_ref().map(|adj| adj[x].as_slice())
    }

    /// Largest edge weight of the geodesic structure.
    pub fn mesh(&self) -> Option<f64> {
        self.edges
            .as_ref()
            .map(|e| e.iter().map(|e| e.weight).fold(0.0, f64::max))
    }

    /// Diameter of the whole space or of a subset of it.
    pub fn diameter(&self, subset: Option<&[usize]>) -> Result<f64> {
        match subset {
            None => Ok(self.dist.iter().copied().fold(0.0, f64::max)),
            Some([]) => Err(Error::EmptySubset),
            Some(s) => {
                if let Some(&bad) = s.iter().find(|&&i| i >= self.len()) {
                    return Err(Error::InvalidInput(format!("point {bad} out of range")));
                }
                let mut d: f64 = 0.0;
                for &i in s {
                    for &j in s {
                        d = d.max(self.dist(i, j));
                    }
                }
                Ok(d)
            }
        }
    }

    /// Greedy covering certificate at radius `epsilon`.
    ///
    /// Centers are chosen farthest-first starting from the base point, each
    /// new center being the point farthest from the current centers (lowest
    /// index on ties), until every point is within `epsilon`. The chosen
    /// centers are pairwise more than `epsilon` apart, so `k` never exceeds
    /// the optimal covering number at radius `epsilon / 2`, and `k` is
    /// nonincreasing in `epsilon`.
    pub fn covering_number(&self, epsilon: f64) -> Result<CoveringCertificate> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidInput("epsilon must be positive".into()));
        }
        let n = self.len();
        let mut centers = vec![self.base];
        let mut gap: Vec<f64> = self.row(self.base).to_vec();
        loop {
            let (far, radius) = gap
                .iter()
                .copied()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |acc, (i, g)| if g > acc.1 { (i, g) } else { acc });
            if radius <= epsilon || centers.len() == n {
                break;
            }
            centers.push(far);
            for (g, &d) in gap.iter_mut().zip(self.row(far)) {
                *g = g.min(d);
            }
        }
        Ok(CoveringCertificate { epsilon, k: centers.len(), centers })
    }

    /// Exact minimum covering by exhaustive search, for spaces below 20 points.
    pub fn exact_covering_number(&self, epsilon: f64) -> Result<CoveringCertificate> {
        let n = self.len();
        if n >= 20 {
            return Err(Error::TooLarge(1u128 << n));
        }
        if !(epsilon > 0.0) {
            return Err(Error::InvalidInput("epsilon must be positive".into()));
        }
        let balls: Vec<u32> = (0..n)
            .map(|c| (0..n).filter(|&x| self.dist(c, x) <= epsilon).fold(0u32, |m, x| m | (1 << x)))
            .collect();
        let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
        let best = (1u32..=full)
            .filter(|mask| {
                (0..n)
                    .filter(|c| mask & (1 << c) != 0)
                    .fold(0u32, |acc, c| acc | balls[c])
                    == full
            })
            .min_by_key(|mask| (mask.count_ones(), *mask))
            .expect("the full set always covers");
        let centers: Vec<usize> = (0..n).filter(|c| best & (1 << c) != 0).collect();
        Ok(CoveringCertificate { epsilon, k: centers.len(), centers })
    }

    /// Whether the certificate genuinely covers this space.
    pub fn certifies(&self, cert: &CoveringCertificate) -> bool {
        cert.k == cert.centers.len()
            && (0..self.len()).all(|x| cert.centers.iter().any(|&c| self.dist(x, c) <= cert.epsilon))
    }

    /// Same points and same distances (names and base are ignored).
    pub fn same_metric(&self, other: &Self) -> bool {
        self.len() == other.len() && self.dist == other.dist
    }
}

/// Shortest-path metric of a weighted graph. See [`FiniteMetricSpace::from_graph`].
pub fn graph_metric(n: usize, edges: &[(usize, usize, f64)]) -> Result<FiniteMetricSpace> {
    FiniteMetricSpace::from_graph(n, edges, 0)
}

/// The grid `{ j / 2^level }` of the unit interval, based at 0, as a path graph.
pub fn dyadic_interval_space(level: u32) -> FiniteMetricSpace {
    assert!(level < 30, "dyadic level too large");
    let m = 1usize << level;
    let coords: Vec<f64> = (0..=m).map(|j| j as f64 / m as f64).collect();
    FiniteMetricSpace::line(&coords, 0).expect("dyadic grid is a valid path graph")
}

#[derive(PartialEq)]
struct Frontier(f64, usize);

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .total_cmp(&self.0)
            .then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn dijkstra(adjacency: &[Vec<(usize, f64)>], source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adjacency.len()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Frontier(0.0, source));
    while let Some(Frontier(d, u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, w) in &adjacency[u] {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Frontier(nd, v));
            }
        }
    }
    dist
}
