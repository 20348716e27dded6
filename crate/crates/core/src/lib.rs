//! Optimal transport on finite pointed metric measure spaces.
//!
//! The crate provides exact p-Wasserstein distances, uniform Dirac-cloud
//! quantization, nearest-atom projections, displacement interpolation on
//! graph metrics, entropy-convexity (CD(K, infinity)) and log-Sobolev checks,
//! and a harness that follows derived quantities along sequences of spaces
//! and reports whether they stabilise.

pub mod curvature;
pub mod error;
pub mod geodesics;
pub mod io;
pub mod limits;
pub mod measures;
pub mod spaces;
pub mod transport;

pub use error::{Error, Result};
pub use measures::{Density, DiscreteMeasure, UniformCloud};
pub use spaces::{CoveringCertificate, FiniteMetricSpace};
pub use transport::{Assignment, Coupling};
