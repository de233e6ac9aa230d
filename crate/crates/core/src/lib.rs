//! Verification kernels for total quotient curvature on metrics near the
//! round sphere.
//!
//! * [`symcomb`]: exact symmetric functions and index combinatorics.
//! * [`geom`]: hyperspherical charts, grid tensor fields, finite-difference
//!   geometry and quadrature.
//! * [`curv`]: `σ_k` and quotient-curvature fields and their integrals.
//! * [`vary`]: finite-difference variations along metric paths and the
//!   closed-form variation formulas they are checked against.
//! * [`funlab`]: the scale-invariant comparison functional, its variations,
//!   spectral inequalities and the comparison experiment.

pub mod curv;
pub mod error;
pub mod funlab;
pub mod geom;
pub mod linalg;
pub mod report;
pub mod symcomb;
pub mod vary;

pub use error::{LabError, Result};
pub use report::{CheckRecord, Report};
