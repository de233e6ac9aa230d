//! Discrete geometry on round-sphere charts: fields, finite differences,
//! curvature and natural differential operators.

pub mod ambient;
pub mod chart;
pub mod curvature;
pub mod field;
pub mod io;
pub mod operators;
pub mod quadrature;
pub mod stencil;
pub mod tt;

pub use chart::{Chart, FdOrder};
pub use curvature::{curvature_pack, curvature_pack_lean, curvature_pack_with, CurvatureOptions, CurvaturePack, Differencing};
pub use field::{CovectorField, GridField, MetricField, ScalarField, Sym2Field};
pub use operators::Background;
pub use quadrature::{integrate, volume};
pub use ambient::{harmonic_generator, AmbientPoly, Embedding};
pub use tt::{tt_certify, tt_diagnostics, tt_project, TtDiagnostics, TtProjection};
