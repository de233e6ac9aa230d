//! The comparison functional on a round background: evaluation, scaling
//! invariance, criticality, second variation, spectral inequalities and
//! the comparison experiment.

pub mod experiment;
pub mod functional;
pub mod spectral;

pub use experiment::{
    comparison_experiment, cubic_fit, flat_grid, local_max_scan, perturbed_metric, scan_grid, symmetric_grid, ComparisonOutcome,
    ScanOptions,
};
pub use functional::{
    criticality_check, h_eval, h_of_metric, h_of_sample, scaling_invariance_check, second_variation_analytic,
    second_variation_fd_compare, CriticalityTolerances, FunctionalSpec, SecondVariation,
};
pub use spectral::{bochner_check, bochner_value, equality_flagged, obata_check, obata_value, rayleigh_einstein, SpectralTolerances};
