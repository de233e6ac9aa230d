//! Variations along metric paths `g_t = ḡ + t h` at a round background.
//!
//! Every closed-form variation formula is paired with a finite-difference
//! oracle evaluated on the same grid; see [`path`] for the oracle and
//! [`formulas`] for the comparisons.

pub mod formulas;
pub mod library;
pub mod path;

pub use formulas::{
    integration_identity_check, mean_trace, quotient_prime_check, quotient_second_variation_check, r_prime_analytic, r_prime_integrals,
    r_prime_check, sigma_k_prime_check, trace_split_integrals, variation_pack, TraceSplitIntegrals, VariationPack,
};
pub use library::{pure_trace_library, Direction, DirectionKind};
pub use path::{fd_field_variation, fd_functional_derivative, FdEstimate, FdScalar, PathOptions, PathSample, PerturbationPath, Stencil};
