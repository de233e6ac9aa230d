//! Spectral inequalities on the background: the Bochner bound
//! `∫(Δu)² ≥ nλ∫|∇u|²`, the Lichnerowicz–Obata gap and the Einstein-operator
//! Rayleigh quotient on TT tensors.

use crate::error::Result;
use crate::geom::operators::{einstein_operator, grad_norm_sq, inner_sym2, laplace_scalar};
use crate::geom::quadrature::{integrate, mean};
use crate::geom::{tt_certify, Background, GridField, ScalarField, Sym2Field};
use crate::report::{CheckRecord, Report};
use crate::vary::formulas::TT_TOLERANCE;

/// Tolerances of the spectral checks, in the units of the integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralTolerances {
    /// Allowed negative excursion of the inequality.
    pub lower: f64,
    /// Band around zero reported as equality.
    pub equality: f64,
}

impl Default for SpectralTolerances {
    fn default() -> Self {
        Self { lower: 1e-6, equality: 1e-4 }
    }
}

/// `∫[(Δu)² - nλ|∇u|²] dv_ḡ`.
pub fn bochner_value(bg: &Background, u: &ScalarField) -> Result<f64> {
    let g = bg.metric();
    let lap = laplace_scalar(g, u)?;
    let grad = grad_norm_sq(g, u)?;
    let nl = bg.n() as f64 * bg.lambda();
    integrate(&ScalarField::from_fn(u.chart(), |k| lap.values[k] * lap.values[k] - nl * grad.values[k]), g)
}

/// `∫|∇u|² - nλ∫(u - ū)²`.
pub fn obata_value(bg: &Background, u: &ScalarField) -> Result<f64> {
    let g = bg.metric();
    let m = mean(u, g)?;
    let grad = integrate(&grad_norm_sq(g, u)?, g)?;
    let var = integrate(&u.map(|v| (v - m) * (v - m)), g)?;
    Ok(grad - bg.n() as f64 * bg.lambda() * var)
}

fn inequality_report(suite: &str, value: f64, tol: SpectralTolerances) -> Report {
    let mut report = Report::new(suite);
    report.push(CheckRecord::at_least(format!("{suite}_nonnegative"), value, 0.0, tol.lower));
    let equal = value.abs() <= tol.equality;
    report.push(CheckRecord::diagnostic(format!("{suite}_equality"), if equal { 1.0 } else { 0.0 }).with_input("value", format!("{value:.17e}")));
    report
}

pub fn bochner_check(bg: &Background, u: &ScalarField, tol: SpectralTolerances) -> Result<Report> {
    Ok(inequality_report("bochner", bochner_value(bg, u)?, tol))
}

pub fn obata_check(bg: &Background, u: &ScalarField, tol: SpectralTolerances) -> Result<Report> {
    Ok(inequality_report("obata", obata_value(bg, u)?, tol))
}

/// Whether a spectral report flagged equality.
pub fn equality_flagged(report: &Report) -> bool {
    report.checks.iter().any(|c| c.diagnostic && c.name.ends_with("_equality") && c.measured == 1.0)
}

/// `-∫h·Δ_E h / ∫|h|²` for a TT-certified `h`.
pub fn rayleigh_einstein(bg: &Background, h: &Sym2Field) -> Result<f64> {
    tt_certify(bg, h, TT_TOLERANCE)?;
    let g = bg.metric();
    let e = einstein_operator(bg, h)?;
    let num = integrate(&inner_sym2(g, h, &e)?, g)?;
    let den = integrate(&inner_sym2(g, h, h)?, g)?;
    Ok(-num / den)
}
