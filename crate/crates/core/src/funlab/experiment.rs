//! Profiles of the functional along straight lines through `ḡ` and the
//! conditional comparison experiment.

use super::functional::{factors, h_of_metric, FunctionalSpec};
use crate::curv::{quotient_from_sigmas, sigma_fields};
use crate::error::{LabError, Result};
use crate::geom::{curvature_pack_lean, volume, Background, GridField, MetricField};
use crate::linalg::{relative_eigenvalues, SmallMat};
use crate::report::{CheckRecord, Report};
use crate::symcomb::{admissible_indices, Admissibility};
use crate::vary::library::Direction;
use crate::vary::path::operator_norm;

/// Tolerances and limits of [`local_max_scan`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    /// Largest admissible `|t| · sup‖h‖_ḡ`.
    pub amplitude_cap: f64,
    /// Allowed positive excursion of the profile, relative to `|H(ḡ)|`.
    pub max_rise: f64,
    /// Bound on the quadratic fit coefficient of equality-case profiles,
    /// relative to `|H(ḡ)|`.
    pub flat_quadratic: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { amplitude_cap: 0.05, max_rise: 1e-8, flat_quadratic: 1e-4 }
    }
}

/// Symmetric grid `±{step, 2 step, …, count·step}`.
pub fn symmetric_grid(step: f64, count: usize) -> Vec<f64> {
    (1..=count).flat_map(|i| [-step * i as f64, step * i as f64]).collect()
}

/// Grid for profiles of non-flat directions, `±{0.005, …, 0.04}`.
pub fn scan_grid() -> Vec<f64> {
    symmetric_grid(0.005, 8)
}

/// Grid for the cubic fit of equality-case directions, `±{0.0005, …, 0.004}`.
/// Their profiles are quartic at leading order, and a wider window leaks the
/// quartic term into the fitted quadratic coefficient.
pub fn flat_grid() -> Vec<f64> {
    symmetric_grid(0.0005, 8)
}

/// Least-squares cubic `a_0 + a_1 t + a_2 t² + a_3 t³` through the points.
pub fn cubic_fit(rows: &[(f64, f64)]) -> Result<[f64; 4]> {
    if rows.len() < 4 {
        return Err(LabError::Domain(format!("cubic fit needs at least 4 points, got {}", rows.len())));
    }
    // scale t to unit range for conditioning
    let tmax = rows.iter().fold(0.0f64, |m, r| m.max(r.0.abs()));
    if tmax == 0.0 {
        return Err(LabError::Domain("cubic fit needs distinct abscissae".into()));
    }
    let mut ata = SmallMat::zeros(4);
    let mut atb = [0.0; 4];
    for &(t, y) in rows {
        let x = t / tmax;
        let basis = [1.0, x, x * x, x * x * x];
        for i in 0..4 {
            atb[i] += basis[i] * y;
            for j in 0..4 {
                ata.a[i][j] += basis[i] * basis[j];
            }
        }
    }
    let l = ata
        .cholesky()
        .ok_or_else(|| LabError::Domain("cubic fit normal equations are singular".into()))?;
    let mut z = [0.0; 4];
    for i in 0..4 {
        z[i] = (atb[i] - (0..i).map(|j| l.a[i][j] * z[j]).sum::<f64>()) / l.a[i][i];
    }
    let mut c = [0.0; 4];
    for i in (0..4).rev() {
        c[i] = (z[i] - (i + 1..4).map(|j| l.a[j][i] * c[j]).sum::<f64>()) / l.a[i][i];
    }
    Ok([c[0], c[1] / tmax, c[2] / (tmax * tmax), c[3] / tmax.powi(3)])
}

/// Tabulates `H(ḡ + t h) - H(ḡ)` over `t_grid` for each direction.
/// Equality-case directions must be flat to second order; all others must
/// not rise above `H(ḡ)`.
pub fn local_max_scan(spec: &FunctionalSpec, bg: &Background, directions: &[Direction], t_grid: &[f64], opts: ScanOptions) -> Result<Report> {
    let g0 = bg.metric();
    let h0 = h_of_metric(spec, g0, g0)?;
    let mut report = Report::new("local_max_scan");
    for d in directions {
        let norm = operator_norm(bg, &d.h)?;
        let mut rows = vec![(0.0, 0.0)];
        for &t in t_grid {
            if t.abs() * norm > opts.amplitude_cap {
                return Err(LabError::Amplitude(format!(
                    "direction {} at t = {t}: |t| ‖h‖ = {:.3e} exceeds cap {}",
                    d.name(),
                    t.abs() * norm,
                    opts.amplitude_cap
                )));
            }
            if t == 0.0 {
                continue;
            }
            let g = MetricField::new(g0.field().axpy(t, &d.h)?)?;
            rows.push((t, h_of_metric(spec, &g, g0)? - h0));
        }
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        let name = d.name();
        if d.kind.is_equality_case() {
            let c = cubic_fit(&rows)?;
            report.push(
                CheckRecord::compare(format!("flat_profile[{name}]"), c[2], 0.0, h0.abs(), opts.flat_quadratic)
                    .with_input("spec", spec.indices)
                    .with_input("cubic", format!("{:.6e},{:.6e},{:.6e},{:.6e}", c[0], c[1], c[2], c[3]))
                    .with_profile(rows),
            );
        } else {
            let rise = rows.iter().fold(f64::NEG_INFINITY, |m, r| m.max(r.1));
            report.push(
                CheckRecord::at_least(format!("local_max[{name}]"), -rise / h0.abs(), 0.0, opts.max_rise)
                    .with_input("spec", spec.indices)
                    .with_input("max_rise", format!("{rise:.6e}"))
                    .with_profile(rows),
            );
        }
    }
    Ok(report)
}

/// Result of one comparison sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonOutcome {
    pub case: Admissibility,
    /// `min` and `max` over the grid of `σ_k/σ_l(g) - A_{kl}`.
    pub hypothesis_min: f64,
    pub hypothesis_max: f64,
    pub hypothesis_holds: bool,
    /// `∫σ_p/σ_q dv_g`.
    pub conclusion_lhs: f64,
    /// `A_{pq} Vol_ḡ`.
    pub conclusion_rhs: f64,
    pub conclusion_holds: bool,
    pub equality: bool,
}

impl ComparisonOutcome {
    pub fn verdict(&self) -> &'static str {
        match (self.hypothesis_holds, self.conclusion_holds) {
            (false, _) => "hypothesis not satisfied; no claim",
            (true, true) => "hypothesis and conclusion hold",
            (true, false) => "hypothesis holds but conclusion fails",
        }
    }

    pub fn to_report(&self) -> Report {
        let mut report = Report::new("comparison");
        report.push(CheckRecord::diagnostic("hypothesis_min", self.hypothesis_min));
        report.push(CheckRecord::diagnostic("hypothesis_max", self.hypothesis_max));
        report.push(CheckRecord::diagnostic("hypothesis_holds", f64::from(u8::from(self.hypothesis_holds))));
        report.push(CheckRecord::diagnostic("conclusion_lhs", self.conclusion_lhs));
        report.push(CheckRecord::diagnostic("conclusion_rhs", self.conclusion_rhs));
        report.push(CheckRecord::diagnostic("conclusion_holds", f64::from(u8::from(self.conclusion_holds))));
        report.push(CheckRecord::diagnostic("equality", f64::from(u8::from(self.equality))).with_note(self.verdict()));
        report
    }
}

/// Relative band inside which the hypothesis and conclusion comparisons
/// count as equalities.
pub const COMPARISON_BAND: f64 = 1e-9;

/// Evaluates the pointwise hypothesis on `σ_k/σ_l(g)` for the spec's case
/// and the integral conclusion `∫σ_p/σ_q dv_g ≤ A_{pq} Vol_ḡ`. Samples that
/// violate the hypothesis are reported without a claim.
pub fn comparison_experiment(spec: &FunctionalSpec, bg: &Background, g: &MetricField) -> Result<ComparisonOutcome> {
    let t = spec.indices;
    let case = admissible_indices(&t)?;
    if case == Admissibility::Inadmissible {
        return Err(LabError::Precondition(format!("index tuple {t} is inadmissible for the comparison")));
    }
    let g0 = bg.metric();
    g.field().check_same_chart(g0.field())?;
    let pack = curvature_pack_lean(g)?;
    let sigmas = sigma_fields(g, &pack, g.n())?;
    let akl = spec.consts.a(t.k, t.l);
    let quotient = quotient_from_sigmas(&sigmas, t.k, t.l)?;
    let (lo, hi) = quotient
        .values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v - akl), b.max(v - akl)));
    let band = COMPARISON_BAND * akl.abs();
    let hypothesis_holds = match case {
        Admissibility::Case1 => lo >= -band,
        Admissibility::Case2 => hi <= band,
        Admissibility::Inadmissible => unreachable!("rejected above"),
    };
    let (lhs, _) = factors(spec, &sigmas, g, g0)?;
    let rhs = spec.consts.a(t.p, t.q) * volume(g0);
    let cband = COMPARISON_BAND * rhs.abs();
    Ok(ComparisonOutcome {
        case,
        hypothesis_min: lo,
        hypothesis_max: hi,
        hypothesis_holds,
        conclusion_lhs: lhs,
        conclusion_rhs: rhs,
        conclusion_holds: lhs <= rhs + cband,
        equality: (lhs - rhs).abs() <= cband,
    })
}

/// The metric `ḡ + t h`, rejected when its smallest eigenvalue relative to
/// `ḡ` drops below `min_eig_ratio`.
pub fn perturbed_metric(bg: &Background, h: &crate::geom::Sym2Field, t: f64, min_eig_ratio: f64) -> Result<MetricField> {
    let g0 = bg.metric().field();
    let g = g0.axpy(t, h)?;
    for k in 0..g.chart().len() {
        let min = relative_eigenvalues(&g0.matrix(k), &g.matrix(k))
            .map(|e| e.into_iter().fold(f64::INFINITY, f64::min))
            .unwrap_or(f64::NEG_INFINITY);
        if !(min >= min_eig_ratio) {
            return Err(LabError::Amplitude(format!(
                "ḡ + t h at t = {t} has relative eigenvalue {min:.3e} < {min_eig_ratio} at node {k}"
            )));
        }
    }
    MetricField::new(g)
}
