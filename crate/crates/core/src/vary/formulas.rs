//! Closed-form first and second variations at a round background and their
//! comparison against finite differences along a path.

use super::path::{FdEstimate, PerturbationPath};
use crate::curv::{einstein_constants, quotient_from_sigmas};
use crate::error::{LabError, Result};
use crate::geom::operators::{
    double_divergence, einstein_operator, grad_norm_sq, inner_sym2, laplace_scalar, trace, trace_free,
};
use crate::geom::quadrature::mean;
use crate::geom::tt::collar_sup_norm;
use crate::geom::{integrate, tt_certify, Background, GridField, ScalarField, Sym2Field};
use crate::report::{CheckRecord, Report};

/// TT certificate tolerance required before trace-free parts enter a formula.
pub const TT_TOLERANCE: f64 = 1e-4;

/// Relative size below which a trace-free part is treated as absent.
const TRACE_FREE_NEGLIGIBLE: f64 = 1e-10;

/// `Vol_ḡ^{-1} ∫ tr_ḡ h dv_ḡ`.
pub fn mean_trace(bg: &Background, h: &Sym2Field) -> Result<f64> {
    mean(&trace(bg.metric(), h)?, bg.metric())
}

struct RPrimeParts {
    lap_tr: ScalarField,
    ddiv: ScalarField,
    tr: ScalarField,
}

fn r_prime_parts(bg: &Background, h: &Sym2Field) -> Result<RPrimeParts> {
    let tr = trace(bg.metric(), h)?;
    Ok(RPrimeParts { lap_tr: laplace_scalar(bg.metric(), &tr)?, ddiv: double_divergence(bg, h)?, tr })
}

impl RPrimeParts {
    fn value(&self, n: usize, lambda: f64) -> ScalarField {
        let c = (n as f64 - 1.0) * lambda;
        ScalarField::from_fn(self.tr.chart(), |k| -self.lap_tr.values[k] + self.ddiv.values[k] - c * self.tr.values[k])
    }

    /// Node-wise sum of term magnitudes, the natural scale of `R'`.
    fn magnitude(&self, n: usize, lambda: f64) -> ScalarField {
        let c = (n as f64 - 1.0) * lambda;
        ScalarField::from_fn(self.tr.chart(), |k| {
            self.lap_tr.values[k].abs() + self.ddiv.values[k].abs() + c * self.tr.values[k].abs()
        })
    }
}

/// `∫ R' dv_ḡ` from the closed form together with the integral of the
/// summed term magnitudes `|Δ tr h| + |δ²h| + (n-1)λ|tr h|`.
pub fn r_prime_integrals(bg: &Background, h: &Sym2Field) -> Result<(f64, f64)> {
    let parts = r_prime_parts(bg, h)?;
    let g = bg.metric();
    Ok((integrate(&parts.value(bg.n(), bg.lambda()), g)?, integrate(&parts.magnitude(bg.n(), bg.lambda()), g)?))
}

/// `R' = -Δ tr h + δ²h - (n-1)λ tr h` at the round background.
pub fn r_prime_analytic(bg: &Background, h: &Sym2Field) -> Result<ScalarField> {
    Ok(r_prime_parts(bg, h)?.value(bg.n(), bg.lambda()))
}

/// Node-wise comparison over the collar. The deviation is measured against
/// the sup of `scale` over the collar.
fn compare_on_collar(
    name: &str,
    bg: &Background,
    measured: &[f64],
    reference: &[f64],
    scale: &[f64],
    fd_error: &[f64],
    tol: f64,
) -> CheckRecord {
    let collar = bg.chart().collar_nodes();
    let mut worst = collar[0];
    let mut worst_dev = -1.0;
    let mut sup_scale: f64 = 0.0;
    let mut sup_err: f64 = 0.0;
    for &k in &collar {
        let dev = (measured[k] - reference[k]).abs();
        if dev > worst_dev || dev.is_nan() {
            worst_dev = dev;
            worst = k;
        }
        sup_scale = sup_scale.max(scale[k]).max(reference[k].abs());
        sup_err = sup_err.max(fd_error[k]);
    }
    let floor = if sup_scale > 0.0 { sup_scale } else { 1.0 };
    let th = bg.chart().node_angles(worst);
    CheckRecord::compare(name, measured[worst], reference[worst], floor, tol)
        .with_input("worst_node", worst)
        .with_input("worst_angles", format!("{:?}", &th[..bg.n()]))
        .with_input("collar_nodes", collar.len())
        .with_fd_error(sup_err / floor)
}

fn check_quotient_indices(n: usize, k: usize, l: usize) -> Result<()> {
    if !(1 <= l && l < k && k <= n) {
        return Err(LabError::Domain(format!("need 1 <= l < k <= {n}, got (k, l) = ({k}, {l})")));
    }
    Ok(())
}

/// Finite-difference `R'` against [`r_prime_analytic`], plus the integrated
/// identity `∫R' dv_ḡ = -(n-1)λ ∫tr h dv_ḡ`.
pub fn r_prime_check(path: &PerturbationPath, tol: f64, integral_tol: f64) -> Result<Report> {
    let bg = path.background();
    let (n, lambda) = (bg.n(), bg.lambda());
    let parts = r_prime_parts(bg, path.direction())?;
    let analytic = parts.value(n, lambda);
    let magnitude = parts.magnitude(n, lambda);
    let fd = path.derivative(1, |s| Ok(s.pack.scalar().values.clone()))?;
    let mut report = Report::new("r_prime");
    report.push(compare_on_collar("r_prime_pointwise", bg, &fd.values, &analytic.values, &magnitude.values, &fd.error, tol));

    let g = bg.metric();
    let lhs = integrate(&analytic, g)?;
    let rhs = -((n as f64 - 1.0) * lambda) * integrate(&parts.tr, g)?;
    let scale = integrate(&magnitude, g)?;
    report.push(CheckRecord::compare("r_prime_integral", lhs, rhs, scale, integral_tol));
    Ok(report)
}

/// Finite-difference `σ_k'` against `k/(n(n-1)λ) σ_k(ḡ) R'`.
pub fn sigma_k_prime_check(path: &PerturbationPath, k: usize, tol: f64) -> Result<Report> {
    let bg = path.background();
    let (n, lambda) = (bg.n(), bg.lambda());
    if !(1..=n).contains(&k) {
        return Err(LabError::Domain(format!("sigma index must lie in 1..={n}, got {k}")));
    }
    let consts = einstein_constants(n, lambda)?;
    let coef = k as f64 / (n as f64 * (n as f64 - 1.0) * lambda) * consts.sigma[k];
    let parts = r_prime_parts(bg, path.direction())?;
    let analytic = parts.value(n, lambda).map(|v| coef * v);
    let magnitude = parts.magnitude(n, lambda).map(|v| coef.abs() * v);
    let fd = path.derivative(1, |s| Ok(s.sigmas[k].values.clone()))?;
    let mut report = Report::new("sigma_k_prime");
    let rec = compare_on_collar(&format!("sigma_{k}_prime"), bg, &fd.values, &analytic.values, &magnitude.values, &fd.error, tol)
        .with_input("k", k);
    report.push(rec);
    Ok(report)
}

/// Finite-difference `(σ_k/σ_l)'` against `(k-l)/(n(n-1)λ) A_{kl} R'`.
pub fn quotient_prime_check(path: &PerturbationPath, k: usize, l: usize, tol: f64) -> Result<Report> {
    let bg = path.background();
    let (n, lambda) = (bg.n(), bg.lambda());
    check_quotient_indices(n, k, l)?;
    let consts = einstein_constants(n, lambda)?;
    let coef = (k - l) as f64 / (n as f64 * (n as f64 - 1.0) * lambda) * consts.a(k, l);
    let parts = r_prime_parts(bg, path.direction())?;
    let analytic = parts.value(n, lambda).map(|v| coef * v);
    let magnitude = parts.magnitude(n, lambda).map(|v| coef.abs() * v);
    let fd = path.derivative(1, |s| Ok(quotient_from_sigmas(&s.sigmas, k, l)?.values))?;
    let mut report = Report::new("quotient_prime");
    let rec = compare_on_collar(&format!("quotient_{k}_{l}_prime"), bg, &fd.values, &analytic.values, &magnitude.values, &fd.error, tol)
        .with_input("k", k)
        .with_input("l", l);
    report.push(rec);
    Ok(report)
}

/// First and second `t`-derivatives of curvature along a path, with the
/// trace decomposition of the direction.
#[derive(Debug, Clone)]
pub struct VariationPack {
    /// `S'_{ij}`.
    pub schouten_1: Sym2Field,
    /// `S''_{ij}`.
    pub schouten_2: Sym2Field,
    /// `R'`.
    pub scalar_1: ScalarField,
    pub schouten_1_error: Sym2Field,
    pub schouten_2_error: Sym2Field,
    pub scalar_1_error: ScalarField,
    /// `tr_ḡ h`.
    pub trace: ScalarField,
    /// `h̊ = h - (tr_ḡ h / n) ḡ`.
    pub trace_free: Sym2Field,
    pub mean_trace: f64,
}

fn sym2_from(bg: &Background, est: &FdEstimate) -> (Sym2Field, Sym2Field) {
    let chart = bg.chart().clone();
    (Sym2Field::from_raw(chart.clone(), est.values.clone()), Sym2Field::from_raw(chart, est.error.clone()))
}

pub fn variation_pack(path: &PerturbationPath) -> Result<VariationPack> {
    let bg = path.background();
    let h = path.direction();
    let s1 = path.derivative(1, |s| Ok(s.pack.schouten().data().to_vec()))?;
    let s2 = path.derivative(2, |s| Ok(s.pack.schouten().data().to_vec()))?;
    let r1 = path.derivative(1, |s| Ok(s.pack.scalar().values.clone()))?;
    let (schouten_1, schouten_1_error) = sym2_from(bg, &s1);
    let (schouten_2, schouten_2_error) = sym2_from(bg, &s2);
    let chart = bg.chart().clone();
    Ok(VariationPack {
        schouten_1,
        schouten_2,
        schouten_1_error,
        schouten_2_error,
        scalar_1: ScalarField::from_raw(chart.clone(), r1.values),
        scalar_1_error: ScalarField::from_raw(chart, r1.error),
        trace: trace(bg.metric(), h)?,
        trace_free: trace_free(bg.metric(), h)?,
        mean_trace: mean_trace(bg, h)?,
    })
}

fn norm_field(bg: &Background, a: &Sym2Field) -> Result<ScalarField> {
    Ok(inner_sym2(bg.metric(), a, a)?.map(|v| v.max(0.0).sqrt()))
}

/// Prop-style second variation of `σ_k/σ_l`: finite-difference LHS against
/// the closed form built from finite-difference `S'`, `S''` and `R'`.
pub fn quotient_second_variation_check(path: &PerturbationPath, k: usize, l: usize, tol: f64) -> Result<Report> {
    let bg = path.background();
    let (n, lambda) = (bg.n(), bg.lambda());
    check_quotient_indices(n, k, l)?;
    let nf = n as f64;
    let (kf, lf) = (k as f64, l as f64);
    let consts = einstein_constants(n, lambda)?;
    let pre = 2.0 * consts.a(k, l) * (kf - lf) / (nf * (nf - 2.0) * lambda);
    let c2 = 2.0 * (kf + lf - 1.0) / ((nf - 1.0) * (nf - 2.0) * lambda);
    let c3 = 2.0 * (nf - kf - lf) / (nf - 1.0);
    let c4 = (nf - 2.0) * (nf * (kf - lf) - (nf - 2.0 * lf)) / (2.0 * nf * (nf - 1.0).powi(3) * lambda);
    let c5 = (nf - 2.0) * (2.0 * nf - kf - lf - 1.0) / (2.0 * (nf - 1.0)) * lambda;

    let vp = variation_pack(path)?;
    let g = bg.metric();
    let h = path.direction();
    let t1 = trace(g, &vp.schouten_2)?;
    let t2 = inner_sym2(g, &vp.schouten_1, &vp.schouten_1)?;
    let t3 = inner_sym2(g, h, &vp.schouten_1)?;
    let t5 = inner_sym2(g, h, h)?;
    let e_s2 = norm_field(bg, &vp.schouten_2_error)?;
    let e_s1 = norm_field(bg, &vp.schouten_1_error)?;
    let s1n = norm_field(bg, &vp.schouten_1)?;
    let hn = norm_field(bg, h)?;

    let len = bg.chart().len();
    let mut rhs = vec![0.0; len];
    let mut scale = vec![0.0; len];
    let mut rhs_err = vec![0.0; len];
    for i in 0..len {
        let r1 = vp.scalar_1.values[i];
        let terms = [t1.values[i], -c2 * t2.values[i], -c3 * t3.values[i], c4 * r1 * r1, c5 * t5.values[i]];
        rhs[i] = pre * terms.iter().sum::<f64>();
        scale[i] = pre.abs() * terms.iter().map(|x| x.abs()).sum::<f64>();
        rhs_err[i] = pre.abs()
            * (nf.sqrt() * e_s2.values[i]
                + 2.0 * c2.abs() * s1n.values[i] * e_s1.values[i]
                + c3.abs() * hn.values[i] * e_s1.values[i]
                + 2.0 * c4.abs() * r1.abs() * vp.scalar_1_error.values[i]);
    }
    let lhs = path.derivative(2, |s| Ok(quotient_from_sigmas(&s.sigmas, k, l)?.values))?;
    let err: Vec<f64> = (0..len).map(|i| lhs.error[i] + rhs_err[i]).collect();
    let mut report = Report::new("quotient_second_variation");
    let rec = compare_on_collar(&format!("quotient_{k}_{l}_second_variation"), bg, &lhs.values, &rhs, &scale, &err, tol)
        .with_input("k", k)
        .with_input("l", l);
    report.push(rec);
    Ok(report)
}

/// Integrals of the background quantities entering the integrated
/// second-variation identities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSplitIntegrals {
    /// `∫ h̊ · Δ_E h̊`.
    pub hc_einstein: f64,
    /// `∫ |Δ_E h̊|²`.
    pub einstein_sq: f64,
    /// `∫ |h̊|²`.
    pub hc_sq: f64,
    /// `∫ (Δ tr h)²`.
    pub lap_tr_sq: f64,
    /// `∫ |∇ tr h|²`.
    pub grad_tr_sq: f64,
    /// `∫ (tr h)²`.
    pub tr_sq: f64,
    /// `∫ (tr h - mean)²`.
    pub tr_var: f64,
}

/// Computes [`TraceSplitIntegrals`]. A non-negligible trace-free part must
/// pass the TT certificate, because the identities hold only for
/// `h ∈ TT ⊕ C^∞ ḡ`.
pub fn trace_split_integrals(bg: &Background, h: &Sym2Field) -> Result<TraceSplitIntegrals> {
    let g = bg.metric();
    let tr = trace(g, h)?;
    let hc = trace_free(g, h)?;
    let size = collar_sup_norm(bg, h);
    let (hc_einstein, einstein_sq, hc_sq) = if collar_sup_norm(bg, &hc) <= TRACE_FREE_NEGLIGIBLE * size.max(f64::MIN_POSITIVE) {
        (0.0, 0.0, 0.0)
    } else {
        tt_certify(bg, &hc, TT_TOLERANCE)?;
        let e = einstein_operator(bg, &hc)?;
        (
            integrate(&inner_sym2(g, &hc, &e)?, g)?,
            integrate(&inner_sym2(g, &e, &e)?, g)?,
            integrate(&inner_sym2(g, &hc, &hc)?, g)?,
        )
    };
    let lap = laplace_scalar(g, &tr)?;
    let m = mean(&tr, g)?;
    Ok(TraceSplitIntegrals {
        hc_einstein,
        einstein_sq,
        hc_sq,
        lap_tr_sq: integrate(&lap.mul(&lap)?, g)?,
        grad_tr_sq: integrate(&grad_norm_sq(g, &tr)?, g)?,
        tr_sq: integrate(&tr.mul(&tr)?, g)?,
        tr_var: integrate(&tr.map(|v| (v - m) * (v - m)), g)?,
    })
}

/// `floor` is the natural size of the identity, used when every term
/// vanishes.
fn identity_record(name: &str, lhs: f64, terms: &[f64], floor: f64, lhs_err: f64, tol: f64) -> CheckRecord {
    let rhs: f64 = terms.iter().sum();
    let scale: f64 = terms.iter().map(|x| x.abs()).sum::<f64>().max(lhs.abs()).max(floor);
    let rec = CheckRecord::compare(name, lhs, rhs, scale, tol);
    let floor = if scale > 0.0 { scale } else { 1.0 };
    rec.with_fd_error(lhs_err / floor)
}

/// The four integrated identities for `∫tr S''`, `∫|S'|²`, `∫h^{ij}S'_{ij}`
/// and `∫(R')²`, each with its left side from finite differences.
pub fn integration_identity_check(path: &PerturbationPath, tol: f64) -> Result<Report> {
    let bg = path.background();
    let (n, lambda) = (bg.n() as f64, bg.lambda());
    let h = path.direction();
    let g = bg.metric();
    let ti = trace_split_integrals(bg, h)?;
    let vp = variation_pack(path)?;

    let int = |f: &ScalarField| integrate(f, g);
    let tr_s2 = int(&trace(g, &vp.schouten_2)?)?;
    let s1_sq = int(&inner_sym2(g, &vp.schouten_1, &vp.schouten_1)?)?;
    let h_s1 = int(&inner_sym2(g, h, &vp.schouten_1)?)?;
    let r1_sq = int(&vp.scalar_1.mul(&vp.scalar_1)?)?;

    let e_s2 = norm_field(bg, &vp.schouten_2_error)?;
    let e_s1 = norm_field(bg, &vp.schouten_1_error)?;
    let s1n = norm_field(bg, &vp.schouten_1)?;
    let hn = norm_field(bg, h)?;
    let err_tr_s2 = n.sqrt() * int(&e_s2)?;
    let err_s1_sq = 2.0 * int(&s1n.mul(&e_s1)?)?;
    let err_h_s1 = int(&hn.mul(&e_s1)?)?;
    let err_r1_sq = 2.0 * int(&vp.scalar_1.map(f64::abs).mul(&vp.scalar_1_error)?)?;

    let h_sq = int(&inner_sym2(g, h, h)?)?;
    let (floor1, floor2) = (lambda * h_sq, lambda * lambda * h_sq);
    let n2 = n * n;
    let m2 = (n - 2.0) * (n - 2.0);
    let mut report = Report::new("integration_identities");
    report.push(identity_record(
        "int_trace_s2",
        tr_s2,
        &[
            -(3.0 * n - 2.0) / (4.0 * (n - 1.0)) * ti.hc_einstein,
            (n - 2.0) / 2.0 * lambda * ti.hc_sq,
            -m2 / (4.0 * n2) * ti.grad_tr_sq,
        ],
        floor1, err_tr_s2,
        tol,
    ));
    report.push(identity_record(
        "int_s1_sq",
        s1_sq,
        &[
            0.25 * ti.einstein_sq,
            -(n - 2.0) / 2.0 * lambda * ti.hc_einstein,
            m2 / 4.0 * lambda * lambda * ti.hc_sq,
            m2 / (4.0 * n2) * ti.lap_tr_sq,
            -(n - 1.0) * m2 / (4.0 * n2) * lambda * ti.grad_tr_sq,
        ],
        floor2, err_s1_sq,
        tol,
    ));
    report.push(identity_record(
        "int_h_s1",
        h_s1,
        &[-0.5 * ti.hc_einstein, (n - 2.0) / 2.0 * lambda * ti.hc_sq, (n - 2.0) / (2.0 * n2) * ti.grad_tr_sq],
        floor1, err_h_s1,
        tol,
    ));
    let c = (n - 1.0) * (n - 1.0);
    report.push(identity_record(
        "int_r1_sq",
        r1_sq,
        &[c / n2 * ti.lap_tr_sq, -c * 2.0 / n * lambda * ti.grad_tr_sq, c * lambda * lambda * ti.tr_sq],
        floor2, err_r1_sq,
        tol,
    ));
    Ok(report)
}
