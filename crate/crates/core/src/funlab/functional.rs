//! The scale-invariant comparison functional
//! `H(g) = [∫σ_p/σ_q dv_g]^α [∫σ_k/σ_l dv_ḡ]^β`, `α = 2(k-l)`, `β = n - 2(p-q)`.

use crate::curv::{einstein_constants, quotient_from_sigmas, sigma_fields, EinsteinConstants};
use crate::error::{LabError, Result};
use crate::geom::quadrature::integrate;
use crate::geom::{curvature_pack_lean, volume, Background, CurvaturePack, GridField, MetricField, ScalarField, Sym2Field};
use crate::report::{CheckRecord, Report};
use crate::symcomb::IndexTuple;
use crate::vary::path::{fd_functional_derivative, PathSample, PerturbationPath};
use crate::vary::{r_prime_integrals, trace_split_integrals};

/// Index tuple with the derived exponents and round-background constants.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalSpec {
    pub indices: IndexTuple,
    pub alpha: i32,
    pub beta: i32,
    pub consts: EinsteinConstants,
}

impl FunctionalSpec {
    /// Rejects `β = 0`, for which the functional is not defined.
    pub fn new(indices: IndexTuple, lambda: f64) -> Result<Self> {
        let t = IndexTuple::new(indices.n, indices.k, indices.l, indices.p, indices.q)?;
        if t.beta() == 0 {
            return Err(LabError::Domain(format!("index tuple {t} has n = 2(p-q); the functional needs β ≠ 0")));
        }
        Ok(Self {
            indices: t,
            alpha: t.alpha() as i32,
            beta: t.beta() as i32,
            consts: einstein_constants(t.n, lambda)?,
        })
    }

    /// `A_{pq}^α A_{kl}^β Vol^{α+β}`.
    pub fn round_value(&self, vol: f64) -> f64 {
        let t = &self.indices;
        self.consts.a(t.p, t.q).powi(self.alpha) * self.consts.a(t.k, t.l).powi(self.beta) * vol.powi(self.alpha + self.beta)
    }

    fn check_chart(&self, g: &MetricField) -> Result<()> {
        let chart = g.chart();
        if chart.n() != self.indices.n || chart.lambda() != self.consts.lambda {
            return Err(LabError::Domain(format!(
                "spec is for n = {}, λ = {} but the chart has n = {}, λ = {}",
                self.indices.n,
                self.consts.lambda,
                chart.n(),
                chart.lambda()
            )));
        }
        Ok(())
    }
}

/// The two factors `∫σ_p/σ_q dv_g` and `∫σ_k/σ_l dv_ḡ`.
pub fn factors(spec: &FunctionalSpec, sigmas: &[ScalarField], g: &MetricField, bg: &MetricField) -> Result<(f64, f64)> {
    spec.check_chart(g)?;
    g.field().check_same_chart(bg.field())?;
    let t = &spec.indices;
    let own = if t.p == t.q {
        volume(g)
    } else {
        integrate(&quotient_from_sigmas(sigmas, t.p, t.q)?, g)?
    };
    let fixed = integrate(&quotient_from_sigmas(sigmas, t.k, t.l)?, bg)?;
    Ok((own, fixed))
}

fn combine(spec: &FunctionalSpec, own: f64, fixed: f64) -> Result<f64> {
    if spec.beta < 0 && !(fixed > 0.0) {
        return Err(LabError::Degeneracy(format!(
            "fixed-background factor {fixed:.6e} is not positive while β = {} < 0",
            spec.beta
        )));
    }
    let v = own.powi(spec.alpha) * fixed.powi(spec.beta);
    if !v.is_finite() {
        return Err(LabError::Degeneracy(format!("functional is not finite (factors {own:.6e}, {fixed:.6e})")));
    }
    Ok(v)
}

/// `H(g)` from a precomputed curvature pack.
pub fn h_eval(spec: &FunctionalSpec, g: &MetricField, pack: &CurvaturePack, bg: &MetricField) -> Result<f64> {
    let sigmas = sigma_fields(g, pack, g.n())?;
    let (own, fixed) = factors(spec, &sigmas, g, bg)?;
    combine(spec, own, fixed)
}

/// `H(g)`, computing the curvature of `g`.
pub fn h_of_metric(spec: &FunctionalSpec, g: &MetricField, bg: &MetricField) -> Result<f64> {
    h_eval(spec, g, &curvature_pack_lean(g)?, bg)
}

/// `H` at a cached path sample.
pub fn h_of_sample(spec: &FunctionalSpec, s: &PathSample, bg: &MetricField) -> Result<f64> {
    let (own, fixed) = factors(spec, &s.sigmas, &s.metric, bg)?;
    combine(spec, own, fixed)
}

/// Compares `H(c² g)` with `H(g)` for every scale `c`.
pub fn scaling_invariance_check(spec: &FunctionalSpec, g: &MetricField, bg: &MetricField, scales: &[f64], tol: f64) -> Result<Report> {
    let base = h_of_metric(spec, g, bg)?;
    let mut report = Report::new("scaling_invariance");
    for &c in scales {
        if !(c != 0.0 && c.is_finite()) {
            return Err(LabError::Domain(format!("scale must be finite and non-zero, got {c}")));
        }
        let scaled = MetricField::new(g.field().scaled(c * c))?;
        let v = h_of_metric(spec, &scaled, bg)?;
        let rec = if c == 1.0 {
            CheckRecord::exact(format!("scaling_c={c}"), v, base)
        } else {
            CheckRecord::compare(format!("scaling_c={c}"), v, base, 0.0, tol)
        };
        report.push(rec.with_input("spec", spec.indices).with_input("c", c));
    }
    Ok(report)
}

/// Tolerances of [`criticality_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalityTolerances {
    /// Bound on `|dH/dt|` relative to `|H(ḡ)|`.
    pub derivative: f64,
    /// Relative tolerance of the two first-variation building blocks.
    pub blocks: f64,
}

impl Default for CriticalityTolerances {
    fn default() -> Self {
        Self { derivative: 1e-6, blocks: 1e-3 }
    }
}

/// `dH/dt` at `t = 0` along the path, and the two first variations
/// `D∫σ_k/σ_l dv_ḡ = -A_{kl}(k-l)/n ∫tr h` and
/// `D∫σ_p/σ_q dv_g = A_{pq}(n-2(p-q))/(2n) ∫tr h`.
pub fn criticality_check(spec: &FunctionalSpec, path: &PerturbationPath, tol: CriticalityTolerances) -> Result<Report> {
    let bg = path.background();
    let g0 = bg.metric();
    spec.check_chart(g0)?;
    let t = spec.indices;
    let (n, lambda) = (t.n as f64, spec.consts.lambda);
    let h = path.direction();
    let h0 = h_of_sample(spec, &*path.sample(0)?, g0)?;
    let dh = fd_functional_derivative(path, |s| h_of_sample(spec, s, g0), 1)?;
    let mut report = Report::new("criticality");
    report.push(
        CheckRecord::compare("criticality_dH", dh.value, 0.0, h0.abs(), tol.derivative)
            .with_input("spec", t)
            .with_input("H0", format!("{h0:.17e}"))
            .with_fd_error(dh.error / h0.abs()),
    );

    let tr = crate::geom::operators::trace(g0, h)?;
    let int_tr = integrate(&tr, g0)?;
    let int_abs_tr = integrate(&tr.map(f64::abs), g0)?;
    let (_, r_mag) = r_prime_integrals(bg, h)?;
    let rp = (n * (n - 1.0) * lambda).recip();

    let akl = spec.consts.a(t.k, t.l);
    let dfixed = fd_functional_derivative(path, |s| factors(spec, &s.sigmas, &s.metric, g0).map(|f| f.1), 1)?;
    let kl = (t.k - t.l) as f64;
    let expect_fixed = -akl * kl / n * int_tr;
    let scale_fixed = akl * kl * rp * r_mag;
    report.push(
        CheckRecord::compare("fixed_background_first_variation", dfixed.value, expect_fixed, scale_fixed, tol.blocks)
            .with_fd_error(dfixed.error / scale_fixed.max(f64::MIN_POSITIVE)),
    );

    let apq = spec.consts.a(t.p, t.q);
    let down = fd_functional_derivative(path, |s| factors(spec, &s.sigmas, &s.metric, g0).map(|f| f.0), 1)?;
    let pq = (t.p - t.q) as f64;
    let expect_own = apq * (n - 2.0 * pq) / (2.0 * n) * int_tr;
    let scale_own = apq * (pq * rp * r_mag + 0.5 * int_abs_tr);
    report.push(
        CheckRecord::compare("own_volume_first_variation", down.value, expect_own, scale_own, tol.blocks)
            .with_fd_error(down.error / scale_own.max(f64::MIN_POSITIVE)),
    );
    Ok(report)
}

/// The closed-form second variation and its four bracketed terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondVariation {
    /// `D²H(ḡ)(h, h)`.
    pub value: f64,
    /// `H(ḡ)`.
    pub h0: f64,
    pub volume: f64,
    /// The four terms inside the braces, in order: `|Δ_E h̊|²`,
    /// `h̊ · Δ_E h̊`, the Bochner bracket and the Obata bracket.
    pub terms: [f64; 4],
}

impl SecondVariation {
    /// `H(ḡ)^{-1} Vol D²H`.
    pub fn normalized(&self) -> f64 {
        self.value * self.volume / self.h0
    }
}

/// `D²H(ḡ)(h, h)` for `h ∈ TT ⊕ C^∞ ḡ`. A non-negligible trace-free part
/// must carry a TT certificate.
pub fn second_variation_analytic(spec: &FunctionalSpec, bg: &Background, h: &Sym2Field) -> Result<SecondVariation> {
    let g = bg.metric();
    spec.check_chart(g)?;
    let t = spec.indices;
    let (n, k, l, p, q) = (t.n as f64, t.k as f64, t.l as f64, t.p as f64, t.q as f64);
    let lambda = spec.consts.lambda;
    let (a, b) = (spec.alpha as f64, spec.beta as f64);
    let ti = trace_split_integrals(bg, h)?;
    let h0 = h_eval(spec, g, bg.pack(), g)?;
    let vol = volume(g);
    let terms = [
        -a * (b * (k + l) + 2.0 * (p * p - q * q) - n) / (2.0 * n * (n - 1.0) * (n - 2.0).powi(2) * lambda * lambda)
            * ti.einstein_sq,
        a / (4.0 * (n - 1.0) * lambda) * ti.hc_einstein,
        -a * (2.0 * (p - q) * (q - l) + n * l) / (n.powi(4) * lambda * lambda) * (ti.lap_tr_sq - n * lambda * ti.grad_tr_sq),
        -a * b * (a + b) / (4.0 * n.powi(3) * lambda) * (ti.grad_tr_sq - n * lambda * ti.tr_var),
    ];
    Ok(SecondVariation { value: h0 / vol * terms.iter().sum::<f64>(), h0, volume: vol, terms })
}

/// Finite-difference `d²H/dt²` at `t = 0` against
/// [`second_variation_analytic`], within `tol · max(|analytic|, 1e-6 |H(ḡ)|)`.
pub fn second_variation_fd_compare(spec: &FunctionalSpec, path: &PerturbationPath, tol: f64) -> Result<Report> {
    let bg = path.background();
    let g0 = bg.metric();
    let analytic = second_variation_analytic(spec, bg, path.direction())?;
    let fd = fd_functional_derivative(path, |s| h_of_sample(spec, s, g0), 2)?;
    let floor = 1e-6 * analytic.h0.abs();
    let denom = analytic.value.abs().max(floor);
    let mut report = Report::new("second_variation");
    report.push(
        CheckRecord::compare("second_variation_fd", fd.value, analytic.value, floor, tol)
            .with_input("spec", spec.indices)
            .with_input("normalized_analytic", format!("{:.17e}", analytic.normalized()))
            .with_fd_error(fd.error / denom),
    );
    Ok(report)
}
