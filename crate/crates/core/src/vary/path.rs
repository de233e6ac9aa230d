//! Metric paths `g_t = ḡ + t h` and central finite differences along them.

use crate::curv::sigma_fields;
use crate::error::{LabError, Result};
use crate::geom::{curvature_pack_lean, Background, CurvaturePack, GridField, MetricField, ScalarField, Sym2Field};
use crate::linalg::relative_eigenvalues;
use rayon::prelude::*;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// Central difference stencil width.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stencil {
    ThreePoint,
    FivePoint,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathOptions {
    pub t_step: f64,
    pub stencil: Stencil,
    pub richardson: bool,
    /// Largest admissible `|t| · sup_x ‖h‖_ḡ` over the stencil.
    pub amplitude_cap: f64,
    /// Smallest admissible eigenvalue of `ḡ^{-1} g_t`.
    pub min_eig_ratio: f64,
}

impl Default for PathOptions {
    fn default() -> Self {
        Self {
            t_step: 5e-3,
            stencil: Stencil::FivePoint,
            richardson: true,
            amplitude_cap: 0.05,
            min_eig_ratio: 0.1,
        }
    }
}

/// Metric and curvature at one point of a path.
#[derive(Debug)]
pub struct PathSample {
    pub t: f64,
    pub metric: MetricField,
    pub pack: CurvaturePack,
    /// `σ_0 ..= σ_n` of the Schouten endomorphism.
    pub sigmas: Vec<ScalarField>,
}

/// The straight path `g_t = ḡ + t h` with cached samples.
///
/// Samples live on the lattice `t = m · t_step / 2`, so all stencils and both
/// Richardson step sizes share evaluations.
#[derive(Debug)]
pub struct PerturbationPath {
    bg: Arc<Background>,
    h: Sym2Field,
    opts: PathOptions,
    amplitude: f64,
    cache: Mutex<HashMap<i64, Arc<PathSample>>>,
}

/// Largest `|eigenvalue|` of `ḡ^{-1} h` over all nodes.
pub fn operator_norm(bg: &Background, h: &Sym2Field) -> Result<f64> {
    h.check_same_chart(bg.metric().field())?;
    let g = bg.metric();
    let mut sup: f64 = 0.0;
    for k in 0..bg.chart().len() {
        let eig = relative_eigenvalues(&g.field().matrix(k), &h.matrix(k))
            .ok_or_else(|| LabError::Domain(format!("background not positive definite at node {k}")))?;
        sup = eig.iter().fold(sup, |m, e| m.max(e.abs()));
    }
    Ok(sup)
}

impl PerturbationPath {
    pub fn new(bg: Arc<Background>, h: Sym2Field, opts: PathOptions) -> Result<Self> {
        if !(opts.t_step > 0.0 && opts.t_step.is_finite()) {
            return Err(LabError::Domain(format!("t_step must be positive, got {}", opts.t_step)));
        }
        if !(opts.amplitude_cap > 0.0) {
            return Err(LabError::Domain(format!("amplitude cap must be positive, got {}", opts.amplitude_cap)));
        }
        let amplitude = operator_norm(&bg, &h)?;
        let path = Self { bg, h, opts, amplitude, cache: Mutex::new(HashMap::new()) };
        let reach = path.max_units() as f64 * opts.t_step / 2.0;
        if amplitude * reach > opts.amplitude_cap {
            return Err(LabError::Amplitude(format!(
                "|t| ‖h‖ reaches {:.3e} > cap {:.3e}; rescale h or reduce t_step",
                amplitude * reach,
                opts.amplitude_cap
            )));
        }
        Ok(path)
    }

    /// Path with default options.
    pub fn with_defaults(bg: Arc<Background>, h: Sym2Field) -> Result<Self> {
        Self::new(bg, h, PathOptions::default())
    }

    pub fn background(&self) -> &Arc<Background> {
        &self.bg
    }
    pub fn direction(&self) -> &Sym2Field {
        &self.h
    }
    pub fn options(&self) -> &PathOptions {
        &self.opts
    }
    /// `sup_x ‖h‖_ḡ` as an operator norm.
    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    fn max_units(&self) -> i64 {
        match self.opts.stencil {
            Stencil::ThreePoint if self.opts.richardson => 2,
            _ => 4,
        }
    }

    /// The metric `ḡ + t h`, checked against the eigenvalue floor.
    pub fn metric_at(&self, t: f64) -> Result<MetricField> {
        let g = self.bg.metric().field().axpy(t, &self.h)?;
        let bgm = self.bg.metric().field();
        for k in 0..g.chart().len() {
            let eig = relative_eigenvalues(&bgm.matrix(k), &g.matrix(k));
            let min = eig.map(|e| e.into_iter().fold(f64::INFINITY, f64::min)).unwrap_or(f64::NEG_INFINITY);
            if !(min >= self.opts.min_eig_ratio) {
                return Err(LabError::Amplitude(format!(
                    "g_t at t = {t} has relative eigenvalue {min:.3e} < {} at node {k}",
                    self.opts.min_eig_ratio
                )));
            }
        }
        MetricField::new(g)
    }

    /// Sample at `t = units · t_step / 2`.
    pub fn sample(&self, units: i64) -> Result<Arc<PathSample>> {
        if let Some(s) = self.cache.lock().expect("cache lock").get(&units) {
            return Ok(s.clone());
        }
        let t = units as f64 * self.opts.t_step / 2.0;
        let metric = self.metric_at(t)?;
        let pack = curvature_pack_lean(&metric)?;
        let sigmas = sigma_fields(&metric, &pack, metric.n())?;
        let sample = Arc::new(PathSample { t, metric, pack, sigmas });
        self.cache.lock().expect("cache lock").insert(units, sample.clone());
        Ok(sample)
    }

    fn units_needed(&self) -> Vec<i64> {
        match (self.opts.stencil, self.opts.richardson) {
            (Stencil::ThreePoint, true) => vec![-2, -1, 0, 1, 2],
            (Stencil::ThreePoint, false) | (Stencil::FivePoint, false) => vec![-4, -2, 0, 2, 4],
            (Stencil::FivePoint, true) => vec![-4, -2, -1, 0, 1, 2, 4],
        }
    }

    /// Evaluates `f` on every stencil sample and returns the node-wise
    /// derivative of the given order with an error estimate.
    pub fn derivative(&self, order: u32, f: impl Fn(&PathSample) -> Result<Vec<f64>> + Sync) -> Result<FdEstimate> {
        if !(order == 1 || order == 2) {
            return Err(LabError::Domain(format!("derivative order must be 1 or 2, got {order}")));
        }
        let units = self.units_needed();
        let values: Vec<Vec<f64>> = units
            .par_iter()
            .map(|&u| self.sample(u).and_then(|s| f(&s)))
            .collect::<Result<_>>()?;
        let len = values[0].len();
        if values.iter().any(|v| v.len() != len) {
            return Err(LabError::Domain("field map returned inconsistent lengths".into()));
        }
        let at = |u: i64| &values[units.iter().position(|&x| x == u).expect("stencil unit")];
        let s = self.opts.t_step;
        let mut out = FdEstimate { values: vec![0.0; len], error: vec![0.0; len] };
        for i in 0..len {
            let v = |u: i64| at(u)[i];
            let (d, e) = match (self.opts.stencil, self.opts.richardson) {
                (Stencil::ThreePoint, true) => {
                    let coarse = three(order, s, v(-2), v(0), v(2));
                    let fine = three(order, s / 2.0, v(-1), v(0), v(1));
                    ((4.0 * fine - coarse) / 3.0, (fine - coarse).abs() / 3.0)
                }
                (Stencil::ThreePoint, false) => {
                    let fine = three(order, s, v(-2), v(0), v(2));
                    let coarse = three(order, 2.0 * s, v(-4), v(0), v(4));
                    (fine, (fine - coarse).abs() / 3.0)
                }
                (Stencil::FivePoint, false) => {
                    let d5 = five(order, s, [v(-4), v(-2), v(0), v(2), v(4)]);
                    let d3 = three(order, s, v(-2), v(0), v(2));
                    (d5, (d5 - d3).abs())
                }
                (Stencil::FivePoint, true) => {
                    let coarse = five(order, s, [v(-4), v(-2), v(0), v(2), v(4)]);
                    let fine = five(order, s / 2.0, [v(-2), v(-1), v(0), v(1), v(2)]);
                    ((16.0 * fine - coarse) / 15.0, (fine - coarse).abs() / 15.0)
                }
            };
            out.values[i] = d;
            out.error[i] = e;
        }
        Ok(out)
    }

    /// Drops cached samples.
    pub fn clear_cache(&self) {
        self.cache.lock().expect("cache lock").clear();
    }
}

fn three(order: u32, s: f64, m: f64, z: f64, p: f64) -> f64 {
    if order == 1 {
        (p - m) / (2.0 * s)
    } else {
        (p - 2.0 * z + m) / (s * s)
    }
}

fn five(order: u32, s: f64, f: [f64; 5]) -> f64 {
    if order == 1 {
        (f[0] - 8.0 * f[1] + 8.0 * f[3] - f[4]) / (12.0 * s)
    } else {
        (-f[0] + 16.0 * f[1] - 30.0 * f[2] + 16.0 * f[3] - f[4]) / (12.0 * s * s)
    }
}

/// Node-wise finite-difference derivative with its error estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct FdEstimate {
    pub values: Vec<f64>,
    pub error: Vec<f64>,
}

/// Scalar finite-difference derivative with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdScalar {
    pub value: f64,
    pub error: f64,
}

/// Derivative of `t ↦ F(g_t)` at `t = 0`.
pub fn fd_functional_derivative(
    path: &PerturbationPath,
    f: impl Fn(&PathSample) -> Result<f64> + Sync,
    order: u32,
) -> Result<FdScalar> {
    let est = path.derivative(order, |s| Ok(vec![f(s)?]))?;
    Ok(FdScalar { value: est.values[0], error: est.error[0] })
}

/// Node-wise derivative of a field-valued map along the path. The map
/// returns the raw component data of a grid field.
pub fn fd_field_variation(
    path: &PerturbationPath,
    field_map: impl Fn(&PathSample) -> Result<Vec<f64>> + Sync,
    order: u32,
) -> Result<FdEstimate> {
    path.derivative(order, field_map)
}
