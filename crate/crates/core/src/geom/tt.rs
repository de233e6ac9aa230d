//! Transverse-traceless diagnostics and a best-effort TT projection.

use super::field::{sym_index, CovectorField, GridField, Sym2Field};
use super::operators::{conformal_killing, divergence_sym2, trace, trace_free, Background};
use crate::error::{LabError, Result};

/// Relative size below which a tensor counts as numerically zero.
const NEGLIGIBLE: f64 = 1e-12;

/// Sup-norms of trace and divergence over the pole collar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TtDiagnostics {
    pub trace_sup: f64,
    pub div_sup: f64,
}

pub fn tt_diagnostics(bg: &Background, h: &Sym2Field) -> Result<TtDiagnostics> {
    let tr = trace(bg.metric(), h)?;
    let div = divergence_sym2(bg, h)?;
    let n = bg.n();
    let g = bg.metric();
    let mut out = TtDiagnostics { trace_sup: 0.0, div_sup: 0.0 };
    for k in bg.chart().collar_nodes() {
        out.trace_sup = out.trace_sup.max(tr.values[k].abs());
        let gi = g.inverse_at(k);
        let d = div.node(k);
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += gi[sym_index(n, i, j)] * d[i] * d[j];
            }
        }
        out.div_sup = out.div_sup.max(s.sqrt());
    }
    Ok(out)
}

/// Largest pointwise `g`-norm of `h` over the pole collar.
pub fn collar_sup_norm(bg: &Background, h: &Sym2Field) -> f64 {
    let g = bg.metric();
    bg.chart()
        .collar_nodes()
        .into_iter()
        .map(|k| {
            let gi = g.inverse_matrix(k);
            let x = gi.mul(&h.matrix(k));
            x.dot(&x.transpose()).abs().sqrt()
        })
        .fold(0.0, f64::max)
}

/// Accepts `h` as TT when trace and divergence are below `tol` relative to
/// the size of `h`. Tensors that are themselves negligible are rejected.
pub fn tt_certify(bg: &Background, h: &Sym2Field, tol: f64) -> Result<TtDiagnostics> {
    let scale = collar_sup_norm(bg, h);
    if scale < NEGLIGIBLE {
        return Err(LabError::Precondition("tensor is numerically zero; no TT certificate".into()));
    }
    let d = tt_diagnostics(bg, h)?;
    if d.trace_sup > tol * scale || d.div_sup > tol * scale {
        return Err(LabError::Precondition(format!(
            "not transverse-traceless: trace {:.3e}, divergence {:.3e}, size {:.3e}",
            d.trace_sup, d.div_sup, scale
        )));
    }
    Ok(d)
}

#[derive(Debug, Clone)]
pub struct TtProjection {
    pub field: Sym2Field,
    pub iterations: usize,
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    super::quadrature::pairwise_sum(&a.iter().zip(b).map(|(x, y)| x * y).collect::<Vec<_>>())
}

/// Removes the trace and a numerically solved gauge part `P X` from `h`,
/// where `P` is the conformal Killing operator and `X` solves
/// `δ(P X) = δ h̊` by preconditioned BiCGSTAB. Iteration stops once the
/// residual relative to `|δ h̊|` is below `tol` and the divergence of the
/// result is below `10 tol` relative to the size of `h`.
pub fn tt_project(bg: &Background, h: &Sym2Field, tol: f64, max_iter: usize) -> Result<TtProjection> {
    if !(tol > 0.0) {
        return Err(LabError::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let chart = bg.chart().clone();
    let n = chart.n();
    let g = bg.metric();
    let size = collar_sup_norm(bg, h);
    let hc = trace_free(g, h)?;
    let b = divergence_sym2(bg, &hc)?.data;
    let bnorm = dot(&b, &b).sqrt();
    if bnorm <= NEGLIGIBLE * (1.0 + h.sup_abs()) {
        return Ok(TtProjection { field: hc, iterations: 0, residual: 0.0 });
    }
    let apply = |x: &[f64]| -> Result<Vec<f64>> {
        let xf = CovectorField::from_raw(chart.clone(), x.to_vec());
        let px = conformal_killing(bg, &xf)?;
        Ok(divergence_sym2(bg, &px)?.data)
    };
    // Jacobi-style scaling from the principal symbol of the operator.
    let order = chart.order();
    let centre = order.second_weights()[order.half_width()].abs();
    let mut diag = vec![0.0; chart.len() * n];
    for k in 0..chart.len() {
        let gi = g.inverse_at(k);
        let base: f64 = (0..n).map(|a| gi[sym_index(n, a, a)] * centre / chart.spacing(a).powi(2)).sum();
        for i in 0..n {
            let extra = (1.0 - 2.0 / n as f64) * gi[sym_index(n, i, i)] * centre / chart.spacing(i).powi(2);
            diag[k * n + i] = 1.0 / (base + extra);
        }
    }
    let precond = |v: &[f64]| -> Vec<f64> { v.iter().zip(&diag).map(|(a, d)| a * d).collect() };

    let len = b.len();
    let mut x = vec![0.0; len];
    let mut r = b.clone();
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; len];
    let mut p = vec![0.0; len];
    let mut residual = 1.0;
    for it in 1..=max_iter {
        let rho_new = dot(&r_hat, &r);
        if rho_new.abs() < 1e-300 {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        for i in 0..len {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        let ph = precond(&p);
        v = apply(&ph)?;
        alpha = rho_new / dot(&r_hat, &v);
        let s: Vec<f64> = (0..len).map(|i| r[i] - alpha * v[i]).collect();
        let sh = precond(&s);
        let t = apply(&sh)?;
        let tt = dot(&t, &t);
        omega = if tt > 0.0 { dot(&t, &s) / tt } else { 0.0 };
        for i in 0..len {
            x[i] += alpha * ph[i] + omega * sh[i];
            r[i] = s[i] - omega * t[i];
        }
        rho = rho_new;
        residual = dot(&r, &r).sqrt() / bnorm;
        if residual < tol {
            let xf = CovectorField::from_raw(chart.clone(), x.clone());
            let field = hc.axpy(-1.0, &conformal_killing(bg, &xf)?)?;
            if tt_diagnostics(bg, &field)?.div_sup <= 10.0 * tol * size {
                return Ok(TtProjection { field, iterations: it, residual });
            }
        }
        if omega == 0.0 {
            break;
        }
    }
    Err(LabError::Convergence { iterations: max_iter, residual })
}
