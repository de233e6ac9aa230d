//! Fields induced from the ambient space `R^{n+1}` through the unit
//! embedding `Y(θ)`.
//!
//! Ambient coordinates are numbered `x_1 .. x_{n+1}` with
//! `x_{n+1} = cos θ_1`, `x_n = sin θ_1 cos θ_2`, …,
//! `x_2 = sin θ_1 ⋯ sin θ_{n-1} cos θ_n` and `x_1 = sin θ_1 ⋯ sin θ_n`.
//! Arrays use zero-based slots, so `x_a` lives in slot `a - 1`.

use super::chart::{Chart, MAX_DIM};
use super::field::{sym_index, CovectorField, ScalarField, Sym2Field};
use crate::error::{domain, Result};
use rand::Rng;
use std::sync::Arc;

pub const MAX_AMBIENT: usize = MAX_DIM + 1;

/// Unit embedding and its coordinate Jacobian at a node.
#[derive(Debug, Clone, Copy)]
pub struct Embedding {
    pub y: [f64; MAX_AMBIENT],
    /// `jac[a][i] = ∂_i y_a`.
    pub jac: [[f64; MAX_DIM]; MAX_AMBIENT],
}

impl Embedding {
    pub fn at(chart: &Chart, node: usize) -> Self {
        let n = chart.n();
        let th = chart.node_angles(node);
        let (s, c): (Vec<f64>, Vec<f64>) = (0..n).map(|a| (th[a].sin(), th[a].cos())).unzip();
        let mut y = [0.0; MAX_AMBIENT];
        let mut jac = [[0.0; MAX_DIM]; MAX_AMBIENT];
        // slot n - k holds ∏_{b<k} sin θ_b · cos θ_k (k < n); slot 0 holds ∏_{b<n} sin θ_b
        for k in 0..=n {
            let slot = n - k;
            let factor = |b: usize, deriv_at: Option<usize>| -> f64 {
                let d = deriv_at == Some(b);
                if b < k {
                    if d { c[b] } else { s[b] }
                } else if d {
                    -s[b]
                } else {
                    c[b]
                }
            };
            let last = if k < n { k + 1 } else { n };
            y[slot] = (0..last).map(|b| factor(b, None)).product();
            for i in 0..last {
                jac[slot][i] = (0..last).map(|b| factor(b, Some(i))).product();
            }
        }
        Self { y, jac }
    }
}

/// Scalar field `f(y)` for a function on the ambient space.
pub fn ambient_scalar(chart: &Arc<Chart>, f: impl Fn(&[f64]) -> f64 + Sync) -> ScalarField {
    let m = chart.n() + 1;
    ScalarField::from_fn(chart, |k| f(&Embedding::at(chart, k).y[..m]))
}

/// Pullback `h_ij = r² H_ab(y) ∂_i y_a ∂_j y_b` of an ambient symmetric
/// matrix field; `H = I` gives the round metric.
pub fn ambient_sym2(chart: &Arc<Chart>, f: impl Fn(&[f64], &mut [[f64; MAX_AMBIENT]; MAX_AMBIENT]) + Sync) -> Sym2Field {
    let n = chart.n();
    let m = n + 1;
    let r2 = chart.radius().powi(2);
    Sym2Field::from_fn(chart, |k, out| {
        let e = Embedding::at(chart, k);
        let mut h = [[0.0; MAX_AMBIENT]; MAX_AMBIENT];
        f(&e.y[..m], &mut h);
        for i in 0..n {
            for j in i..n {
                let mut v = 0.0;
                for a in 0..m {
                    for b in 0..m {
                        v += h[a][b] * e.jac[a][i] * e.jac[b][j];
                    }
                }
                out[sym_index(n, i, j)] = r2 * v;
            }
        }
    })
}

/// Covector `X_i = r² ∂_i y · V(y)` dual to the tangential part of an
/// ambient vector field scaled to the sphere of radius `r`.
pub fn ambient_covector(chart: &Arc<Chart>, f: impl Fn(&[f64]) -> [f64; MAX_AMBIENT] + Sync) -> CovectorField {
    let n = chart.n();
    let m = n + 1;
    let r2 = chart.radius().powi(2);
    CovectorField::from_fn(chart, |k, out| {
        let e = Embedding::at(chart, k);
        let v = f(&e.y[..m]);
        for i in 0..n {
            out[i] = r2 * (0..m).map(|a| e.jac[a][i] * v[a]).sum::<f64>();
        }
    })
}

/// Spherical harmonic generators in unit-normalized ambient coordinates:
/// degree 1 gives `x_index` (eigenvalue `nλ`), degree 2 gives
/// `x_index² - 1/(n+1)` (eigenvalue `2(n+1)λ`).
pub fn harmonic_generator(chart: &Arc<Chart>, degree: u32, index: usize) -> Result<ScalarField> {
    let n = chart.n();
    if !(1..=n + 1).contains(&index) {
        return domain(format!("ambient index must lie in 1..={}, got {index}", n + 1));
    }
    let slot = index - 1;
    match degree {
        1 => Ok(ambient_scalar(chart, |y| y[slot])),
        2 => {
            let shift = 1.0 / (n as f64 + 1.0);
            Ok(ambient_scalar(chart, move |y| y[slot] * y[slot] - shift))
        }
        _ => domain(format!("harmonic degree must be 1 or 2, got {degree}")),
    }
}

/// Polynomial on the ambient space.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbientPoly {
    dim: usize,
    terms: Vec<([u8; MAX_AMBIENT], f64)>,
}

impl AmbientPoly {
    pub fn new(dim: usize, terms: Vec<([u8; MAX_AMBIENT], f64)>) -> Self {
        Self { dim, terms }
    }

    /// Random polynomial of total degree `1..=degree` with coefficients in
    /// `[-1, 1]`, scaled so the sum of absolute coefficients is one.
    pub fn random(dim: usize, degree: u32, rng: &mut impl Rng) -> Self {
        let mut terms = Vec::new();
        for exps in monomials(dim, degree) {
            let total: u32 = exps.iter().map(|&e| e as u32).sum();
            if total == 0 {
                continue;
            }
            terms.push((exps, rng.gen_range(-1.0f64..=1.0)));
        }
        let norm: f64 = terms.iter().map(|t| t.1.abs()).sum();
        for t in &mut terms {
            t.1 /= norm;
        }
        Self { dim, terms }
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c * (0..self.dim).map(|a| y[a].powi(e[a] as i32)).product::<f64>())
            .sum()
    }

    pub fn gradient(&self, y: &[f64]) -> [f64; MAX_AMBIENT] {
        let mut g = [0.0; MAX_AMBIENT];
        for (e, c) in &self.terms {
            for a in 0..self.dim {
                if e[a] == 0 {
                    continue;
                }
                let mut v = c * e[a] as f64;
                for b in 0..self.dim {
                    let p = if b == a { e[b] as i32 - 1 } else { e[b] as i32 };
                    v *= y[b].powi(p);
                }
                g[a] += v;
            }
        }
        g
    }

    pub fn hessian(&self, y: &[f64]) -> [[f64; MAX_AMBIENT]; MAX_AMBIENT] {
        let mut h = [[0.0; MAX_AMBIENT]; MAX_AMBIENT];
        for (e, c) in &self.terms {
            for a in 0..self.dim {
                for b in 0..self.dim {
                    let mut p = [0i32; MAX_AMBIENT];
                    for d in 0..self.dim {
                        p[d] = e[d] as i32;
                    }
                    let mut v = *c;
                    v *= p[a] as f64;
                    p[a] -= 1;
                    v *= p[b] as f64;
                    p[b] -= 1;
                    if v == 0.0 {
                        continue;
                    }
                    for d in 0..self.dim {
                        v *= y[d].powi(p[d]);
                    }
                    h[a][b] += v;
                }
            }
        }
        h
    }

    pub fn field(&self, chart: &Arc<Chart>) -> ScalarField {
        ambient_scalar(chart, |y| self.eval(y))
    }

    /// Exact coordinate Hessian of the restriction with respect to the
    /// round metric: `D²U(∂_i y, ∂_j y) - (y · ∇U) ∂_i y · ∂_j y`.
    pub fn sphere_hessian(&self, chart: &Arc<Chart>) -> Sym2Field {
        let n = chart.n();
        let m = n + 1;
        Sym2Field::from_fn(chart, |k, out| {
            let e = Embedding::at(chart, k);
            let y = &e.y[..m];
            let hu = self.hessian(y);
            let gu = self.gradient(y);
            let radial: f64 = (0..m).map(|a| y[a] * gu[a]).sum();
            for i in 0..n {
                for j in i..n {
                    let mut v = 0.0;
                    let mut dot = 0.0;
                    for a in 0..m {
                        dot += e.jac[a][i] * e.jac[a][j];
                        for b in 0..m {
                            v += hu[a][b] * e.jac[a][i] * e.jac[b][j];
                        }
                    }
                    out[sym_index(n, i, j)] = v - radial * dot;
                }
            }
        })
    }
}

fn monomials(dim: usize, degree: u32) -> Vec<[u8; MAX_AMBIENT]> {
    let mut out = Vec::new();
    let mut cur = [0u8; MAX_AMBIENT];
    fn rec(slot: usize, dim: usize, left: u32, cur: &mut [u8; MAX_AMBIENT], out: &mut Vec<[u8; MAX_AMBIENT]>) {
        if slot == dim {
            out.push(*cur);
            return;
        }
        for e in 0..=left {
            cur[slot] = e as u8;
            rec(slot + 1, dim, left - e, cur, out);
        }
        cur[slot] = 0;
    }
    rec(0, dim, degree, &mut cur, &mut out);
    out
}
