//! Natural differential operators of a metric on scalar, covector and
//! symmetric 2-tensor fields.

use super::chart::{Chart, MAX_DIM};
use super::curvature::{curvature_pack, CurvaturePack};
use super::field::{covector_parities, sym_index, sym_parities, CovectorField, GridField, MetricField, ScalarField, Sym2Field};
use super::stencil::{diff_axis, local_first, local_second, Derivative};
use crate::error::{LabError, Result};
use rayon::prelude::*;
use std::sync::Arc;

/// A metric together with its curvature.
#[derive(Debug, Clone)]
pub struct Background {
    metric: MetricField,
    pack: CurvaturePack,
}

impl Background {
    pub fn new(metric: MetricField) -> Result<Self> {
        let pack = curvature_pack(&metric)?;
        Ok(Self { metric, pack })
    }

    /// Round metric of the chart.
    pub fn round(chart: &Arc<Chart>) -> Result<Self> {
        Self::new(MetricField::round(chart))
    }

    pub fn metric(&self) -> &MetricField {
        &self.metric
    }
    pub fn pack(&self) -> &CurvaturePack {
        &self.pack
    }
    pub fn chart(&self) -> &Arc<Chart> {
        self.metric.chart()
    }
    pub fn n(&self) -> usize {
        self.metric.n()
    }
    pub fn lambda(&self) -> f64 {
        self.chart().lambda()
    }

    fn check(&self, f: &impl GridField) -> Result<()> {
        f.check_same_chart(self.metric.field())
    }
}

fn full_mask(n: usize) -> u32 {
    (1u32 << n) - 1
}

/// Coordinate differential `∂_i u`.
pub fn gradient(u: &ScalarField) -> CovectorField {
    let chart = u.chart();
    let n = chart.n();
    let parts: Vec<Vec<f64>> = (0..n).map(|a| diff_axis(chart, &u.values, 1, &[0], a, Derivative::First)).collect();
    CovectorField::from_fn(chart, |k, out| {
        for a in 0..n {
            out[a] = parts[a][k];
        }
    })
}

/// Index-raised covector `g^{ij} ω_j` (stored with the same layout).
pub fn raise(g: &MetricField, w: &CovectorField) -> Result<CovectorField> {
    w.check_same_chart(g.field())?;
    let n = g.n();
    Ok(CovectorField::from_fn(g.chart(), |k, out| {
        let gi = g.inverse_at(k);
        let wk = w.node(k);
        for i in 0..n {
            out[i] = (0..n).map(|j| gi[sym_index(n, i, j)] * wk[j]).sum();
        }
    }))
}

/// `g^{ij} a_i b_j`.
pub fn inner_covector(g: &MetricField, a: &CovectorField, b: &CovectorField) -> Result<ScalarField> {
    a.check_same_chart(g.field())?;
    b.check_same_chart(g.field())?;
    let n = g.n();
    Ok(ScalarField::from_fn(g.chart(), |k| {
        let gi = g.inverse_at(k);
        let (x, y) = (a.node(k), b.node(k));
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += gi[sym_index(n, i, j)] * x[i] * y[j];
            }
        }
        s
    }))
}

/// `|∇u|²_g = g^{ij} ∂_i u ∂_j u`.
pub fn grad_norm_sq(g: &MetricField, u: &ScalarField) -> Result<ScalarField> {
    u.check_same_chart(g.field())?;
    let du = gradient(u);
    inner_covector(g, &du, &du)
}

/// Divergence of a covector, `(1/√det g) ∂_i(√det g g^{ij} ω_j)`.
pub fn divergence_covector(g: &MetricField, w: &CovectorField) -> Result<ScalarField> {
    w.check_same_chart(g.field())?;
    let chart = g.chart();
    let n = chart.n();
    let raised = raise(g, w)?;
    let flux: Vec<f64> = raised
        .data
        .par_chunks(n)
        .enumerate()
        .flat_map_iter(|(k, v)| {
            let rho = g.sqrt_det(k);
            v.iter().map(move |x| rho * x).collect::<Vec<_>>()
        })
        .collect();
    let full = full_mask(n);
    let parity: Vec<u32> = covector_parities(n).into_iter().map(|p| p ^ full).collect();
    let mut acc = vec![0.0; chart.len()];
    for a in 0..n {
        let comp: Vec<f64> = flux.iter().skip(a).step_by(n).copied().collect();
        let d = diff_axis(chart, &comp, 1, &parity[a..a + 1], a, Derivative::First);
        acc.iter_mut().zip(d).for_each(|(s, x)| *s += x);
    }
    Ok(ScalarField::from_fn(chart, |k| acc[k] / g.sqrt_det(k)))
}

/// Laplace–Beltrami operator in divergence form,
/// `Δu = (1/√det g) ∂_i(√det g g^{ij} ∂_j u)`.
pub fn laplace_scalar(g: &MetricField, u: &ScalarField) -> Result<ScalarField> {
    u.check_same_chart(g.field())?;
    divergence_covector(g, &gradient(u))
}

/// Hessian `∇²u_{ij} = ∂_i∂_j u - Γ^m_{ij} ∂_m u`.
pub fn hessian(bg: &Background, u: &ScalarField) -> Result<Sym2Field> {
    bg.check(u)?;
    let chart = bg.chart();
    let n = chart.n();
    let pack = bg.pack();
    let c = chart.nsym();
    let mut data = vec![0.0; chart.len() * c];
    data.par_chunks_mut(c).enumerate().for_each_init(
        || (vec![0.0; n], vec![0.0; n * n]),
        |(d1, d2), (k, out)| {
            local_first(chart, &u.values, 1, &[0], k, d1);
            local_second(chart, &u.values, 1, &[0], k, d2);
            let gam = pack.christoffel_local(k);
            for i in 0..n {
                for j in i..n {
                    let mut v = d2[i * n + j];
                    for m in 0..n {
                        v -= gam[m][i][j] * d1[m];
                    }
                    out[sym_index(n, i, j)] = v;
                }
            }
        },
    );
    Ok(Sym2Field::from_raw(chart.clone(), data))
}

/// `tr_g h = g^{ij} h_{ij}`.
pub fn trace(g: &MetricField, h: &Sym2Field) -> Result<ScalarField> {
    h.check_same_chart(g.field())?;
    let n = g.n();
    Ok(ScalarField::from_fn(g.chart(), |k| {
        let gi = g.inverse_at(k);
        let hk = h.node(k);
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += gi[sym_index(n, i, j)] * hk[sym_index(n, i, j)];
            }
        }
        s
    }))
}

/// Trace-free part `h - (tr_g h / n) g`.
pub fn trace_free(g: &MetricField, h: &Sym2Field) -> Result<Sym2Field> {
    let tr = trace(g, h)?;
    let n = g.n() as f64;
    let part = g.field().times(&tr)?;
    h.axpy(-1.0 / n, &part)
}

/// Pointwise `⟨a, b⟩_g = g^{ik} g^{jl} a_{ij} b_{kl}`.
pub fn inner_sym2(g: &MetricField, a: &Sym2Field, b: &Sym2Field) -> Result<ScalarField> {
    a.check_same_chart(g.field())?;
    b.check_same_chart(g.field())?;
    let n = g.n();
    Ok(ScalarField::from_fn(g.chart(), |k| {
        let gi = g.inverse_matrix(k);
        let am = a.matrix(k);
        let bm = b.matrix(k);
        let x = gi.mul(&am).mul(&gi);
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += x.a[i][j] * bm.a[i][j];
            }
        }
        s
    }))
}

/// Raised tensor `h^{ij} = g^{ia} g^{jb} h_{ab}` at a node.
fn raised_local(g: &MetricField, h: &Sym2Field, k: usize) -> [[f64; MAX_DIM]; MAX_DIM] {
    let n = g.n();
    let gi = g.inverse_matrix(k);
    let x = gi.mul(&h.matrix(k)).mul(&gi);
    let mut out = [[0.0; MAX_DIM]; MAX_DIM];
    for i in 0..n {
        for j in 0..n {
            out[i][j] = x.a[i][j];
        }
    }
    out
}

/// Covariant derivative `T_{kij} = ∇_k h_{ij}` stored as `k * nsym + (ij)`.
fn covariant_derivative_sym2(bg: &Background, h: &Sym2Field) -> Vec<f64> {
    let chart = bg.chart();
    let n = chart.n();
    let c = chart.nsym();
    let parity = sym_parities(n);
    let pack = bg.pack();
    let mut data = vec![0.0; chart.len() * n * c];
    data.par_chunks_mut(n * c).enumerate().for_each_init(
        || vec![0.0; n * c],
        |d1, (node, out)| {
            local_first(chart, h.data(), c, &parity, node, d1);
            let gam = pack.christoffel_local(node);
            let hk = h.node(node);
            let hm = |i: usize, j: usize| hk[sym_index(n, i, j)];
            for k in 0..n {
                for i in 0..n {
                    for j in i..n {
                        let mut v = d1[k * c + sym_index(n, i, j)];
                        for m in 0..n {
                            v -= gam[m][k][i] * hm(m, j) + gam[m][k][j] * hm(i, m);
                        }
                        out[k * c + sym_index(n, i, j)] = v;
                    }
                }
            }
        },
    );
    data
}

fn t_parities(n: usize) -> Vec<u32> {
    let sp = sym_parities(n);
    (0..n).flat_map(|k| sp.iter().map(move |p| p ^ (1 << k))).collect()
}

/// Divergence `(δh)_i = g^{jk} ∇_k h_{ij}`.
pub fn divergence_sym2(bg: &Background, h: &Sym2Field) -> Result<CovectorField> {
    bg.check(h)?;
    let n = bg.n();
    let c = bg.chart().nsym();
    let t = covariant_derivative_sym2(bg, h);
    let g = bg.metric();
    Ok(CovectorField::from_fn(bg.chart(), |node, out| {
        let gi = g.inverse_at(node);
        let tk = &t[node * n * c..(node + 1) * n * c];
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                for k in 0..n {
                    s += gi[sym_index(n, j, k)] * tk[k * c + sym_index(n, i, j)];
                }
            }
            out[i] = s;
        }
    }))
}

/// Double divergence `δ²h = ∇^i ∇^j h_{ij}`.
pub fn double_divergence(bg: &Background, h: &Sym2Field) -> Result<ScalarField> {
    let d = divergence_sym2(bg, h)?;
    divergence_covector(bg.metric(), &d)
}

/// Action of the curvature tensor on symmetric 2-tensors,
/// `(R̊h)_{ij} = R_{kijl} h^{kl}`; it satisfies `R̊g = Ric`.
pub fn curvature_action(bg: &Background, h: &Sym2Field) -> Result<Sym2Field> {
    bg.check(h)?;
    let pack = bg.pack();
    if !pack.has_riemann() {
        return Err(LabError::Precondition("curvature pack lacks the Riemann tensor".into()));
    }
    let n = bg.n();
    let g = bg.metric();
    Ok(Sym2Field::from_fn(bg.chart(), |node, out| {
        let hu = raised_local(g, h, node);
        for i in 0..n {
            for j in i..n {
                let mut s = 0.0;
                for k in 0..n {
                    for l in 0..n {
                        s += pack.riemann(node, k, i, j, l).unwrap_or(0.0) * hu[k][l];
                    }
                }
                out[sym_index(n, i, j)] = s;
            }
        }
    }))
}

/// Rough Laplacian `(Δh)_{ij} = g^{kl} ∇_l ∇_k h_{ij}`.
pub fn rough_laplacian_sym2(bg: &Background, h: &Sym2Field) -> Result<Sym2Field> {
    bg.check(h)?;
    let chart = bg.chart();
    let n = chart.n();
    let c = chart.nsym();
    let t = covariant_derivative_sym2(bg, h);
    let tp = t_parities(n);
    let pack = bg.pack();
    let g = bg.metric();
    let mut data = vec![0.0; chart.len() * c];
    data.par_chunks_mut(c).enumerate().for_each_init(
        || vec![0.0; n * n * c],
        |dt, (node, out)| {
            local_first(chart, &t, n * c, &tp, node, dt);
            let gam = pack.christoffel_local(node);
            let gi = g.inverse_at(node);
            let tk = &t[node * n * c..(node + 1) * n * c];
            let tv = |k: usize, i: usize, j: usize| tk[k * c + sym_index(n, i, j)];
            for i in 0..n {
                for j in i..n {
                    let mut s = 0.0;
                    for k in 0..n {
                        for l in 0..n {
                            let gkl = gi[sym_index(n, k, l)];
                            if gkl == 0.0 {
                                continue;
                            }
                            let mut v = dt[l * n * c + k * c + sym_index(n, i, j)];
                            for m in 0..n {
                                v -= gam[m][l][k] * tv(m, i, j) + gam[m][l][i] * tv(k, m, j) + gam[m][l][j] * tv(k, i, m);
                            }
                            s += gkl * v;
                        }
                    }
                    out[sym_index(n, i, j)] = s;
                }
            }
        },
    );
    Ok(Sym2Field::from_raw(chart.clone(), data))
}

/// Einstein operator `Δ_E h = Δh + 2R̊h`.
pub fn einstein_operator(bg: &Background, h: &Sym2Field) -> Result<Sym2Field> {
    let rough = rough_laplacian_sym2(bg, h)?;
    let action = curvature_action(bg, h)?;
    rough.axpy(2.0, &action)
}

/// `∇_i X_j + ∇_j X_i`, the Lie derivative of `g` along the dual of `X`.
pub fn symmetrized_derivative(bg: &Background, x: &CovectorField) -> Result<Sym2Field> {
    bg.check(x)?;
    let chart = bg.chart();
    let n = chart.n();
    let parity = covector_parities(n);
    let pack = bg.pack();
    let c = chart.nsym();
    let mut data = vec![0.0; chart.len() * c];
    data.par_chunks_mut(c).enumerate().for_each_init(
        || vec![0.0; n * n],
        |d1, (node, out)| {
            local_first(chart, &x.data, n, &parity, node, d1);
            let gam = pack.christoffel_local(node);
            let xk = x.node(node);
            for i in 0..n {
                for j in i..n {
                    let mut v = d1[i * n + j] + d1[j * n + i];
                    for m in 0..n {
                        v -= 2.0 * gam[m][i][j] * xk[m];
                    }
                    out[sym_index(n, i, j)] = v;
                }
            }
        },
    );
    Ok(Sym2Field::from_raw(chart.clone(), data))
}

/// Conformal Killing operator `∇_i X_j + ∇_j X_i - (2/n)(div X) g_{ij}`.
pub fn conformal_killing(bg: &Background, x: &CovectorField) -> Result<Sym2Field> {
    let sym = symmetrized_derivative(bg, x)?;
    trace_free(bg.metric(), &sym)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::chart::FdOrder;

    fn s3(res: usize) -> Background {
        let chart = Arc::new(Chart::new(3, 1.0, &[res; 3], FdOrder::Eighth).unwrap());
        Background::round(&chart).unwrap()
    }

    fn collar_max(bg: &Background, f: impl Fn(usize) -> f64) -> f64 {
        bg.chart().collar_nodes().into_iter().map(f).fold(0.0, f64::max)
    }

    #[test]
    fn laplacian_of_height_function() {
        let bg = s3(24);
        let u = ScalarField::from_fn(bg.chart(), |k| bg.chart().node_angles(k)[0].cos());
        let lu = laplace_scalar(bg.metric(), &u).unwrap();
        let err = collar_max(&bg, |k| (lu.values[k] + 3.0 * u.values[k]).abs());
        assert!(err < 1e-5, "{err}");
        let hs = hessian(&bg, &u).unwrap();
        let tr = trace(bg.metric(), &hs).unwrap();
        let err = collar_max(&bg, |k| (tr.values[k] - lu.values[k]).abs());
        assert!(err < 1e-5, "{err}");
    }

    #[test]
    fn metric_is_parallel_and_einstein() {
        let bg = s3(16);
        let g = bg.metric().field().clone();
        let d = divergence_sym2(&bg, &g).unwrap();
        assert!(collar_max(&bg, |k| d.node(k).iter().fold(0.0f64, |m, x| m.max(x.abs()))) < 1e-10);
        let e = einstein_operator(&bg, &g).unwrap();
        let want = g.scaled(4.0);
        let diff = e.axpy(-1.0, &want).unwrap();
        let err = collar_max(&bg, |k| diff.node(k).iter().fold(0.0f64, |m, x| m.max(x.abs())));
        assert!(err < 1e-4, "{err}");
    }

    #[test]
    fn chart_mismatch_is_rejected() {
        let a = s3(8);
        let b = s3(8);
        let u = ScalarField::constant(b.chart(), 1.0);
        assert_eq!(laplace_scalar(a.metric(), &u).unwrap_err(), LabError::ChartMismatch);
        assert_eq!(hessian(&a, &u).unwrap_err(), LabError::ChartMismatch);
    }
}
