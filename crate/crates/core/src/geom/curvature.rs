//! Christoffel symbols, Riemann, Ricci, scalar and Schouten curvature.
//!
//! Conventions: `R(X,Y)Z = ∇_X∇_Y Z - ∇_Y∇_X Z - ∇_{[X,Y]}Z`,
//! `R_{ijkl} = g_{ml} R^m_{ijk}`, `R_{jk} = g^{il} R_{ijkl}`, so the round
//! sphere has `R_{ijkl} = λ(g_{jk} g_{il} - g_{ik} g_{jl})`.

use super::chart::{Chart, MAX_DIM};
use super::field::{sym_index, sym_parities, GridField, MetricField, ScalarField, Sym2Field};
use super::stencil::{local_first, local_second};
use crate::error::{LabError, Result};
use rayon::prelude::*;
use std::sync::Arc;

/// Normalized-metric determinant below which a node counts as degenerate.
const CONDITIONING_FLOOR: f64 = 1e-12;

type Mat = [[f64; MAX_DIM]; MAX_DIM];

/// Curvature quantities of a metric at every node.
#[derive(Debug, Clone)]
pub struct CurvaturePack {
    chart: Arc<Chart>,
    christoffel: Vec<f64>,
    riemann: Option<Vec<f64>>,
    ricci: Sym2Field,
    scalar: ScalarField,
    schouten: Sym2Field,
}

/// Index of the antisymmetric pair `i < j` among `n(n-1)/2` pairs.
fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

fn npairs(n: usize) -> usize {
    n * (n - 1) / 2
}

impl CurvaturePack {
    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    /// `Γ^m_{ij}` at a node.
    pub fn christoffel(&self, node: usize, m: usize, i: usize, j: usize) -> f64 {
        let n = self.chart.n();
        let c = self.chart.nsym();
        self.christoffel[node * n * c + m * c + sym_index(n, i, j)]
    }

    /// All `Γ^m_{ij}` of a node, `[m][i][j]`.
    pub fn christoffel_local(&self, node: usize) -> [Mat; MAX_DIM] {
        let n = self.chart.n();
        let c = self.chart.nsym();
        let raw = &self.christoffel[node * n * c..(node + 1) * n * c];
        let mut out = [[[0.0; MAX_DIM]; MAX_DIM]; MAX_DIM];
        for m in 0..n {
            for i in 0..n {
                for j in 0..n {
                    out[m][i][j] = raw[m * c + sym_index(n, i, j)];
                }
            }
        }
        out
    }

    pub fn has_riemann(&self) -> bool {
        self.riemann.is_some()
    }

    /// `R_{ijkl}` at a node, if the full tensor was kept.
    pub fn riemann(&self, node: usize, i: usize, j: usize, k: usize, l: usize) -> Option<f64> {
        let rm = self.riemann.as_ref()?;
        if i == j || k == l {
            return Some(0.0);
        }
        let n = self.chart.n();
        let (a, sa) = if i < j { (pair_index(n, i, j), 1.0) } else { (pair_index(n, j, i), -1.0) };
        let (b, sb) = if k < l { (pair_index(n, k, l), 1.0) } else { (pair_index(n, l, k), -1.0) };
        let np = npairs(n);
        let width = np * (np + 1) / 2;
        Some(sa * sb * rm[node * width + sym_index(np, a, b)])
    }

    pub fn ricci(&self) -> &Sym2Field {
        &self.ricci
    }
    pub fn scalar(&self) -> &ScalarField {
        &self.scalar
    }
    pub fn schouten(&self) -> &Sym2Field {
        &self.schouten
    }
}

/// How metric derivatives are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Differencing {
    /// Finite differences of `g - κḡ` plus exact derivatives of `κḡ`, where
    /// `ḡ` is the chart's round metric and `κ` the node mean of `tr_ḡ g / n`.
    /// The choice of `κ` makes the result exactly covariant under `g ↦ c²g`.
    BackgroundSubtracted,
    /// Finite differences of `g` itself.
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CurvatureOptions {
    pub riemann: bool,
    pub differencing: Differencing,
}

impl Default for CurvatureOptions {
    fn default() -> Self {
        Self { riemann: true, differencing: Differencing::BackgroundSubtracted }
    }
}

/// Full curvature pack including the Riemann tensor.
pub fn curvature_pack(g: &MetricField) -> Result<CurvaturePack> {
    curvature_pack_with(g, CurvatureOptions::default())
}

/// Curvature pack without the Riemann tensor (Christoffel, Ricci, scalar, Schouten).
pub fn curvature_pack_lean(g: &MetricField) -> Result<CurvaturePack> {
    curvature_pack_with(g, CurvatureOptions { riemann: false, ..Default::default() })
}

pub fn curvature_pack_with(g: &MetricField, opts: CurvatureOptions) -> Result<CurvaturePack> {
    let keep_riemann = opts.riemann;
    let chart = g.chart().clone();
    let n = chart.n();
    let c = chart.nsym();
    let np = npairs(n);
    let wr = if keep_riemann { np * (np + 1) / 2 } else { 0 };
    let width = n * c + wr + c + 1 + c;
    let parity = sym_parities(n);
    let subtract = opts.differencing == Differencing::BackgroundSubtracted;
    let mut kappa = 0.0;
    let (data, parity): (Vec<f64>, Vec<u32>) = if subtract {
        let round = MetricField::round(&chart);
        kappa = background_scale(g, &round);
        (frame_difference(&chart, g, &round, kappa), frame_parities(n))
    } else {
        (g.field().data().to_vec(), parity)
    };
    let mut out = vec![0.0; chart.len() * width];
    let status: Vec<Result<()>> = out
        .par_chunks_mut(width)
        .enumerate()
        .map_init(
            || (vec![0.0; n * c], vec![0.0; n * n * c]),
            |(d1, d2), (node, rec)| {
                local_first(&chart, &data, c, &parity, node, d1);
                local_second(&chart, &data, c, &parity, node, d2);
                if subtract {
                    unframe_derivatives(&chart, &data[node * c..(node + 1) * c], node, d1, d2);
                    add_round_derivatives(&chart, kappa, node, d1, d2);
                }
                node_curvature(&chart, g, node, d1, d2, keep_riemann, rec)
            },
        )
        .collect();
    if let Some(err) = status.into_iter().find_map(|s| s.err()) {
        return Err(err);
    }
    let len = chart.len();
    let mut christoffel = vec![0.0; len * n * c];
    let mut riemann = if keep_riemann { Some(vec![0.0; len * wr]) } else { None };
    let mut ricci = vec![0.0; len * c];
    let mut scalar = vec![0.0; len];
    let mut schouten = vec![0.0; len * c];
    for (k, rec) in out.chunks(width).enumerate() {
        let (gam, rest) = rec.split_at(n * c);
        let (rm, rest) = rest.split_at(wr);
        let (ric, rest) = rest.split_at(c);
        christoffel[k * n * c..(k + 1) * n * c].copy_from_slice(gam);
        if let Some(r) = riemann.as_mut() {
            r[k * wr..(k + 1) * wr].copy_from_slice(rm);
        }
        ricci[k * c..(k + 1) * c].copy_from_slice(ric);
        scalar[k] = rest[0];
        schouten[k * c..(k + 1) * c].copy_from_slice(&rest[1..]);
    }
    Ok(CurvaturePack {
        christoffel,
        riemann,
        ricci: Sym2Field::from_raw(chart.clone(), ricci),
        scalar: ScalarField::from_raw(chart.clone(), scalar),
        schouten: Sym2Field::from_raw(chart.clone(), schouten),
        chart,
    })
}

/// `m_a` of the frame weight `w_ij = r² ∏_a sin^{m_a} θ_a`,
/// `m_a = [a < i] + [a < j]`, so that `w_ij = √(ḡ_ii ḡ_jj)`.
fn frame_exponent(a: usize, i: usize, j: usize) -> i32 {
    (a < i) as i32 + (a < j) as i32
}

/// `d^k/dθ^k sin^m θ` for `k <= 2`, `m <= 2`.
fn sin_power(m: i32, k: usize, s: f64, c: f64) -> f64 {
    match (m, k) {
        (0, 0) => 1.0,
        (0, _) => 0.0,
        (1, 0) => s,
        (1, 1) => c,
        (1, _) => -s,
        (_, 0) => s * s,
        (_, 1) => 2.0 * s * c,
        _ => 2.0 * (c * c - s * s),
    }
}

/// Reflection parities of orthonormal-frame components. The frame vector
/// `∂_c/√ḡ_cc` changes sign across the pole of axis `a` exactly when `a = c`
/// or `c` is the periodic axis, which the mask `bit(c) ^ bit(c-1)` encodes.
fn frame_parities(n: usize) -> Vec<u32> {
    let vector = |c: usize| -> u32 { (1 << c) ^ if c > 0 { 1 << (c - 1) } else { 0 } };
    let mut out = vec![0; n * (n + 1) / 2];
    for i in 0..n {
        for j in i..n {
            out[sym_index(n, i, j)] = vector(i) ^ vector(j);
        }
    }
    out
}

/// Frame components `(g_ij - κḡ_ij) / w_ij` of the difference to the scaled
/// round metric. They are smooth across the poles and free of the
/// `sin θ` factors of coordinate components.
fn frame_difference(chart: &Chart, g: &MetricField, round: &MetricField, kappa: f64) -> Vec<f64> {
    let n = chart.n();
    let c = chart.nsym();
    let mut out = vec![0.0; chart.len() * c];
    out.par_chunks_mut(c).enumerate().for_each(|(k, rec)| {
        for i in 0..n {
            for j in i..n {
                let s = sym_index(n, i, j);
                let w = (round.field().at(k, i, i) * round.field().at(k, j, j)).sqrt();
                rec[s] = (g.field().at(k, i, j) - kappa * round.field().at(k, i, j)) / w;
            }
        }
    });
    out
}

/// Turns derivatives of frame components `P_ij` into derivatives of
/// `w_ij P_ij` by the product rule with the exact derivatives of `w_ij`.
fn unframe_derivatives(chart: &Chart, p: &[f64], node: usize, d1: &mut [f64], d2: &mut [f64]) {
    let n = chart.n();
    let c = chart.nsym();
    let th = chart.node_angles(node);
    let r2 = chart.radius() * chart.radius();
    let (sn, cs): (Vec<f64>, Vec<f64>) = (0..n).map(|a| (th[a].sin(), th[a].cos())).unzip();
    for i in 0..n {
        for j in i..n {
            let s = sym_index(n, i, j);
            // w differentiated k_a times along each axis a
            let w_with = |orders: &[usize]| -> f64 {
                let mut v = r2;
                for a in 0..n {
                    let m = frame_exponent(a, i, j);
                    v *= sin_power(m, orders[a], sn[a], cs[a]);
                }
                v
            };
            let mut orders = [0usize; MAX_DIM];
            let w = w_with(&orders);
            let mut dw = [0.0; MAX_DIM];
            for a in 0..n {
                orders[a] = 1;
                dw[a] = w_with(&orders);
                orders[a] = 0;
            }
            let pv = p[s];
            let dp: Vec<f64> = (0..n).map(|a| d1[a * c + s]).collect();
            for a in 0..n {
                for b in 0..n {
                    orders[a] += 1;
                    orders[b] += 1;
                    let ddw = w_with(&orders);
                    orders[a] -= 1;
                    orders[b] -= 1;
                    let idx = (a * n + b) * c + s;
                    d2[idx] = ddw * pv + dw[a] * dp[b] + dw[b] * dp[a] + w * d2[idx];
                }
            }
            for a in 0..n {
                d1[a * c + s] = dw[a] * pv + w * dp[a];
            }
        }
    }
}

/// Node mean of `tr_ḡ g / n` for the diagonal round metric `ḡ`.
fn background_scale(g: &MetricField, round: &MetricField) -> f64 {
    let n = g.n();
    let len = g.chart().len();
    let sum: f64 = (0..len)
        .map(|k| (0..n).map(|i| g.field().at(k, i, i) / round.field().at(k, i, i)).sum::<f64>())
        .sum();
    sum / (n * len) as f64
}

/// Adds the exact first and second derivatives of the scaled round metric
/// `κḡ_ii = κr² ∏_{a<i} sin² θ_a` to packed derivative buffers.
fn add_round_derivatives(chart: &Chart, kappa: f64, node: usize, d1: &mut [f64], d2: &mut [f64]) {
    let n = chart.n();
    let c = chart.nsym();
    let th = chart.node_angles(node);
    let r2 = kappa * chart.radius() * chart.radius();
    let f0: Vec<f64> = (0..n).map(|a| th[a].sin().powi(2)).collect();
    let f1: Vec<f64> = (0..n).map(|a| (2.0 * th[a]).sin()).collect();
    let f2: Vec<f64> = (0..n).map(|a| 2.0 * (2.0 * th[a]).cos()).collect();
    for i in 1..n {
        let s = sym_index(n, i, i);
        let prod_except = |skip: &[usize]| -> f64 {
            (0..i).filter(|a| !skip.contains(a)).map(|a| f0[a]).product::<f64>() * r2
        };
        for a in 0..i {
            d1[a * c + s] += f1[a] * prod_except(&[a]);
            d2[(a * n + a) * c + s] += f2[a] * prod_except(&[a]);
            for b in a + 1..i {
                let v = f1[a] * f1[b] * prod_except(&[a, b]);
                d2[(a * n + b) * c + s] += v;
                d2[(b * n + a) * c + s] += v;
            }
        }
    }
}

fn check_conditioning(chart: &Chart, gm: &Mat, node: usize) -> Result<()> {
    let n = chart.n();
    let mut norm = [[0.0; MAX_DIM]; MAX_DIM];
    let diag: Vec<f64> = (0..n).map(|i| gm[i][i].abs().sqrt().max(f64::MIN_POSITIVE)).collect();
    for i in 0..n {
        for j in 0..n {
            norm[i][j] = gm[i][j] / (diag[i] * diag[j]);
        }
    }
    let m = crate::linalg::SmallMat::from_fn(n, |i, j| norm[i][j]);
    let det = m.cholesky().map(|l| (0..n).map(|i| l.a[i][i] * l.a[i][i]).product::<f64>()).unwrap_or(0.0);
    if det < CONDITIONING_FLOOR {
        let th = chart.node_angles(node);
        return Err(LabError::Conditioning { node, angles: th[..n].to_vec() });
    }
    Ok(())
}

fn node_curvature(chart: &Chart, g: &MetricField, node: usize, d1: &[f64], d2: &[f64], keep_riemann: bool, rec: &mut [f64]) -> Result<()> {
    let n = chart.n();
    let c = chart.nsym();
    let (gm, gi) = g.local(node);
    check_conditioning(chart, &gm, node)?;
    // dg[a][i][j] = ∂_a g_ij, ddg[a][b][i][j] = ∂_a ∂_b g_ij
    let mut dg = [[[0.0; MAX_DIM]; MAX_DIM]; MAX_DIM];
    let mut ddg = [[[[0.0; MAX_DIM]; MAX_DIM]; MAX_DIM]; MAX_DIM];
    for a in 0..n {
        for i in 0..n {
            for j in 0..n {
                let s = sym_index(n, i, j);
                dg[a][i][j] = d1[a * c + s];
                for b in 0..n {
                    ddg[a][b][i][j] = d2[(a * n + b) * c + s];
                }
            }
        }
    }
    // first kind Γ_{k,ij} = ½(∂_i g_jk + ∂_j g_ik - ∂_k g_ij)
    let mut g1 = [[[0.0; MAX_DIM]; MAX_DIM]; MAX_DIM];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                g1[k][i][j] = 0.5 * (dg[i][j][k] + dg[j][i][k] - dg[k][i][j]);
            }
        }
    }
    let mut g2 = [[[0.0; MAX_DIM]; MAX_DIM]; MAX_DIM];
    for m in 0..n {
        for i in 0..n {
            for j in 0..n {
                g2[m][i][j] = (0..n).map(|k| gi[m][k] * g1[k][i][j]).sum();
            }
        }
    }
    let riem = |i: usize, j: usize, k: usize, l: usize| -> f64 {
        let mut v = 0.5 * (ddg[i][k][j][l] - ddg[i][l][j][k] - ddg[j][k][i][l] + ddg[j][l][i][k]);
        for m in 0..n {
            v += -g1[m][i][l] * g2[m][j][k] + g1[m][j][l] * g2[m][i][k];
        }
        v
    };
    let np = npairs(n);
    let mut rp = [[0.0; 10]; 10];
    for i in 0..n {
        for j in i + 1..n {
            for k in 0..n {
                for l in k + 1..n {
                    rp[pair_index(n, i, j)][pair_index(n, k, l)] = riem(i, j, k, l);
                }
            }
        }
    }
    let full = |i: usize, j: usize, k: usize, l: usize| -> f64 {
        if i == j || k == l {
            return 0.0;
        }
        let (a, sa) = if i < j { (pair_index(n, i, j), 1.0) } else { (pair_index(n, j, i), -1.0) };
        let (b, sb) = if k < l { (pair_index(n, k, l), 1.0) } else { (pair_index(n, l, k), -1.0) };
        sa * sb * rp[a][b]
    };

    let (gam_out, rest) = rec.split_at_mut(n * c);
    for m in 0..n {
        for i in 0..n {
            for j in i..n {
                gam_out[m * c + sym_index(n, i, j)] = g2[m][i][j];
            }
        }
    }
    let wr = if keep_riemann { np * (np + 1) / 2 } else { 0 };
    let (rm_out, rest) = rest.split_at_mut(wr);
    if keep_riemann {
        for a in 0..np {
            for b in a..np {
                rm_out[sym_index(np, a, b)] = rp[a][b];
            }
        }
    }
    let (ric_out, rest) = rest.split_at_mut(c);
    let mut ric = [[0.0; MAX_DIM]; MAX_DIM];
    for j in 0..n {
        for k in j..n {
            let mut v = 0.0;
            for i in 0..n {
                for l in 0..n {
                    v += gi[i][l] * full(i, j, k, l);
                }
            }
            ric[j][k] = v;
            ric[k][j] = v;
            ric_out[sym_index(n, j, k)] = v;
        }
    }
    let mut r = 0.0;
    for j in 0..n {
        for k in 0..n {
            r += gi[j][k] * ric[j][k];
        }
    }
    rest[0] = r;
    let shift = r / (2.0 * (n as f64 - 1.0));
    for j in 0..n {
        for k in j..n {
            rest[1 + sym_index(n, j, k)] = ric[j][k] - shift * gm[j][k];
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::chart::FdOrder;

    fn round(n: usize, lambda: f64, res: usize, order: FdOrder) -> (Arc<Chart>, MetricField) {
        let chart = Arc::new(Chart::new(n, lambda, &vec![res; n], order).unwrap());
        let g = MetricField::round(&chart);
        (chart, g)
    }

    #[test]
    fn round_three_sphere_scalar_curvature() {
        let (chart, g) = round(3, 1.0, 16, FdOrder::Eighth);
        let direct = curvature_pack_with(&g, CurvatureOptions { riemann: false, differencing: Differencing::Direct }).unwrap();
        let worst = chart
            .collar_nodes()
            .into_iter()
            .map(|k| (direct.scalar().values[k] - 6.0).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-3, "{worst}");
        let pack = curvature_pack(&g).unwrap();
        let worst = pack.scalar().values.iter().map(|r| (r - 6.0).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-9, "{worst}");
    }

    #[test]
    fn subtraction_agrees_with_direct_differencing() {
        // a scaled round metric is not the chart background, so both routes
        // carry truncation error; they must agree with each other and with 6/c².
        let (chart, g) = round(3, 1.0, 24, FdOrder::Eighth);
        let scaled = MetricField::new(g.field().scaled(1.44)).unwrap();
        let a = curvature_pack_lean(&scaled).unwrap();
        let b = curvature_pack_with(&scaled, CurvatureOptions { riemann: false, differencing: Differencing::Direct }).unwrap();
        for k in chart.collar_nodes() {
            assert!((a.scalar().values[k] - 6.0 / 1.44).abs() < 1e-4);
            assert!((a.scalar().values[k] - b.scalar().values[k]).abs() < 1e-4);
        }
    }

    #[test]
    fn riemann_matches_constant_curvature_form() {
        let (chart, g) = round(3, 4.0, 16, FdOrder::Eighth);
        let pack = curvature_pack(&g).unwrap();
        let n = 3;
        for k in chart.collar_nodes().into_iter().step_by(97) {
            let (gm, _) = g.local(k);
            for i in 0..n {
                for j in 0..n {
                    for a in 0..n {
                        for b in 0..n {
                            let want = 4.0 * (gm[j][a] * gm[i][b] - gm[i][a] * gm[j][b]);
                            let got = pack.riemann(k, i, j, a, b).unwrap();
                            assert!((got - want).abs() < 1e-4 * (1.0 + want.abs()), "{got} {want}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn lean_pack_skips_riemann() {
        let (_, g) = round(3, 1.0, 8, FdOrder::Fourth);
        let pack = curvature_pack_lean(&g).unwrap();
        assert!(!pack.has_riemann());
        assert!(pack.riemann(0, 0, 1, 0, 1).is_none());
    }

    #[test]
    fn degenerate_metric_reports_conditioning() {
        let (chart, g) = round(3, 1.0, 8, FdOrder::Fourth);
        let mut h = g.into_field();
        // make rows 0 and 1 nearly parallel at node 10
        let n = 3;
        let c = chart.nsym();
        let g00 = h.data[10 * c + sym_index(n, 0, 0)];
        let g11 = h.data[10 * c + sym_index(n, 1, 1)];
        h.data[10 * c + sym_index(n, 0, 1)] = (1.0 - 1e-14) * (g00 * g11).sqrt();
        let g = MetricField::new(h).unwrap();
        match curvature_pack(&g) {
            Err(LabError::Conditioning { node, .. }) => assert_eq!(node, 10),
            other => panic!("unexpected {other:?}"),
        }
    }
}
