//! σ_k and quotient curvatures, their integrals, and the closed forms on
//! Einstein backgrounds.

use crate::error::{domain, LabError, Result};
use crate::geom::{integrate, CurvaturePack, GridField, MetricField, ScalarField};
use crate::linalg::SmallMat;
use crate::symcomb::{binomial, elementary_from_power_sums};
use rayon::prelude::*;

/// Denominators below this fraction of their round value are degenerate.
pub const DEGENERACY_RATIO: f64 = 1e-8;

/// Closed-form σ_k and quotient values of `Ric = (n-1)λ g`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct EinsteinConstants {
    pub n: usize,
    pub lambda: f64,
    /// `σ_k(ḡ) = ((n-2)λ/2)^k C(n,k)` for `k = 0..=n`.
    pub sigma: Vec<f64>,
}

impl EinsteinConstants {
    /// `A_{kl} = σ_k(ḡ)/σ_l(ḡ)`.
    pub fn a(&self, k: usize, l: usize) -> f64 {
        self.sigma[k] / self.sigma[l]
    }
}

pub fn einstein_constants(n: usize, lambda: f64) -> Result<EinsteinConstants> {
    if n < 3 {
        return domain(format!("Einstein constants need n >= 3, got {n}"));
    }
    if !(lambda > 0.0) {
        return domain(format!("lambda must be positive, got {lambda}"));
    }
    let base = (n as f64 - 2.0) * lambda / 2.0;
    let sigma = (0..=n)
        .map(|k| Ok(base.powi(k as i32) * binomial(n as u64, k as u64)? as f64))
        .collect::<Result<Vec<_>>>()?;
    Ok(EinsteinConstants { n, lambda, sigma })
}

/// Mixed Schouten endomorphism `g^{ia} S_{aj}` at a node.
pub fn schouten_endomorphism(g: &MetricField, pack: &CurvaturePack, node: usize) -> SmallMat {
    let n = g.n();
    g.inverse_matrix(node).mul(&SmallMat::from_packed(n, pack.schouten().node(node)))
}

fn check_pack(g: &MetricField, pack: &CurvaturePack) -> Result<()> {
    if g.chart().id() != pack.chart().id() {
        return Err(LabError::ChartMismatch);
    }
    Ok(())
}

/// `σ_0 .. σ_kmax` of the Schouten endomorphism at every node, from power
/// sums `tr(E^m)` and Newton's identities.
pub fn sigma_fields(g: &MetricField, pack: &CurvaturePack, kmax: usize) -> Result<Vec<ScalarField>> {
    check_pack(g, pack)?;
    let n = g.n();
    if kmax > n {
        return domain(format!("sigma_{kmax} is undefined in dimension {n}"));
    }
    let chart = g.chart();
    let per_node: Vec<Vec<f64>> = (0..chart.len())
        .into_par_iter()
        .map(|k| {
            let e = schouten_endomorphism(g, pack, k);
            let mut p = Vec::with_capacity(kmax);
            let mut power = e;
            for m in 1..=kmax {
                if m > 1 {
                    power = power.mul(&e);
                }
                p.push(power.trace());
            }
            elementary_from_power_sums(&p, kmax).expect("enough power sums")
        })
        .collect();
    Ok((0..=kmax)
        .map(|m| ScalarField::from_fn(chart, |k| per_node[k][m]))
        .collect())
}

pub fn sigma_k_field(g: &MetricField, pack: &CurvaturePack, k: usize) -> Result<ScalarField> {
    Ok(sigma_fields(g, pack, k)?.pop().expect("k + 1 fields"))
}

/// `|S|²_g = tr(E²)` node-wise.
pub fn schouten_norm_sq(g: &MetricField, pack: &CurvaturePack) -> Result<ScalarField> {
    check_pack(g, pack)?;
    let n = g.n();
    Ok(ScalarField::from_fn(g.chart(), |k| {
        let gi = g.inverse_matrix(k);
        let s = SmallMat::from_packed(n, pack.schouten().node(k));
        let x = gi.mul(&s).mul(&gi);
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += x.a[i][j] * s.a[i][j];
            }
        }
        acc
    }))
}

/// `σ_k/σ_l` from precomputed σ fields, with the degenerate-denominator check
/// against the round value on the chart.
pub fn quotient_from_sigmas(sigmas: &[ScalarField], k: usize, l: usize) -> Result<ScalarField> {
    if !(l < k && k < sigmas.len()) {
        return domain(format!("quotient needs 0 <= l < k <= {}, got ({k}, {l})", sigmas.len() - 1));
    }
    let chart = sigmas[0].chart();
    if l == 0 {
        return Ok(sigmas[k].clone());
    }
    let consts = einstein_constants(chart.n(), chart.lambda())?;
    let floor = DEGENERACY_RATIO * consts.sigma[l].abs();
    let den = &sigmas[l];
    if let Some(node) = (0..chart.len()).find(|&i| den.values[i].abs() < floor || !den.values[i].is_finite()) {
        let th = chart.node_angles(node);
        return Err(LabError::DegenerateDenominator {
            index: l,
            node,
            value: den.values[node],
            angles: th[..chart.n()].to_vec(),
        });
    }
    Ok(ScalarField::from_fn(chart, |i| sigmas[k].values[i] / den.values[i]))
}

pub fn quotient_field(g: &MetricField, pack: &CurvaturePack, k: usize, l: usize) -> Result<ScalarField> {
    if !(l < k && k <= g.n()) {
        return domain(format!("quotient needs 0 <= l < k <= {}, got ({k}, {l})", g.n()));
    }
    quotient_from_sigmas(&sigma_fields(g, pack, k)?, k, l)
}

/// `∫ σ_p/σ_q dv_g`; `p == q` integrates the constant one (the volume).
pub fn total_quotient(g: &MetricField, pack: &CurvaturePack, p: usize, q: usize) -> Result<f64> {
    if p == q {
        check_pack(g, pack)?;
        return integrate(&ScalarField::constant(g.chart(), 1.0), g);
    }
    integrate(&quotient_field(g, pack, p, q)?, g)
}

/// `∫ σ_k(g)/σ_l(g) dv_ḡ` against a fixed background volume form.
pub fn total_quotient_fixed_bg(g: &MetricField, bg: &MetricField, pack: &CurvaturePack, k: usize, l: usize) -> Result<f64> {
    if k == l {
        return integrate(&ScalarField::constant(g.chart(), 1.0), bg);
    }
    integrate(&quotient_field(g, pack, k, l)?, bg)
}

/// Spread `max - min` of a field relative to `|mean|`.
pub fn relative_spread(f: &ScalarField) -> f64 {
    let (lo, hi) = f.values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let mean = f.values.iter().sum::<f64>() / f.values.len() as f64;
    (hi - lo) / mean.abs()
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        let c = einstein_constants(3, 1.0).unwrap();
        assert_eq!(c.sigma, vec![1.0, 1.5, 0.75, 0.125]);
        assert_eq!(c.a(2, 1), 0.5);
        let c4 = einstein_constants(4, 1.0).unwrap();
        assert_eq!(c4.sigma[1], 4.0);
        assert_eq!(c4.sigma[2], 6.0);
        assert!(einstein_constants(2, 1.0).is_err());
        assert!(einstein_constants(3, 0.0).is_err());
    }
}
