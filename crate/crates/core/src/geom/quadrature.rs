//! Integration against the Riemannian volume form.

use super::field::{GridField, MetricField, ScalarField};
use crate::error::Result;

/// Pairwise (cascade) summation in a fixed order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// `∫ f dv_g`.
pub fn integrate(f: &ScalarField, g: &MetricField) -> Result<f64> {
    f.check_same_chart(g.field())?;
    let chart = g.chart();
    let terms: Vec<f64> = (0..chart.len())
        .map(|k| chart.node_weight(k) * f.values[k] * g.sqrt_det(k) / chart.unit_density(k))
        .collect();
    Ok(pairwise_sum(&terms))
}

/// `Vol(g)`.
pub fn volume(g: &MetricField) -> f64 {
    let one = ScalarField::constant(g.chart(), 1.0);
    integrate(&one, g).expect("same chart")
}

/// `∫ f dv_g / Vol(g)`.
pub fn mean(f: &ScalarField, g: &MetricField) -> Result<f64> {
    Ok(integrate(f, g)? / volume(g))
}
