//! Node-major fields on a chart.

use super::chart::{Chart, MAX_DIM};
use crate::error::{LabError, Result};
use crate::linalg::{jacobi_eigenvalues, SmallMat};
use rayon::prelude::*;
use std::sync::Arc;

/// Packed index of the symmetric pair `(i, j)` in upper-triangle row-major order.
#[inline]
pub fn sym_index(n: usize, i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    a * n - a * (a + 1) / 2 + b
}

/// Pairs `(i, j)` with `i <= j` in packing order.
pub fn sym_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            out.push((i, j));
        }
    }
    out
}

/// Reflection parities of the packed components of a symmetric 2-tensor.
pub fn sym_parities(n: usize) -> Vec<u32> {
    sym_pairs(n).into_iter().map(|(i, j)| (1u32 << i) ^ (1u32 << j)).collect()
}

/// Reflection parities of a covector (or vector) field.
pub fn covector_parities(n: usize) -> Vec<u32> {
    (0..n).map(|i| 1u32 << i).collect()
}

/// Data layout shared by every field type.
pub trait GridField: Sized {
    fn chart(&self) -> &Arc<Chart>;
    fn data(&self) -> &[f64];
    fn data_mut(&mut self) -> &mut [f64];
    fn components(chart: &Chart) -> usize;
    fn parities(chart: &Chart) -> Vec<u32>;
    fn from_raw(chart: Arc<Chart>, data: Vec<f64>) -> Self;

    fn zeros(chart: &Arc<Chart>) -> Self {
        let len = chart.len() * Self::components(chart);
        Self::from_raw(chart.clone(), vec![0.0; len])
    }

    fn node(&self, node: usize) -> &[f64] {
        let c = Self::components(self.chart());
        &self.data()[node * c..(node + 1) * c]
    }

    fn check_same_chart(&self, other: &impl GridField) -> Result<()> {
        if self.chart().id() != other.chart().id() {
            return Err(LabError::ChartMismatch);
        }
        Ok(())
    }

    /// `self + s * other`.
    fn axpy(&self, s: f64, other: &Self) -> Result<Self> {
        self.check_same_chart(other)?;
        let data = self.data().iter().zip(other.data()).map(|(a, b)| a + s * b).collect();
        Ok(Self::from_raw(self.chart().clone(), data))
    }

    fn scaled(&self, s: f64) -> Self {
        Self::from_raw(self.chart().clone(), self.data().iter().map(|a| s * a).collect())
    }

    /// Pointwise product with a scalar field.
    fn times(&self, u: &ScalarField) -> Result<Self> {
        self.check_same_chart(u)?;
        let c = Self::components(self.chart());
        let data = self
            .data()
            .iter()
            .enumerate()
            .map(|(k, a)| a * u.values[k / c])
            .collect();
        Ok(Self::from_raw(self.chart().clone(), data))
    }

    /// Largest absolute component value.
    fn sup_abs(&self) -> f64 {
        self.data().iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }
}

macro_rules! grid_field {
    ($ty:ident, $field:ident, $comps:expr, $par:expr) => {
        impl GridField for $ty {
            fn chart(&self) -> &Arc<Chart> {
                &self.chart
            }
            fn data(&self) -> &[f64] {
                &self.$field
            }
            fn data_mut(&mut self) -> &mut [f64] {
                &mut self.$field
            }
            fn components(chart: &Chart) -> usize {
                ($comps)(chart)
            }
            fn parities(chart: &Chart) -> Vec<u32> {
                ($par)(chart)
            }
            fn from_raw(chart: Arc<Chart>, data: Vec<f64>) -> Self {
                Self { chart, $field: data }
            }
        }
    };
}

/// One value per node.
#[derive(Debug, Clone)]
pub struct ScalarField {
    chart: Arc<Chart>,
    pub values: Vec<f64>,
}

/// `n` covariant components per node.
#[derive(Debug, Clone)]
pub struct CovectorField {
    chart: Arc<Chart>,
    pub data: Vec<f64>,
}

/// `n(n+1)/2` packed covariant components per node.
#[derive(Debug, Clone)]
pub struct Sym2Field {
    chart: Arc<Chart>,
    pub data: Vec<f64>,
}

grid_field!(ScalarField, values, |_: &Chart| 1, |_: &Chart| vec![0]);
grid_field!(CovectorField, data, |c: &Chart| c.n(), |c: &Chart| covector_parities(c.n()));
grid_field!(Sym2Field, data, |c: &Chart| c.nsym(), |c: &Chart| sym_parities(c.n()));

impl ScalarField {
    pub fn from_fn(chart: &Arc<Chart>, f: impl Fn(usize) -> f64 + Sync) -> Self {
        let values = (0..chart.len()).into_par_iter().map(&f).collect();
        Self { chart: chart.clone(), values }
    }

    pub fn constant(chart: &Arc<Chart>, c: f64) -> Self {
        Self { chart: chart.clone(), values: vec![c; chart.len()] }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64 + Sync) -> Self {
        Self { chart: self.chart.clone(), values: self.values.par_iter().map(|&x| f(x)).collect() }
    }

    pub fn mul(&self, other: &ScalarField) -> Result<Self> {
        self.times(other)
    }
}

impl CovectorField {
    pub fn from_fn(chart: &Arc<Chart>, f: impl Fn(usize, &mut [f64]) + Sync) -> Self {
        let n = chart.n();
        let mut data = vec![0.0; chart.len() * n];
        data.par_chunks_mut(n).enumerate().for_each(|(k, out)| f(k, out));
        Self { chart: chart.clone(), data }
    }
}

impl Sym2Field {
    /// `f(node, out)` fills the packed components of one node.
    pub fn from_fn(chart: &Arc<Chart>, f: impl Fn(usize, &mut [f64]) + Sync) -> Self {
        let c = chart.nsym();
        let mut data = vec![0.0; chart.len() * c];
        data.par_chunks_mut(c).enumerate().for_each(|(k, out)| f(k, out));
        Self { chart: chart.clone(), data }
    }

    pub fn at(&self, node: usize, i: usize, j: usize) -> f64 {
        let n = self.chart.n();
        self.data[node * self.chart.nsym() + sym_index(n, i, j)]
    }

    pub fn matrix(&self, node: usize) -> SmallMat {
        SmallMat::from_packed(self.chart.n(), self.node(node))
    }
}

/// Riemannian metric with cached inverse and volume density.
#[derive(Debug, Clone)]
pub struct MetricField {
    g: Sym2Field,
    inverse: Vec<f64>,
    sqrt_det: Vec<f64>,
}

impl MetricField {
    /// Validates positive definiteness at every node.
    pub fn new(g: Sym2Field) -> Result<Self> {
        let chart = g.chart.clone();
        let c = chart.nsym();
        let n = chart.n();
        let per_node: Vec<Result<(SmallMat, f64)>> = (0..chart.len())
            .into_par_iter()
            .map(|k| {
                let m = g.matrix(k);
                match m.spd_inverse_det() {
                    Some((inv, det)) if det > 0.0 => Ok((inv, det.sqrt())),
                    _ => {
                        let min_eig = jacobi_eigenvalues(&m)
                            .map(|e| e[0])
                            .unwrap_or(f64::NAN);
                        Err(LabError::NotPositiveDefinite { node: k, min_eig })
                    }
                }
            })
            .collect();
        let mut inverse = vec![0.0; chart.len() * c];
        let mut sqrt_det = vec![0.0; chart.len()];
        for (k, r) in per_node.into_iter().enumerate() {
            let (inv, sd) = r?;
            inv.write_packed(&mut inverse[k * c..(k + 1) * c]);
            sqrt_det[k] = sd;
        }
        debug_assert_eq!(n * (n + 1) / 2, c);
        Ok(Self { g, inverse, sqrt_det })
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.g.chart
    }
    pub fn n(&self) -> usize {
        self.g.chart.n()
    }
    pub fn field(&self) -> &Sym2Field {
        &self.g
    }
    pub fn into_field(self) -> Sym2Field {
        self.g
    }

    /// Packed inverse metric at a node.
    pub fn inverse_at(&self, node: usize) -> &[f64] {
        let c = self.g.chart.nsym();
        &self.inverse[node * c..(node + 1) * c]
    }

    pub fn inverse_matrix(&self, node: usize) -> SmallMat {
        SmallMat::from_packed(self.n(), self.inverse_at(node))
    }

    pub fn sqrt_det(&self, node: usize) -> f64 {
        self.sqrt_det[node]
    }

    /// Metric matrix and inverse as dense arrays.
    pub fn local(&self, node: usize) -> ([[f64; MAX_DIM]; MAX_DIM], [[f64; MAX_DIM]; MAX_DIM]) {
        let n = self.n();
        let g = self.g.node(node);
        let gi = self.inverse_at(node);
        let mut a = [[0.0; MAX_DIM]; MAX_DIM];
        let mut b = [[0.0; MAX_DIM]; MAX_DIM];
        for i in 0..n {
            for j in 0..n {
                a[i][j] = g[sym_index(n, i, j)];
                b[i][j] = gi[sym_index(n, i, j)];
            }
        }
        (a, b)
    }

    /// Round metric of radius `1/√λ` on the chart.
    pub fn round(chart: &Arc<Chart>) -> Self {
        let n = chart.n();
        let r2 = chart.radius() * chart.radius();
        let g = Sym2Field::from_fn(chart, |k, out| {
            let th = chart.node_angles(k);
            let mut s = r2;
            for i in 0..n {
                out[sym_index(n, i, i)] = s;
                if i < n - 1 {
                    s *= th[i].sin().powi(2);
                }
            }
        });
        Self::new(g).expect("round metric is positive definite away from the poles")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::chart::FdOrder;

    #[test]
    fn sym_index_roundtrip() {
        for n in 1..=5 {
            for (k, (i, j)) in sym_pairs(n).into_iter().enumerate() {
                assert_eq!(sym_index(n, i, j), k);
                assert_eq!(sym_index(n, j, i), k);
            }
        }
    }

    #[test]
    fn round_metric_density_matches_radius_power() {
        let chart = Arc::new(Chart::new(3, 4.0, &[8, 8, 8], FdOrder::Fourth).unwrap());
        let g = MetricField::round(&chart);
        for k in [0, 17, 200] {
            let expect = chart.radius().powi(3) * chart.unit_density(k);
            assert!((g.sqrt_det(k) - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn non_positive_metric_is_rejected() {
        let chart = Arc::new(Chart::new(3, 1.0, &[8, 8, 8], FdOrder::Fourth).unwrap());
        let mut g = MetricField::round(&chart).into_field();
        g.data[5 * 6] = -1.0;
        match MetricField::new(g) {
            Err(LabError::NotPositiveDefinite { node, .. }) => assert_eq!(node, 5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn mixing_charts_is_an_error() {
        let a = Arc::new(Chart::new(3, 1.0, &[8, 8, 8], FdOrder::Fourth).unwrap());
        let b = Arc::new(Chart::new(3, 1.0, &[8, 8, 8], FdOrder::Fourth).unwrap());
        let u = ScalarField::constant(&a, 1.0);
        let v = ScalarField::constant(&b, 1.0);
        assert_eq!(u.axpy(1.0, &v).unwrap_err(), LabError::ChartMismatch);
    }
}
