//! Central finite differences along one chart axis.

use super::chart::{Chart, MAX_DIM};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Derivative {
    First,
    Second,
}

/// Differentiates node-major data with `ncomp` components per node along
/// `axis`. `parity[c]` is the reflection mask of component `c`.
pub fn diff_axis(chart: &Chart, data: &[f64], ncomp: usize, parity: &[u32], axis: usize, kind: Derivative) -> Vec<f64> {
    debug_assert_eq!(data.len(), chart.len() * ncomp);
    debug_assert_eq!(parity.len(), ncomp);
    let order = chart.order();
    let r = order.half_width() as isize;
    let (weights, scale) = match kind {
        Derivative::First => (order.first_weights(), 1.0 / chart.spacing(axis)),
        Derivative::Second => (order.second_weights(), 1.0 / chart.spacing(axis).powi(2)),
    };
    let mut out = vec![0.0; data.len()];
    out.par_chunks_mut(ncomp).enumerate().for_each(|(node, acc)| {
        let idx = chart.multi_index(node);
        for m in -r..=r {
            let w = weights[(m + r) as usize];
            if w == 0.0 {
                continue;
            }
            let (nb, flip) = chart.neighbor(&idx, axis, m);
            let src = &data[nb * ncomp..(nb + 1) * ncomp];
            for c in 0..ncomp {
                acc[c] += signed(w, parity[c], flip) * src[c];
            }
        }
        for a in acc.iter_mut() {
            *a *= scale;
        }
    });
    out
}

/// Node reached by stepping `m1` cells along `a1` and then `m2` cells along
/// `a2`, with the accumulated reflection mask.
#[inline]
pub fn neighbor2(chart: &Chart, idx: &[usize; MAX_DIM], a1: usize, m1: isize, a2: usize, m2: isize) -> (usize, u32) {
    let (p1, f1) = chart.neighbor(idx, a1, m1);
    let idx1 = chart.multi_index(p1);
    let step = if f1 & (1 << a2) != 0 { -m2 } else { m2 };
    let (p2, f2) = chart.neighbor(&idx1, a2, step);
    (p2, f1 ^ f2)
}

#[inline]
fn signed(w: f64, parity: u32, flip: u32) -> f64 {
    if (parity & flip).count_ones() % 2 == 1 {
        -w
    } else {
        w
    }
}

/// First derivatives of every component at one node along every axis:
/// `first[a * ncomp + c]`.
pub fn local_first(chart: &Chart, data: &[f64], ncomp: usize, parity: &[u32], node: usize, first: &mut [f64]) {
    let n = chart.n();
    let order = chart.order();
    let r = order.half_width() as isize;
    let w1 = order.first_weights();
    let idx = chart.multi_index(node);
    first[..n * ncomp].fill(0.0);
    for a in 0..n {
        let inv_h = 1.0 / chart.spacing(a);
        let out = &mut first[a * ncomp..(a + 1) * ncomp];
        for m in -r..=r {
            let w = w1[(m + r) as usize];
            if w == 0.0 {
                continue;
            }
            let (nb, flip) = chart.neighbor(&idx, a, m);
            let src = &data[nb * ncomp..(nb + 1) * ncomp];
            for c in 0..ncomp {
                out[c] += signed(w, parity[c], flip) * src[c];
            }
        }
        for v in out.iter_mut() {
            *v *= inv_h;
        }
    }
}

/// Second derivatives of every component at one node:
/// `second[(a * n + b) * ncomp + c]`, symmetric in `(a, b)`. Mixed
/// derivatives use the tensor product of first-derivative stencils.
pub fn local_second(chart: &Chart, data: &[f64], ncomp: usize, parity: &[u32], node: usize, second: &mut [f64]) {
    let n = chart.n();
    let order = chart.order();
    let r = order.half_width() as isize;
    let w1 = order.first_weights();
    let w2 = order.second_weights();
    let idx = chart.multi_index(node);
    assert!(ncomp <= 128, "too many components for a local stencil");
    let mut acc = [0.0; 128];
    for a in 0..n {
        for b in a..n {
            let acc = &mut acc[..ncomp];
            acc.fill(0.0);
            if a == b {
                for m in -r..=r {
                    let w = w2[(m + r) as usize];
                    let (nb, flip) = chart.neighbor(&idx, a, m);
                    let src = &data[nb * ncomp..(nb + 1) * ncomp];
                    for c in 0..ncomp {
                        acc[c] += signed(w, parity[c], flip) * src[c];
                    }
                }
                let s = 1.0 / chart.spacing(a).powi(2);
                acc.iter_mut().for_each(|v| *v *= s);
            } else {
                for m1 in -r..=r {
                    let wa = w1[(m1 + r) as usize];
                    if wa == 0.0 {
                        continue;
                    }
                    for m2 in -r..=r {
                        let wb = w1[(m2 + r) as usize];
                        if wb == 0.0 {
                            continue;
                        }
                        let (nb, flip) = neighbor2(chart, &idx, a, m1, b, m2);
                        let src = &data[nb * ncomp..(nb + 1) * ncomp];
                        for c in 0..ncomp {
                            acc[c] += signed(wa * wb, parity[c], flip) * src[c];
                        }
                    }
                }
                let s = 1.0 / (chart.spacing(a) * chart.spacing(b));
                acc.iter_mut().for_each(|v| *v *= s);
            }
            second[(a * n + b) * ncomp..(a * n + b + 1) * ncomp].copy_from_slice(acc);
            second[(b * n + a) * ncomp..(b * n + a + 1) * ncomp].copy_from_slice(acc);
        }
    }
}

/// Component parities after one more derivative slot along `axis`.
pub fn shifted_parities(parity: &[u32], axis: usize) -> Vec<u32> {
    parity.iter().map(|p| p ^ (1 << axis)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::chart::FdOrder;

    fn convergence(order: FdOrder) -> f64 {
        // f = cos θ0 is smooth on the sphere; its θ0 derivative is -sin θ0
        // and its second derivative is -cos θ0.
        let err = |res: usize| {
            let c = Chart::new(3, 1.0, &[res, res, res], order).unwrap();
            let f: Vec<f64> = (0..c.len()).map(|k| c.node_angles(k)[0].cos()).collect();
            let d = diff_axis(&c, &f, 1, &[0], 0, Derivative::First);
            let d2 = diff_axis(&c, &f, 1, &[0], 0, Derivative::Second);
            (0..c.len())
                .map(|k| {
                    let t = c.node_angles(k)[0];
                    (d[k] + t.sin()).abs().max((d2[k] + t.cos()).abs())
                })
                .fold(0.0, f64::max)
        };
        (err(16) / err(32)).log2()
    }

    #[test]
    fn observed_orders() {
        for (order, expect) in [(FdOrder::Second, 2.0), (FdOrder::Fourth, 4.0), (FdOrder::Sixth, 6.0)] {
            let p = convergence(order);
            assert!((p - expect).abs() < 0.3, "{order:?}: {p}");
        }
    }

    #[test]
    fn mixed_derivative_through_poles() {
        // f = y_1 y_2 with y_1 = sin θ0 sin θ1 cos θ2 and y_2 = sin θ0 cos θ1,
        // a smooth ambient product; compare ∂0∂1 f and ∂1∂2 f against closed forms.
        let c = Chart::new(3, 1.0, &[16, 16, 16], FdOrder::Eighth).unwrap();
        let f = |t: [f64; MAX_DIM]| t[0].sin().powi(2) * t[1].sin() * t[1].cos() * t[2].cos();
        let data: Vec<f64> = (0..c.len()).map(|k| f(c.node_angles(k))).collect();
        let mut second = vec![0.0; 9];
        let mut worst: f64 = 0.0;
        for k in 0..c.len() {
            local_second(&c, &data, 1, &[0], k, &mut second);
            let t = c.node_angles(k);
            let d01 = 2.0 * t[0].sin() * t[0].cos() * (2.0 * t[1]).cos() * t[2].cos();
            let d12 = -t[0].sin().powi(2) * (2.0 * t[1]).cos() * t[2].sin();
            let d00 = 2.0 * (2.0 * t[0]).cos() * t[1].sin() * t[1].cos() * t[2].cos();
            worst = worst.max((second[1] - d01).abs()).max((second[5] - d12).abs()).max((second[0] - d00).abs());
            assert_eq!(second[1], second[3]);
        }
        assert!(worst < 5e-6, "{worst}");
    }

    #[test]
    fn odd_component_reflects_with_sign() {
        // ω = d(cos θ0) has ω_0 = -sin θ0 (parity bit 0). Differentiating along
        // θ0 through the pole must reproduce -cos θ0.
        let c = Chart::new(3, 1.0, &[16, 16, 16], FdOrder::Eighth).unwrap();
        let w: Vec<f64> = (0..c.len()).map(|k| -c.node_angles(k)[0].sin()).collect();
        let d = diff_axis(&c, &w, 1, &[1], 0, Derivative::First);
        for k in 0..c.len() {
            let t = c.node_angles(k)[0];
            assert!((d[k] + t.cos()).abs() < 1e-7);
        }
    }
}
