//! Dense kernels for the tiny symmetric matrices that live at grid nodes.

use crate::error::{LabError, Result};

pub const MAXN: usize = 6;

/// Square matrix of dimension `n <= MAXN`, stored inline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallMat {
    pub n: usize,
    pub a: [[f64; MAXN]; MAXN],
}

impl SmallMat {
    pub fn zeros(n: usize) -> Self {
        assert!(n <= MAXN, "matrix dimension {n} exceeds {MAXN}");
        Self { n, a: [[0.0; MAXN]; MAXN] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i][i] = 1.0;
        }
        m
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.a[i][j] = f(i, j);
            }
        }
        m
    }

    /// Unpack a symmetric matrix from upper-triangle row-major storage.
    pub fn from_packed(n: usize, packed: &[f64]) -> Self {
        let mut m = Self::zeros(n);
        let mut idx = 0;
        for i in 0..n {
            for j in i..n {
                m.a[i][j] = packed[idx];
                m.a[j][i] = packed[idx];
                idx += 1;
            }
        }
        m
    }

    pub fn write_packed(&self, out: &mut [f64]) {
        let mut idx = 0;
        for i in 0..self.n {
            for j in i..self.n {
                out[idx] = 0.5 * (self.a[i][j] + self.a[j][i]);
                idx += 1;
            }
        }
    }

    pub fn mul(&self, other: &SmallMat) -> SmallMat {
        let n = self.n;
        let mut out = SmallMat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.a[i][k];
                if aik == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.a[i][j] += aik * other.a[k][j];
                }
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> SmallMat {
        let mut out = *self;
        for i in 0..self.n {
            for j in 0..self.n {
                out.a[i][j] *= s;
            }
        }
        out
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.a[i][i]).sum()
    }

    pub fn transpose(&self) -> SmallMat {
        SmallMat::from_fn(self.n, |i, j| self.a[j][i])
    }

    /// Frobenius pairing `sum_ij a_ij b_ij`.
    pub fn dot(&self, other: &SmallMat) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                s += self.a[i][j] * other.a[i][j];
            }
        }
        s
    }

    /// Cholesky factor `L` with `self = L L^T`; `None` if not positive definite.
    pub fn cholesky(&self) -> Option<SmallMat> {
        let n = self.n;
        let mut l = SmallMat::zeros(n);
        for j in 0..n {
            let mut d = self.a[j][j];
            for k in 0..j {
                d -= l.a[j][k] * l.a[j][k];
            }
            if !(d > 0.0) {
                return None;
            }
            let djj = d.sqrt();
            l.a[j][j] = djj;
            for i in j + 1..n {
                let mut s = self.a[i][j];
                for k in 0..j {
                    s -= l.a[i][k] * l.a[j][k];
                }
                l.a[i][j] = s / djj;
            }
        }
        Some(l)
    }

    /// Inverse and determinant of a symmetric positive-definite matrix.
    pub fn spd_inverse_det(&self) -> Option<(SmallMat, f64)> {
        let l = self.cholesky()?;
        let mut det = 1.0;
        for i in 0..self.n {
            det *= l.a[i][i] * l.a[i][i];
        }
        let li = lower_inverse(&l);
        Some((li.transpose().mul(&li), det))
    }

    pub fn off_diagonal_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    s += self.a[i][j] * self.a[i][j];
                }
            }
        }
        s.sqrt()
    }
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, sorted
/// ascending. Iterates until the off-diagonal Frobenius norm drops below
/// `1e-13` times the matrix norm (or is exactly zero).
pub fn jacobi_eigenvalues(m: &SmallMat) -> Result<Vec<f64>> {
    let n = m.n;
    let mut a = *m;
    for i in 0..n {
        for j in 0..i {
            let s = 0.5 * (a.a[i][j] + a.a[j][i]);
            a.a[i][j] = s;
            a.a[j][i] = s;
        }
    }
    let scale = a.dot(&a).sqrt().max(f64::MIN_POSITIVE);
    let tol = 1e-13 * scale;
    for _sweep in 0..64 {
        if a.off_diagonal_norm() <= tol {
            let mut ev: Vec<f64> = (0..n).map(|i| a.a[i][i]).collect();
            ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
            return Ok(ev);
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a.a[q][q] - a.a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a.a[k][p];
                    let akq = a.a[k][q];
                    a.a[k][p] = c * akp - s * akq;
                    a.a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a.a[p][k];
                    let aqk = a.a[q][k];
                    a.a[p][k] = c * apk - s * aqk;
                    a.a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    Err(LabError::Convergence {
        iterations: 64,
        residual: a.off_diagonal_norm(),
    })
}

fn lower_inverse(l: &SmallMat) -> SmallMat {
    let n = l.n;
    let mut li = SmallMat::zeros(n);
    for i in 0..n {
        li.a[i][i] = 1.0 / l.a[i][i];
        for j in 0..i {
            let mut s = 0.0;
            for k in j..i {
                s -= l.a[i][k] * li.a[k][j];
            }
            li.a[i][j] = s / l.a[i][i];
        }
    }
    li
}

/// Eigenvalues of `b` relative to the positive-definite `g`, i.e. of
/// `L^-1 b L^-T` with `g = L L^T`.
pub fn relative_eigenvalues(g: &SmallMat, b: &SmallMat) -> Option<Vec<f64>> {
    let li = lower_inverse(&g.cholesky()?);
    jacobi_eigenvalues(&li.mul(b).mul(&li.transpose())).ok()
}
