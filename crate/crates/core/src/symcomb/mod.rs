//! Exact symmetric-function and index combinatorics.
//!
//! Elementary symmetric polynomials are evaluated three independent ways
//! (product expansion of the eigenvalues, Newton's identities on power sums,
//! and the generalized Kronecker delta contraction) so each can serve as an
//! oracle for the others.

mod delta;
mod indices;

pub use delta::{delta_contraction_check, gen_delta, sigma_via_delta, symmetric_eigenvalues, MultiIndex};
pub use indices::{admissible_indices, index_inequality_scan, index_inequality_value, Admissibility, IndexTuple};

use crate::error::{domain, LabError, Result};

/// `n choose k` in exact 128-bit arithmetic.
pub fn binomial(n: u64, k: u64) -> Result<u128> {
    if k > n {
        return domain(format!("binomial({n}, {k}): k must lie in 0..=n"));
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 1..=k as u128 {
        // c * (n-k+i) is divisible by i because it equals i * C(n-k+i, i)
        c = c
            .checked_mul(n as u128 - k as u128 + i)
            .ok_or_else(|| LabError::Resource(format!("binomial({n}, {k}) overflows u128")))?
            / i;
    }
    Ok(c)
}

/// `n!` in exact 128-bit arithmetic.
pub fn factorial(n: u64) -> Result<u128> {
    (1..=n as u128).try_fold(1u128, |acc, i| {
        acc.checked_mul(i)
            .ok_or_else(|| LabError::Resource(format!("{n}! overflows u128")))
    })
}

/// Eigenvalues of a Schouten endomorphism, one entry per dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenList(pub Vec<f64>);

impl EigenList {
    pub fn n(&self) -> usize {
        self.0.len()
    }

    /// Power sums `p_1..=p_m`.
    pub fn power_sums(&self, m: usize) -> Vec<f64> {
        (1..=m)
            .map(|e| self.0.iter().map(|x| x.powi(e as i32)).sum())
            .collect()
    }
}

/// The `k`-th elementary symmetric polynomial of the eigenvalues.
pub fn sigma_from_eigs(eigs: &EigenList, k: usize) -> Result<f64> {
    let n = eigs.n();
    if k > n {
        return domain(format!("sigma_{k} requested for {n} eigenvalues"));
    }
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for &x in &eigs.0 {
        for j in (1..=k).rev() {
            e[j] += x * e[j - 1];
        }
    }
    Ok(e[k])
}

/// All elementary symmetric polynomials `e_0..=e_k` from power sums via
/// Newton's identities, `j e_j = sum_{i=1}^{j} (-1)^{i-1} e_{j-i} p_i`.
pub fn elementary_from_power_sums(power_sums: &[f64], k: usize) -> Result<Vec<f64>> {
    if k > power_sums.len() {
        return domain(format!(
            "sigma_{k} needs {k} power sums, got {}",
            power_sums.len()
        ));
    }
    let mut e = Vec::with_capacity(k + 1);
    e.push(1.0);
    for j in 1..=k {
        let mut acc = 0.0;
        for i in 1..=j {
            let term = e[j - i] * power_sums[i - 1];
            if i % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        e.push(acc / j as f64);
    }
    Ok(e)
}

/// `sigma_k` from power sums `tr(S^1)..tr(S^k)`.
pub fn sigma_from_power_sums(power_sums: &[f64], k: usize) -> Result<f64> {
    Ok(elementary_from_power_sums(power_sums, k)?[k])
}
