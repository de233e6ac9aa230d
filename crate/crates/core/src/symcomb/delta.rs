use super::factorial;
use crate::error::{domain, LabError, Result};
use crate::linalg::{jacobi_eigenvalues, SmallMat};
use crate::report::{CheckRecord, Report};

/// Ordered index tuple with entries in `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiIndex {
    entries: Vec<usize>,
    n: usize,
}

impl MultiIndex {
    pub fn new(entries: Vec<usize>, n: usize) -> Result<Self> {
        if entries.len() > n {
            return domain(format!("multi-index of length {} exceeds n = {n}", entries.len()));
        }
        if let Some(bad) = entries.iter().find(|&&e| e == 0 || e > n) {
            return domain(format!("index {bad} outside 1..={n}"));
        }
        Ok(Self { entries, n })
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// Generalized Kronecker delta `δ^{j}_{i}`: the sign of the permutation
/// taking `i` to `j` when `j` rearranges distinct entries of `i`, else 0.
pub fn gen_delta(i: &MultiIndex, j: &MultiIndex) -> Result<i8> {
    if i.entries.len() != j.entries.len() {
        return domain(format!(
            "generalized delta needs equal lengths, got {} and {}",
            i.entries.len(),
            j.entries.len()
        ));
    }
    Ok(delta_raw(&i.entries, &j.entries))
}

/// Unchecked kernel of [`gen_delta`] on plain slices.
pub(crate) fn delta_raw(upper: &[usize], lower: &[usize]) -> i8 {
    let k = upper.len();
    // position of each lower entry inside upper
    let mut perm = [0usize; 16];
    for (a, &x) in lower.iter().enumerate() {
        match upper.iter().position(|&y| y == x) {
            Some(p) => perm[a] = p,
            None => return 0,
        }
    }
    for a in 0..k {
        for b in a + 1..k {
            if upper[a] == upper[b] || perm[a] == perm[b] {
                return 0;
            }
        }
    }
    // parity by counting inversions
    let mut inversions = 0;
    for a in 0..k {
        for b in a + 1..k {
            if perm[a] > perm[b] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

fn for_each_tuple(n: usize, len: usize, mut f: impl FnMut(&[usize])) {
    let mut t = vec![1usize; len];
    loop {
        f(&t);
        let mut pos = len;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            if t[pos] < n {
                t[pos] += 1;
                break;
            }
            t[pos] = 1;
        }
    }
}

/// Brute-force verification of the contraction rule
/// `δ^{i_1..i_p}_{j_1..j_p} δ^{j_1..j_k}_{i_1..i_k} = p! (n-k+p)!/(n-k)! δ^{j_{p+1}..j_k}_{i_{p+1}..i_k}`
/// over every assignment of the free indices.
pub fn delta_contraction_check(n: usize, k: usize, p: usize) -> Result<Report> {
    if n > 6 || k > 4 {
        return Err(LabError::Resource(format!(
            "brute-force contraction limited to n <= 6, k <= 4 (got n = {n}, k = {k})"
        )));
    }
    if !(1 <= p && p < k && k <= n) {
        return domain(format!("contraction needs 1 <= p <= k-1 <= n-1 (n={n}, k={k}, p={p})"));
    }
    let coefficient = (factorial(p as u64)? * factorial((n - k + p) as u64)? / factorial((n - k) as u64)?) as i128;
    let free = k - p;
    let mut max_dev: i128 = 0;
    let mut assignments = 0u64;
    let mut nonzero = 0u64;
    let mut upper_full = vec![0usize; k];
    let mut lower_full = vec![0usize; k];
    for_each_tuple(n, free, |jf| {
        for_each_tuple(n, free, |if_| {
            let mut lhs: i128 = 0;
            upper_full[p..].copy_from_slice(jf);
            lower_full[p..].copy_from_slice(if_);
            for_each_tuple(n, p, |ic| {
                for_each_tuple(n, p, |jc| {
                    let d1 = delta_raw(ic, jc);
                    if d1 == 0 {
                        return;
                    }
                    upper_full[..p].copy_from_slice(jc);
                    lower_full[..p].copy_from_slice(ic);
                    lhs += (d1 * delta_raw(&upper_full, &lower_full)) as i128;
                });
            });
            let rhs = coefficient * delta_raw(jf, if_) as i128;
            max_dev = max_dev.max((lhs - rhs).abs());
            assignments += 1;
            if rhs != 0 {
                nonzero += 1;
            }
        });
    });
    let mut report = Report::new("delta_contraction");
    report.push(
        CheckRecord::exact(format!("delta_contraction[n={n},k={k},p={p}]"), max_dev as f64, 0.0)
            .with_input("n", n)
            .with_input("k", k)
            .with_input("p", p)
            .with_input("coefficient", coefficient)
            .with_input("assignments", assignments)
            .with_input("nonzero_assignments", nonzero),
    );
    Ok(report)
}

/// `σ_k` of a mixed (1,1) tensor `s[i][j] = S^i_j` by summing
/// `(1/k!) δ^{j_1..j_k}_{i_1..i_k} S^{i_1}_{j_1} ... S^{i_k}_{j_k}` over the
/// support of the delta (ordered distinct `i`, every rearrangement `j`).
pub fn sigma_via_delta(s: &SmallMat, k: usize) -> Result<f64> {
    let n = s.n;
    if n > 6 {
        return Err(LabError::Resource(format!("delta evaluation limited to n <= 6, got {n}")));
    }
    if k > n {
        return domain(format!("sigma_{k} requested in dimension {n}"));
    }
    if k == 0 {
        return Ok(1.0);
    }
    let mut total = 0.0;
    for_each_tuple(n, k, |i| {
        let distinct = (0..k).all(|a| (a + 1..k).all(|b| i[a] != i[b]));
        if !distinct {
            return;
        }
        let mut j = i.to_vec();
        permutations(&mut j, 0, &mut |j| {
            let d = delta_raw(j, i);
            let mut prod = d as f64;
            for m in 0..k {
                prod *= s.a[i[m] - 1][j[m] - 1];
            }
            total += prod;
        });
    });
    Ok(total / factorial(k as u64)? as f64)
}

fn permutations(v: &mut Vec<usize>, start: usize, f: &mut impl FnMut(&[usize])) {
    if start == v.len() {
        f(v);
        return;
    }
    for i in start..v.len() {
        v.swap(start, i);
        permutations(v, start + 1, f);
        v.swap(start, i);
    }
}

/// Eigenvalues of the mixed tensor, for cross-checks against the delta and
/// Newton evaluators. `s` must be symmetric.
pub fn symmetric_eigenvalues(s: &SmallMat) -> Result<super::EigenList> {
    Ok(super::EigenList(jacobi_eigenvalues(s)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcomb::{sigma_from_eigs, sigma_from_power_sums};
    use rand::{Rng, SeedableRng};

    fn mi(v: &[usize], n: usize) -> MultiIndex {
        MultiIndex::new(v.to_vec(), n).unwrap()
    }

    #[test]
    fn delta_examples() {
        assert_eq!(gen_delta(&mi(&[1, 2], 2), &mi(&[1, 2], 2)).unwrap(), 1);
        assert_eq!(gen_delta(&mi(&[1, 2], 2), &mi(&[2, 1], 2)).unwrap(), -1);
        assert_eq!(gen_delta(&mi(&[1, 1], 2), &mi(&[1, 2], 2)).unwrap(), 0);
        assert_eq!(gen_delta(&mi(&[1, 2, 3], 3), &mi(&[2, 3, 1], 3)).unwrap(), 1);
        assert_eq!(gen_delta(&mi(&[1, 2, 3], 3), &mi(&[3, 2, 1], 3)).unwrap(), -1);
        assert!(gen_delta(&mi(&[1, 2], 3), &mi(&[1], 3)).is_err());
        assert!(MultiIndex::new(vec![0, 1], 3).is_err());
        assert!(MultiIndex::new(vec![4], 3).is_err());
        assert!(MultiIndex::new(vec![1, 2, 3, 1], 3).is_err());
    }

    #[test]
    fn delta_antisymmetric_under_swaps() {
        let i = [1usize, 3, 4, 2];
        let j = [4usize, 1, 2, 3];
        let d = delta_raw(&i, &j);
        assert_ne!(d, 0);
        for a in 0..4 {
            for b in a + 1..4 {
                let mut sw = i;
                sw.swap(a, b);
                assert_eq!(delta_raw(&sw, &j), -d);
            }
        }
    }

    #[test]
    fn contraction_examples() {
        let r = delta_contraction_check(4, 2, 1).unwrap();
        assert!(r.passed());
        assert_eq!(r.checks[0].inputs["coefficient"], "3");
        let r = delta_contraction_check(3, 2, 1).unwrap();
        assert!(r.passed());
        assert_eq!(r.checks[0].inputs["coefficient"], "2");
        // 2! * (3-3+2)! / 0! = 4
        let r = delta_contraction_check(3, 3, 2).unwrap();
        assert!(r.passed());
        assert_eq!(r.checks[0].inputs["coefficient"], "4");
    }

    #[test]
    fn contraction_bounds() {
        assert!(matches!(delta_contraction_check(7, 3, 1), Err(LabError::Resource(_))));
        assert!(matches!(delta_contraction_check(6, 5, 1), Err(LabError::Resource(_))));
        assert!(matches!(delta_contraction_check(4, 2, 2), Err(LabError::Domain(_))));
    }

    #[test]
    fn sigma_via_delta_examples() {
        let s = SmallMat::identity(3).scale(0.5);
        assert!((sigma_via_delta(&s, 2).unwrap() - 0.75).abs() < 1e-15);
        assert_eq!(sigma_via_delta(&s, 0).unwrap(), 1.0);
        assert!(sigma_via_delta(&SmallMat::identity(3), 4).is_err());
    }

    #[test]
    fn three_sigma_routes_agree_on_random_matrices() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let n = rng.gen_range(1..=5);
            let mut s = SmallMat::zeros(n);
            for i in 0..n {
                for j in i..n {
                    let v: f64 = rng.gen_range(-1.0..1.0);
                    s.a[i][j] = v;
                    s.a[j][i] = v;
                }
            }
            let eigs = symmetric_eigenvalues(&s).unwrap();
            let mut pw = Vec::new();
            let mut acc = SmallMat::identity(n);
            for _ in 0..n {
                acc = acc.mul(&s);
                pw.push(acc.trace());
            }
            for k in 0..=n {
                let a = sigma_from_eigs(&eigs, k).unwrap();
                let b = sigma_via_delta(&s, k).unwrap();
                let c = sigma_from_power_sums(&pw, k).unwrap();
                let scale = a.abs().max(1.0);
                assert!((a - b).abs() <= 1e-10 * scale, "n={n} k={k}: {a} vs {b}");
                assert!((a - c).abs() <= 1e-10 * scale, "n={n} k={k}: {a} vs {c}");
            }
        }
    }
}
