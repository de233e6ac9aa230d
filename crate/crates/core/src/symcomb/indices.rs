use crate::error::{domain, Result};
use crate::report::{CheckRecord, Report};

/// Index tuple `(n, k, l, p, q)` with `1 <= l < k <= n`, `1 <= q <= p <= n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IndexTuple {
    pub n: usize,
    pub k: usize,
    pub l: usize,
    pub p: usize,
    pub q: usize,
}

impl IndexTuple {
    pub fn new(n: usize, k: usize, l: usize, p: usize, q: usize) -> Result<Self> {
        if !(1 <= l && l < k && k <= n) {
            return domain(format!("need 1 <= l < k <= n, got n={n} k={k} l={l}"));
        }
        if !(1 <= q && q <= p && p <= n) {
            return domain(format!("need 1 <= q <= p <= n, got n={n} p={p} q={q}"));
        }
        Ok(Self { n, k, l, p, q })
    }

    /// Exponent of the own-volume factor, `2(k-l)`.
    pub fn alpha(&self) -> i64 {
        2 * (self.k as i64 - self.l as i64)
    }

    /// Exponent of the fixed-background factor, `n - 2(p-q)`.
    pub fn beta(&self) -> i64 {
        self.n as i64 - 2 * (self.p as i64 - self.q as i64)
    }
}

impl std::fmt::Display for IndexTuple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{},{},{})", self.n, self.k, self.l, self.p, self.q)
    }
}

/// Which comparison hypothesis applies to a tuple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Admissibility {
    /// `2(p-q) < n`: a pointwise lower bound on `σ_k/σ_l` is assumed.
    Case1,
    /// `2(p-q) >= n + 2(k-l)`: a pointwise upper bound is assumed.
    Case2,
    Inadmissible,
}

pub fn admissible_indices(t: &IndexTuple) -> Result<Admissibility> {
    let t = IndexTuple::new(t.n, t.k, t.l, t.p, t.q)?;
    let twice_gap = 2 * (t.p - t.q);
    Ok(if t.beta() == 0 {
        Admissibility::Inadmissible
    } else if twice_gap < t.n {
        Admissibility::Case1
    } else if twice_gap >= t.n + 2 * (t.k - t.l) {
        Admissibility::Case2
    } else {
        Admissibility::Inadmissible
    })
}

/// `β(k+l) + 2(p²-q²) - n` in exact integers.
pub fn index_inequality_value(t: &IndexTuple) -> i128 {
    let (n, k, l, p, q) = (t.n as i128, t.k as i128, t.l as i128, t.p as i128, t.q as i128);
    let beta = n - 2 * (p - q);
    beta * (k + l) + 2 * (p * p - q * q) - n
}

/// Exhaustive scan of `β(k+l) + 2(p²-q²) - n >= 0` over every tuple with
/// `n <= n_max` (and `n >= 2`, the smallest dimension admitting `l < k`).
pub fn index_inequality_scan(n_max: usize) -> Result<Report> {
    if n_max < 3 {
        return domain(format!("index scan needs n_max >= 3, got {n_max}"));
    }
    let mut min_value = i128::MAX;
    let mut argmin: Vec<IndexTuple> = Vec::new();
    let mut violations = 0u64;
    let mut tuples = 0u64;
    for n in 2..=n_max {
        for k in 2..=n {
            for l in 1..k {
                for p in 1..=n {
                    for q in 1..=p {
                        let t = IndexTuple { n, k, l, p, q };
                        let v = index_inequality_value(&t);
                        tuples += 1;
                        if v < 0 {
                            violations += 1;
                        }
                        if v < min_value {
                            min_value = v;
                            argmin.clear();
                        }
                        if v == min_value && argmin.len() < 8 {
                            argmin.push(t);
                        }
                    }
                }
            }
        }
    }
    let mut report = Report::new("index_inequality");
    let argmin_text = argmin.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" ");
    report.push(
        CheckRecord::exact("index_inequality_violations", violations as f64, 0.0)
            .with_input("n_max", n_max)
            .with_input("tuples", tuples),
    );
    report.push(
        CheckRecord::flag("index_inequality_min_nonnegative", min_value >= 0)
            .with_input("min_value", min_value)
            .with_input("argmin", argmin_text),
    );
    Ok(report)
}
