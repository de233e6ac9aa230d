//! Structured results of a verification run.
//!
//! A [`Report`] is an ordered list of [`CheckRecord`]s. Diagnostic records
//! carry values for inspection but never affect the overall verdict.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CheckRecord {
    pub name: String,
    pub inputs: BTreeMap<String, String>,
    #[serde(with = "nullable")]
    pub measured: f64,
    #[serde(with = "nullable")]
    pub reference: f64,
    #[serde(with = "nullable")]
    pub abs_dev: f64,
    #[serde(with = "nullable")]
    pub rel_dev: f64,
    #[serde(with = "nullable")]
    pub tol: f64,
    pub pass: bool,
    /// Self-reported error of a finite-difference oracle, relative to the
    /// same scale as `rel_dev`.
    #[serde(default)]
    pub fd_self_error: Option<f64>,
    #[serde(default)]
    pub diagnostic: bool,
    /// Plot-ready `(t, value)` rows for profile scans.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<Vec<(f64, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckRecord {
    /// Compare `measured` against `reference` with relative tolerance `tol`.
    /// `scale` is the floor of the denominator, so quantities whose true value
    /// is zero are compared against the natural size of their terms.
    pub fn compare(name: impl Into<String>, measured: f64, reference: f64, scale: f64, tol: f64) -> Self {
        let abs_dev = (measured - reference).abs();
        let denom = reference.abs().max(scale.abs());
        let rel_dev = if denom > 0.0 { abs_dev / denom } else { abs_dev };
        Self {
            name: name.into(),
            inputs: BTreeMap::new(),
            measured,
            reference,
            abs_dev,
            rel_dev,
            tol,
            pass: rel_dev <= tol && measured.is_finite(),
            fd_self_error: None,
            diagnostic: false,
            profile: None,
            note: None,
        }
    }

    /// Exact comparison; passes only on equality.
    pub fn exact(name: impl Into<String>, measured: f64, reference: f64) -> Self {
        let mut rec = Self::compare(name, measured, reference, 1.0, 0.0);
        rec.pass = measured == reference;
        rec
    }

    /// One-sided check `measured >= bound - tol`.
    pub fn at_least(name: impl Into<String>, measured: f64, bound: f64, tol: f64) -> Self {
        let mut rec = Self::compare(name, measured, bound, 1.0, tol);
        rec.abs_dev = (bound - measured).max(0.0);
        rec.rel_dev = rec.abs_dev;
        rec.pass = measured >= bound - tol;
        rec
    }

    /// A boolean assertion; `measured` is 1 when the condition holds.
    pub fn flag(name: impl Into<String>, holds: bool) -> Self {
        Self::exact(name, if holds { 1.0 } else { 0.0 }, 1.0)
    }

    /// A value recorded for inspection only.
    pub fn diagnostic(name: impl Into<String>, measured: f64) -> Self {
        let mut rec = Self::compare(name, measured, f64::NAN, 0.0, f64::INFINITY);
        rec.abs_dev = f64::NAN;
        rec.rel_dev = f64::NAN;
        rec.tol = f64::NAN;
        rec.pass = true;
        rec.diagnostic = true;
        rec
    }

    pub fn with_input(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.inputs.insert(key.into(), value.to_string());
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn with_profile(mut self, rows: Vec<(f64, f64)>) -> Self {
        self.profile = Some(rows);
        self
    }

    /// Attach the oracle's own error estimate. The check keeps passing only
    /// if the estimate stays below `0.3 * tol`.
    pub fn with_fd_error(mut self, rel_err: f64) -> Self {
        self.fd_self_error = Some(rel_err);
        if !(rel_err <= 0.3 * self.tol) {
            self.pass = false;
        }
        self
    }
}

/// Non-finite values are written as `null` and read back as NaN, so a
/// report survives a JSON round trip.
mod nullable {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct Report {
    pub suite: String,
    pub checks: Vec<CheckRecord>,
    #[serde(default)]
    pub environment: BTreeMap<String, String>,
}

impl Report {
    pub fn new(suite: impl Into<String>) -> Self {
        Self {
            suite: suite.into(),
            ..Default::default()
        }
    }

    pub fn push(&mut self, rec: CheckRecord) {
        self.checks.push(rec);
    }

    pub fn extend(&mut self, other: Report) {
        self.checks.extend(other.checks);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.diagnostic || c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.diagnostic && !c.pass)
    }

    pub fn max_rel_dev(&self) -> f64 {
        self.checks
            .iter()
            .filter(|c| !c.diagnostic)
            .map(|c| c.rel_dev)
            .fold(0.0, f64::max)
    }

    pub fn get(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagnostics_do_not_fail_a_report() {
        let mut r = Report::new("t");
        r.push(CheckRecord::diagnostic("d", 3.0));
        r.push(CheckRecord::compare("c", 1.0 + 1e-9, 1.0, 1.0, 1e-6));
        assert!(r.passed());
        r.push(CheckRecord::flag("f", false));
        assert!(!r.passed());
        assert_eq!(r.failures().count(), 1);
    }

    #[test]
    fn zero_reference_uses_scale_floor() {
        let rec = CheckRecord::compare("z", 1e-5, 0.0, 10.0, 1e-5);
        assert!((rec.rel_dev - 1e-6).abs() < 1e-18);
        assert!(rec.pass);
    }

    #[test]
    fn noisy_oracle_fails_the_check() {
        let rec = CheckRecord::compare("c", 1.0, 1.0, 1.0, 1e-3).with_fd_error(5e-4);
        assert!(!rec.pass);
        let rec = CheckRecord::compare("c", 1.0, 1.0, 1.0, 1e-3).with_fd_error(1e-4);
        assert!(rec.pass);
    }
}
