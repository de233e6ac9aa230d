//! Run configuration and its flat `key = value` file format.
//!
//! Lines are `key = value`; blank lines and lines starting with `#` are
//! ignored. Index tuples are written `n,k,l,p,q` and separated by `;`.

use cvlab::symcomb::IndexTuple;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },

    #[error("unknown config key '{0}'")]
    UnknownKey(String),

    #[error("invalid value for '{key}': {msg}")]
    Value { key: String, msg: String },

    #[error("invalid config: {0}")]
    Invalid(String),

    #[error("cannot read config file {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Output encoding of a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            other => Err(format!("expected json or csv, got '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub n: usize,
    pub lambda: f64,
    /// Nodes per axis.
    pub grid: usize,
    /// Finite-difference stencil order: 2, 4, 6 or 8.
    pub fd_order: usize,
    pub t_step: f64,
    pub amplitude_cap: f64,
    /// Pointwise analytic-vs-FD tolerance on the collar.
    pub tol_pointwise: f64,
    /// Tolerance of integral identities checked against exact closed forms.
    pub tol_integral: f64,
    /// Second-variation comparisons and integration identities.
    pub tol_fd_compare: f64,
    /// Round-sphere closed forms of the curvature fields.
    pub tol_closed_form: f64,
    pub seed: u64,
    /// Seeded random pure-trace directions in the perturbation library.
    pub random_directions: usize,
    /// Seeded random band-limited functions for the spectral checks.
    pub spectral_samples: usize,
    pub specs: Vec<IndexTuple>,
    pub delta_nmax: usize,
    pub delta_kmax: usize,
    pub scan_nmax: usize,
    /// Also sample TT directions through the iterative projector.
    pub tt_directions: bool,
    pub output: Option<PathBuf>,
    pub format: Format,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            n: 3,
            lambda: 1.0,
            grid: 32,
            fd_order: 8,
            t_step: 5e-3,
            amplitude_cap: 0.05,
            tol_pointwise: 1e-3,
            tol_integral: 1e-4,
            tol_fd_compare: 1e-2,
            tol_closed_form: 1e-5,
            seed: 1,
            random_directions: 10,
            spectral_samples: 50,
            specs: vec![IndexTuple { n: 3, k: 2, l: 1, p: 2, q: 1 }],
            delta_nmax: 6,
            delta_kmax: 4,
            scan_nmax: 60,
            tt_directions: false,
            output: None,
            format: Format::Json,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e: T::Err| ConfigError::Value { key: key.into(), msg: e.to_string() })
}

fn parse_specs(key: &str, value: &str) -> Result<Vec<IndexTuple>, ConfigError> {
    value
        .split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            let v: Vec<usize> = s.split(',').map(|x| parse(key, x.trim())).collect::<Result<_, _>>()?;
            if v.len() != 5 {
                return Err(ConfigError::Value { key: key.into(), msg: format!("'{s}' is not n,k,l,p,q") });
            }
            IndexTuple::new(v[0], v[1], v[2], v[3], v[4]).map_err(|e| ConfigError::Value { key: key.into(), msg: e.to_string() })
        })
        .collect()
}

impl Config {
    /// Parse a config file on top of the defaults.
    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                msg: format!("expected 'key = value', got '{line}'"),
            })?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        Self::from_text(&text)
    }

    /// Set one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "n" => self.n = parse(key, value)?,
            "lambda" => self.lambda = parse(key, value)?,
            "grid" => self.grid = parse(key, value)?,
            "fd_order" => self.fd_order = parse(key, value)?,
            "t_step" => self.t_step = parse(key, value)?,
            "amplitude_cap" => self.amplitude_cap = parse(key, value)?,
            "tol_pointwise" => self.tol_pointwise = parse(key, value)?,
            "tol_integral" => self.tol_integral = parse(key, value)?,
            "tol_fd_compare" => self.tol_fd_compare = parse(key, value)?,
            "tol_closed_form" => self.tol_closed_form = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "random_directions" => self.random_directions = parse(key, value)?,
            "spectral_samples" => self.spectral_samples = parse(key, value)?,
            "specs" => self.specs = parse_specs(key, value)?,
            "delta_nmax" => self.delta_nmax = parse(key, value)?,
            "delta_kmax" => self.delta_kmax = parse(key, value)?,
            "scan_nmax" => self.scan_nmax = parse(key, value)?,
            "tt_directions" => self.tt_directions = parse(key, value)?,
            "output" => self.output = Some(PathBuf::from(value)),
            "format" => self.format = parse(key, value)?,
            other => return Err(ConfigError::UnknownKey(other.into())),
        }
        Ok(())
    }

    /// Check every invariant that does not need the numerical kernels.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |msg: String| Err(ConfigError::Invalid(msg));
        if !(3..=5).contains(&self.n) {
            return invalid(format!("n must be 3, 4 or 5, got {}", self.n));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return invalid(format!("lambda must be positive, got {}", self.lambda));
        }
        if self.grid < 8 {
            return invalid(format!("grid must be at least 8, got {}", self.grid));
        }
        if ![2, 4, 6, 8].contains(&self.fd_order) {
            return invalid(format!("fd_order must be 2, 4, 6 or 8, got {}", self.fd_order));
        }
        let positive = [
            ("t_step", self.t_step),
            ("amplitude_cap", self.amplitude_cap),
            ("tol_pointwise", self.tol_pointwise),
            ("tol_integral", self.tol_integral),
            ("tol_fd_compare", self.tol_fd_compare),
            ("tol_closed_form", self.tol_closed_form),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return invalid(format!("{name} must be positive, got {v}"));
            }
        }
        if self.specs.is_empty() {
            return invalid("at least one index tuple is required".into());
        }
        for t in &self.specs {
            IndexTuple::new(t.n, t.k, t.l, t.p, t.q).map_err(|e| ConfigError::Invalid(e.to_string()))?;
            if t.n != self.n {
                return invalid(format!("index tuple {t} does not match n = {}", self.n));
            }
            if t.beta() == 0 {
                return invalid(format!("index tuple {t} has n = 2(p-q), for which the functional is undefined"));
            }
        }
        if self.delta_nmax > 6 || self.delta_kmax > 4 {
            return invalid("brute-force contraction is limited to delta_nmax <= 6, delta_kmax <= 4".into());
        }
        Ok(())
    }

    /// Canonical `key = value` rendering of every setting that affects
    /// results. Output location and format are left out.
    pub fn canonical(&self) -> String {
        let specs: Vec<String> = self.specs.iter().map(|t| format!("{},{},{},{},{}", t.n, t.k, t.l, t.p, t.q)).collect();
        let mut out = String::new();
        let rows: [(&str, String); 18] = [
            ("n", self.n.to_string()),
            ("lambda", format!("{:?}", self.lambda)),
            ("grid", self.grid.to_string()),
            ("fd_order", self.fd_order.to_string()),
            ("t_step", format!("{:?}", self.t_step)),
            ("amplitude_cap", format!("{:?}", self.amplitude_cap)),
            ("tol_pointwise", format!("{:?}", self.tol_pointwise)),
            ("tol_integral", format!("{:?}", self.tol_integral)),
            ("tol_fd_compare", format!("{:?}", self.tol_fd_compare)),
            ("tol_closed_form", format!("{:?}", self.tol_closed_form)),
            ("seed", self.seed.to_string()),
            ("random_directions", self.random_directions.to_string()),
            ("spectral_samples", self.spectral_samples.to_string()),
            ("specs", specs.join("; ")),
            ("delta_nmax", self.delta_nmax.to_string()),
            ("delta_kmax", self.delta_kmax.to_string()),
            ("scan_nmax", self.scan_nmax.to_string()),
            ("tt_directions", self.tt_directions.to_string()),
        ];
        for (k, v) in rows {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    /// SHA-256 of [`Config::canonical`], hex encoded.
    pub fn hash(&self) -> String {
        Sha256::digest(self.canonical().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form_round_trips() {
        let mut cfg = Config::default();
        cfg.set("specs", "3,2,1,2,1; 3,3,1,2,2").unwrap();
        cfg.set("lambda", "0.25").unwrap();
        let back = Config::from_text(&cfg.canonical()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.hash(), cfg.hash());
        assert_eq!(cfg.hash().len(), 64);
    }

    #[test]
    fn syntax_errors_are_located() {
        match Config::from_text("# header\nn = 3\ngrid 16\n") {
            Err(ConfigError::Syntax { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(Config::from_text("colour = red"), Err(ConfigError::UnknownKey(_))));
        assert!(matches!(Config::from_text("grid = many"), Err(ConfigError::Value { .. })));
    }

    #[test]
    fn validation() {
        assert!(Config::default().validate().is_ok());
        let bad_tuple = Config::from_text("specs = 3,1,2,2,1");
        assert!(matches!(bad_tuple, Err(ConfigError::Value { .. })));
        let mismatch = Config::from_text("specs = 4,2,1,2,1").unwrap();
        assert!(mismatch.validate().is_err());
        let beta_zero = Config::from_text("n = 4\nspecs = 4,2,1,3,1").unwrap();
        assert!(beta_zero.validate().is_err());
        let tol = Config::from_text("tol_pointwise = 0").unwrap();
        assert!(tol.validate().is_err());
        let grid = Config::from_text("grid = 6").unwrap();
        assert!(grid.validate().is_err());
    }
}
