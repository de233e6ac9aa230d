use clap::{Args, Parser, Subcommand};
use cvlab::funlab::{comparison_experiment, perturbed_metric, FunctionalSpec};
use cvlab::symcomb::{index_inequality_scan, IndexTuple};
use cvlab::vary::{Direction, DirectionKind, PathOptions};
use cvlab::Report;
use cvlab_cli::suites::{background, environment};
use cvlab_cli::{emit_report, exit, run_suite, CliError, Config, ConfigError, Format, Suite};
use std::path::PathBuf;
use std::process::ExitCode;

/// Numerical verification suites for σ_k curvature functionals near the
/// round sphere.
#[derive(Parser)]
#[command(name = "cvlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a check suite and emit its report.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        #[command(flatten)]
        common: Common,
    },
    /// Exploratory experiments.
    Experiment {
        #[command(subcommand)]
        which: Experiment,
    },
    /// Exhaustive scans.
    Scan {
        #[command(subcommand)]
        which: Scan,
    },
}

#[derive(Subcommand)]
enum Experiment {
    /// Evaluate the comparison hypothesis and conclusion on ḡ + t h.
    Comparison {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        l: usize,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        q: usize,
        #[arg(long, default_value_t = 0.0)]
        t: f64,
        /// Direction h: zero, scaling, deg1, deg2, random-trace, random or gauge.
        #[arg(long, default_value = "scaling")]
        direction: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum Scan {
    /// Check β(k+l) + 2(p²-q²) - n >= 0 over every tuple up to `nmax`.
    Indices {
        #[arg(long)]
        nmax: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

/// Settings shared by the commands that read a config; flags override the file.
#[derive(Args)]
struct Common {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Any other config key, as `key=value`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Common {
    fn config(&self) -> Result<Config, ConfigError> {
        let mut cfg = match &self.config {
            Some(p) => Config::from_file(p)?,
            None => Config::default(),
        };
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| ConfigError::Value { key: "--set".into(), msg: format!("expected KEY=VALUE, got '{kv}'") })?;
            cfg.set(k.trim(), v.trim())?;
        }
        if let Some(n) = self.n {
            cfg.n = n;
            // a bare --n re-targets the default tuple when none was configured
            if cfg.specs.iter().all(|t| t.n != n) && self.config.is_none() {
                cfg.specs = vec![IndexTuple::new(n, 2, 1, 2, 1).map_err(|e| ConfigError::Invalid(e.to_string()))?];
            }
        }
        if let Some(v) = self.lambda {
            cfg.lambda = v;
        }
        if let Some(v) = self.grid {
            cfg.grid = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.format {
            cfg.format = v;
        }
        if let Some(v) = &self.output {
            cfg.output = Some(v.clone());
        }
        Ok(cfg)
    }
}

fn summarize(report: &Report) {
    let failed: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
    eprintln!("{}: {} checks, {} failed", report.suite, report.checks.len(), failed.len());
    for name in failed {
        eprintln!("  FAIL {name}");
    }
}

fn verify(suite: Suite, common: &Common) -> Result<i32, CliError> {
    let cfg = common.config()?;
    let report = run_suite(suite, &cfg)?;
    emit_report(&report, cfg.format, cfg.output.as_deref())?;
    summarize(&report);
    Ok(if report.passed() { exit::PASS } else { exit::FAIL })
}

fn comparison(tuple: (usize, usize, usize, usize), t: f64, direction: &str, common: &Common) -> Result<i32, CliError> {
    let mut cfg = common.config()?;
    let (k, l, p, q) = tuple;
    let it = IndexTuple::new(cfg.n, k, l, p, q).map_err(|e| ConfigError::Invalid(e.to_string()))?;
    cfg.specs = vec![it];
    cfg.validate()?;
    let kind = DirectionKind::parse(direction, cfg.n, cfg.seed).map_err(|e| ConfigError::Value { key: "direction".into(), msg: e.to_string() })?;
    let check = |what: &str, e: cvlab::LabError| CliError::Check { suite: "comparison", check: what.into(), source: e };
    let spec = FunctionalSpec::new(it, cfg.lambda).map_err(|e| ConfigError::Invalid(e.to_string()))?;
    let bg = background(&cfg, cfg.grid).map_err(|e| check("background", e))?;
    let d = Direction::build(&bg, kind).map_err(|e| check("direction", e))?;
    let g = perturbed_metric(&bg, &d.h, t, PathOptions::default().min_eig_ratio).map_err(|e| check("metric", e))?;
    let outcome = comparison_experiment(&spec, &bg, &g).map_err(|e| check("experiment", e))?;
    let mut report = outcome.to_report();
    for c in &mut report.checks {
        c.inputs.insert("spec".into(), it.to_string());
        c.inputs.insert("direction".into(), d.name());
        c.inputs.insert("t".into(), t.to_string());
    }
    report.environment = environment(&cfg);
    emit_report(&report, cfg.format, cfg.output.as_deref())?;
    eprintln!("{it} along {} at t = {t}: {}", d.name(), outcome.verdict());
    Ok(exit::PASS)
}

fn scan(nmax: usize, format: Format, output: Option<PathBuf>) -> Result<i32, CliError> {
    let report = index_inequality_scan(nmax).map_err(|e| CliError::Check { suite: "scan", check: "index_inequality_scan".into(), source: e })?;
    emit_report(&report, format, output.as_deref())?;
    summarize(&report);
    Ok(if report.passed() { exit::PASS } else { exit::FAIL })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = cvlab_cli::init_threads().map_err(CliError::from).and_then(|()| match &cli.command {
        Command::Verify { suite, common } => verify(*suite, common),
        Command::Experiment { which: Experiment::Comparison { k, l, p, q, t, direction, common } } => {
            comparison((*k, *l, *p, *q), *t, direction, common)
        }
        Command::Scan { which: Scan::Indices { nmax, format, output } } => scan(*nmax, *format, output.clone()),
    });
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
