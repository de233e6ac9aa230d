//! Check batteries for each module, composed into one [`Report`] per run.
//!
//! Checks run in a fixed order and every random input is derived from the
//! configured seed, so a configuration always produces the same report.

use crate::config::Config;
use crate::CliError;
use cvlab::curv::{einstein_constants, schouten_norm_sq, sigma_fields};
use cvlab::funlab::*;
use cvlab::geom::operators::laplace_scalar;
use cvlab::geom::*;
use cvlab::symcomb::{admissible_indices, delta_contraction_check, index_inequality_scan, index_inequality_value, Admissibility};
use cvlab::vary::*;
use cvlab::{CheckRecord, LabError, Report};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::str::FromStr;
use std::sync::Arc;

/// Tolerance of `H(ḡ)` against its closed form.
pub const H_ROUND_TOL: f64 = 1e-6;
/// Relative tolerance of the scaling-invariance check.
pub const SCALING_TOL: f64 = 1e-10;
/// Bound on the positive part of `d²H/dt²`, relative to `|H(ḡ)|`.
pub const NON_POSITIVE_TOL: f64 = 1e-6;
/// Minimum observed convergence order of the directly differenced scalar curvature.
pub const MIN_ORDER: f64 = 3.5;
/// Round-sphere scalings used by the comparison experiment.
pub const COMPARISON_SCALES: [f64; 4] = [0.9, 0.95, 1.0, 1.05];

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Symcomb,
    Geometry,
    Variation,
    Functional,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Self::Symcomb => "symcomb",
            Self::Geometry => "geometry",
            Self::Variation => "variation",
            Self::Functional => "functional",
            Self::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        [Self::Symcomb, Self::Geometry, Self::Variation, Self::Functional, Self::All]
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown suite '{s}'; expected symcomb, geometry, variation, functional or all"))
    }
}

/// Wraps kernel errors with the suite and check that raised them.
fn at<T>(suite: &'static str, check: impl Into<String>, r: cvlab::Result<T>) -> Result<T, CliError> {
    r.map_err(|source| CliError::Check { suite, check: check.into(), source })
}

/// Appends `[tag]` to every record name and records the tag as an input.
fn tagged(mut report: Report, key: &str, tag: &str) -> Report {
    for c in &mut report.checks {
        c.name = format!("{}[{tag}]", c.name);
        c.inputs.insert(key.into(), tag.into());
    }
    report
}

/// Round sphere of the configured dimension and resolution.
pub fn background(cfg: &Config, grid: usize) -> cvlab::Result<Arc<Background>> {
    let order = FdOrder::from_int(cfg.fd_order)?;
    let chart = Arc::new(Chart::new(cfg.n, cfg.lambda, &vec![grid; cfg.n], order)?);
    Ok(Arc::new(Background::round(&chart)?))
}

pub fn path_options(cfg: &Config) -> PathOptions {
    PathOptions { t_step: cfg.t_step, amplitude_cap: cfg.amplitude_cap, ..PathOptions::default() }
}

/// `Vol(S^n(r))`.
pub fn sphere_volume(n: usize, radius: f64) -> f64 {
    let unit = match n {
        1 => 2.0 * PI,
        2 => 4.0 * PI,
        3 => 2.0 * PI * PI,
        4 => 8.0 * PI * PI / 3.0,
        5 => PI.powi(3),
        _ => f64::NAN,
    };
    unit * radius.powi(n as i32)
}

/// `∫_{S^n(r)} f(x_{n+1}/r) dv` by composite Simpson in the polar angle.
pub fn zonal_integral(n: usize, radius: f64, f: impl Fn(f64) -> f64) -> f64 {
    let m = 20_000;
    let h = PI / m as f64;
    let mut acc = 0.0;
    for i in 0..=m {
        let th = i as f64 * h;
        let w = if i == 0 || i == m {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += w * f(th.cos()) * th.sin().powi(n as i32 - 1);
    }
    sphere_volume(n - 1, 1.0) * radius.powi(n as i32) * acc * h / 3.0
}

/// `∫u²` for the degree-2 generator `u = x_{n+1}² - 1/(n+1)`.
pub fn degree2_square_integral(n: usize, lambda: f64) -> f64 {
    let shift = 1.0 / (n as f64 + 1.0);
    zonal_integral(n, lambda.sqrt().recip(), |x| (x * x - shift).powi(2))
}

/// The library's pure-trace directions: scaling, degree 1, degree 2 and
/// `count` seeded random trace fields.
pub fn pure_trace_kinds(cfg: &Config) -> Vec<DirectionKind> {
    let n = cfg.n;
    let mut kinds = vec![DirectionKind::Scaling, DirectionKind::Degree1 { index: n + 1 }, DirectionKind::Degree2 { index: n + 1 }];
    kinds.extend((0..cfg.random_directions as u64).map(|i| DirectionKind::RandomTrace { seed: cfg.seed.wrapping_add(i) }));
    kinds
}

fn build_path(suite: &'static str, bg: &Arc<Background>, cfg: &Config, kind: DirectionKind) -> Result<PerturbationPath, CliError> {
    let d = at(suite, format!("direction {kind}"), Direction::build(bg, kind))?;
    at(suite, format!("path {kind}"), PerturbationPath::new(bg.clone(), d.h, path_options(cfg)))
}

fn quotient_pairs(cfg: &Config) -> Vec<(usize, usize)> {
    let mut pairs: Vec<(usize, usize)> = cfg.specs.iter().map(|t| (t.k, t.l)).collect();
    pairs.sort_unstable();
    pairs.dedup();
    pairs
}

pub fn symcomb_suite(cfg: &Config) -> Result<Report, CliError> {
    const S: &str = "symcomb";
    let mut report = Report::new(S);
    for n in 1..=cfg.delta_nmax {
        for k in 2..=cfg.delta_kmax.min(n) {
            for p in 1..k {
                report.extend(at(S, format!("delta_contraction n={n} k={k} p={p}"), delta_contraction_check(n, k, p))?);
            }
        }
    }
    report.extend(at(S, "index_inequality_scan", index_inequality_scan(cfg.scan_nmax))?);
    Ok(report)
}

fn collar_max(chart: &Chart, f: impl Fn(usize) -> f64) -> f64 {
    chart.collar_nodes().into_iter().map(f).fold(0.0, f64::max)
}

/// Resolutions used for the convergence study: half, three quarters and
/// all of the configured grid, each rounded up to an even count.
pub fn convergence_grids(grid: usize) -> [usize; 3] {
    let even = |x: usize| x.max(8).div_ceil(2) * 2;
    [even(grid / 2), even(3 * grid / 4), even(grid)]
}

/// Collar sup error of the directly differenced scalar curvature.
pub fn direct_scalar_error(cfg: &Config, grid: usize) -> cvlab::Result<f64> {
    let bg = background(cfg, grid)?;
    let pack = curvature_pack_with(bg.metric(), CurvatureOptions { riemann: false, differencing: Differencing::Direct })?;
    let r = (cfg.n * (cfg.n - 1)) as f64 * cfg.lambda;
    Ok(collar_max(bg.chart(), |k| (pack.scalar().values[k] - r).abs()))
}

pub fn geometry_suite(cfg: &Config) -> Result<Report, CliError> {
    const S: &str = "geometry";
    let mut report = Report::new(S);
    let bg = at(S, "background", background(cfg, cfg.grid))?;
    let (g, pack, chart) = (bg.metric(), bg.pack(), bg.chart());
    let n = cfg.n;
    let nf = n as f64;
    let radius = cfg.lambda.sqrt().recip();

    let vol = sphere_volume(n, radius);
    report.push(CheckRecord::compare("volume", volume(g), vol, vol, 1e-8).with_input("radius", radius));

    let r_exact = nf * (nf - 1.0) * cfg.lambda;
    let r_err = collar_max(chart, |k| (pack.scalar().values[k] - r_exact).abs());
    report.push(CheckRecord::compare("scalar_curvature", r_exact + r_err, r_exact, r_exact, cfg.tol_closed_form).with_note("worst collar node"));

    let consts = at(S, "einstein_constants", einstein_constants(n, cfg.lambda))?;
    let sigmas = at(S, "sigma_fields", sigma_fields(g, pack, n))?;
    for k in 1..=n {
        let want = consts.sigma[k];
        let worst = sigmas[k].values.iter().map(|v| (v - want).abs()).fold(0.0, f64::max);
        report.push(CheckRecord::compare(format!("sigma_{k}_round"), want + worst, want, want, cfg.tol_closed_form).with_note("worst node"));
    }
    let norm = at(S, "schouten_norm_sq", schouten_norm_sq(g, pack))?;
    let newton = (0..chart.len())
        .map(|k| (sigmas[2].values[k] - 0.5 * (sigmas[1].values[k].powi(2) - norm.values[k])).abs() / sigmas[2].values[k].abs().max(1.0))
        .fold(0.0, f64::max);
    report.push(CheckRecord::compare("sigma_2_newton_identity", newton, 0.0, 1.0, 1e-10));

    if pack.has_riemann() {
        let mut worst = 0.0f64;
        for node in chart.collar_nodes() {
            let m = g.field().matrix(node);
            for i in 0..n {
                for j in 0..n {
                    for a in 0..n {
                        for b in 0..n {
                            let want = cfg.lambda * (m.a[j][a] * m.a[i][b] - m.a[i][a] * m.a[j][b]);
                            let got = pack.riemann(node, i, j, a, b).unwrap_or(f64::NAN);
                            worst = worst.max((got - want).abs());
                        }
                    }
                }
            }
        }
        report.push(CheckRecord::compare("riemann_constant_curvature", worst, 0.0, cfg.lambda, cfg.tol_closed_form));
    }

    let grids = convergence_grids(cfg.grid);
    let errs: Vec<f64> = grids
        .iter()
        .map(|&r| at(S, format!("direct scalar curvature at {r}"), direct_scalar_error(cfg, r)))
        .collect::<Result<_, _>>()?;
    let order = (errs[0] / errs[2]).ln() / (grids[2] as f64 / grids[0] as f64).ln();
    report.push(
        CheckRecord::at_least("scalar_curvature_convergence_order", order, MIN_ORDER, 0.0)
            .with_input("grids", format!("{grids:?}"))
            .with_input("errors", format!("{errs:?}")),
    );

    for (degree, mu) in [(1u32, nf * cfg.lambda), (2, 2.0 * (nf + 1.0) * cfg.lambda)] {
        let u = at(S, "harmonic_generator", harmonic_generator(chart, degree, n + 1))?;
        let lap = at(S, "laplace_scalar", laplace_scalar(g, &u))?;
        let size = collar_max(chart, |k| (mu * u.values[k]).abs());
        let worst = collar_max(chart, |k| (lap.values[k] + mu * u.values[k]).abs());
        report.push(
            CheckRecord::compare(format!("laplacian_eigenfunction[degree={degree}]"), worst, 0.0, size, cfg.tol_closed_form)
                .with_input("eigenvalue", mu),
        );
    }
    let u2 = at(S, "harmonic_generator", harmonic_generator(chart, 2, n + 1))?;
    let sq = at(S, "integrate", integrate(&u2.map(|v| v * v), g))?;
    let exact = degree2_square_integral(n, cfg.lambda);
    report.push(CheckRecord::compare("degree2_square_integral", sq, exact, exact, 1e-8));
    Ok(report)
}

pub fn variation_suite(cfg: &Config) -> Result<Report, CliError> {
    const S: &str = "variation";
    let mut report = Report::new(S);
    let bg = at(S, "background", background(cfg, cfg.grid))?;
    let n = cfg.n;
    let pairs = quotient_pairs(cfg);
    for kind in pure_trace_kinds(cfg) {
        let name = kind.to_string();
        let path = build_path(S, &bg, cfg, kind)?;
        let mut r = at(S, format!("r_prime {name}"), r_prime_check(&path, cfg.tol_pointwise, cfg.tol_integral))?;
        for k in 1..=n {
            r.extend(at(S, format!("sigma_{k}_prime {name}"), sigma_k_prime_check(&path, k, cfg.tol_pointwise))?);
        }
        for &(k, l) in &pairs {
            r.extend(at(S, format!("quotient_{k}_{l}_prime {name}"), quotient_prime_check(&path, k, l, cfg.tol_pointwise))?);
        }
        if kind.is_equality_case() || matches!(kind, DirectionKind::Degree2 { .. }) {
            for &(k, l) in &pairs {
                let c = format!("quotient_{k}_{l}_second {name}");
                r.extend(at(S, c, quotient_second_variation_check(&path, k, l, cfg.tol_fd_compare))?);
            }
            let ids = at(S, format!("integration identities {name}"), integration_identity_check(&path, cfg.tol_fd_compare))?;
            if matches!(kind, DirectionKind::Degree2 { .. }) {
                let u_sq = degree2_square_integral(n, cfg.lambda);
                let coeff = ((n - 1) * (n + 2)) as f64 * cfg.lambda;
                let want = coeff * coeff * u_sq;
                let got = ids.get("int_r1_sq").map_or(f64::NAN, |c| c.measured);
                r.push(CheckRecord::compare("int_r1_sq_closed_form", got, want, want, cfg.tol_fd_compare).with_input("int_u_sq", format!("{u_sq:e}")));
            }
            r.extend(ids);
        }
        report.extend(tagged(r, "direction", &name));
        path.clear_cache();
    }
    Ok(report)
}

/// Closed form of `H(ḡ)^{-1} Vol D²H` along `u ḡ` for the degree-2
/// generator, from `Δu = -μu`, `μ = 2(n+1)λ` and mean-zero `u`.
pub fn degree2_normalized_second_variation(spec: &FunctionalSpec) -> f64 {
    let t = spec.indices;
    let (n, l, p, q) = (t.n as f64, t.l as f64, t.p as f64, t.q as f64);
    let lambda = spec.consts.lambda;
    let (a, b) = (spec.alpha as f64, spec.beta as f64);
    let mu = 2.0 * (n + 1.0) * lambda;
    let u_sq = degree2_square_integral(t.n, lambda);
    // tr h = n u
    let lap_tr_sq = n * n * mu * mu * u_sq;
    let grad_tr_sq = n * n * mu * u_sq;
    let tr_var = n * n * u_sq;
    let term3 = -a * (2.0 * (p - q) * (q - l) + n * l) / (n.powi(4) * lambda * lambda) * (lap_tr_sq - n * lambda * grad_tr_sq);
    let term4 = -a * b * (a + b) / (4.0 * n.powi(3) * lambda) * (grad_tr_sq - n * lambda * tr_var);
    term3 + term4
}

/// Predicted comparison outcome on `c² ḡ`: `(hypothesis, conclusion, equality)`.
pub fn comparison_prediction(case: Admissibility, c: f64) -> (bool, bool, bool) {
    let holds = match case {
        Admissibility::Case1 => c <= 1.0,
        Admissibility::Case2 => c >= 1.0,
        Admissibility::Inadmissible => false,
    };
    (holds, holds, c == 1.0)
}

pub fn functional_suite(cfg: &Config) -> Result<Report, CliError> {
    const S: &str = "functional";
    let mut report = Report::new(S);
    let bg = at(S, "background", background(cfg, cfg.grid))?;
    let g0 = bg.metric();
    let n = cfg.n;
    let specs: Vec<FunctionalSpec> = cfg
        .specs
        .iter()
        .map(|&t| at(S, format!("spec {t}"), FunctionalSpec::new(t, cfg.lambda)))
        .collect::<Result<_, _>>()?;
    let vol = sphere_volume(n, cfg.lambda.sqrt().recip());

    for spec in &specs {
        let tag = spec.indices.to_string();
        let mut r = Report::new(S);
        let h0 = at(S, format!("H {tag}"), h_of_metric(spec, g0, g0))?;
        let want = spec.round_value(vol);
        r.push(CheckRecord::compare("H_round", h0, want, want, H_ROUND_TOL));
        r.extend(at(S, format!("scaling {tag}"), scaling_invariance_check(spec, g0, g0, &[0.5, 2.0], SCALING_TOL))?);
        let coeff = i128::from(spec.alpha) * index_inequality_value(&spec.indices);
        r.push(CheckRecord::at_least("index_coefficient", coeff as f64, 0.0, 0.0));
        let deg2 = at(S, "degree-2 direction", Direction::build(&bg, DirectionKind::Degree2 { index: n + 1 }))?;
        let sv = at(S, format!("second variation {tag}"), second_variation_analytic(spec, &bg, &deg2.h))?;
        let oracle = degree2_normalized_second_variation(spec);
        r.push(CheckRecord::compare("normalized_second_variation_closed_form", sv.normalized(), oracle, oracle, cfg.tol_fd_compare));
        report.extend(tagged(r, "spec", &tag));
    }

    let mut kinds = pure_trace_kinds(cfg);
    kinds.push(DirectionKind::RandomGeneral { seed: cfg.seed });
    kinds.push(DirectionKind::Gauge { seed: cfg.seed });
    for kind in kinds {
        let name = kind.to_string();
        let path = build_path(S, &bg, cfg, kind)?;
        let mut r = Report::new(S);
        for spec in &specs {
            let tag = spec.indices.to_string();
            let mut s = at(S, format!("criticality {tag} {name}"), criticality_check(spec, &path, CriticalityTolerances::default()))?;
            if kind.is_pure_trace() {
                let h0 = at(S, "H", h_of_metric(spec, g0, g0))?;
                let d2 = at(S, format!("d2H {tag} {name}"), fd_functional_derivative(&path, |x| h_of_sample(spec, x, g0), 2))?;
                s.push(
                    CheckRecord::at_least("second_derivative_non_positive", -d2.value / h0.abs(), 0.0, NON_POSITIVE_TOL)
                        .with_input("d2H", format!("{:e}", d2.value)),
                );
            }
            if kind.is_equality_case() || matches!(kind, DirectionKind::Degree2 { .. }) {
                s.extend(at(S, format!("second variation FD {tag} {name}"), second_variation_fd_compare(spec, &path, cfg.tol_fd_compare))?);
            }
            r.extend(tagged(s, "spec", &tag));
        }
        report.extend(tagged(r, "direction", &name));
        path.clear_cache();
    }

    let flat: Vec<Direction> = [DirectionKind::Scaling, DirectionKind::Degree1 { index: n + 1 }]
        .into_iter()
        .map(|k| at(S, format!("direction {k}"), Direction::build(&bg, k)))
        .collect::<Result<_, _>>()?;
    let mut curved = vec![DirectionKind::Degree2 { index: n + 1 }];
    curved.extend((0..cfg.random_directions.min(2) as u64).map(|i| DirectionKind::RandomTrace { seed: cfg.seed.wrapping_add(i) }));
    let curved: Vec<Direction> = curved.into_iter().map(|k| at(S, format!("direction {k}"), Direction::build(&bg, k))).collect::<Result<_, _>>()?;
    let opts = ScanOptions { amplitude_cap: cfg.amplitude_cap, ..ScanOptions::default() };
    for spec in &specs {
        let tag = spec.indices.to_string();
        let mut r = at(S, format!("flat scan {tag}"), local_max_scan(spec, &bg, &flat, &flat_grid(), opts))?;
        r.extend(at(S, format!("local max scan {tag}"), local_max_scan(spec, &bg, &curved, &scan_grid(), opts))?);
        report.extend(tagged(r, "spec", &tag));
    }

    report.extend(spectral_checks(cfg, &bg)?);

    for spec in &specs {
        let case = at(S, "admissibility", admissible_indices(&spec.indices))?;
        if case == Admissibility::Inadmissible {
            continue;
        }
        let tag = spec.indices.to_string();
        for c in COMPARISON_SCALES {
            let g = at(S, "scaled metric", MetricField::new(g0.field().scaled(c * c)))?;
            let out = at(S, format!("comparison {tag} c={c}"), comparison_experiment(spec, &bg, &g))?;
            let mut r = out.to_report();
            let got = (out.hypothesis_holds, out.conclusion_holds, out.equality);
            let want = comparison_prediction(case, c);
            r.push(
                CheckRecord::flag("comparison_prediction", got == want)
                    .with_input("observed", format!("{got:?}"))
                    .with_input("predicted", format!("{want:?}")),
            );
            report.extend(tagged(tagged(r, "c", &c.to_string()), "spec", &tag));
        }
    }

    if cfg.tt_directions {
        report.extend(tt_samples(cfg, &bg)?);
    }
    Ok(report)
}

fn spectral_checks(cfg: &Config, bg: &Arc<Background>) -> Result<Report, CliError> {
    const S: &str = "functional";
    let mut report = Report::new(S);
    let chart = bg.chart();
    let n = cfg.n;
    let nl = n as f64 * cfg.lambda;
    let tol = SpectralTolerances::default();
    let constant = ScalarField::from_fn(chart, |_| 1.0);
    let x = at(S, "harmonic_generator", harmonic_generator(chart, 1, n + 1))?;
    for (label, u) in [("constant", &constant), ("degree1", &x)] {
        let mut r = at(S, format!("bochner {label}"), bochner_check(bg, u, tol))?;
        let obata = at(S, format!("obata {label}"), obata_check(bg, u, tol))?;
        let (flagged_b, flagged_o) = (equality_flagged(&r), equality_flagged(&obata));
        r.extend(obata);
        r.push(CheckRecord::flag("bochner_equality_flagged", flagged_b));
        r.push(CheckRecord::flag("obata_equality_flagged", flagged_o));
        report.extend(tagged(r, "u", label));
    }
    let u = at(S, "harmonic_generator", harmonic_generator(chart, 2, n + 1))?;
    let mu = 2.0 * (n as f64 + 1.0) * cfg.lambda;
    let u_sq = degree2_square_integral(n, cfg.lambda);
    let b = at(S, "bochner degree2", bochner_value(bg, &u))?;
    let o = at(S, "obata degree2", obata_value(bg, &u))?;
    let (bw, ow) = ((mu * mu - nl * mu) * u_sq, (mu - nl) * u_sq);
    report.push(CheckRecord::compare("bochner_value[u=degree2]", b, bw, bw, cfg.tol_closed_form));
    report.push(CheckRecord::compare("obata_value[u=degree2]", o, ow, ow, cfg.tol_closed_form));

    for i in 0..cfg.spectral_samples as u64 {
        let seed = cfg.seed.wrapping_add(1000 + i);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = AmbientPoly::random(n + 1, 3, &mut rng).field(chart);
        let br = at(S, format!("bochner random {seed}"), bochner_check(bg, &f, tol))?;
        let or = at(S, format!("obata random {seed}"), obata_check(bg, &f, tol))?;
        let flagged = equality_flagged(&br) || equality_flagged(&or);
        let mut r = br;
        r.extend(or);
        r.push(CheckRecord::flag("no_equality_flag", !flagged));
        report.extend(tagged(r, "u", &format!("random:{seed}")));
    }
    Ok(report)
}

/// Opt-in Rayleigh quotients of `Δ_E` on projected TT samples. Recorded
/// as diagnostics only.
fn tt_samples(cfg: &Config, bg: &Arc<Background>) -> Result<Report, CliError> {
    const S: &str = "functional";
    let mut report = Report::new(S);
    for i in 0..2u64 {
        let seed = cfg.seed.wrapping_add(500 + i);
        let d = at(S, "random direction", Direction::build(bg, DirectionKind::RandomGeneral { seed }))?;
        let proj = match tt_project(bg, &d.h, 1e-6, 2000) {
            Ok(p) => p,
            Err(e @ LabError::Convergence { .. }) => {
                report.push(CheckRecord::diagnostic(format!("rayleigh_einstein[tt:{seed}]"), f64::NAN).with_note(e.to_string()));
                continue;
            }
            Err(e) => return at(S, "tt_project", Err(e)),
        };
        let rec = match rayleigh_einstein(bg, &proj.field) {
            Ok(v) => CheckRecord::diagnostic(format!("rayleigh_einstein[tt:{seed}]"), v),
            Err(e) => CheckRecord::diagnostic(format!("rayleigh_einstein[tt:{seed}]"), f64::NAN).with_note(e.to_string()),
        };
        report.push(rec.with_input("iterations", proj.iterations).with_input("residual", format!("{:e}", proj.residual)));
    }
    Ok(report)
}

/// Runs one suite, or all four in order with record names prefixed by
/// their suite.
pub fn run_suite(suite: Suite, cfg: &Config) -> Result<Report, CliError> {
    cfg.validate()?;
    let mut report = match suite {
        Suite::Symcomb => symcomb_suite(cfg)?,
        Suite::Geometry => geometry_suite(cfg)?,
        Suite::Variation => variation_suite(cfg)?,
        Suite::Functional => functional_suite(cfg)?,
        Suite::All => {
            let mut all = Report::new("all");
            for s in [Suite::Symcomb, Suite::Geometry, Suite::Variation, Suite::Functional] {
                let mut r = run_suite(s, cfg)?;
                for c in &mut r.checks {
                    c.name = format!("{}/{}", s.name(), c.name);
                }
                all.extend(r);
            }
            all
        }
    };
    report.suite = suite.name().into();
    report.environment = environment(cfg);
    Ok(report)
}

/// Environment echo attached to every report.
pub fn environment(cfg: &Config) -> std::collections::BTreeMap<String, String> {
    [
        ("config_hash", cfg.hash()),
        ("seed", cfg.seed.to_string()),
        ("cvlab_version", env!("CARGO_PKG_VERSION").to_string()),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}
