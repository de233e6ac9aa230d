//! Acceptance gate: one line per criterion, non-zero exit if any fails.
//!
//! Runs without the libtest harness so the per-criterion lines always reach
//! the output of `cargo test`.

use cvlab::curv::{schouten_norm_sq, sigma_fields};
use cvlab::funlab::*;
use cvlab::geom::*;
use cvlab::symcomb::{binomial, delta_contraction_check, index_inequality_scan, IndexTuple};
use cvlab::vary::*;
use cvlab::Report;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn round(res: usize) -> Arc<Background> {
    let chart = Arc::new(Chart::new(3, 1.0, &[res; 3], FdOrder::Eighth).unwrap());
    Arc::new(Background::round(&chart).unwrap())
}

fn path(bg: &Arc<Background>, kind: DirectionKind) -> PerturbationPath {
    PerturbationPath::with_defaults(bg.clone(), Direction::build(bg, kind).unwrap().h).unwrap()
}

fn reference_spec() -> FunctionalSpec {
    FunctionalSpec::new(IndexTuple::new(3, 2, 1, 2, 1).unwrap(), 1.0).unwrap()
}

/// `∫_{S³} f(x_4) dv = 4π ∫_0^π f(cos θ) sin²θ dθ`, composite Simpson.
fn zonal_integral(f: impl Fn(f64) -> f64) -> f64 {
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
        acc += w * f(th.cos()) * th.sin().powi(2);
    }
    4.0 * PI * acc * h / 3.0
}

/// `∫u²` for `u = x_4² - 1/4` on the unit three-sphere.
fn u_sq() -> f64 {
    zonal_integral(|x| (x * x - 0.25).powi(2))
}

fn failures(r: &Report) -> String {
    let names: Vec<&str> = r.failures().map(|c| c.name.as_str()).collect();
    if names.is_empty() {
        String::new()
    } else {
        format!("; failing: {}", names.join(", "))
    }
}

fn library(bg: &Arc<Background>) -> Vec<DirectionKind> {
    let mut kinds = vec![DirectionKind::Scaling, DirectionKind::Degree1 { index: 4 }, DirectionKind::Degree2 { index: 4 }];
    kinds.extend((0..10).map(|seed| DirectionKind::RandomTrace { seed }));
    assert_eq!(pure_trace_library(bg, 0, 10).unwrap().len(), kinds.len());
    kinds
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut report = Report::new("delta");
    let mut cases = 0;
    for n in 1..=6 {
        for k in 2..=4.min(n) {
            for p in 1..k {
                report.extend(delta_contraction_check(n, k, p).unwrap());
                cases += 1;
            }
        }
    }
    let dev = report.checks.iter().map(|c| c.measured).fold(0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    outcome(report.passed() && dev == 0.0 && secs < 10.0, format!("{cases} (n,k,p) cases, max integer deviation {dev}, {secs:.2} s"))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let report = index_inequality_scan(60).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let mut negative = 0u64;
    let mut tuples = 0u64;
    for n in 2..=60i128 {
        for k in 1..=n {
            for l in 1..k {
                for p in 1..=n {
                    for q in 1..=p {
                        tuples += 1;
                        if (n - 2 * (p - q)) * (k + l) + 2 * (p * p - q * q) - n < 0 {
                            negative += 1;
                        }
                    }
                }
            }
        }
    }
    outcome(
        report.passed() && negative == 0 && secs < 30.0,
        format!("{tuples} tuples, {negative} negative by direct recount, scan {secs:.2} s{}", failures(&report)),
    )
}

fn criterion_3(bg: &Background) -> Outcome {
    let (g, pack) = (bg.metric(), bg.pack());
    let s = sigma_fields(g, pack, 3).unwrap();
    let mut worst = 0.0f64;
    for k in 1..=3u64 {
        let want = 0.5f64.powi(k as i32) * binomial(3, k).unwrap() as f64;
        worst = worst.max(s[k as usize].values.iter().map(|v| (v / want - 1.0).abs()).fold(0.0, f64::max));
    }
    let norm = schouten_norm_sq(g, pack).unwrap();
    let newton = (0..g.chart().len())
        .map(|i| (s[2].values[i] - 0.5 * (s[1].values[i].powi(2) - norm.values[i])).abs())
        .fold(0.0, f64::max);
    let vol = (volume(g) / (2.0 * PI * PI) - 1.0).abs();
    outcome(
        worst <= 1e-5 && newton <= 1e-10 && vol <= 1e-8,
        format!("sigma_k rel err {worst:.2e}, Newton residual {newton:.2e}, volume rel err {vol:.2e}"),
    )
}

fn criterion_4() -> Outcome {
    let err = |res: usize| {
        let chart = Arc::new(Chart::new(3, 1.0, &[res; 3], FdOrder::Eighth).unwrap());
        let g = MetricField::round(&chart);
        let pack = curvature_pack_with(&g, CurvatureOptions { riemann: false, differencing: Differencing::Direct }).unwrap();
        chart.collar_nodes().into_iter().map(|k| (pack.scalar().values[k] - 6.0).abs()).fold(0.0, f64::max)
    };
    let e: Vec<f64> = [16, 24, 32].into_iter().map(err).collect();
    let o1 = (e[0] / e[1]).ln() / 1.5f64.ln();
    let o2 = (e[1] / e[2]).ln() / (32.0f64 / 24.0).ln();
    let order = (e[0] / e[2]).ln() / 2f64.ln();
    outcome(
        order >= 3.5,
        format!("errors {:.2e} / {:.2e} / {:.2e}, observed order {order:.2} (pairwise {o1:.2}, {o2:.2})", e[0], e[1], e[2]),
    )
}

fn criterion_5(bg: &Arc<Background>) -> Outcome {
    let mut report = Report::new("first");
    let mut worst_integral = 0.0f64;
    for kind in library(bg) {
        let p = path(bg, kind);
        let r = r_prime_check(&p, 1e-3, 1e-4).unwrap();
        worst_integral = worst_integral.max(r.get("r_prime_integral").unwrap().rel_dev);
        report.extend(r);
        for k in 1..=3 {
            report.extend(sigma_k_prime_check(&p, k, 1e-3).unwrap());
        }
        report.extend(quotient_prime_check(&p, 2, 1, 1e-3).unwrap());
    }
    outcome(
        report.passed(),
        format!(
            "{} checks over 13 directions, max pointwise rel dev {:.2e}, max integral rel dev {worst_integral:.2e}{}",
            report.checks.len(),
            report.max_rel_dev(),
            failures(&report)
        ),
    )
}

fn criterion_6(bg: &Arc<Background>) -> Outcome {
    let scaling = quotient_second_variation_check(&path(bg, DirectionKind::Scaling), 2, 1, 1e-2).unwrap();
    // d²/dt² (1+t)^{-(k-l)} A_21 = (k-l)(k-l+1) A_21 = 2 · 0.5
    let exact = 2.0 * 0.5;
    let rec = &scaling.checks[0];
    let closed = (rec.reference - exact).abs() / exact;
    let deg2 = quotient_second_variation_check(&path(bg, DirectionKind::Degree2 { index: 4 }), 2, 1, 1e-2).unwrap();
    outcome(
        scaling.passed() && deg2.passed() && closed <= 1e-2,
        format!(
            "scaling: FD {:.6} vs formula {:.6} vs closed form {exact}; degree 2 rel dev {:.2e}{}{}",
            rec.measured,
            rec.reference,
            deg2.max_rel_dev(),
            failures(&scaling),
            failures(&deg2)
        ),
    )
}

fn criterion_7(bg: &Arc<Background>) -> Outcome {
    let mut report = Report::new("identities");
    let mut r1_sq = f64::NAN;
    for kind in [DirectionKind::Scaling, DirectionKind::Degree1 { index: 4 }, DirectionKind::Degree2 { index: 4 }] {
        let r = integration_identity_check(&path(bg, kind), 1e-2).unwrap();
        if matches!(kind, DirectionKind::Degree2 { .. }) {
            r1_sq = r.get("int_r1_sq").unwrap().measured;
        }
        report.extend(r);
    }
    // Δu = -8u on S³, so R' = -2Δu - 6u = 10u
    let oracle = 100.0 * u_sq();
    let stated = 1764.0 * PI * PI / 8.0;
    let dev = (r1_sq - oracle).abs() / oracle;
    outcome(
        report.passed() && dev <= 1e-2,
        format!(
            "{} identities, max rel dev {:.2e}; ∫(R')² = {r1_sq:.6} vs oracle 100π²/8 = {oracle:.6} (rel {dev:.1e}); \
             the stated 1764π²/8 = {stated:.1} is inconsistent with R' = 10u{}",
            report.checks.len(),
            report.max_rel_dev(),
            failures(&report)
        ),
    )
}

fn criterion_8(bg: &Arc<Background>) -> Outcome {
    let spec = reference_spec();
    let g0 = bg.metric();
    let scaling = scaling_invariance_check(&spec, g0, g0, &[0.5, 2.0], 1e-10).unwrap();
    let h0 = h_of_metric(&spec, g0, g0).unwrap();
    let expect = 0.125 * (2.0 * PI * PI).powi(3);
    let h_dev = (h0 - expect).abs() / expect;
    let mut kinds = library(bg);
    kinds.push(DirectionKind::RandomGeneral { seed: 0 });
    kinds.push(DirectionKind::Gauge { seed: 0 });
    let mut crit = Report::new("criticality");
    let mut worst = 0.0f64;
    for kind in &kinds {
        let r = criticality_check(&spec, &path(bg, *kind), CriticalityTolerances::default()).unwrap();
        worst = worst.max(r.get("criticality_dH").unwrap().measured.abs() / h0.abs());
        crit.extend(r);
    }
    outcome(
        scaling.passed() && crit.passed() && h_dev <= 1e-6 && worst <= 1e-6,
        format!(
            "scaling rel dev {:.1e}; max |dH|/H {worst:.1e} over {} directions; H(ḡ) = {h0:.9} (rel {h_dev:.1e}){}{}",
            scaling.max_rel_dev(),
            kinds.len(),
            failures(&scaling),
            failures(&crit)
        ),
    )
}

fn criterion_9(bg: &Arc<Background>) -> Outcome {
    let spec = reference_spec();
    let deg2 = path(bg, DirectionKind::Degree2 { index: 4 });
    let fd = second_variation_fd_compare(&spec, &deg2, 1e-2).unwrap();
    let sv = second_variation_analytic(&spec, bg, deg2.direction()).unwrap();
    // pure trace: tr h = 3u, ∫(Δ tr)² = 9·64∫u², ∫|∇tr|² = 9·8∫u², var(tr) = 9∫u²
    // α = 2, β = 1: term 3 = -(2·3/81)(576 - 216)∫u², term 4 = -(6/108)(72 - 27)∫u²
    let oracle = -(6.0 / 81.0) * 360.0 * u_sq() - (6.0 / 108.0) * 45.0 * u_sq();
    let golden = -175.0 * PI * PI / 48.0;
    let norm_dev = (sv.normalized() - oracle).abs() / oracle.abs();
    let flat: Vec<Direction> =
        [DirectionKind::Scaling, DirectionKind::Degree1 { index: 4 }].into_iter().map(|k| Direction::build(bg, k).unwrap()).collect();
    let scan = local_max_scan(&spec, bg, &flat, &flat_grid(), ScanOptions::default()).unwrap();
    let quad = scan.checks.iter().map(|c| c.rel_dev).fold(0.0, f64::max);
    outcome(
        fd.passed() && norm_dev <= 1e-2 && (oracle - golden).abs() < 1e-9 && scan.passed(),
        format!(
            "FD vs analytic rel dev {:.1e}; normalized D²H = {:.6} vs -175π²/48 = {golden:.6} (rel {norm_dev:.1e}); \
             equality-case quadratic coefficient ≤ {quad:.1e}·|H(ḡ)|{}{}",
            fd.max_rel_dev(),
            sv.normalized(),
            failures(&fd),
            failures(&scan)
        ),
    )
}

fn criterion_10(bg: &Arc<Background>) -> Outcome {
    let tol = SpectralTolerances::default();
    let chart = bg.chart();
    let mut min_value = f64::INFINITY;
    let mut flags_ok = true;
    let mut run = |u: &ScalarField, expect_equality: bool| {
        let b = bochner_check(bg, u, tol).unwrap();
        let o = obata_check(bg, u, tol).unwrap();
        min_value = min_value.min(bochner_value(bg, u).unwrap()).min(obata_value(bg, u).unwrap());
        flags_ok &= b.passed() && o.passed() && equality_flagged(&b) == expect_equality && equality_flagged(&o) == expect_equality;
    };
    run(&ScalarField::from_fn(chart, |_| 1.0), true);
    for i in 1..=4 {
        run(&harmonic_generator(chart, 1, i).unwrap(), true);
    }
    run(&harmonic_generator(chart, 2, 4).unwrap(), false);
    let mut sample_min = f64::INFINITY;
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = AmbientPoly::random(4, 3, &mut rng).field(chart);
        run(&u, false);
        sample_min = sample_min.min(bochner_value(bg, &u).unwrap()).min(obata_value(bg, &u).unwrap());
    }
    outcome(
        flags_ok && min_value >= -1e-6,
        format!("min over 50 random fields {sample_min:.3e}; equality flagged on constants and x_1..x_4 only: {flags_ok}"),
    )
}

fn criterion_11(bg: &Arc<Background>) -> Outcome {
    let spec = reference_spec();
    let mut ok = true;
    let mut rows = Vec::new();
    for c in [0.9, 0.95, 1.0, 1.05] {
        let g = MetricField::new(bg.metric().field().scaled(c * c)).unwrap();
        let out = comparison_experiment(&spec, bg, &g).unwrap();
        // ∫σ_2/σ_1 dv_{c²ḡ} = c A_21 Vol = c π²
        let lhs_ok = (out.conclusion_lhs - c * PI * PI).abs() <= 1e-6 * PI * PI;
        ok &= out.hypothesis_holds == (c <= 1.0) && out.conclusion_holds == (c <= 1.0) && out.equality == (c == 1.0) && lhs_ok;
        rows.push(format!("c={c}: hyp {} concl {} eq {}", out.hypothesis_holds, out.conclusion_holds, out.equality));
    }
    outcome(ok, rows.join("; "))
}

fn verify_all(dir: &std::path::Path, tag: &str) -> (i32, Duration, Vec<u8>) {
    let out = dir.join(format!("{tag}.json"));
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_cvlab")).args(["verify", "all", "--output"]).arg(&out).status().unwrap();
    let elapsed = start.elapsed();
    (status.code().unwrap_or(-1), elapsed, std::fs::read(&out).unwrap_or_default())
}

fn criterion_12() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let (c1, t1, a) = verify_all(dir.path(), "first");
    let (c2, t2, b) = verify_all(dir.path(), "second");
    let limit = Duration::from_secs(600);
    outcome(
        c1 == 0 && c2 == 0 && t1 < limit && t2 < limit && !a.is_empty() && a == b,
        format!(
            "exit codes {c1}/{c2}, {:.0} s and {:.0} s, {} byte reports identical: {}",
            t1.as_secs_f64(),
            t2.as_secs_f64(),
            a.len(),
            a == b
        ),
    )
}

fn main() {
    let bg = round(32);
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("Kronecker contraction rule", Box::new(criterion_1)),
        ("index inequality scan", Box::new(criterion_2)),
        ("Einstein closed forms", Box::new(|| criterion_3(&bg))),
        ("convergence order", Box::new(criterion_4)),
        ("first-variation formulas", Box::new(|| criterion_5(&bg))),
        ("quotient second variation", Box::new(|| criterion_6(&bg))),
        ("integration identities", Box::new(|| criterion_7(&bg))),
        ("scaling invariance and criticality", Box::new(|| criterion_8(&bg))),
        ("second variation of H", Box::new(|| criterion_9(&bg))),
        ("Bochner and Obata inequalities", Box::new(|| criterion_10(&bg))),
        ("comparison on the scaling family", Box::new(|| criterion_11(&bg))),
        ("full verify run", Box::new(criterion_12)),
    ];
    let mut failed = 0;
    for (i, (title, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {verdict}: {title}: {} [{:.1} s]", i + 1, o.detail, start.elapsed().as_secs_f64());
        if !o.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
