use cvlab::geom::operators::trace;
use cvlab::geom::*;
use cvlab::vary::library::pure_trace_library;
use cvlab::vary::*;
use cvlab::LabError;
use std::f64::consts::PI;
use std::sync::Arc;

fn round(res: usize) -> Arc<Background> {
    let chart = Arc::new(Chart::new(3, 1.0, &[res; 3], FdOrder::Eighth).unwrap());
    Arc::new(Background::round(&chart).unwrap())
}

fn path(bg: &Arc<Background>, kind: DirectionKind) -> PerturbationPath {
    let d = Direction::build(bg, kind).unwrap();
    PerturbationPath::with_defaults(bg.clone(), d.h).unwrap()
}

/// `∫_{S³} f(x_4) dv = 4π ∫_0^π f(cos θ) sin²θ dθ` by composite Simpson.
fn zonal_integral(f: impl Fn(f64) -> f64) -> f64 {
    let m = 20_000;
    let h = PI / m as f64;
    let mut acc = 0.0;
    for i in 0..=m {
        let th = i as f64 * h;
        let w = if i == 0 || i == m { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(th.cos()) * th.sin().powi(2);
    }
    4.0 * PI * acc * h / 3.0
}

#[test]
fn volume_variations_along_scaling() {
    let bg = round(16);
    let p = path(&bg, DirectionKind::Scaling);
    let vol = |s: &PathSample| Ok(volume(&s.metric));
    // Vol((1+t)ḡ) = (1+t)^{3/2} Vol(ḡ)
    let v0 = 2.0 * PI * PI;
    let d1 = fd_functional_derivative(&p, vol, 1).unwrap();
    let d2 = fd_functional_derivative(&p, vol, 2).unwrap();
    assert!((d1.value - 1.5 * v0).abs() < 1e-9 * v0, "{}", d1.value);
    assert!((d2.value - 0.75 * v0).abs() < 1e-8 * v0, "{}", d2.value);
    assert!((d1.value - 3.0 * PI * PI).abs() < 1e-8);
    assert!((d2.value - 1.5 * PI * PI).abs() < 1e-7);
    let c = fd_functional_derivative(&p, |_| Ok(4.2), 2).unwrap();
    assert!(c.value.abs() < 1e-9);
}

#[test]
fn field_variations_along_scaling() {
    let bg = round(16);
    let p = path(&bg, DirectionKind::Scaling);
    let r1 = fd_field_variation(&p, |s| Ok(s.pack.scalar().values.clone()), 1).unwrap();
    // R((1+t)ḡ) = 6/(1+t)
    assert!(r1.values.iter().all(|v| (v + 6.0).abs() < 1e-8));
    // S((1+t)ḡ) = ((n-2)/2)(λ/(1+t))(1+t)ḡ does not depend on t
    let s1 = fd_field_variation(&p, |s| Ok(s.pack.schouten().data().to_vec()), 1).unwrap();
    assert!(s1.values.iter().all(|v| v.abs() < 1e-8));
    let g2 = fd_field_variation(&p, |s| Ok(s.metric.field().data().to_vec()), 2).unwrap();
    assert!(g2.values.iter().all(|v| v.abs() < 1e-9));
    let g1 = fd_field_variation(&p, |s| Ok(s.metric.field().data().to_vec()), 1).unwrap();
    let h = bg.metric().field().data();
    assert!(g1.values.iter().zip(h).all(|(a, b)| (a - b).abs() < 1e-10));
}

#[test]
fn r_prime_closed_forms() {
    let bg = round(24);
    let h = bg.metric().field().clone();
    let r = r_prime_analytic(&bg, &h).unwrap();
    assert!(r.values.iter().all(|v| (v + 6.0).abs() < 1e-9));
    // u ∈ E_{nλ}: R' = -(n-1)(Δu + nλu) = 0
    let d = Direction::build(&bg, DirectionKind::Degree1 { index: 4 }).unwrap();
    let r = r_prime_analytic(&bg, &d.h).unwrap();
    for k in bg.chart().collar_nodes() {
        assert!(r.values[k].abs() < 1e-5, "{}", r.values[k]);
    }
    for seed in [1, 2] {
        let p = path(&bg, DirectionKind::RandomGeneral { seed });
        let rep = r_prime_check(&p, 1e-3, 1e-4).unwrap();
        assert!(rep.passed(), "{rep:?}");
    }
}

#[test]
fn first_variation_checks_on_scaling_family() {
    let bg = round(16);
    let p = path(&bg, DirectionKind::Scaling);
    let s = sigma_k_prime_check(&p, 2, 1e-3).unwrap();
    // (k/(n(n-1)λ)) σ_2(ḡ) R' = (2/6)(0.75)(-6)
    let rec = &s.checks[0];
    assert!((rec.reference - (2.0 / 6.0) * 0.75 * -6.0).abs() < 1e-9);
    assert!(rec.pass, "{rec:?}");
    let q = quotient_prime_check(&p, 2, 1, 1e-3).unwrap();
    assert!((q.checks[0].reference + 0.5).abs() < 1e-9);
    assert!(q.passed());
    assert!(matches!(quotient_prime_check(&p, 1, 2, 1e-3), Err(LabError::Domain(_))));
}

#[test]
fn first_variation_checks_on_library() {
    let bg = round(24);
    let mut kinds: Vec<DirectionKind> = pure_trace_library(&bg, 11, 2).unwrap().into_iter().map(|d| d.kind).collect();
    kinds.push(DirectionKind::RandomGeneral { seed: 5 });
    for kind in kinds {
        let p = path(&bg, kind);
        let mut rep = r_prime_check(&p, 1e-3, 1e-4).unwrap();
        for k in 1..=3 {
            rep.extend(sigma_k_prime_check(&p, k, 1e-3).unwrap());
        }
        rep.extend(quotient_prime_check(&p, 2, 1, 1e-3).unwrap());
        rep.extend(quotient_prime_check(&p, 3, 1, 1e-3).unwrap());
        assert!(rep.passed(), "{kind}: {:?}", rep.failures().collect::<Vec<_>>());
    }
}

#[test]
fn second_variation_of_quotient() {
    let bg = round(24);
    let zero = path(&bg, DirectionKind::Zero);
    let rep = quotient_second_variation_check(&zero, 2, 1, 1e-2).unwrap();
    assert!(rep.checks[0].measured.abs() < 1e-9);
    assert!(rep.checks[0].reference.abs() < 1e-9);

    // d²/dt² (1+t)^{-(k-l)} A_21 at t = 0 is 2 · 0.5
    let p = path(&bg, DirectionKind::Scaling);
    let rep = quotient_second_variation_check(&p, 2, 1, 1e-3).unwrap();
    let rec = &rep.checks[0];
    assert!((rec.measured - 1.0).abs() < 1e-6, "{rec:?}");
    assert!(rec.pass, "{rec:?}");

    for kind in [DirectionKind::Degree2 { index: 4 }, DirectionKind::RandomGeneral { seed: 8 }] {
        let p = path(&bg, kind);
        for (k, l) in [(2, 1), (3, 1), (3, 2)] {
            let rep = quotient_second_variation_check(&p, k, l, 1e-2).unwrap();
            assert!(rep.passed(), "{kind} ({k},{l}): {rep:?}");
        }
    }
}

#[test]
fn integration_identities_for_pure_trace_directions() {
    let bg = round(24);
    let u_sq = zonal_integral(|x| (x * x - 0.25).powi(2));
    assert!((u_sq - PI * PI / 8.0).abs() < 1e-10);
    let pi2 = PI * PI;

    let p = path(&bg, DirectionKind::Degree2 { index: 4 });
    let rep = integration_identity_check(&p, 1e-2).unwrap();
    assert_eq!(rep.checks.len(), 4);
    assert!(rep.passed(), "{rep:?}");
    // Δu = -8u gives R' = -2(Δu + 3u) = 10u
    let r1 = rep.get("int_r1_sq").unwrap();
    assert!((r1.measured - 100.0 * u_sq).abs() < 1e-4 * 100.0 * u_sq, "{}", r1.measured);

    // h = c ḡ: R' = -6c and every derivative term vanishes
    let c = 0.5;
    let h = bg.metric().field().scaled(c);
    let pc = PerturbationPath::with_defaults(bg.clone(), h).unwrap();
    let rep = integration_identity_check(&pc, 1e-2).unwrap();
    assert!(rep.passed(), "{rep:?}");
    let r1 = rep.get("int_r1_sq").unwrap();
    assert!((r1.measured - 36.0 * c * c * 2.0 * pi2).abs() < 1e-8 * r1.measured);

    let p1 = path(&bg, DirectionKind::Degree1 { index: 4 });
    let rep = integration_identity_check(&p1, 1e-2).unwrap();
    assert!(rep.passed(), "{rep:?}");
    assert!(rep.get("int_r1_sq").unwrap().measured.abs() < 1e-8);
}

#[test]
fn integration_identities_reject_non_tt_trace_free_parts() {
    let bg = round(16);
    let p = path(&bg, DirectionKind::RandomGeneral { seed: 1 });
    assert!(matches!(integration_identity_check(&p, 1e-2), Err(LabError::Precondition(_))));
}

#[test]
fn mean_trace_examples() {
    let bg = round(16);
    let g = bg.metric();
    assert!((mean_trace(&bg, g.field()).unwrap() - 3.0).abs() < 1e-12);
    let u = harmonic_generator(bg.chart(), 2, 4).unwrap();
    let hu = g.field().times(&u).unwrap();
    assert!(mean_trace(&bg, &hu).unwrap().abs() < 1e-9);
    let two_plus = g.field().times(&u.map(|v| 2.0 + v)).unwrap();
    assert!((mean_trace(&bg, &two_plus).unwrap() - 6.0).abs() < 1e-9);
}

#[test]
fn gauge_direction_has_vanishing_r_prime() {
    let bg = round(24);
    let d = Direction::build(&bg, DirectionKind::Gauge { seed: 4 }).unwrap();
    let (total, scale) = r_prime_integrals(&bg, &d.h).unwrap();
    assert!(total.abs() < 1e-7 * scale, "{total} vs {scale}");
    let r = r_prime_analytic(&bg, &d.h).unwrap();
    let tr = trace(bg.metric(), &d.h).unwrap();
    let size = bg.chart().collar_nodes().iter().map(|&k| tr.values[k].abs()).fold(0.0, f64::max);
    for k in bg.chart().collar_nodes() {
        assert!(r.values[k].abs() < 1e-2 * size, "{} vs {size}", r.values[k]);
    }
    let p = PerturbationPath::with_defaults(bg.clone(), d.h).unwrap();
    let fd = fd_field_variation(&p, |s| Ok(s.pack.scalar().values.clone()), 1).unwrap();
    for k in bg.chart().collar_nodes() {
        assert!((fd.values[k] - r.values[k]).abs() < 1e-2 * size + fd.error[k]);
    }
}

#[test]
fn richardson_shrinks_the_error_estimate() {
    let bg = round(16);
    let d = Direction::build(&bg, DirectionKind::RandomTrace { seed: 3 }).unwrap();
    let total = |s: &PathSample| integrate(s.pack.scalar(), &s.metric);
    for order in [1, 2] {
        let plain = PathOptions { richardson: false, ..Default::default() };
        let pp = PerturbationPath::new(bg.clone(), d.h.clone(), plain).unwrap();
        let pr = PerturbationPath::with_defaults(bg.clone(), d.h.clone()).unwrap();
        let a = fd_functional_derivative(&pp, total, order).unwrap();
        let b = fd_functional_derivative(&pr, total, order).unwrap();
        assert!(4.0 * b.error <= a.error, "order {order}: {} vs {}", b.error, a.error);
        assert!((a.value - b.value).abs() <= 2.0 * a.error + 1e-12);
    }
}

#[test]
fn three_point_stencils_agree() {
    let bg = round(16);
    let d = Direction::build(&bg, DirectionKind::Degree2 { index: 4 }).unwrap();
    let three = PathOptions { stencil: Stencil::ThreePoint, ..Default::default() };
    let p3 = PerturbationPath::new(bg.clone(), d.h.clone(), three).unwrap();
    let p5 = PerturbationPath::with_defaults(bg.clone(), d.h).unwrap();
    let vol = |s: &PathSample| Ok(volume(&s.metric));
    for order in [1, 2] {
        let a = fd_functional_derivative(&p3, vol, order).unwrap();
        let b = fd_functional_derivative(&p5, vol, order).unwrap();
        assert!((a.value - b.value).abs() < 1e-6 * b.value.abs().max(1.0));
    }
}

#[test]
fn variation_pack_trace_free_part() {
    let bg = round(16);
    let p = path(&bg, DirectionKind::RandomGeneral { seed: 2 });
    let vp = variation_pack(&p).unwrap();
    let tr = trace(bg.metric(), &vp.trace_free).unwrap();
    assert!(tr.values.iter().all(|v| v.abs() < 1e-12));
    let m = mean_trace(&bg, p.direction()).unwrap();
    assert_eq!(vp.mean_trace, m);
}

#[test]
fn amplitude_cap_is_enforced() {
    let bg = round(16);
    let big = bg.metric().field().scaled(10.0);
    let err = PerturbationPath::with_defaults(bg.clone(), big.clone()).unwrap_err();
    assert!(matches!(err, LabError::Amplitude(_)));
    let loose = PathOptions { amplitude_cap: 1e3, ..Default::default() };
    let p = PerturbationPath::new(bg.clone(), big.scaled(-1.0), loose).unwrap();
    assert!(matches!(p.metric_at(0.095), Err(LabError::Amplitude(_))));
    assert!(p.metric_at(0.01).is_ok());
}

#[test]
fn library_names_and_normalization() {
    let bg = round(16);
    for name in ["zero", "scaling", "deg1", "deg2", "random-trace", "random", "gauge"] {
        let kind = DirectionKind::parse(name, 3, 9).unwrap();
        let d = Direction::build(&bg, kind).unwrap();
        let norm = cvlab::vary::path::operator_norm(&bg, &d.h).unwrap();
        assert!(norm <= 1.0 + 1e-12, "{name}: {norm}");
        assert_eq!(d.potential.is_some(), kind.is_pure_trace());
    }
    assert!(DirectionKind::parse("nope", 3, 0).is_err());
    let a = Direction::build(&bg, DirectionKind::RandomTrace { seed: 4 }).unwrap();
    let b = Direction::build(&bg, DirectionKind::RandomTrace { seed: 4 }).unwrap();
    assert_eq!(a.h.data(), b.h.data());
    let lib = pure_trace_library(&bg, 0, 3).unwrap();
    assert_eq!(lib.len(), 6);
}
