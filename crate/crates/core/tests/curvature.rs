use cvlab::curv::*;
use cvlab::geom::ambient::ambient_sym2;
use cvlab::geom::*;
use cvlab::linalg::{relative_eigenvalues, SmallMat};
use cvlab::symcomb::{sigma_from_eigs, EigenList};
use cvlab::LabError;
use rand::SeedableRng;
use std::f64::consts::PI;
use std::sync::Arc;

fn round(n: usize, res: usize) -> Background {
    let chart = Arc::new(Chart::new(n, 1.0, &vec![res; n], FdOrder::Eighth).unwrap());
    Background::round(&chart).unwrap()
}

fn scaled(bg: &Background, c2: f64) -> (MetricField, CurvaturePack) {
    let g = MetricField::new(bg.metric().field().scaled(c2)).unwrap();
    let pack = curvature_pack_lean(&g).unwrap();
    (g, pack)
}

fn perturbed(res: usize, seed: u64) -> (MetricField, CurvaturePack) {
    let chart = Arc::new(Chart::new(3, 1.0, &[res; 3], FdOrder::Eighth).unwrap());
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let p = AmbientPoly::random(4, 3, &mut rng);
    let h = ambient_sym2(&chart, |y, m| {
        for a in 0..4 {
            m[a][a] = 1.0 + 0.1 * p.eval(y);
        }
        m[2][3] = 0.05 * y[0];
        m[3][2] = m[2][3];
    });
    let g = MetricField::new(h).unwrap();
    let pack = curvature_pack_lean(&g).unwrap();
    (g, pack)
}

#[test]
fn round_sigma_values() {
    let bg = round(3, 32);
    let s = sigma_fields(bg.metric(), bg.pack(), 3).unwrap();
    let consts = einstein_constants(3, 1.0).unwrap();
    for k in 1..=3 {
        let err = s[k].values.iter().map(|v| (v / consts.sigma[k] - 1.0).abs()).fold(0.0, f64::max);
        assert!(err < 1e-5, "k={k}: {err}");
        assert!(relative_spread(&s[k]) < 1e-5);
    }
    for (i, v) in s[1].values.iter().enumerate() {
        assert!((v - bg.pack().scalar().values[i] / 4.0).abs() < 1e-12);
    }
    let bg4 = round(4, 20);
    let s2 = sigma_k_field(bg4.metric(), bg4.pack(), 2).unwrap();
    assert!(s2.values.iter().all(|v| (v - 6.0).abs() < 6e-5));
    assert!(sigma_k_field(bg.metric(), bg.pack(), 4).is_err());
    let s0 = sigma_k_field(bg.metric(), bg.pack(), 0).unwrap();
    assert!(s0.values.iter().all(|&v| v == 1.0));
}

#[test]
fn round_quotients_and_totals() {
    let bg = round(3, 32);
    let (g, pack) = (bg.metric(), bg.pack());
    let q = quotient_field(g, pack, 2, 1).unwrap();
    assert!(q.values.iter().all(|v| (v - 0.5).abs() < 1e-9));
    let q0 = quotient_field(g, pack, 2, 0).unwrap();
    let s2 = sigma_k_field(g, pack, 2).unwrap();
    assert_eq!(q0.values, s2.values);
    let total = total_quotient(g, pack, 2, 1).unwrap();
    assert!((total / (PI * PI) - 1.0).abs() < 1e-6, "{total}");
    assert_eq!(total_quotient(g, pack, 1, 1).unwrap(), volume(g));
    let fixed = total_quotient_fixed_bg(g, g, pack, 2, 1).unwrap();
    assert!((fixed / (PI * PI) - 1.0).abs() < 1e-6);
}

#[test]
fn scaled_round_metrics() {
    let bg = round(3, 32);
    for c in [0.5f64, 2.0] {
        let (g, pack) = scaled(&bg, c * c);
        let q = quotient_field(&g, &pack, 2, 1).unwrap();
        let err = bg.chart().collar_nodes().into_iter().map(|k| (q.values[k] * c * c / 0.5 - 1.0).abs()).fold(0.0, f64::max);
        assert!(err < 1e-5, "{err}");
        let total = total_quotient(&g, &pack, 2, 1).unwrap();
        assert!((total / (c * PI * PI) - 1.0).abs() < 1e-6, "{total}");
        let fixed = total_quotient_fixed_bg(&g, bg.metric(), &pack, 2, 1).unwrap();
        assert!((fixed / (c.powi(-2) * PI * PI) - 1.0).abs() < 1e-6, "{fixed}");
    }
}

#[test]
fn vanishing_denominator_is_located() {
    let bg = round(3, 8);
    let (g, pack) = scaled(&bg, 1e9);
    match quotient_field(&g, &pack, 2, 1) {
        Err(LabError::DegenerateDenominator { index, node, .. }) => {
            assert_eq!(index, 1);
            assert_eq!(node, 0);
        }
        other => panic!("unexpected {other:?}"),
    }
    assert!(total_quotient_fixed_bg(&g, bg.metric(), &pack, 2, 1).is_err());
    let mut s = sigma_fields(bg.metric(), bg.pack(), 2).unwrap();
    s[1].values[7] = 0.0;
    match quotient_from_sigmas(&s, 2, 1) {
        Err(LabError::DegenerateDenominator { node, .. }) => assert_eq!(node, 7),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn newton_identity_for_sigma_two_on_perturbed_metrics() {
    for seed in [1, 2, 3] {
        let (g, pack) = perturbed(12, seed);
        let s = sigma_fields(&g, &pack, 2).unwrap();
        let norm = schouten_norm_sq(&g, &pack).unwrap();
        for k in 0..g.chart().len() {
            let want = 0.5 * (s[1].values[k].powi(2) - norm.values[k]);
            assert!((s[2].values[k] - want).abs() <= 1e-10 * want.abs().max(1.0));
        }
    }
}

#[test]
fn power_sums_agree_with_relative_eigenvalues() {
    let (g, pack) = perturbed(12, 9);
    let s = sigma_fields(&g, &pack, 3).unwrap();
    for k in (0..g.chart().len()).step_by(53) {
        let gm = g.field().matrix(k);
        let sm = SmallMat::from_packed(3, pack.schouten().node(k));
        let eigs = EigenList(relative_eigenvalues(&gm, &sm).unwrap());
        for m in 1..=3 {
            let e = sigma_from_eigs(&eigs, m).unwrap();
            assert!((e - s[m].values[k]).abs() < 1e-9 * e.abs().max(1.0), "node {k} k={m}");
        }
    }
}

#[test]
fn sigma_scaling_law() {
    let (g, pack) = perturbed(24, 4);
    let s = sigma_fields(&g, &pack, 3).unwrap();
    for c in [0.5f64, 2.0] {
        let gc = MetricField::new(g.field().scaled(c * c)).unwrap();
        let pc = curvature_pack_lean(&gc).unwrap();
        let sc = sigma_fields(&gc, &pc, 3).unwrap();
        for k in 1..=3 {
            let f = c.powi(-2 * k as i32);
            let scale = s[k].sup_abs();
            let err = g.chart().collar_nodes().into_iter().map(|i| (sc[k].values[i] - f * s[k].values[i]).abs()).fold(0.0, f64::max);
            assert!(err < 1e-4 * f * scale, "c={c} k={k}: {err}");
        }
    }
}
