mod common;

use std::f64::consts::PI;

use proptest::prelude::*;
use robreg::exosystem::*;
use robreg::numerics::{c64, ci, fit_line};

#[test]
fn periodic_frequencies() {
    let e = build_periodic(2.0 * PI, 1).unwrap();
    assert_eq!(e.omega.len(), 3);
    for (w, expect) in e.omega.iter().zip([-1.0, 0.0, 1.0]) {
        assert!((w - expect).abs() < 1e-15);
    }
    let e = build_periodic(1.0, 2).unwrap();
    for (w, expect) in e.omega.iter().zip([-4.0 * PI, -2.0 * PI, 0.0, 2.0 * PI, 4.0 * PI]) {
        assert!((w - expect).abs() < 1e-12);
    }
    assert_eq!(build_periodic(2.0 * PI, 10).unwrap().modes(), 21);
    assert!(build_periodic(0.0, 3).is_err());
    assert!(build_periodic(-1.0, 3).is_err());
}

#[test]
fn state_evolution() {
    let mut e = build_periodic(2.0 * PI, 3).unwrap();
    for j in 0..e.modes() {
        e.v0[j] = c64(0.3 + j as f64, -0.1 * j as f64);
    }
    assert_eq!(e.state(0.0), e.v0);

    let mut one = build_periodic(2.0 * PI, 1).unwrap();
    let j1 = one.index(1);
    one.v0[j1] = c64(1.0, 0.0);
    let v = one.state(PI);
    assert!((v[one.index(1)] - c64(-1.0, 0.0)).norm() < 1e-15);
}

#[test]
fn zero_maps_give_zero_signals() {
    let mut e = build_periodic(2.0 * PI, 4).unwrap();
    e.v0.fill(c64(1.0, 0.0));
    assert_eq!(e.reference(1.3).norm(), 0.0);
    assert_eq!(e.disturbance(1.3).norm(), 0.0);
}

#[test]
fn sine_reference_calibration() {
    let mut e = build_periodic(2.0 * PI, 1).unwrap();
    e.v0.fill(c64(1.0, 0.0));
    let (jp, jm) = (e.index(1), e.index(-1));
    e.f_cols[(0, jp)] = ci(0.5);
    e.f_cols[(0, jm)] = ci(-0.5);
    for i in 0..200 {
        let t = 0.05 * i as f64;
        let y = e.reference(t)[0];
        assert!((y.re - t.sin()).abs() < 1e-14);
        assert!(y.im.abs() < 1e-14);
    }
}

#[test]
fn heat_profile_values() {
    let e = heat_example_profiles(10).unwrap();
    assert_eq!(e.modes(), 21);
    assert_eq!(e.v0[e.index(0)], c64(1.0, 0.0));
    assert!((e.v0[e.index(3)].re - 0.5173).abs() < 1e-4);
    assert_eq!(e.f_cols[(0, e.index(0))].norm(), 0.0);
    assert!(e.conjugate_symmetry_defect() < 1e-15);
    assert!(e.profile_mismatch() < 1e-12);
    assert!(heat_example_profiles(3).is_err());

    let (x, y): (Vec<f64>, Vec<f64>) =
        (4..=10).map(|k| ((k as f64).ln(), e.f_cols[(0, e.index(k))].norm().ln())).unzip();
    let fit = fit_line(&x, &y, None).unwrap();
    assert!((fit.slope + 2.4).abs() <= 0.1, "slope {}", fit.slope);
}

#[test]
fn heat_reference_coefficients_decay_cubically() {
    let e = heat_example_profiles(10).unwrap();
    for k in 1..=10i64 {
        let yk = -e.f_cols[(0, e.index(k))] * e.v0[e.index(k)];
        let bound = 0.5 / (k as f64).powi(3);
        assert!((yk.norm() - bound).abs() < 1e-14);
    }
}

#[test]
fn heat_reference_matches_closed_form() {
    let n = 10;
    let e = heat_example_profiles(n).unwrap();
    let tail: f64 = (n + 1..20000).map(|k| 1.0 / (k as f64).powi(3)).sum();
    for i in 0..400 {
        let t = i as f64 * 2.0 * PI / 400.0;
        let y = e.reference(t)[0];
        assert!(y.im.abs() < 1e-13);
        assert!((y.re - default_reference(t)).abs() <= tail + 1e-12);
    }
    // periodic extension and C^1 matching at the seam
    assert!((default_reference(0.3) - default_reference(0.3 + 2.0 * PI)).abs() < 1e-12);
    assert!(default_reference(0.0).abs() < 1e-15);
}

#[test]
fn heat_disturbance_is_exact() {
    let e = heat_example_profiles(10).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..2000 {
        let t = 0.01 * i as f64;
        let d = e.disturbance(t)[0];
        let exact = (4.0 * t).cos() + 0.5 * t.sin();
        worst = worst.max((d.re - exact).abs()).max(d.im.abs());
    }
    assert!(worst <= 1e-12, "{worst}");
}

#[test]
fn ingest_constant_and_cosine() {
    let m = 64;
    let tau = 3.0;
    let times: Vec<f64> = (0..m).map(|j| j as f64 * tau / m as f64).collect();
    let ones = vec![1.0; m];
    let c = fourier_ingest(&times, &ones, tau, 4).unwrap();
    for (j, ck) in c.iter().enumerate() {
        let expect = if j == 4 { 1.0 } else { 0.0 };
        assert!((ck - c64(expect, 0.0)).norm() < 1e-14);
    }
    let cos: Vec<f64> = times.iter().map(|t| (2.0 * PI * t / tau).cos()).collect();
    let c = fourier_ingest(&times, &cos, tau, 4).unwrap();
    for (j, ck) in c.iter().enumerate() {
        let expect = if j == 3 || j == 5 { 0.5 } else { 0.0 };
        assert!((ck - c64(expect, 0.0)).norm() < 1e-14);
    }
}

fn triangle(t: f64) -> f64 {
    // period 1, 0 at t = 0, 1 at t = 1/2
    let s = t.rem_euclid(1.0);
    if s < 0.5 { 2.0 * s } else { 2.0 - 2.0 * s }
}

#[test]
fn ingest_triangle_wave() {
    let n = 64;
    let m = 4096;
    let times: Vec<f64> = (0..m).map(|j| j as f64 / m as f64).collect();
    let vals: Vec<f64> = times.iter().map(|&t| triangle(t)).collect();
    let c = fourier_ingest(&times, &vals, 1.0, n).unwrap();
    // closed form: 1/2 - (4/pi^2) sum_{k odd} cos(2 pi k t)/k^2
    let exact = |k: i64| -> f64 {
        if k == 0 {
            0.5
        } else if k % 2 != 0 {
            -2.0 / (PI * PI * (k * k) as f64)
        } else {
            0.0
        }
    };
    let nn = n as i64;
    for (j, k) in (-nn..=nn).enumerate() {
        assert!((c[j] - c64(exact(k), 0.0)).norm() < 1e-6, "k={k}");
    }
    let synth = |t: f64| -> f64 {
        (-nn..=nn).enumerate().map(|(j, k)| (c[j] * ci(2.0 * PI * k as f64 * t).exp()).re).sum()
    };
    let truncated = |t: f64| -> f64 { (-nn..=nn).map(|k| exact(k) * (2.0 * PI * k as f64 * t).cos()).sum() };
    let mut vs_truncated: f64 = 0.0;
    let mut vs_wave: f64 = 0.0;
    for i in 0..1000 {
        let t = i as f64 / 1000.0;
        vs_truncated = vs_truncated.max((synth(t) - truncated(t)).abs());
        vs_wave = vs_wave.max((synth(t) - triangle(t)).abs());
    }
    assert!(vs_truncated <= 1e-3, "{vs_truncated}");
    // the series tail itself is (4/pi^2) sum_{k > N odd} 1/k^2 < 3.2e-3
    assert!(vs_wave <= 3.2e-3, "{vs_wave}");
}

#[test]
fn ingest_rejects_bad_input() {
    let times: Vec<f64> = (0..40).map(|j| j as f64 / 40.0).collect();
    let vals = vec![0.0; 40];
    assert!(fourier_ingest(&times, &vals[..39], 1.0, 2).is_err());
    assert!(fourier_ingest(&times, &vals, 1.0, 20).is_err());
    let mut skewed = times.clone();
    skewed[7] += 1e-3;
    assert!(fourier_ingest(&skewed, &vals, 1.0, 2).is_err());
}

#[test]
fn json_round_trip() {
    let e = heat_example_profiles(6).unwrap();
    let text = serde_json::to_string(&e.to_doc()).unwrap();
    let doc: ExosystemDoc = serde_json::from_str(&text).unwrap();
    let back = TruncatedExosystem::from_doc(&doc).unwrap();
    assert_eq!(back.omega, e.omega);
    assert_eq!(back.v0, e.v0);
    assert_eq!(back.e_cols, e.e_cols);
    assert_eq!(back.f_cols, e.f_cols);
    assert_eq!(back.profile, e.profile);

    let mut bad = e.to_doc();
    bad.v0.pop();
    assert!(TruncatedExosystem::from_doc(&bad).is_err());
    let mut dup = e.to_doc();
    dup.omega = Some(vec![1.0; e.modes()]);
    assert!(TruncatedExosystem::from_doc(&dup).is_err());
}

#[test]
fn profile_mismatch_detects_edits() {
    let mut e = heat_example_profiles(6).unwrap();
    let j = e.index(2);
    e.v0[j] *= c64(1.1, 0.0);
    assert!(e.profile_mismatch() > 0.09);
    let mut e = heat_example_profiles(6).unwrap();
    let j = e.index(2);
    e.e_cols[(0, j)] = c64(0.1, 0.0);
    assert!(e.profile_mismatch().is_infinite());
}

fn arb_exo() -> impl Strategy<Value = TruncatedExosystem> {
    (1usize..6, 0.5f64..10.0, proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 11)).prop_map(|(n, tau, v)| {
        let mut e = build_periodic(tau, n).unwrap();
        for j in 0..e.modes() {
            e.v0[j] = c64(v[j].0, v[j].1);
        }
        e
    })
}

proptest! {
    #[test]
    fn state_is_isometric(e in arb_exo(), t in -50.0f64..50.0) {
        prop_assert!((e.state(t).norm() - e.v0.norm()).abs() <= 1e-13 * (1.0 + e.v0.norm()));
    }

    #[test]
    fn state_group_property(e in arb_exo(), s in -5.0f64..5.0, t in -5.0f64..5.0) {
        let mut shifted = e.clone();
        shifted.v0 = e.state(s);
        let lhs = shifted.state(t);
        let rhs = e.state(s + t);
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + e.v0.norm()));
    }

    #[test]
    fn conjugate_symmetric_maps_give_real_signals(e in arb_exo(), t in 0.0f64..20.0, seed in 0u64..1000) {
        let mut e = e;
        let mut rng = common::rng(seed);
        let m = e.modes();
        let n = e.n as i64;
        for k in 0..=n {
            let (j, jm) = (e.index(k), e.index(-k));
            let f = common::random_matrix(&mut rng, 1, 2);
            // coefficients c_k = map_k v0_k with c_{-k} = conj(c_k)
            let vk = e.v0[j];
            if vk.norm() < 1e-3 { continue; }
            let cf = if k == 0 { c64(f[(0, 0)].re, 0.0) } else { f[(0, 0)] };
            let ce = if k == 0 { c64(f[(0, 1)].re, 0.0) } else { f[(0, 1)] };
            e.v0[jm] = if k == 0 { vk } else { vk.conj() };
            e.f_cols[(0, j)] = cf / vk;
            e.e_cols[(0, j)] = ce / vk;
            e.f_cols[(0, jm)] = cf.conj() / e.v0[jm];
            e.e_cols[(0, jm)] = ce.conj() / e.v0[jm];
        }
        prop_assert_eq!(m, e.modes());
        prop_assert!(e.conjugate_symmetry_defect() <= 1e-12);
        prop_assert!(e.reference(t)[0].im.abs() <= 1e-13 * (1.0 + e.reference(t)[0].re.abs()) * 10.0);
        prop_assert!(e.disturbance(t)[0].im.abs() <= 1e-12);
    }
}
