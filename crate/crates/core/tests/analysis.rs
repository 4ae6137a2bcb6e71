mod common;

use std::f64::consts::PI;

use proptest::prelude::*;
use robreg::analysis::*;
use robreg::closedloop::{assemble, error_metrics, simulate, DecaySamples, Scheme, SimOptions};
use robreg::numerics::{c64, CMat, CVec};
use robreg::plant::{perturb, PerturbationSpec};
use robreg::synthesis::{synthesize, ControllerRealization, ModeBlock, SynthesisParams, Variant};
use robreg::testbeds::{decay_ensemble, scalar_toy, two_channel_params, two_channel_plant};
use robreg::Error;

fn heat_ctrl(grid: usize, modes: usize, variant: Variant) -> (robreg::plant::PlantModel, ControllerRealization, robreg::exosystem::TruncatedExosystem) {
    let (p, g, exo) = common::heat(grid, modes);
    let ctrl = synthesize(&p, &g, &exo, &SynthesisParams::heat(variant, 12.0, 0.125), &[]).unwrap();
    (p, ctrl, exo)
}

#[test]
fn g_conditions_hold_for_synthesized_controllers() {
    for v in [Variant::NewStructure, Variant::Observer, Variant::NonRobust] {
        let (_, ctrl, exo) = heat_ctrl(16, 10, v);
        let rep = check_g_conditions(&ctrl, &exo);
        assert_eq!(rep.modes.len(), 21);
        assert!(rep.all_pass, "{v:?}: {:?}", rep.modes.iter().find(|m| !m.pass));
    }
}

#[test]
fn reduced_model_fails_only_at_omitted_modes() {
    // mode 0 carries neither reference nor disturbance, so it has no copy
    let (_, ctrl, exo) = heat_ctrl(16, 10, Variant::ReducedIm);
    let kept: Vec<i64> = ctrl.blocks.iter().map(|b| b.k).collect();
    assert!(!kept.contains(&0));
    let rep = check_g_conditions(&ctrl, &exo);
    assert!(rep.ker_trivial);
    for m in &rep.modes {
        assert_eq!(m.pass, kept.contains(&m.k), "k={}", m.k);
    }
}

#[test]
fn zeroed_g2_violates_kernel_condition() {
    let (p, g, exo) = scalar_toy().unwrap();
    let mut ctrl = synthesize(&p, &g, &exo, &SynthesisParams::heat(Variant::NewStructure, 1.0, 0.125), &[]).unwrap();
    ctrl.g2.fill(c64(0.0, 0.0));
    // L = L1 + H G2 collapses with G2
    ctrl.l = ctrl.l1.clone().unwrap() + &ctrl.h * &ctrl.g2;
    ctrl.cal_g2 = robreg::numerics::vstack(&[&ctrl.g2, &ctrl.l]);
    let rep = check_g_conditions(&ctrl, &exo);
    assert!(!rep.ker_trivial);
    assert!(!rep.all_pass);
    assert_eq!(rep.modes[0].rank_g2, 0);
}

#[test]
fn heat_g2_mode_row_zeroed_keeps_kernel_trivial() {
    // with several modes the plant-copy rows L still give G2cal full column rank
    let (_, mut ctrl, exo) = heat_ctrl(8, 4, Variant::NewStructure);
    let b0 = ctrl.blocks.iter().find(|b| b.k == 0).unwrap().clone();
    ctrl.cal_g2.row_mut(b0.offset).fill(c64(0.0, 0.0));
    let rep = check_g_conditions(&ctrl, &exo);
    assert!(rep.ker_trivial);
}

#[test]
fn duplicate_g2_columns_violate_kernel_condition() {
    let (p, g, exo) = two_channel_plant(true).unwrap();
    let mut ctrl = synthesize(&p, &g, &exo, &two_channel_params(Variant::NewStructure), &[]).unwrap();
    assert!(check_g_conditions(&ctrl, &exo).all_pass);
    let c0 = ctrl.cal_g2.column(0).into_owned();
    ctrl.cal_g2.set_column(1, &c0);
    let rep = check_g_conditions(&ctrl, &exo);
    assert!(!rep.ker_trivial);
    assert!(!rep.all_pass);
}

#[test]
fn missing_mode_violates_range_condition() {
    let (p, g, exo4) = common::heat(8, 4);
    let mut exo3 = robreg::exosystem::build_periodic(2.0 * PI, 3).unwrap();
    for k in -3..=3i64 {
        let (j3, j4) = (exo3.index(k), exo4.index(k));
        exo3.v0[j3] = exo4.v0[j4];
        exo3.e_cols[(0, j3)] = exo4.e_cols[(0, j4)];
        exo3.f_cols[(0, j3)] = exo4.f_cols[(0, j4)];
    }
    let ctrl = synthesize(&p, &g, &exo3, &SynthesisParams::heat(Variant::NewStructure, 12.0, 0.125), &[]).unwrap();
    let rep = check_g_conditions(&ctrl, &exo4);
    let failing: Vec<i64> = rep.modes.iter().filter(|m| !m.pass).map(|m| m.k).collect();
    assert_eq!(failing, vec![-4, 4]);
    assert!(rep.ker_trivial);
}

fn max_be_column(cl: &robreg::closedloop::ClosedLoopModel) -> f64 {
    (0..cl.be.ncols()).map(|j| cl.be.column(j).norm()).fold(0.0, f64::max)
}

#[test]
fn heat_regulator_residuals() {
    for v in [Variant::NewStructure, Variant::NonRobust, Variant::Observer] {
        let (p, ctrl, exo) = heat_ctrl(16, 10, v);
        let cl = assemble(&p, &ctrl, &exo).unwrap();
        let reg = regulator_residuals(&cl, &exo).unwrap();
        assert!(reg.max_residual <= 1e-8 * max_be_column(&cl), "{v:?}: {}", reg.max_residual);
        assert!(reg.relative <= 1e-8);
        assert_eq!(reg.sigma.shape(), (533, 21));
        assert!(reg.sigma.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
    }
}

#[test]
fn perturbed_plant_separates_robust_from_nonrobust() {
    let (p, g, exo) = two_channel_plant(true).unwrap();
    let pp = perturb(&p, &PerturbationSpec::input_gain(1.1)).unwrap();
    let residual = |v: Variant| {
        let ctrl = synthesize(&p, &g, &exo, &two_channel_params(v), &[]).unwrap();
        let nominal = regulator_residuals(&assemble(&p, &ctrl, &exo).unwrap(), &exo).unwrap().relative;
        let cl = assemble(&pp, &ctrl, &exo).unwrap();
        assert!(cl.abscissa() < 0.0);
        (nominal, regulator_residuals(&cl, &exo).unwrap().relative)
    };
    let (rn, rp) = residual(Variant::NewStructure);
    assert!(rn <= 1e-8 && rp <= 1e-6, "{rn} {rp}");
    let (nn, np) = residual(Variant::NonRobust);
    assert!(nn <= 1e-8, "{nn}");
    assert!(np >= 1e-3, "{np}");
}

#[test]
fn regulator_reports_mode_on_spectrum() {
    let (p, g, exo) = scalar_toy().unwrap();
    let ctrl = synthesize(&p, &g, &exo, &SynthesisParams::heat(Variant::NewStructure, 1.0, 0.125), &[]).unwrap();
    let mut cl = assemble(&p, &ctrl, &exo).unwrap();
    cl.ae.fill(c64(0.0, 0.0));
    assert!(matches!(regulator_residuals(&cl, &exo), Err(Error::Mode { k: 0, .. })));
}

#[test]
fn im_identity_scalar() {
    let g = 0.37;
    let g1 = CMat::zeros(1, 1);
    let g2 = CMat::from_element(1, 1, c64(g, 0.0));
    let rows = im_norm_identity(&g1, &g2, &[ModeBlock { k: 0, omega: 0.0, offset: 0, size: 1 }]).unwrap();
    assert!((rows[0].lhs - 1.0 / g).abs() < 1e-14);
    assert!((rows[0].rhs - 1.0 / g).abs() < 1e-14);
    assert!(rows[0].square);
}

#[test]
fn im_identity_random_models() {
    for seed in 0..100 {
        let (g1, g2, blocks) = common::random_internal_model(seed);
        for row in im_norm_identity(&g1, &g2, &blocks).unwrap() {
            assert!(row.deviation <= 1e-8, "seed {seed} mode {}: {}", row.k, row.deviation);
        }
    }
}

#[test]
fn im_identity_heat_values() {
    let (_, ctrl, _) = heat_ctrl(16, 10, Variant::NewStructure);
    for row in im_norm_identity(&ctrl.g1, &ctrl.g2, &ctrl.blocks).unwrap() {
        let k = row.k as f64;
        let exact = (1.0 + k.abs().powf(0.625)) * (k * k + PI.powi(4)).sqrt() / 12.0;
        assert!(row.deviation <= 1e-8);
        assert!((row.lhs - exact).abs() <= 0.02 * exact, "k={}: {} vs {exact}", row.k, row.lhs);
    }
}

#[test]
fn im_identity_rejects_degenerate_model() {
    let (g1, mut g2, blocks) = common::random_internal_model(5);
    let b = &blocks[0];
    g2.rows_mut(b.offset, b.size).fill(c64(0.0, 0.0));
    assert!(matches!(im_norm_identity(&g1, &g2, &blocks), Err(Error::Mode { .. })));
}

#[test]
fn scan_diagonal_peaks() {
    let mut diag = Vec::new();
    for k in 0..=5 {
        diag.push(c64(-1.0, k as f64));
        diag.push(c64(-1.0, -(k as f64)));
    }
    let a = CMat::from_diagonal(&CVec::from_vec(diag));
    let omegas: Vec<f64> = (0..=5).map(|k| k as f64).collect();
    for v in resolvent_scan(&a, &omegas) {
        assert!((v - 1.0).abs() < 1e-12);
    }
    let mid = resolvent_scan(&a, &[0.5])[0];
    assert!((mid - 1.0 / (1.0f64 + 0.25).sqrt()).abs() < 1e-12);
    let on = CMat::from_diagonal(&CVec::from_vec(vec![c64(0.0, 2.0), c64(-1.0, 0.0)]));
    assert!(resolvent_scan(&on, &[2.0])[0].is_infinite());
}

#[test]
fn scan_grid_includes_modes_and_midpoints() {
    let g = scan_grid(&[1.0, -1.0, 0.0], 2);
    assert_eq!(g, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
}

#[test]
fn internal_model_resolvent_is_finite_at_modes() {
    let (_, ctrl, exo) = heat_ctrl(16, 10, Variant::NewStructure);
    let m = &ctrl.g1 - &ctrl.g2 * ctrl.g2.adjoint();
    let vals = resolvent_scan(&m, &exo.omega);
    assert!(vals.iter().all(|v| v.is_finite()));
    // peaks grow with the inverse gains
    let peaks = mode_peaks(&m, &exo, &[3, 4, 5, 6, 7, 8, 9, 10]);
    let model = fit_growth(&peaks.iter().map(|p| (p.omega.abs(), p.value)).collect::<Vec<_>>()).unwrap();
    assert!(model.alpha_polynomial > 0.0);
}

#[test]
fn growth_fits() {
    let pk: Vec<(f64, f64)> = (1..=10).map(|k| (k as f64, (k * k) as f64)).collect();
    let m = fit_growth(&pk).unwrap();
    assert!(matches!(m.law, GrowthLaw::Polynomial { alpha } if (alpha - 2.0).abs() <= 0.01));
    assert_eq!(m.rate, RateTag::Polynomial);
    assert!((m.m0 - 1.0).abs() < 1e-9);
    assert_eq!(m.predicted_slope(), Some(-0.5));

    let pk: Vec<(f64, f64)> = (1..=10).map(|k| (k as f64, (0.5 * k as f64).exp())).collect();
    let m = fit_growth(&pk).unwrap();
    assert!(matches!(m.law, GrowthLaw::Exponential { rate } if (rate - 0.5).abs() <= 0.01));
    assert_eq!(m.rate, RateTag::InverseLog);
    assert_eq!(m.predicted_slope(), None);

    assert!(fit_growth(&pk[..5]).is_err());
    assert!(fit_growth(&[(1.0, 1.0), (2.0, -1.0), (3.0, 1.0), (4.0, 1.0), (5.0, 1.0), (6.0, 1.0)]).is_err());
}

#[test]
fn m_log_value() {
    let m = DecayModel::polynomial(2.0);
    let w: f64 = 3.0;
    assert!((m.m_log(w) - 9.0 * (10.0f64.ln() + 4.0f64.ln())).abs() < 1e-12);
}

fn samples(f: impl Fn(f64) -> f64, t0: f64, t1: f64, n: usize) -> DecaySamples {
    let t: Vec<f64> = (0..n).map(|j| t0 * (t1 / t0).powf(j as f64 / (n - 1) as f64)).collect();
    DecaySamples { i: t.iter().map(|&s| f(s)).collect(), t }
}

#[test]
fn decay_fits() {
    let ds = samples(|t| t.powf(-0.5), 2.0, 200.0, 400);
    let model = DecayModel::polynomial(2.0);
    let fit = fit_decay(&ds, (2.0, 200.0), Some(&model)).unwrap();
    assert!((fit.slope + 0.5).abs() <= 0.01);
    assert_eq!(fit.predicted, Some(-0.5));
    assert!((fit.ratio.unwrap() - 1.0).abs() < 0.02);
    assert!((fit.envelope_constant.unwrap() - 1.0).abs() < 1e-9);
    assert!(!fit.short_window);

    let ds = samples(|t| (t.ln() / t).powf(1.0 / 3.0), 10.0, 1000.0, 400);
    let fit = fit_decay(&ds, (10.0, 1000.0), None).unwrap();
    assert!((fit.log_corrected_slope + 1.0 / 3.0).abs() <= 0.05, "{}", fit.log_corrected_slope);
    assert!(fit.ratio.is_none());

    let fit = fit_decay(&ds, (10.0, 50.0), None).unwrap();
    assert!(fit.short_window);
    assert!(fit_decay(&ds, (2000.0, 3000.0), None).is_err());
}

#[test]
fn decay_testbed_alpha_two() {
    let (ds, alpha) = decay_ensemble(0.0, &[0, 1, 2, 3], 210.0, 0.005).unwrap();
    assert!((alpha - 2.0).abs() < 1e-12);
    let fit = fit_decay(&ds, (10.0, 200.0), Some(&DecayModel::polynomial(alpha))).unwrap();
    assert!(fit.slope >= -0.5 * 1.25 && fit.slope <= -0.5 * 0.75, "{}", fit.slope);
}

#[test]
fn robustness_identity_matches_nominal_run() {
    let (p, ctrl, exo) = heat_ctrl(6, 4, Variant::NewStructure);
    let mut o = SimOptions::new(6.0, 0.01);
    o.scheme = Scheme::Exponential;
    let rows = robustness_suite(&p, &ctrl, &exo, &[PerturbationSpec::identity()], &o);
    let cl = assemble(&p, &ctrl, &exo).unwrap();
    let ds = error_metrics(&simulate(&cl, &exo, &CVec::zeros(cl.dim()), &o).unwrap()).unwrap();
    assert_eq!(rows[0].i_final, *ds.i.last().unwrap());
    assert_eq!(rows[0].i_initial, ds.i[0]);
    assert!(rows[0].stable);
}

#[test]
fn robustness_flags_destabilizing_perturbation() {
    let (p, ctrl, exo) = heat_ctrl(6, 4, Variant::NewStructure);
    let rows = robustness_suite(&p, &ctrl, &exo, &[PerturbationSpec::diffusion(-1.0)], &SimOptions::new(3.0, 0.01));
    assert!(!rows[0].stable);
    assert!(rows[0].note.contains("outside guarantee"), "{}", rows[0].note);
    assert!(rows[0].ratio.is_nan());
}

/// `I(T) / I(T/2)`: about one on an error plateau, small while the error still decays.
fn plateau(v: Variant, spec: &PerturbationSpec) -> f64 {
    let (p, g, exo) = two_channel_plant(true).unwrap();
    let ctrl = synthesize(&p, &g, &exo, &two_channel_params(v), &[]).unwrap();
    let pp = perturb(&p, spec).unwrap();
    let cl = assemble(&pp, &ctrl, &exo).unwrap();
    let mut o = SimOptions::new(400.0, 0.01);
    o.scheme = Scheme::Exponential;
    let ds = error_metrics(&simulate(&cl, &exo, &CVec::zeros(cl.dim()), &o).unwrap()).unwrap();
    ds.at(399.0) / ds.at(199.0)
}

#[test]
fn robust_errors_decay_while_nonrobust_errors_plateau() {
    let spec = PerturbationSpec::input_gain(1.1);
    let robust = plateau(Variant::NewStructure, &spec);
    let fragile = plateau(Variant::NonRobust, &spec);
    assert!(fragile >= 0.5, "non-robust {fragile}");
    assert!(robust <= 0.5, "robust {robust}");
    // on the nominal plant both decay
    assert!(plateau(Variant::NonRobust, &PerturbationSpec::identity()) <= 0.5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn growth_fit_recovers_power_laws(alpha in 0.2f64..5.0, c in 0.1f64..10.0) {
        let pk: Vec<(f64, f64)> = (1..=12).map(|k| (k as f64, c * (k as f64).powf(alpha))).collect();
        let m = fit_growth(&pk).unwrap();
        prop_assert!((m.alpha_polynomial - alpha).abs() <= 0.01);
        prop_assert!((m.m0 - c).abs() <= 1e-9 * c);
    }

    #[test]
    fn im_identity_is_exact(seed in 0u64..100_000) {
        let (g1, g2, blocks) = common::random_internal_model(seed);
        for row in im_norm_identity(&g1, &g2, &blocks).unwrap() {
            prop_assert!(row.deviation <= 1e-8);
        }
    }
}
