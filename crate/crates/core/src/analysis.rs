//! Structural and quantitative checks: G-conditions, regulator residuals, the
//! internal-model norm identity, resolvent growth, decay fits and robustness runs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closedloop::{assemble, error_metrics, simulate, ClosedLoopModel, DecaySamples, SimOptions};
use crate::error::{Error, Result};
use crate::exosystem::TruncatedExosystem;
use crate::numerics::{
    c64, ci, fit_line, hstack, norm2, pseudoinverse, rank, resolvent_apply, resolvent_norm, schur, shifted,
    spectral_abscissa, CMat, CVec, PINV_TOL,
};
use crate::plant::{perturb, perturb_exosystem, PerturbationSpec, PlantModel};
use crate::synthesis::{ControllerRealization, ModeBlock};

/// Relative singular-value cutoff for the G-condition rank tests.
pub const G_RANK_TOL: f64 = 1e-10;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GModeCheck {
    pub k: i64,
    pub rank_shift: usize,
    pub rank_g2: usize,
    pub rank_joint: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GConditionReport {
    pub modes: Vec<GModeCheck>,
    pub ker_trivial: bool,
    pub all_pass: bool,
}

/// `ran(i w_k - G1cal) ∩ ran(G2cal) = {0}` per mode by ranks, and `ker G2cal = {0}`.
pub fn check_g_conditions(ctrl: &ControllerRealization, exo: &TruncatedExosystem) -> GConditionReport {
    let g2 = &ctrl.cal_g2;
    let rank_g2 = rank(g2, G_RANK_TOL);
    let ker_trivial = rank_g2 == g2.ncols();
    let ks = exo.ks();
    let modes: Vec<GModeCheck> = (0..exo.modes())
        .into_par_iter()
        .map(|j| {
            let m = shifted(&ctrl.cal_g1, ci(exo.omega[j]));
            let rank_shift = rank(&m, G_RANK_TOL);
            let rank_joint = rank(&hstack(&[&m, g2]), G_RANK_TOL);
            GModeCheck { k: ks[j], rank_shift, rank_g2, rank_joint, pass: rank_joint == rank_shift + rank_g2 }
        })
        .collect();
    let all_pass = ker_trivial && modes.iter().all(|m| m.pass);
    GConditionReport { modes, ker_trivial, all_pass }
}

/// `Sigma phi_k = (i w_k - A_e)^{-1} B_e phi_k` and `r_k = ||C_e Sigma phi_k + D_e phi_k||`.
#[derive(Clone, Debug)]
pub struct RegulatorSolution {
    pub sigma: CMat,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    /// `max_k r_k / max_k (||C_e Sigma phi_k|| + ||D_e phi_k||)`
    pub relative: f64,
}

pub fn regulator_residuals(cl: &ClosedLoopModel, exo: &TruncatedExosystem) -> Result<RegulatorSolution> {
    let ks = exo.ks();
    let cols: Vec<Result<(CMat, f64, f64)>> = (0..exo.modes())
        .into_par_iter()
        .map(|j| {
            let b = cl.be.columns(j, 1).into_owned();
            let s = resolvent_apply(&cl.ae, ci(exo.omega[j]), &b)
                .map_err(|_| Error::Mode { k: ks[j], what: "i w_k is in the spectrum of A_e".into() })?;
            let cs = &cl.ce * &s;
            let d = cl.de.columns(j, 1).into_owned();
            let r = (&cs + &d).norm();
            Ok((s, r, cs.norm() + d.norm()))
        })
        .collect();
    let mut sigma = CMat::zeros(cl.dim(), exo.modes());
    let mut residuals = Vec::new();
    let mut scale: f64 = 0.0;
    for (j, c) in cols.into_iter().enumerate() {
        let (s, r, sc) = c?;
        sigma.set_column(j, &s.column(0));
        residuals.push(r);
        scale = scale.max(sc);
    }
    let max_residual = residuals.iter().cloned().fold(0.0, f64::max);
    let relative = if scale > 0.0 { max_residual / scale } else { max_residual };
    Ok(RegulatorSolution { sigma, residuals, max_residual, relative })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ImNormRow {
    pub k: i64,
    /// `||R(i w_k, G1 - G2 G2^*) G2||`
    pub lhs: f64,
    /// `||G2k^{-1}||`, or the pseudoinverse norm for a non-square block.
    pub rhs: f64,
    /// `|lhs - rhs| / rhs`
    pub deviation: f64,
    pub square: bool,
}

pub fn im_norm_identity(g1: &CMat, g2: &CMat, blocks: &[ModeBlock]) -> Result<Vec<ImNormRow>> {
    let m = g1 - g2 * g2.adjoint();
    blocks
        .par_iter()
        .map(|b| {
            let r = resolvent_apply(&m, ci(b.omega), g2)
                .map_err(|_| Error::Mode { k: b.k, what: "i w_k is in the spectrum of G1 - G2 G2*".into() })?;
            let lhs = norm2(&r);
            let g2k = g2.rows(b.offset, b.size).into_owned();
            let rhs = norm2(&pseudoinverse(&g2k, PINV_TOL));
            Ok(ImNormRow { k: b.k, lhs, rhs, deviation: (lhs - rhs).abs() / rhs, square: g2k.nrows() == g2k.ncols() })
        })
        .collect()
}

/// Resolvent norms `||(i w - A)^{-1}||` from one Schur factorisation.
///
/// Each evaluation runs power iteration on `(i w - T)^{-*} (i w - T)^{-1}` with
/// triangular solves, falling back to a dense SVD when it stalls.
pub struct ResolventScanner {
    a: CMat,
    t: Option<CMat>,
}

impl ResolventScanner {
    pub fn new(a: &CMat) -> Self {
        let t = schur(a, false).ok().map(|r| r.1);
        ResolventScanner { a: a.clone(), t }
    }

    pub fn norm(&self, omega: f64) -> f64 {
        let Some(t) = &self.t else { return resolvent_norm(&self.a, ci(omega)) };
        let n = t.nrows();
        let m = shifted(t, ci(omega));
        if m.diagonal().iter().any(|z| z.norm() == 0.0) {
            return f64::INFINITY;
        }
        let mut v = CVec::from_fn(n, |i, _| c64(1.0, 0.37 * i as f64).unscale(n as f64));
        v /= c64(v.norm(), 0.0);
        let mut est = 0.0;
        for _ in 0..400 {
            let Some(y) = m.solve_upper_triangular(&v) else { return f64::INFINITY };
            let Some(z) = m.ad_solve_upper_triangular(&y) else { return f64::INFINITY };
            let ny = y.norm();
            let nz = z.norm();
            if !(nz.is_finite() && ny.is_finite()) || nz == 0.0 {
                return f64::INFINITY;
            }
            // sigma_max^2 >= ||z|| once v is a unit vector
            let new = nz.sqrt();
            v = z / c64(nz, 0.0);
            if (new - est).abs() <= 1e-13 * new {
                return new;
            }
            est = new;
        }
        resolvent_norm(&self.a, ci(omega))
    }

    /// Local maximum of the resolvent norm in `[lo, hi]` by a grid and golden-section refinement.
    pub fn peak(&self, lo: f64, hi: f64, grid: usize) -> (f64, f64) {
        let grid = grid.max(3);
        let pts: Vec<f64> = (0..grid).map(|i| lo + (hi - lo) * i as f64 / (grid - 1) as f64).collect();
        let vals: Vec<f64> = pts.iter().map(|&w| self.norm(w)).collect();
        let (imax, _) = vals.iter().enumerate().fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        if !vals[imax].is_finite() {
            return (pts[imax], f64::INFINITY);
        }
        let mut a = pts[imax.saturating_sub(1)];
        let mut b = pts[(imax + 1).min(grid - 1)];
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let (mut fc, mut fd) = (self.norm(c), self.norm(d));
        for _ in 0..60 {
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = self.norm(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = self.norm(d);
            }
            if (b - a).abs() < 1e-10 * (1.0 + b.abs()) {
                break;
            }
        }
        let w = 0.5 * (a + b);
        let v = self.norm(w).max(vals[imax]);
        (w, v)
    }
}

/// `||R(i w, A)||` on a frequency list.
pub fn resolvent_scan(a: &CMat, omegas: &[f64]) -> Vec<f64> {
    let sc = ResolventScanner::new(a);
    omegas.par_iter().map(|&w| sc.norm(w)).collect()
}

/// Mode frequencies with `sub - 1` equally spaced points between neighbours.
pub fn scan_grid(mode_omegas: &[f64], sub: usize) -> Vec<f64> {
    let mut w = mode_omegas.to_vec();
    w.sort_by(f64::total_cmp);
    let sub = sub.max(1);
    let mut out = Vec::new();
    for p in w.windows(2) {
        for i in 0..sub {
            out.push(p[0] + (p[1] - p[0]) * i as f64 / sub as f64);
        }
    }
    if let Some(&last) = w.last() {
        out.push(last);
    }
    out
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Peak {
    pub k: i64,
    pub omega: f64,
    pub value: f64,
}

/// Largest resolvent norm within half a gap of each listed mode frequency.
pub fn mode_peaks(a: &CMat, exo: &TruncatedExosystem, modes: &[i64]) -> Vec<Peak> {
    let sc = ResolventScanner::new(a);
    let half = 0.5 * exo.min_gap();
    modes
        .par_iter()
        .map(|&k| {
            let w0 = exo.omega[exo.index(k)];
            let (omega, value) = sc.peak(w0 - half, w0 + half, 41);
            Peak { k, omega, value }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum GrowthLaw {
    /// `g(w) = w^alpha`
    Polynomial { alpha: f64 },
    /// `g(w) = exp(rate w)`
    Exponential { rate: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateTag {
    /// `(log t / t)^{1/alpha}`
    LogOverT,
    /// `t^{-1/alpha}`
    Polynomial,
    /// `1 / log t`
    InverseLog,
}

/// Resolvent growth model and the decay rate it predicts.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecayModel {
    pub law: GrowthLaw,
    /// Envelope constant: `max ||R|| / g(w)` over the fitted peaks.
    pub m0: f64,
    pub r2: f64,
    pub r2_polynomial: f64,
    pub r2_exponential: f64,
    /// Log-log slope, kept whichever law wins.
    pub alpha_polynomial: f64,
    /// Semilog slope, kept whichever law wins.
    pub rate_exponential: f64,
    pub rate: RateTag,
}

impl DecayModel {
    pub fn polynomial(alpha: f64) -> Self {
        DecayModel {
            law: GrowthLaw::Polynomial { alpha },
            m0: 1.0,
            r2: 1.0,
            r2_polynomial: 1.0,
            r2_exponential: f64::NAN,
            alpha_polynomial: alpha,
            rate_exponential: f64::NAN,
            rate: RateTag::Polynomial,
        }
    }

    pub fn g(&self, w: f64) -> f64 {
        match self.law {
            GrowthLaw::Polynomial { alpha } => w.abs().max(1.0).powf(alpha),
            GrowthLaw::Exponential { rate } => (rate * w.abs()).exp(),
        }
    }

    /// `M_log(w) = M0 g(w) (log(1 + M0 g(w)) + log(1 + w))`
    pub fn m_log(&self, w: f64) -> f64 {
        let mg = self.m0 * self.g(w);
        mg * ((1.0 + mg).ln() + (1.0 + w.abs()).ln())
    }

    /// Predicted log-log slope `-1/alpha` of the error integrals (polynomial law).
    pub fn predicted_slope(&self) -> Option<f64> {
        match self.law {
            GrowthLaw::Polynomial { alpha } => Some(-1.0 / alpha),
            GrowthLaw::Exponential { .. } => None,
        }
    }
}

/// Fits `value ~ M0 w^alpha` (log-log) and `value ~ M0 e^{rate w}` (semilog) and keeps the better `R^2`.
pub fn fit_growth(peaks: &[(f64, f64)]) -> Result<DecayModel> {
    if peaks.len() < 6 {
        return Err(Error::InvalidArgument(format!("growth fit needs at least 6 peaks, got {}", peaks.len())));
    }
    if peaks.iter().any(|&(w, v)| !(w > 0.0 && v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidArgument("growth fit needs positive finite peaks at positive frequencies".into()));
    }
    let lw: Vec<f64> = peaks.iter().map(|p| p.0.ln()).collect();
    let w: Vec<f64> = peaks.iter().map(|p| p.0).collect();
    let lv: Vec<f64> = peaks.iter().map(|p| p.1.ln()).collect();
    let poly = fit_line(&lw, &lv, None)?;
    let expo = fit_line(&w, &lv, None)?;
    let (law, r2, rate) = if poly.r2 >= expo.r2 {
        (GrowthLaw::Polynomial { alpha: poly.slope }, poly.r2, RateTag::Polynomial)
    } else {
        (GrowthLaw::Exponential { rate: expo.slope }, expo.r2, RateTag::InverseLog)
    };
    let mut model = DecayModel {
        law,
        m0: 1.0,
        r2,
        r2_polynomial: poly.r2,
        r2_exponential: expo.r2,
        alpha_polynomial: poly.slope,
        rate_exponential: expo.slope,
        rate,
    };
    model.m0 = peaks.iter().map(|&(w, v)| v / model.g(w)).fold(0.0, f64::max);
    Ok(model)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecayFit {
    pub window: (f64, f64),
    pub slope: f64,
    pub slope_stderr: f64,
    pub r2: f64,
    /// Slope of `log I` against `log(t / log t)`.
    pub log_corrected_slope: f64,
    pub predicted: Option<f64>,
    /// `slope / predicted`
    pub ratio: Option<f64>,
    /// Smallest `M` with `I(t) <= M t^{predicted}` on the window.
    pub envelope_constant: Option<f64>,
    pub short_window: bool,
}

/// Weighted (1/t) least squares of `log I` against `log t` over `window`.
pub fn fit_decay(samples: &DecaySamples, window: (f64, f64), model: Option<&DecayModel>) -> Result<DecayFit> {
    let (t0, t1) = window;
    let sel: Vec<(f64, f64)> = samples
        .t
        .iter()
        .zip(&samples.i)
        .filter(|(&t, &i)| t >= t0 - 1e-9 && t <= t1 + 1e-9 && t > 1.0 && i > 0.0)
        .map(|(&t, &i)| (t, i))
        .collect();
    if sel.len() < 3 {
        return Err(Error::InvalidArgument(format!("decay window [{t0}, {t1}] holds fewer than 3 samples")));
    }
    let lt: Vec<f64> = sel.iter().map(|s| s.0.ln()).collect();
    let li: Vec<f64> = sel.iter().map(|s| s.1.ln()).collect();
    let w: Vec<f64> = sel.iter().map(|s| 1.0 / s.0).collect();
    let fit = fit_line(&lt, &li, Some(&w))?;
    let lc: Vec<f64> = sel.iter().map(|s| (s.0 / s.0.ln()).ln()).collect();
    let corrected = fit_line(&lc, &li, Some(&w))?;
    let predicted = model.and_then(|m| m.predicted_slope());
    let envelope_constant = predicted.map(|p| sel.iter().map(|s| s.1 / s.0.powf(p)).fold(0.0, f64::max));
    Ok(DecayFit {
        window,
        slope: fit.slope,
        slope_stderr: fit.slope_stderr,
        r2: fit.r2,
        log_corrected_slope: corrected.slope,
        predicted,
        ratio: predicted.map(|p| fit.slope / p),
        envelope_constant,
        short_window: t1 < 10.0 * t0,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RobustnessRow {
    pub name: String,
    pub abscissa: f64,
    pub stable: bool,
    pub regulator_residual: f64,
    pub i_initial: f64,
    pub i_final: f64,
    /// `I(T - 1) / I(0)`
    pub ratio: f64,
    pub note: String,
}

/// Perturbs the plant (controller unchanged), checks stability, simulates from rest and
/// reports the error-integral ratio and regulator residual for each spec.
pub fn robustness_suite(
    plant: &PlantModel,
    ctrl: &ControllerRealization,
    exo: &TruncatedExosystem,
    specs: &[PerturbationSpec],
    opts: &SimOptions,
) -> Vec<RobustnessRow> {
    specs.par_iter().map(|s| robustness_row(plant, ctrl, exo, s, opts)).collect()
}

fn robustness_row(
    plant: &PlantModel,
    ctrl: &ControllerRealization,
    exo: &TruncatedExosystem,
    spec: &PerturbationSpec,
    opts: &SimOptions,
) -> RobustnessRow {
    let mut row = RobustnessRow {
        name: spec.name.clone(),
        abscissa: f64::NAN,
        stable: false,
        regulator_residual: f64::NAN,
        i_initial: f64::NAN,
        i_final: f64::NAN,
        ratio: f64::NAN,
        note: String::new(),
    };
    let mut run = || -> Result<()> {
        let pp = perturb(plant, spec)?;
        let pe = perturb_exosystem(exo, spec);
        let cl = assemble(&pp, ctrl, &pe)?;
        row.abscissa = spectral_abscissa(&cl.ae);
        row.stable = row.abscissa < 0.0;
        if !row.stable {
            row.note = "destabilizing perturbation, outside guarantee".into();
            return Ok(());
        }
        row.regulator_residual = regulator_residuals(&cl, &pe)?.relative;
        let traj = simulate(&cl, &pe, &CVec::zeros(cl.dim()), opts)?;
        let ds = error_metrics(&traj)?;
        row.i_initial = ds.i[0];
        row.i_final = *ds.i.last().unwrap();
        row.ratio = row.i_final / row.i_initial;
        Ok(())
    };
    let outcome = run();
    if let Err(e) = outcome {
        row.note = e.to_string();
    }
    row
}
