//! Internal-model controller synthesis: the stabilised-observer structure with
//! `K = (K1, -K2)`, its reduced-order and non-robust variants, and the
//! observer-based structure with `K = (K1, K2)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exosystem::TruncatedExosystem;
use crate::numerics::{
    block, c64, ci, norm2, pseudoinverse, resolvent_apply, singular_values, svd, CMat, PINV_TOL,
};
use crate::plant::{
    a_bk, a_lc, perturb, perturb_exosystem, steady_state_input, transfer, transfer_pk, transfer_pl,
    PerturbationSpec, PlantModel, StabilizationGains,
};

/// Tolerance of the construction-time identities.
pub const SELF_CHECK_TOL: f64 = 1e-8;
/// Relative singular-value cutoff for mode invertibility and subspace ranks.
pub const MODE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    NewStructure,
    ReducedIm,
    NonRobust,
    Observer,
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::NewStructure => "new-structure",
            Variant::ReducedIm => "reduced-im",
            Variant::NonRobust => "non-robust",
            Variant::Observer => "observer",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "new-structure" | "new" => Some(Variant::NewStructure),
            "reduced-im" | "reduced" => Some(Variant::ReducedIm),
            "non-robust" | "nonrobust" => Some(Variant::NonRobust),
            "observer" | "observer-based" => Some(Variant::Observer),
            _ => None,
        }
    }
}

/// Gain sequence `gamma_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum GainLaw {
    /// `gamma0 / (1 + |k|^{1/2 + kappa})`
    Heat { gamma0: f64, kappa: f64 },
    /// `gamma0 |w_k|^{-beta}`; the mode at `w = 0` uses the smallest nonzero `|w|`.
    Power { gamma0: f64, beta: f64 },
    /// `gamma0 exp(-rate |w_k|)`
    Exponential { gamma0: f64, rate: f64 },
}

impl GainLaw {
    pub fn gamma(&self, k: i64, omega: f64, omega_floor: f64) -> f64 {
        match *self {
            GainLaw::Heat { gamma0, kappa } => gamma0 / (1.0 + (k.abs() as f64).powf(0.5 + kappa)),
            GainLaw::Power { gamma0, beta } => {
                let w = if omega.abs() > 0.0 { omega.abs() } else { omega_floor };
                gamma0 * w.powf(-beta)
            }
            GainLaw::Exponential { gamma0, rate } => gamma0 * (-rate * omega.abs()).exp(),
        }
    }

    /// Polynomial decay exponent of `gamma_k` in `|k|`, when the law has one.
    pub fn exponent(&self) -> Option<f64> {
        match *self {
            GainLaw::Heat { kappa, .. } => Some(-(0.5 + kappa)),
            GainLaw::Power { beta, .. } => Some(-beta),
            GainLaw::Exponential { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthesisParams {
    pub variant: Variant,
    pub law: GainLaw,
    /// Law of the scalar observer gains `G_2k = g_2k I`; defaults to `law`.
    #[serde(default)]
    pub g2_law: Option<GainLaw>,
}

impl SynthesisParams {
    pub fn heat(variant: Variant, gamma0: f64, kappa: f64) -> Self {
        SynthesisParams { variant, law: GainLaw::Heat { gamma0, kappa }, g2_law: None }
    }

    pub fn gammas(&self, exo: &TruncatedExosystem) -> Vec<f64> {
        gamma_sequence(&self.law, exo)
    }
}

pub fn gamma_sequence(law: &GainLaw, exo: &TruncatedExosystem) -> Vec<f64> {
    let floor = exo.omega.iter().map(|w| w.abs()).filter(|&w| w > 0.0).fold(f64::INFINITY, f64::min);
    let floor = if floor.is_finite() { floor } else { 1.0 };
    exo.ks().into_iter().zip(&exo.omega).map(|(k, &w)| law.gamma(k, w, floor)).collect()
}

/// Internal-model block of one exosystem mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeBlock {
    pub k: i64,
    pub omega: f64,
    pub offset: usize,
    pub size: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
}

impl CheckResult {
    fn new(name: &str, residual: f64, tol: f64) -> Self {
        CheckResult { name: name.into(), residual, tol, pass: residual <= tol }
    }
}

/// Controller `z' = G1cal z + G2cal e`, `u = Kcal z` on `Z = Z0 x X`.
#[derive(Clone, Debug)]
pub struct ControllerRealization {
    pub variant: Variant,
    pub params: SynthesisParams,
    pub blocks: Vec<ModeBlock>,
    pub g1: CMat,
    pub g2: CMat,
    pub k1: CMat,
    /// Stabilising feedback for the first structure; `K21 + K1 H` for the observer structure.
    pub k2: CMat,
    /// Observer structure only: the stabilising feedback `K21`.
    pub k21: Option<CMat>,
    /// `L1 + H G2` for the first structure; the output injection for the observer structure.
    pub l: CMat,
    /// First structure only: the output injection `L1`.
    pub l1: Option<CMat>,
    /// `n x |Z0|` for the first structure, `|Z0| x n` for the observer structure.
    pub h: CMat,
    pub cal_g1: CMat,
    pub cal_g2: CMat,
    pub cal_k: CMat,
    pub checks: Vec<CheckResult>,
}

impl ControllerRealization {
    pub fn z0_dim(&self) -> usize {
        self.g1.nrows()
    }

    pub fn dim(&self) -> usize {
        self.cal_g1.nrows()
    }

    /// Rows of `G2` belonging to one mode block.
    pub fn g2_block(&self, b: &ModeBlock) -> CMat {
        self.g2.rows(b.offset, b.size).into_owned()
    }

    pub fn k1_block(&self, b: &ModeBlock) -> CMat {
        self.k1.columns(b.offset, b.size).into_owned()
    }

    /// Recomputes the construction identities from the stored matrices.
    pub fn self_checks(&self, plant: &PlantModel) -> Vec<CheckResult> {
        match self.variant {
            Variant::Observer => observer_checks(plant, self),
            _ => first_structure_checks(plant, self),
        }
    }
}

fn g1_matrix(blocks: &[ModeBlock], dim: usize) -> CMat {
    let mut g1 = CMat::zeros(dim, dim);
    for b in blocks {
        for r in b.offset..b.offset + b.size {
            g1[(r, r)] = ci(b.omega);
        }
    }
    g1
}

/// Per-mode input gains `K1k` feeding the first controller structure.
struct ModeGain {
    k: i64,
    omega: f64,
    k1: CMat,
}

fn mode_err(k: i64, e: Error) -> Error {
    match e {
        Error::TransferPole { .. } => Error::Mode { k, what: "i w_k is an eigenvalue of A + L1 C".into() },
        other => other,
    }
}

/// Steps 3 and 4 of the first structure given `K1k` for each mode.
fn assemble_first_structure(
    plant: &PlantModel,
    gains: &StabilizationGains,
    params: &SynthesisParams,
    mode_gains: Vec<ModeGain>,
) -> Result<ControllerRealization> {
    let (n, m, p) = (plant.states(), plant.inputs(), plant.outputs());
    let al = a_lc(plant, &gains.l1);
    let bl = &plant.b + &gains.l1 * &plant.d;
    let per_mode: Vec<Result<(CMat, CMat)>> = mode_gains
        .par_iter()
        .map(|mg| {
            let hk = resolvent_apply(&al, ci(mg.omega), &(&bl * &mg.k1)).map_err(|e| mode_err(mg.k, e))?;
            let plk = &plant.c * &hk + &plant.d * &mg.k1;
            Ok((hk, -plk.adjoint()))
        })
        .collect();
    let mut blocks = Vec::new();
    let mut offset = 0;
    for mg in &mode_gains {
        blocks.push(ModeBlock { k: mg.k, omega: mg.omega, offset, size: mg.k1.ncols() });
        offset += mg.k1.ncols();
    }
    let z0 = offset;
    let mut h = CMat::zeros(n, z0);
    let mut g2 = CMat::zeros(z0, p);
    let mut k1 = CMat::zeros(m, z0);
    for ((b, mg), res) in blocks.iter().zip(&mode_gains).zip(per_mode) {
        let (hk, g2k) = res?;
        h.view_mut((0, b.offset), (n, b.size)).copy_from(&hk);
        g2.view_mut((b.offset, 0), (b.size, p)).copy_from(&g2k);
        k1.view_mut((0, b.offset), (m, b.size)).copy_from(&mg.k1);
    }
    let g1 = g1_matrix(&blocks, z0);
    let l = &gains.l1 + &h * &g2;
    let ck = &plant.c + &plant.d * &gains.k2;
    let top_right = &g2 * &ck;
    let bottom_right = &plant.a + &plant.b * &gains.k2 + &l * &ck;
    let cal_g1 = block(&[&[&g1, &top_right], &[&CMat::zeros(n, z0), &bottom_right]]);
    let cal_g2 = block(&[&[&g2], &[&l]]);
    let cal_k = block(&[&[&k1, &(-&gains.k2)]]);
    let mut ctrl = ControllerRealization {
        variant: params.variant,
        params: params.clone(),
        blocks,
        g1,
        g2,
        k1,
        k2: gains.k2.clone(),
        k21: None,
        l,
        l1: Some(gains.l1.clone()),
        h,
        cal_g1,
        cal_g2,
        cal_k,
        checks: vec![],
    };
    ctrl.checks = first_structure_checks(plant, &ctrl);
    fail_on_checks(&ctrl.checks)?;
    Ok(ctrl)
}

fn fail_on_checks(checks: &[CheckResult]) -> Result<()> {
    match checks.iter().find(|c| !c.pass) {
        Some(c) => Err(Error::SelfCheck { check: c.name.clone(), residual: c.residual, tol: c.tol }),
        None => Ok(()),
    }
}

/// `C H + D K1 = -G2*` and `H G1 = (A + L1 C) H + (B + L1 D) K1`, relative.
fn first_structure_checks(plant: &PlantModel, ctrl: &ControllerRealization) -> Vec<CheckResult> {
    let l1 = ctrl.l1.clone().unwrap_or_else(|| CMat::zeros(plant.states(), plant.outputs()));
    let adj = &plant.c * &ctrl.h + &plant.d * &ctrl.k1 + ctrl.g2.adjoint();
    let adj_rel = adj.norm() / ctrl.g2.norm().max(f64::MIN_POSITIVE);
    let al = a_lc(plant, &l1);
    let bl = &plant.b + &l1 * &plant.d;
    let alh = &al * &ctrl.h;
    let blk = &bl * &ctrl.k1;
    let hg = &ctrl.h * &ctrl.g1;
    let syl = &hg - &alh - &blk;
    let scale = hg.norm() + alh.norm() + blk.norm();
    vec![
        CheckResult::new("adjoint coupling C H + D K1 = -G2*", adj_rel, SELF_CHECK_TOL),
        CheckResult::new("Sylvester H G1 = (A+L1C) H + (B+L1D) K1", syl.norm() / scale.max(f64::MIN_POSITIVE), SELF_CHECK_TOL),
    ]
}

/// `H B + G2 D = -K1*` and `G1 H = H (A + B K21) + G2 (C + D K21)`, relative.
fn observer_checks(plant: &PlantModel, ctrl: &ControllerRealization) -> Vec<CheckResult> {
    let k21 = ctrl.k21.clone().unwrap_or_else(|| CMat::zeros(plant.inputs(), plant.states()));
    let b1 = &ctrl.h * &plant.b + &ctrl.g2 * &plant.d + ctrl.k1.adjoint();
    let b1_rel = b1.norm() / ctrl.k1.norm().max(f64::MIN_POSITIVE);
    let ak = a_bk(plant, &k21);
    let ck = &plant.c + &plant.d * &k21;
    let gh = &ctrl.g1 * &ctrl.h;
    let ha = &ctrl.h * &ak;
    let gc = &ctrl.g2 * &ck;
    let syl = &gh - &ha - &gc;
    let scale = gh.norm() + ha.norm() + gc.norm();
    let k2 = &k21 + &ctrl.k1 * &ctrl.h - &ctrl.k2;
    vec![
        CheckResult::new("observer coupling H B + G2 D = -K1*", b1_rel, SELF_CHECK_TOL),
        CheckResult::new("Sylvester G1 H = H (A+BK21) + G2 (C+DK21)", syl.norm() / scale.max(f64::MIN_POSITIVE), SELF_CHECK_TOL),
        CheckResult::new("K2 = K21 + K1 H", k2.norm() / ctrl.k2.norm().max(f64::MIN_POSITIVE), SELF_CHECK_TOL),
    ]
}

/// Largest `sigma_max` over a set of transfer values; singularity is judged against it so
/// that a scalar transfer function vanishing at one mode is still caught.
fn transfer_scale(values: &[CMat]) -> f64 {
    values.iter().map(norm2).fold(0.0, f64::max)
}

/// `p x m` transfer value with `p` singular values above `MODE_TOL * scale`.
fn full_row_rank(t: &CMat, scale: f64) -> bool {
    let s = singular_values(t);
    t.nrows() <= t.ncols() && s.len() == t.nrows() && s.last().is_some_and(|&x| x > MODE_TOL * scale)
}

fn require(params: &SynthesisParams, v: Variant) -> Result<()> {
    if params.variant != v {
        return Err(Error::InvalidArgument(format!(
            "parameters are for variant {}, expected {}",
            params.variant.name(),
            v.name()
        )));
    }
    Ok(())
}

/// First structure with `K1k = gamma_k P_L(i w_k)^+ / ||P_L(i w_k)^+||`.
pub fn synth_new_structure(
    plant: &PlantModel,
    gains: &StabilizationGains,
    exo: &TruncatedExosystem,
    params: &SynthesisParams,
) -> Result<ControllerRealization> {
    require(params, Variant::NewStructure)?;
    let gam = params.gammas(exo);
    let ks = exo.ks();
    let pls: Vec<Result<CMat>> = (0..exo.modes())
        .into_par_iter()
        .map(|j| transfer_pl(plant, gains, ci(exo.omega[j])).map_err(|e| mode_err(ks[j], e)))
        .collect();
    let pls = pls.into_iter().collect::<Result<Vec<_>>>()?;
    let scale = transfer_scale(&pls);
    let mut mode_gains = Vec::new();
    for (j, pl) in pls.iter().enumerate() {
        let k = ks[j];
        if !full_row_rank(pl, scale) {
            return Err(Error::Mode { k, what: "P_L(i w_k) is not surjective".into() });
        }
        let pinv = pseudoinverse(pl, PINV_TOL);
        let k1 = &pinv * c64(gam[j] / norm2(&pinv), 0.0);
        mode_gains.push(ModeGain { k, omega: exo.omega[j], k1 });
    }
    assemble_first_structure(plant, gains, params, mode_gains)
}

/// Reduced-order internal model: per mode, only the span of the steady-state inputs
/// over a perturbation family is copied.
pub fn synth_reduced_im(
    plant: &PlantModel,
    gains: &StabilizationGains,
    exo: &TruncatedExosystem,
    family: &[PerturbationSpec],
    params: &SynthesisParams,
) -> Result<ControllerRealization> {
    require(params, Variant::ReducedIm)?;
    let gam = params.gammas(exo);
    let ks = exo.ks();
    let perturbed: Vec<(PlantModel, TruncatedExosystem)> = family
        .iter()
        .map(|s| Ok((perturb(plant, s)?, perturb_exosystem(exo, s))))
        .collect::<Result<_>>()?;
    let dim_y = plant.outputs();
    // transfer values per member and mode
    let mut member_pls = Vec::new();
    for (member, (pp, _)) in perturbed.iter().enumerate() {
        let pls = (0..exo.modes())
            .map(|j| {
                transfer_pl(pp, gains, ci(exo.omega[j]))
                    .map_err(|_| Error::FamilyMode { member, k: ks[j], what: "transfer pole".into() })
            })
            .collect::<Result<Vec<_>>>()?;
        let scale = transfer_scale(&pls);
        member_pls.push((pls, scale));
    }
    let mut mode_gains = Vec::new();
    for j in 0..exo.modes() {
        let (k, w) = (ks[j], exo.omega[j]);
        let mut cols = Vec::new();
        for (member, (pp, pe)) in perturbed.iter().enumerate() {
            let (pls, scale) = &member_pls[member];
            let pl = &pls[j];
            if pl.nrows() != pl.ncols() || !full_row_rank(pl, *scale) {
                return Err(Error::FamilyMode { member, k, what: "perturbed transfer function is singular".into() });
            }
            let e_col = pe.e_cols.columns(j, 1).into_owned();
            let f_col = pe.f_cols.columns(j, 1).into_owned();
            let (u, _, _) = steady_state_input(pp, &gains.l1, w, &e_col, &f_col)?;
            cols.push(u);
        }
        let refs: Vec<&CMat> = cols.iter().collect();
        let u = crate::numerics::hstack(&refs);
        let dec = svd(&u);
        let smax = dec.singular_values.first().copied().unwrap_or(0.0);
        let scale: f64 = perturbed.iter().map(|(_, pe)| pe.e_cols.column(j).norm() + pe.f_cols.column(j).norm()).sum();
        let pk = if smax <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
            0
        } else {
            dec.singular_values.iter().filter(|&&s| s > MODE_TOL * smax).count()
        };
        if pk == 0 {
            continue;
        }
        let k1 = if pk < dim_y {
            dec.u.columns(0, pk).into_owned() * c64(gam[j], 0.0)
        } else {
            let pl = transfer_pl(plant, gains, ci(w)).map_err(|e| mode_err(k, e))?;
            let inv = pseudoinverse(&pl, PINV_TOL);
            &inv * c64(gam[j] / norm2(&inv), 0.0)
        };
        mode_gains.push(ModeGain { k, omega: w, k1 });
    }
    assemble_first_structure(plant, gains, params, mode_gains)
}

/// Minimal internal model for the nominal plant only: one scalar copy per mode
/// along the steady-state input direction.
pub fn synth_nonrobust(
    plant: &PlantModel,
    gains: &StabilizationGains,
    exo: &TruncatedExosystem,
    params: &SynthesisParams,
) -> Result<ControllerRealization> {
    require(params, Variant::NonRobust)?;
    let gam = params.gammas(exo);
    let ks = exo.ks();
    let mut mode_gains = Vec::new();
    for j in 0..exo.modes() {
        let (k, w) = (ks[j], exo.omega[j]);
        let e_col = exo.e_cols.columns(j, 1).into_owned();
        let f_col = exo.f_cols.columns(j, 1).into_owned();
        let (u, target, resid) = steady_state_input(plant, &gains.l1, w, &e_col, &f_col).map_err(|e| mode_err(k, e))?;
        let forcing = e_col.norm() + f_col.norm();
        let u = if target.norm() <= 1e-14 * forcing || forcing == 0.0 {
            let pl = transfer_pl(plant, gains, ci(w)).map_err(|e| mode_err(k, e))?;
            let v = svd(&pl).right_vector(0);
            // fix the phase: largest component real and positive
            let big = v.iter().copied().fold(c64(0.0, 0.0), |a, z| if z.norm() > a.norm() { z } else { a });
            let v = v * (big.conj() / big.norm());
            CMat::from_column_slice(plant.inputs(), 1, v.as_slice())
        } else {
            if resid > SELF_CHECK_TOL {
                return Err(Error::Untrackable(k));
            }
            u
        };
        let k1 = &u * c64(gam[j] / u.norm(), 0.0);
        mode_gains.push(ModeGain { k, omega: w, k1 });
    }
    assemble_first_structure(plant, gains, params, mode_gains)
}

/// Observer-based structure with `G2k = g_2k I`, `K1 = -(G2k P_K(i w_k))^*` and
/// `K2 = K21 + K1 H`. Uses `gains.k2` as `K21` and `gains.l1` as the observer injection.
pub fn synth_observer_based(
    plant: &PlantModel,
    gains: &StabilizationGains,
    exo: &TruncatedExosystem,
    params: &SynthesisParams,
) -> Result<ControllerRealization> {
    require(params, Variant::Observer)?;
    let (n, m, p) = (plant.states(), plant.inputs(), plant.outputs());
    let g2_law = params.g2_law.clone().unwrap_or_else(|| params.law.clone());
    let g2s = gamma_sequence(&g2_law, exo);
    let ks = exo.ks();
    let k21 = gains.k2.clone();
    let ak = a_bk(plant, &k21);
    let ak_t = ak.transpose();
    let ck = &plant.c + &plant.d * &k21;
    let ck_t = ck.transpose();
    let pks: Vec<Result<CMat>> = (0..exo.modes())
        .into_par_iter()
        .map(|j| {
            transfer_pk(plant, gains, ci(exo.omega[j]))
                .map_err(|_| Error::Mode { k: ks[j], what: "i w_k is an eigenvalue of A + B K21".into() })
        })
        .collect();
    let pks = pks.into_iter().collect::<Result<Vec<_>>>()?;
    let scale = transfer_scale(&pks);
    let per_mode: Vec<Result<(CMat, CMat, CMat)>> = (0..exo.modes())
        .into_par_iter()
        .map(|j| {
            let (k, w) = (ks[j], exo.omega[j]);
            let pk = &pks[j];
            if p != m || !full_row_rank(pk, scale) {
                return Err(Error::Mode { k, what: "P_K(i w_k) is not invertible".into() });
            }
            let g2k = CMat::identity(p, p) * c64(g2s[j], 0.0);
            // rows of H: G2k (C + D K21) (i w - A - B K21)^{-1}
            let rt = resolvent_apply(&ak_t, ci(w), &ck_t).map_err(|e| mode_err(k, e))?;
            let hk = &g2k * rt.transpose();
            let k1k = -(&g2k * pk).adjoint();
            Ok((g2k, hk, k1k))
        })
        .collect();
    let mut blocks = Vec::new();
    for (j, &k) in ks.iter().enumerate() {
        blocks.push(ModeBlock { k, omega: exo.omega[j], offset: j * p, size: p });
    }
    let z0 = p * exo.modes();
    let mut g2 = CMat::zeros(z0, p);
    let mut h = CMat::zeros(z0, n);
    let mut k1 = CMat::zeros(m, z0);
    for (b, res) in blocks.iter().zip(per_mode) {
        let (g2k, hk, k1k) = res?;
        g2.view_mut((b.offset, 0), (p, p)).copy_from(&g2k);
        h.view_mut((b.offset, 0), (p, n)).copy_from(&hk);
        k1.view_mut((0, b.offset), (m, p)).copy_from(&k1k);
    }
    let g1 = g1_matrix(&blocks, z0);
    let k2 = &k21 + &k1 * &h;
    let l = gains.l1.clone();
    let ck2 = &plant.c + &plant.d * &k2;
    let bottom_left = (&plant.b + &l * &plant.d) * &k1;
    let bottom_right = &plant.a + &plant.b * &k2 + &l * &ck2;
    let cal_g1 = block(&[&[&g1, &CMat::zeros(z0, n)], &[&bottom_left, &bottom_right]]);
    let cal_g2 = block(&[&[&g2], &[&(-&l)]]);
    let cal_k = block(&[&[&k1, &k2]]);
    let mut ctrl = ControllerRealization {
        variant: Variant::Observer,
        params: params.clone(),
        blocks,
        g1,
        g2,
        k1,
        k2,
        k21: Some(k21),
        l,
        l1: None,
        h,
        cal_g1,
        cal_g2,
        cal_k,
        checks: vec![],
    };
    ctrl.checks = observer_checks(plant, &ctrl);
    fail_on_checks(&ctrl.checks)?;
    Ok(ctrl)
}

/// Dispatches on the parameter variant. The reduced-order model uses `family`
/// (the nominal plant alone when empty).
pub fn synthesize(
    plant: &PlantModel,
    gains: &StabilizationGains,
    exo: &TruncatedExosystem,
    params: &SynthesisParams,
    family: &[PerturbationSpec],
) -> Result<ControllerRealization> {
    match params.variant {
        Variant::NewStructure => synth_new_structure(plant, gains, exo, params),
        Variant::Observer => synth_observer_based(plant, gains, exo, params),
        Variant::NonRobust => synth_nonrobust(plant, gains, exo, params),
        Variant::ReducedIm => {
            let nominal = [PerturbationSpec::identity()];
            let fam = if family.is_empty() { &nominal[..] } else { family };
            synth_reduced_im(plant, gains, exo, fam, params)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransferKind {
    P,
    PL,
    PK,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModeInvertibility {
    pub k: i64,
    pub omega: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub pole: bool,
    pub invertible: bool,
}

/// Smallest singular value of the chosen transfer function at every mode.
pub fn check_mode_invertibility(
    plant: &PlantModel,
    gains: &StabilizationGains,
    exo: &TruncatedExosystem,
    which: TransferKind,
) -> Vec<ModeInvertibility> {
    let ks = exo.ks();
    let mut rows: Vec<ModeInvertibility> = (0..exo.modes())
        .into_par_iter()
        .map(|j| {
            let lam = ci(exo.omega[j]);
            let t = match which {
                TransferKind::P => transfer(plant, lam),
                TransferKind::PL => transfer_pl(plant, gains, lam),
                TransferKind::PK => transfer_pk(plant, gains, lam),
            };
            match t {
                Ok(t) => {
                    let s = singular_values(&t);
                    let smax = s.first().copied().unwrap_or(0.0);
                    let smin = if t.nrows() == t.ncols() { s.last().copied().unwrap_or(0.0) } else { 0.0 };
                    ModeInvertibility {
                        k: ks[j],
                        omega: exo.omega[j],
                        sigma_min: smin,
                        sigma_max: smax,
                        pole: false,
                        invertible: smax > 0.0 && smin > MODE_TOL * smax,
                    }
                }
                Err(_) => ModeInvertibility {
                    k: ks[j],
                    omega: exo.omega[j],
                    sigma_min: 0.0,
                    sigma_max: f64::INFINITY,
                    pole: true,
                    invertible: false,
                },
            }
        })
        .collect();
    let scale = rows.iter().filter(|r| !r.pole).map(|r| r.sigma_max).fold(0.0, f64::max);
    for r in rows.iter_mut().filter(|r| !r.pole) {
        r.invertible = r.invertible && r.sigma_min > MODE_TOL * scale;
    }
    rows
}
