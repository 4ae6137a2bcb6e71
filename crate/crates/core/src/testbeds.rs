//! Small reference systems: a scalar toy loop, a bounded-operator decay testbed
//! and a two-channel plant with feedthrough.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::closedloop::{assemble, error_metrics, simulate, DecaySamples, Scheme, SimOptions};
use crate::error::{Error, Result};
use crate::exosystem::{build_periodic, TruncatedExosystem};
use crate::numerics::{c64, ci, CMat, CVec, C64};
use crate::plant::{PlantModel, StabilizationGains};
use crate::synthesis::{synthesize, GainLaw, SynthesisParams, Variant};

fn real(rows: usize, cols: usize, data: &[f64]) -> CMat {
    CMat::from_row_iterator(rows, cols, data.iter().map(|&x| c64(x, 0.0)))
}

fn zero_gains(plant: &PlantModel) -> Result<StabilizationGains> {
    StabilizationGains::new(
        plant,
        CMat::zeros(plant.inputs(), plant.states()),
        CMat::zeros(plant.states(), plant.outputs()),
    )
}

/// `A = -1`, `B = C = 1`, `D = 0`, zero stabilisers, a single mode at `w = 0`.
pub fn scalar_toy() -> Result<(PlantModel, StabilizationGains, TruncatedExosystem)> {
    let plant = PlantModel::new(real(1, 1, &[-1.0]), real(1, 1, &[1.0]), real(1, 1, &[0.0]), real(1, 1, &[1.0]), real(1, 1, &[0.0]))?;
    let gains = zero_gains(&plant)?;
    let mut exo = build_periodic(2.0 * PI, 0)?;
    exo.v0[0] = c64(1.0, 0.0);
    exo.f_cols[(0, 0)] = c64(1.0, 0.0);
    Ok((plant, gains, exo))
}

/// Bounded-operator decay testbed.
///
/// Plant `P(s) = 1/(s + 8)`, so `||P_L(i w)^+|| ~ |w|`; modes `w_k = 8k`, `|k| <= 40`.
/// Gains `gamma_k = gamma0 |w_k|^{-beta}` with `gamma0` fixing the damping of the first
/// mode at 0.15 of the frequency gap. Data `|F phi_k v0_k| = (1 + |k|)^{-3/2}` with
/// seeded random phases, `v0_k = (1 + |k|)^{-3/5}`.
pub struct DecayTestbed {
    pub plant: PlantModel,
    pub gains: StabilizationGains,
    pub exo: TruncatedExosystem,
    pub params: SynthesisParams,
    /// Predicted growth exponent `2 (1 + beta)`.
    pub alpha: f64,
}

pub const DECAY_GAP: f64 = 8.0;
pub const DECAY_POLE: f64 = 8.0;
pub const DECAY_MODES: usize = 40;
pub const DECAY_COUPLING: f64 = 0.15;

pub fn decay_testbed(beta: f64, seed: u64) -> Result<DecayTestbed> {
    let a = DECAY_POLE;
    let plant = PlantModel::new(real(1, 1, &[-a]), real(1, 1, &[1.0]), real(1, 1, &[0.0]), real(1, 1, &[1.0]), real(1, 1, &[0.0]))?;
    let gains = zero_gains(&plant)?;
    let om = DECAY_GAP;
    let mut exo = build_periodic(2.0 * PI / om, DECAY_MODES)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phases: Vec<f64> = (0..exo.modes()).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
    let raw: Vec<C64> = exo
        .ks()
        .iter()
        .zip(&phases)
        .map(|(&k, &ph)| (ci(ph)).exp() * (1.0 + k.abs() as f64).powf(-0.9))
        .collect();
    let m = exo.modes();
    for (j, k) in exo.ks().into_iter().enumerate() {
        exo.v0[j] = c64((1.0 + k.abs() as f64).powf(-0.6), 0.0);
        exo.f_cols[(0, j)] = (raw[j] + raw[m - 1 - j].conj()) * 0.5;
    }
    let gamma0 = (DECAY_COUPLING * om * (om * om + a * a) * om.powf(2.0 * beta)).sqrt();
    let params = SynthesisParams { variant: Variant::NewStructure, law: GainLaw::Power { gamma0, beta }, g2_law: None };
    Ok(DecayTestbed { plant, gains, exo, params, alpha: 2.0 * (1.0 + beta) })
}

/// Stable three-state plant with two inputs, two outputs and one disturbance.
/// `with_feedthrough` selects `D != 0`.
pub fn two_channel_plant(with_feedthrough: bool) -> Result<(PlantModel, StabilizationGains, TruncatedExosystem)> {
    let a = real(3, 3, &[-1.0, 0.5, 0.0, 0.0, -2.0, 0.3, 0.2, 0.0, -3.0]);
    let b = real(3, 2, &[1.0, 0.0, 0.5, 1.0, 0.0, 0.8]);
    let bd = real(3, 1, &[0.3, 0.0, 1.0]);
    let c = real(2, 3, &[1.0, 0.0, 0.5, 0.0, 1.0, 0.2]);
    let d = if with_feedthrough { real(2, 2, &[0.2, 0.0, 0.1, 0.3]) } else { CMat::zeros(2, 2) };
    let plant = PlantModel::new(a, b, bd, c, d)?;
    let gains = zero_gains(&plant)?;
    let mut exo = build_periodic(2.0 * PI, 2)?.with_dims(2, 1);
    let f_pos = [[c64(0.3, 0.0), c64(-0.1, 0.0)], [c64(0.5, -0.2), c64(0.1, 0.4)], [c64(-0.2, 0.1), c64(0.25, 0.05)]];
    let e_pos = [c64(0.2, 0.0), c64(0.4, -0.1), c64(0.0, 0.15)];
    for k in 0..=2i64 {
        let (jp, jm) = (exo.index(k), exo.index(-k));
        exo.v0[jp] = c64(1.0, 0.0);
        exo.v0[jm] = c64(1.0, 0.0);
        for r in 0..2 {
            exo.f_cols[(r, jp)] = f_pos[k as usize][r];
            exo.f_cols[(r, jm)] = f_pos[k as usize][r].conj();
        }
        exo.e_cols[(0, jp)] = e_pos[k as usize];
        exo.e_cols[(0, jm)] = e_pos[k as usize].conj();
    }
    Ok((plant, gains, exo))
}

/// Heat-type gain law used with the two-channel plant.
pub fn two_channel_params(variant: Variant) -> SynthesisParams {
    SynthesisParams::heat(variant, 1.0, 0.125)
}

/// Runs the decay testbed for each seed (exact exponential stepping, zero initial state)
/// and averages the sliding error integrals across seeds.
pub fn decay_ensemble(beta: f64, seeds: &[u64], t_end: f64, dt: f64) -> Result<(DecaySamples, f64)> {
    let runs: Vec<Result<DecaySamples>> = seeds
        .par_iter()
        .map(|&seed| {
            let tb = decay_testbed(beta, seed)?;
            let ctrl = synthesize(&tb.plant, &tb.gains, &tb.exo, &tb.params, &[])?;
            let cl = assemble(&tb.plant, &ctrl, &tb.exo)?;
            let mut opts = SimOptions::new(t_end, dt);
            opts.scheme = Scheme::Exponential;
            let traj = simulate(&cl, &tb.exo, &CVec::zeros(cl.dim()), &opts)?;
            error_metrics(&traj)
        })
        .collect();
    let mut acc: Option<DecaySamples> = None;
    for r in runs {
        let ds = r?;
        match acc.as_mut() {
            None => acc = Some(ds),
            Some(a) => a.i.iter_mut().zip(&ds.i).for_each(|(x, y)| *x += y),
        }
    }
    let mut acc = acc.ok_or_else(|| Error::InvalidArgument("empty seed list".into()))?;
    let n = seeds.len() as f64;
    acc.i.iter_mut().for_each(|x| *x /= n);
    Ok((acc, 2.0 * (1.0 + beta)))
}
