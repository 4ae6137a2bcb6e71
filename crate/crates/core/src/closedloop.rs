//! Closed-loop assembly, the triangularising similarity, simulation and error metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exosystem::TruncatedExosystem;
use crate::numerics::{
    block, c64, sliding_window_integral, spectral_abscissa, step_count, CMat, CVec, ExponentialInput, Trapezoid, C64,
};
use crate::plant::PlantModel;
use crate::synthesis::{ControllerRealization, Variant};

/// Composite system `x_e' = A_e x_e + B_e v`, `e = C_e x_e + D_e v`.
#[derive(Clone, Debug)]
pub struct ClosedLoopModel {
    pub ae: CMat,
    pub be: CMat,
    pub ce: CMat,
    pub de: CMat,
    /// `u = u_map x_e`
    pub u_map: CMat,
    pub plant_dim: usize,
    pub z0_dim: usize,
    pub copy_dim: usize,
}

impl ClosedLoopModel {
    pub fn dim(&self) -> usize {
        self.ae.nrows()
    }

    pub fn abscissa(&self) -> f64 {
        spectral_abscissa(&self.ae)
    }
}

fn dim_err(what: &str) -> Error {
    Error::Dimension(what.into())
}

/// `A_e = [[A, B K], [G2cal C, G1cal + G2cal D K]]`, `B_e = [[B_d E], [G2cal F]]`,
/// `C_e = [C, D K]`, `D_e = F`.
pub fn assemble(plant: &PlantModel, ctrl: &ControllerRealization, exo: &TruncatedExosystem) -> Result<ClosedLoopModel> {
    let (n, m, p) = (plant.states(), plant.inputs(), plant.outputs());
    let nc = ctrl.dim();
    if ctrl.cal_g1.ncols() != nc || ctrl.cal_g2.nrows() != nc || ctrl.cal_k.ncols() != nc {
        return Err(dim_err("controller blocks G1cal, G2cal, K disagree on the controller dimension"));
    }
    if ctrl.cal_g2.ncols() != p {
        return Err(dim_err("G2cal columns must equal the output dimension"));
    }
    if ctrl.cal_k.nrows() != m {
        return Err(dim_err("K rows must equal the input dimension"));
    }
    if exo.e_cols.nrows() != plant.disturbances() {
        return Err(dim_err("E rows must equal the disturbance dimension"));
    }
    if exo.f_cols.nrows() != p {
        return Err(dim_err("F rows must equal the output dimension"));
    }
    let bk = &plant.b * &ctrl.cal_k;
    let g2c = &ctrl.cal_g2 * &plant.c;
    let g1e = &ctrl.cal_g1 + &ctrl.cal_g2 * &plant.d * &ctrl.cal_k;
    let ae = block(&[&[&plant.a, &bk], &[&g2c, &g1e]]);
    let be = block(&[&[&(&plant.bd * &exo.e_cols)], &[&(&ctrl.cal_g2 * &exo.f_cols)]]);
    let ce = block(&[&[&plant.c, &(&plant.d * &ctrl.cal_k)]]);
    let u_map = block(&[&[&CMat::zeros(m, n), &ctrl.cal_k]]);
    let cl = ClosedLoopModel {
        ae,
        be,
        ce,
        de: exo.f_cols.clone(),
        u_map,
        plant_dim: n,
        z0_dim: ctrl.z0_dim(),
        copy_dim: nc - ctrl.z0_dim(),
    };
    if matches!(ctrl.variant, Variant::NewStructure | Variant::ReducedIm | Variant::NonRobust) && is_design_plant(plant, ctrl) {
        let expanded = expanded_first_structure(plant, ctrl);
        let gap = (&expanded - &cl.ae).norm() / cl.ae.norm().max(f64::MIN_POSITIVE);
        if gap > 1e-12 {
            return Err(Error::SelfCheck { check: "expanded closed-loop block form".into(), residual: gap, tol: 1e-12 });
        }
    }
    Ok(cl)
}

/// `[[A, B K1, -B K2], [G2 C, G1 + G2 D K1, G2 C], [L C, L D K1, A + B K2 + L C]]`
/// The plant copy inside a first-structure controller equals `A + B K2 + L (C + D K2)`
/// only for the plant it was designed on; perturbed plants skip the expanded-form check.
fn is_design_plant(plant: &PlantModel, ctrl: &ControllerRealization) -> bool {
    let (n, z) = (plant.states(), ctrl.z0_dim());
    if ctrl.dim() != z + n || ctrl.k2.shape() != (plant.inputs(), n) || ctrl.l.shape() != (n, plant.outputs()) {
        return false;
    }
    let design = &plant.a + &plant.b * &ctrl.k2 + &ctrl.l * (&plant.c + &plant.d * &ctrl.k2);
    let copy = ctrl.cal_g1.view((z, z), (n, n));
    (&design - copy).norm() <= 1e-12 * design.norm().max(1.0)
}

pub fn expanded_first_structure(plant: &PlantModel, ctrl: &ControllerRealization) -> CMat {
    let (a, b, c, d) = (&plant.a, &plant.b, &plant.c, &plant.d);
    let (g1, g2, k1, k2, l) = (&ctrl.g1, &ctrl.g2, &ctrl.k1, &ctrl.k2, &ctrl.l);
    block(&[
        &[a, &(b * k1), &(-(b * k2))],
        &[&(g2 * c), &(g1 + g2 * d * k1), &(g2 * c)],
        &[&(l * c), &(l * d * k1), &(a + b * k2 + l * c)],
    ])
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TriangularizationReport {
    /// Norms of the blocks that vanish in the triangular form, relative to `||A_e||`.
    pub zero_blocks: Vec<(String, f64)>,
    pub max_zero_block: f64,
    /// `||Q_e Q_e - I||`
    pub involution_residual: f64,
    /// Spectral abscissas of the three diagonal blocks.
    pub diagonal_abscissas: Vec<(String, f64)>,
}

/// Applies `Q_e A_e Q_e^{-1}` with the structure's involution `Q_e` and measures
/// the below-diagonal blocks.
pub fn similarity_triangularization(cl: &ClosedLoopModel, ctrl: &ControllerRealization) -> Result<TriangularizationReport> {
    let n = cl.plant_dim;
    let z = cl.z0_dim;
    if cl.copy_dim != n {
        return Err(dim_err("triangularisation needs a full plant copy in the controller"));
    }
    let i_n = CMat::identity(n, n);
    let i_z = CMat::identity(z, z);
    let (zn, nz, nn) = (CMat::zeros(z, n), CMat::zeros(n, z), CMat::zeros(n, n));
    let (q, names) = match ctrl.variant {
        Variant::Observer => (
            block(&[&[&(-&i_n), &nz, &nn], &[&ctrl.h, &i_z, &zn], &[&(-&i_n), &nz, &i_n]]),
            ["A + B K21", "G1 + B1 K1", "A + L C"],
        ),
        _ => (
            block(&[&[&i_n, &nz, &nn], &[&zn, &i_z, &zn], &[&(-&i_n), &ctrl.h, &(-&i_n)]]),
            ["A + B K2", "G1 + G2 C1", "A + L1 C"],
        ),
    };
    let dim = cl.dim();
    let involution_residual = (&q * &q - CMat::identity(dim, dim)).norm();
    let t = &q * &cl.ae * &q;
    let scale = cl.ae.norm().max(f64::MIN_POSITIVE);
    let offs = [0, n, n + z];
    let sizes = [n, z, n];
    let sub = |r: usize, c: usize| t.view((offs[r], offs[c]), (sizes[r], sizes[c])).into_owned();
    let zero_blocks: Vec<(String, f64)> = [(1, 0), (2, 0), (2, 1)]
        .iter()
        .map(|&(r, c)| (format!("block ({r},{c})"), sub(r, c).norm() / scale))
        .collect();
    let max_zero_block = zero_blocks.iter().map(|z| z.1).fold(0.0, f64::max);
    let diagonal_abscissas = (0..3).map(|i| (names[i].to_string(), spectral_abscissa(&sub(i, i)))).collect();
    Ok(TriangularizationReport { zero_blocks, max_zero_block, involution_residual, diagonal_abscissas })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Crank-Nicolson with exact exosystem values at the step endpoints.
    Trapezoid,
    /// Exact propagation for exponential forcing: `e^{A dt}` plus per-mode input integrals.
    Exponential,
}

#[derive(Clone, Debug)]
pub struct SimOptions {
    pub t_end: f64,
    pub dt: f64,
    pub scheme: Scheme,
    /// State indices recorded every `probe_stride` steps (real parts).
    pub probe: Vec<usize>,
    pub probe_stride: usize,
}

impl SimOptions {
    pub fn new(t_end: f64, dt: f64) -> Self {
        SimOptions { t_end, dt, scheme: Scheme::Trapezoid, probe: vec![], probe_stride: 1 }
    }
}

/// Time samples of a closed-loop run; signals are real parts.
#[derive(Clone, Debug, Default)]
pub struct Trajectory {
    pub dt: f64,
    pub t: Vec<f64>,
    pub y: Vec<Vec<f64>>,
    pub y_ref: Vec<Vec<f64>>,
    pub e: Vec<Vec<f64>>,
    pub e_norm: Vec<f64>,
    pub u: Vec<Vec<f64>>,
    pub probe_t: Vec<f64>,
    pub probe: Vec<Vec<f64>>,
    pub final_state: Vec<C64>,
    pub max_imag_residue: f64,
}

fn re(v: &CVec) -> Vec<f64> {
    v.iter().map(|z| z.re).collect()
}

/// Simulates from `x_e(0) = xe0` with the exosystem started at `exo.v0`.
pub fn simulate(cl: &ClosedLoopModel, exo: &TruncatedExosystem, xe0: &CVec, opts: &SimOptions) -> Result<Trajectory> {
    if xe0.len() != cl.dim() {
        return Err(dim_err("initial state does not match the closed loop"));
    }
    if cl.be.ncols() != exo.modes() {
        return Err(dim_err("B_e columns must match the exosystem modes"));
    }
    let steps = step_count(opts.t_end, opts.dt)?;
    enum Stepper {
        Trap(CMat, CMat),
        Exp(ExponentialInput),
    }
    let stepper = match opts.scheme {
        Scheme::Trapezoid => {
            let tr = Trapezoid::new(&cl.ae, opts.dt)?;
            let w = tr.input_map(&cl.be);
            Stepper::Trap(tr.propagator().clone(), w)
        }
        Scheme::Exponential => Stepper::Exp(ExponentialInput::new(&cl.ae, &cl.be, &exo.omega, opts.dt)?),
    };
    let mut traj = Trajectory { dt: opts.dt, ..Default::default() };
    let stride = opts.probe_stride.max(1);
    let mut x = xe0.clone();
    let mut xn = CVec::zeros(cl.dim());
    let mut v = exo.state(0.0);
    let mut worst_imag: f64 = 0.0;
    let mut scale: f64 = 1.0;
    let mut record = |n: usize, x: &CVec, v: &CVec, traj: &mut Trajectory| {
        let t = n as f64 * opts.dt;
        let y = &cl.ce * x;
        let yref = -(&cl.de * v);
        let e = &y - &yref;
        let u = &cl.u_map * x;
        for z in y.iter().chain(yref.iter()).chain(u.iter()) {
            worst_imag = worst_imag.max(z.im.abs());
            scale = scale.max(z.re.abs());
        }
        traj.t.push(t);
        traj.e_norm.push(e.norm());
        traj.y.push(re(&y));
        traj.y_ref.push(re(&yref));
        traj.e.push(re(&e));
        traj.u.push(re(&u));
        if !opts.probe.is_empty() && n % stride == 0 {
            traj.probe_t.push(t);
            traj.probe.push(opts.probe.iter().map(|&i| x[i].re).collect());
        }
    };
    record(0, &x, &v, &mut traj);
    for n in 0..steps {
        let v1 = exo.state((n + 1) as f64 * opts.dt);
        match &stepper {
            Stepper::Trap(m, w) => {
                let vs = &v + &v1;
                xn.gemv(c64(1.0, 0.0), m, &x, c64(0.0, 0.0));
                xn.gemv(c64(1.0, 0.0), w, &vs, c64(1.0, 0.0));
            }
            Stepper::Exp(ex) => xn = ex.step(&x, &v),
        }
        std::mem::swap(&mut x, &mut xn);
        v = v1;
        if !x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::InvalidArgument(format!("state overflow at step {}", n + 1)));
        }
        record(n + 1, &x, &v, &mut traj);
    }
    traj.max_imag_residue = worst_imag / scale;
    traj.final_state = x.iter().copied().collect();
    if traj.max_imag_residue > 1e-8 {
        return Err(Error::ImaginaryResidue(traj.max_imag_residue));
    }
    Ok(traj)
}

/// Window integrals `I(t) = \int_t^{t+1} ||e||` sampled at a fixed stride.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct DecaySamples {
    pub t: Vec<f64>,
    pub i: Vec<f64>,
}

impl DecaySamples {
    /// Value at the sample nearest to `t`.
    pub fn at(&self, t: f64) -> f64 {
        let j = self
            .t
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))
            .map(|p| p.0)
            .unwrap_or(0);
        self.i[j]
    }
}

pub const METRIC_STRIDE: f64 = 0.1;
pub const METRIC_WINDOW: f64 = 1.0;

pub fn error_metrics(traj: &Trajectory) -> Result<DecaySamples> {
    let horizon = traj.t.last().copied().unwrap_or(0.0);
    if horizon < 2.0 - 1e-9 {
        return Err(Error::InvalidArgument(format!("horizon {horizon} is shorter than 2 s")));
    }
    let all = sliding_window_integral(&traj.e_norm, traj.dt, METRIC_WINDOW)?;
    let stride = ((METRIC_STRIDE / traj.dt).round() as usize).max(1);
    let mut out = DecaySamples::default();
    for j in (0..all.len()).step_by(stride) {
        out.t.push(traj.t[j]);
        out.i.push(all[j]);
    }
    Ok(out)
}
