//! Plant realisations, the finite-difference heat plant, stabilising gains,
//! transfer functions and the perturbation class.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exosystem::TruncatedExosystem;
use crate::numerics::{c64, resolvent_apply, spectral_abscissa, CMat, C64};

/// Grid metadata of the heat plant. Node `(i, j)` sits at `(i h, j h)` and has index `j n + i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatGeometry {
    pub n: usize,
    pub h: f64,
    /// Control boundary, bottom edge.
    pub gamma1: Vec<usize>,
    /// Disturbance boundary, left edge below the midpoint.
    pub gamma2: Vec<usize>,
    /// Observation boundary, right edge.
    pub gamma3: Vec<usize>,
    /// Trapezoidal cell weights over the square.
    pub mass: Vec<f64>,
}

impl HeatGeometry {
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    pub fn coords(&self, idx: usize) -> (f64, f64) {
        ((idx % self.n) as f64 * self.h, (idx / self.n) as f64 * self.h)
    }
}

#[derive(Clone, Debug)]
pub struct PlantModel {
    pub a: CMat,
    pub b: CMat,
    pub bd: CMat,
    pub c: CMat,
    pub d: CMat,
    pub geometry: Option<HeatGeometry>,
}

impl PlantModel {
    pub fn new(a: CMat, b: CMat, bd: CMat, c: CMat, d: CMat) -> Result<Self> {
        let p = PlantModel { a, b, bd, c, d, geometry: None };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.a.nrows();
        let checks = [
            (self.a.ncols() == n, "A must be square"),
            (self.b.nrows() == n, "B rows must match A"),
            (self.bd.nrows() == n, "Bd rows must match A"),
            (self.c.ncols() == n, "C columns must match A"),
            (self.d.nrows() == self.c.nrows(), "D rows must match C"),
            (self.d.ncols() == self.b.ncols(), "D columns must match B"),
        ];
        for (ok, what) in checks {
            if !ok {
                return Err(Error::Dimension(what.into()));
            }
        }
        Ok(())
    }

    pub fn states(&self) -> usize {
        self.a.nrows()
    }
    pub fn inputs(&self) -> usize {
        self.b.ncols()
    }
    pub fn outputs(&self) -> usize {
        self.c.nrows()
    }
    pub fn disturbances(&self) -> usize {
        self.bd.ncols()
    }
}

/// 5-point Laplacian on the unit square with ghost-node Neumann conditions.
///
/// Boundary data enter the boundary rows as `(2/h) * datum`. The observation is the
/// trapezoidal integral over the right edge.
pub fn build_heat2d(n: usize) -> Result<PlantModel> {
    if n < 4 {
        return Err(Error::InvalidArgument(format!("grid needs at least 4 points per side, got {n}")));
    }
    let h = 1.0 / (n as f64 - 1.0);
    let dim = n * n;
    let idx = |i: usize, j: usize| j * n + i;
    let inv_h2 = 1.0 / (h * h);
    let mut a = CMat::zeros(dim, dim);
    for j in 0..n {
        for i in 0..n {
            let r = idx(i, j);
            a[(r, r)] = c64(-4.0 * inv_h2, 0.0);
            // reflected neighbour across a boundary carries double weight
            let nbrs = [
                if i == 0 { (1, j) } else { (i - 1, j) },
                if i == n - 1 { (n - 2, j) } else { (i + 1, j) },
                if j == 0 { (i, 1) } else { (i, j - 1) },
                if j == n - 1 { (i, n - 2) } else { (i, j + 1) },
            ];
            for (ii, jj) in nbrs {
                a[(r, idx(ii, jj))] += c64(inv_h2, 0.0);
            }
        }
    }
    let mut b = CMat::zeros(dim, 1);
    let gamma1: Vec<usize> = (0..n).map(|i| idx(i, 0)).collect();
    for &r in &gamma1 {
        b[(r, 0)] = c64(2.0 / h, 0.0);
    }
    let mut bd = CMat::zeros(dim, 1);
    let mut gamma2 = Vec::new();
    for j in 0..n {
        let xi2 = j as f64 * h;
        if xi2 <= 0.5 + 1e-12 {
            let w = if (xi2 - 0.5).abs() <= 1e-12 { 0.5 } else { 1.0 };
            bd[(idx(0, j), 0)] = c64(2.0 * w / h, 0.0);
            gamma2.push(idx(0, j));
        }
    }
    let mut c = CMat::zeros(1, dim);
    let gamma3: Vec<usize> = (0..n).map(|j| idx(n - 1, j)).collect();
    for (j, &r) in gamma3.iter().enumerate() {
        let w = if j == 0 || j == n - 1 { h / 2.0 } else { h };
        c[(0, r)] = c64(w, 0.0);
    }
    let edge = |i: usize| if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
    let mass = (0..dim).map(|r| edge(r % n) * edge(r / n) * h * h).collect();
    Ok(PlantModel {
        a,
        b,
        bd,
        c,
        d: CMat::zeros(1, 1),
        geometry: Some(HeatGeometry { n, h, gamma1, gamma2, gamma3, mass }),
    })
}

/// Relative margin (against `||A||_F`) an abscissa must clear to count as Hurwitz.
pub const HURWITZ_MARGIN: f64 = 1e-10;

/// Stabilising state feedback `K2` and output injection `L1`.
#[derive(Clone, Debug)]
pub struct StabilizationGains {
    pub k2: CMat,
    pub l1: CMat,
}

impl StabilizationGains {
    /// Checks dimensions and that `A + B K2` and `A + L1 C` are Hurwitz.
    pub fn new(plant: &PlantModel, k2: CMat, l1: CMat) -> Result<Self> {
        let g = StabilizationGains { k2, l1 };
        if g.k2.shape() != (plant.inputs(), plant.states()) || g.l1.shape() != (plant.states(), plant.outputs()) {
            return Err(Error::Dimension("stabilising gains do not match the plant".into()));
        }
        let (ak, al) = g.abscissas(plant);
        // roundoff around a marginal eigenvalue must not count as stable
        let margin = HURWITZ_MARGIN * plant.a.norm().max(1.0);
        if !(ak < -margin) {
            return Err(Error::InvalidArgument(format!("A + B K2 is not Hurwitz (abscissa {ak:.3e})")));
        }
        if !(al < -margin) {
            return Err(Error::InvalidArgument(format!("A + L1 C is not Hurwitz (abscissa {al:.3e})")));
        }
        Ok(g)
    }

    /// Spectral abscissas of `A + B K2` and `A + L1 C`.
    pub fn abscissas(&self, plant: &PlantModel) -> (f64, f64) {
        (spectral_abscissa(&a_bk(plant, &self.k2)), spectral_abscissa(&a_lc(plant, &self.l1)))
    }
}

/// `A + B K2`
pub fn a_bk(plant: &PlantModel, k2: &CMat) -> CMat {
    &plant.a + &plant.b * k2
}

/// `A + L1 C`
pub fn a_lc(plant: &PlantModel, l1: &CMat) -> CMat {
    &plant.a + l1 * &plant.c
}

/// `K2 x = -pi^2 \int x`, `L1 = -pi^2 * 1` for the heat plant.
pub fn heat_stabilizers(plant: &PlantModel) -> Result<StabilizationGains> {
    let geo = plant
        .geometry
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("heat stabilisers need a heat-plant geometry".into()))?;
    let pi2 = PI * PI;
    let k2 = CMat::from_fn(1, plant.states(), |_, c| c64(-pi2 * geo.mass[c], 0.0));
    let l1 = CMat::from_element(plant.states(), 1, c64(-pi2, 0.0));
    StabilizationGains::new(plant, k2, l1)
}

/// `P(lambda) = C (lambda - A)^{-1} B + D`
pub fn transfer(plant: &PlantModel, lambda: C64) -> Result<CMat> {
    Ok(&plant.c * resolvent_apply(&plant.a, lambda, &plant.b)? + &plant.d)
}

/// `P_d(lambda) = C (lambda - A)^{-1} B_d`
pub fn transfer_disturbance(plant: &PlantModel, lambda: C64) -> Result<CMat> {
    Ok(&plant.c * resolvent_apply(&plant.a, lambda, &plant.bd)?)
}

/// `P_L(lambda) = C (lambda - A - L1 C)^{-1} (B + L1 D) + D`
pub fn transfer_pl(plant: &PlantModel, gains: &StabilizationGains, lambda: C64) -> Result<CMat> {
    let bl = &plant.b + &gains.l1 * &plant.d;
    Ok(&plant.c * resolvent_apply(&a_lc(plant, &gains.l1), lambda, &bl)? + &plant.d)
}

/// `P_K(lambda) = (C + D K2) (lambda - A - B K2)^{-1} B + D`
pub fn transfer_pk(plant: &PlantModel, gains: &StabilizationGains, lambda: C64) -> Result<CMat> {
    let ck = &plant.c + &plant.d * &gains.k2;
    Ok(ck * resolvent_apply(&a_bk(plant, &gains.k2), lambda, &plant.b)? + &plant.d)
}

/// Steady-state input that zeroes the error at one exosystem mode,
/// `u = -P_L^+ [C R_L B_d E phi + (I + C R_L L1) F phi]` with `R_L = (i w - A - L1 C)^{-1}`.
///
/// Equals `-P^{-1}(P_d E phi + F phi)` wherever `P(i w)` exists and is invertible,
/// and stays defined when `i w` is an eigenvalue of `A`. Also returns the
/// stabilised target vector and the least-squares residual of the solve.
pub fn steady_state_input(
    plant: &PlantModel,
    l1: &CMat,
    omega: f64,
    e_col: &CMat,
    f_col: &CMat,
) -> Result<(CMat, CMat, f64)> {
    let al = a_lc(plant, l1);
    let lam = c64(0.0, omega);
    let forcing = &plant.bd * e_col + l1 * f_col;
    let target = &plant.c * resolvent_apply(&al, lam, &forcing)? + f_col;
    let bl = &plant.b + l1 * &plant.d;
    let pl = &plant.c * resolvent_apply(&al, lam, &bl)? + &plant.d;
    let u = -crate::numerics::pseudoinverse(&pl, crate::numerics::PINV_TOL) * &target;
    let resid = (&pl * &u + &target).norm() / target.norm().max(f64::MIN_POSITIVE);
    Ok((u, target, resid))
}

/// Multiplicative factors and additive deltas per operator. Gains are never re-derived.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct PerturbationSpec {
    pub name: String,
    pub a_scale: f64,
    pub b_scale: f64,
    pub bd_scale: f64,
    pub c_scale: f64,
    pub d_scale: f64,
    pub e_scale: f64,
    pub f_scale: f64,
    #[serde(skip)]
    pub delta_a: Option<CMat>,
    #[serde(skip)]
    pub delta_b: Option<CMat>,
    #[serde(skip)]
    pub delta_c: Option<CMat>,
    #[serde(skip)]
    pub delta_d: Option<CMat>,
}

impl Default for PerturbationSpec {
    fn default() -> Self {
        PerturbationSpec {
            name: "nominal".into(),
            a_scale: 1.0,
            b_scale: 1.0,
            bd_scale: 1.0,
            c_scale: 1.0,
            d_scale: 1.0,
            e_scale: 1.0,
            f_scale: 1.0,
            delta_a: None,
            delta_b: None,
            delta_c: None,
            delta_d: None,
        }
    }
}

impl PerturbationSpec {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn diffusion(factor: f64) -> Self {
        PerturbationSpec { name: format!("diffusion x{factor}"), a_scale: factor, ..Self::default() }
    }

    pub fn input_gain(factor: f64) -> Self {
        PerturbationSpec { name: format!("B x{factor}"), b_scale: factor, ..Self::default() }
    }
}

fn scaled(m: &CMat, s: f64, delta: &Option<CMat>, name: &str) -> Result<CMat> {
    let mut out = if s == 1.0 { m.clone() } else { m * c64(s, 0.0) };
    if let Some(dm) = delta {
        if dm.shape() != m.shape() {
            return Err(Error::Dimension(format!("perturbation of {name} changes its shape")));
        }
        out += dm;
    }
    Ok(out)
}

pub fn perturb(plant: &PlantModel, spec: &PerturbationSpec) -> Result<PlantModel> {
    Ok(PlantModel {
        a: scaled(&plant.a, spec.a_scale, &spec.delta_a, "A")?,
        b: scaled(&plant.b, spec.b_scale, &spec.delta_b, "B")?,
        bd: scaled(&plant.bd, spec.bd_scale, &None, "Bd")?,
        c: scaled(&plant.c, spec.c_scale, &spec.delta_c, "C")?,
        d: scaled(&plant.d, spec.d_scale, &spec.delta_d, "D")?,
        geometry: plant.geometry.clone(),
    })
}

/// Applies the `E` and `F` factors of a perturbation to an exosystem.
pub fn perturb_exosystem(exo: &TruncatedExosystem, spec: &PerturbationSpec) -> TruncatedExosystem {
    let mut out = exo.clone();
    if spec.e_scale != 1.0 {
        out.e_cols *= c64(spec.e_scale, 0.0);
    }
    if spec.f_scale != 1.0 {
        out.f_cols *= c64(spec.f_scale, 0.0);
    }
    out
}
