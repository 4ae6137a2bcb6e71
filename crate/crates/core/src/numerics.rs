//! Dense complex linear algebra, time stepping and quadrature shared by the other modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Default relative rank cutoff for pseudoinverses.
pub const PINV_TOL: f64 = 1e-12;

/// Relative pivot threshold below which a shifted matrix is treated as singular.
const PIVOT_TOL: f64 = 1e-13;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn ci(im: f64) -> C64 {
    C64::new(0.0, im)
}

pub fn to_complex(m: &DMatrix<f64>) -> CMat {
    m.map(|x| C64::new(x, 0.0))
}

pub fn is_finite(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Singular value decomposition with singular values sorted in descending order.
#[derive(Clone, Debug)]
pub struct SvdResult {
    pub singular_values: Vec<f64>,
    pub u: CMat,
    pub v_t: CMat,
}

impl SvdResult {
    pub fn reconstruct(&self) -> CMat {
        let k = self.singular_values.len();
        let mut us = self.u.clone();
        for j in 0..k {
            let s = self.singular_values[j];
            us.column_mut(j).scale_mut(s);
        }
        us * &self.v_t
    }

    /// Right singular vector belonging to the j-th singular value.
    pub fn right_vector(&self, j: usize) -> CVec {
        self.v_t.row(j).adjoint()
    }
}

/// Thin SVD from LAPACK `zgesvd`; vectors only when `vectors`.
fn zgesvd(m: &CMat, vectors: bool) -> SvdResult {
    let (r, c) = m.shape();
    let k = r.min(c);
    let mut a = m.clone();
    let mut s = vec![0.0; k];
    let job = if vectors { b'S' } else { b'N' };
    let (ldu, ucols) = if vectors { (r, k) } else { (1, 1) };
    let (ldvt, vtcols) = if vectors { (k, c) } else { (1, 1) };
    let mut u = CMat::zeros(ldu, ucols);
    let mut vt = CMat::zeros(ldvt, vtcols);
    let mut rwork = vec![0.0; 5 * k];
    let mut info = 0;
    let mut query = [C64::new(0.0, 0.0)];
    unsafe {
        lapack::zgesvd(job, job, r as i32, c as i32, a.as_mut_slice(), r as i32, &mut s, u.as_mut_slice(), ldu as i32, vt.as_mut_slice(), ldvt as i32, &mut query, -1, &mut rwork, &mut info);
    }
    let lwork = (query[0].re as usize).max(2 * k + r.max(c));
    let mut work = vec![C64::new(0.0, 0.0); lwork];
    unsafe {
        lapack::zgesvd(job, job, r as i32, c as i32, a.as_mut_slice(), r as i32, &mut s, u.as_mut_slice(), ldu as i32, vt.as_mut_slice(), ldvt as i32, &mut work, lwork as i32, &mut rwork, &mut info);
    }
    if info != 0 {
        // no convergence or non-finite input: poison the result rather than guess
        s.iter_mut().for_each(|x| *x = f64::NAN);
    }
    SvdResult {
        singular_values: s,
        u: if vectors { u } else { CMat::zeros(r, 0) },
        v_t: if vectors { vt } else { CMat::zeros(0, c) },
    }
}

pub fn svd(m: &CMat) -> SvdResult {
    if m.nrows() == 0 || m.ncols() == 0 {
        return SvdResult {
            singular_values: vec![],
            u: CMat::zeros(m.nrows(), 0),
            v_t: CMat::zeros(0, m.ncols()),
        };
    }
    zgesvd(m, true)
}

/// Singular values in descending order.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return vec![];
    }
    zgesvd(m, false).singular_values
}

/// Operator 2-norm.
pub fn norm2(m: &CMat) -> f64 {
    if m.ncols() == 1 || m.nrows() == 1 {
        return m.norm();
    }
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn sigma_min(m: &CMat) -> f64 {
    singular_values(m).last().copied().unwrap_or(0.0)
}

/// Numerical rank with a cutoff relative to the largest singular value.
pub fn rank(m: &CMat, rel_tol: f64) -> usize {
    let s = singular_values(m);
    match s.first() {
        Some(&smax) if smax > 0.0 => s.iter().filter(|&&x| x > rel_tol * smax).count(),
        _ => 0,
    }
}

/// Moore-Penrose pseudoinverse. Singular values below `tol * sigma_max` are dropped.
pub fn pseudoinverse(m: &CMat, tol: f64) -> CMat {
    let (r, c) = m.shape();
    let dec = svd(m);
    let smax = dec.singular_values.first().copied().unwrap_or(0.0);
    let mut out = CMat::zeros(c, r);
    if smax == 0.0 {
        return out;
    }
    for (j, &s) in dec.singular_values.iter().enumerate() {
        if s <= tol * smax {
            continue;
        }
        let v = dec.v_t.row(j).adjoint();
        let u = dec.u.column(j);
        out += (v * u.adjoint()).scale(1.0 / s);
    }
    out
}

/// `lambda*I - a`
pub fn shifted(a: &CMat, lambda: C64) -> CMat {
    let mut m = -a.clone();
    for i in 0..m.nrows() {
        m[(i, i)] += lambda;
    }
    m
}

/// LU factorisation (LAPACK `zgetrf`) with a relative pivot test.
pub struct Factor {
    lu: CMat,
    ipiv: Vec<i32>,
}

impl Factor {
    pub fn new(m: CMat) -> Option<Self> {
        if m.nrows() != m.ncols() || !is_finite(&m) {
            return None;
        }
        let n = m.nrows();
        if n == 0 {
            return Some(Factor { lu: m, ipiv: vec![] });
        }
        let mut lu = m;
        let mut ipiv = vec![0i32; n];
        let mut info = 0;
        unsafe {
            lapack::zgetrf(n as i32, n as i32, lu.as_mut_slice(), n as i32, &mut ipiv, &mut info);
        }
        if info < 0 {
            return None;
        }
        let d: Vec<f64> = lu.diagonal().iter().map(|z| z.norm()).collect();
        let dmax = d.iter().cloned().fold(0.0, f64::max);
        let dmin = d.iter().cloned().fold(f64::INFINITY, f64::min);
        if dmax == 0.0 || !(dmin > PIVOT_TOL * dmax) {
            return None;
        }
        Some(Factor { lu, ipiv })
    }

    pub fn solve(&self, rhs: &CMat) -> CMat {
        let n = self.lu.nrows();
        let mut x = rhs.clone();
        if n == 0 || rhs.ncols() == 0 {
            return x;
        }
        assert_eq!(rhs.nrows(), n, "right-hand side does not match the factor");
        let mut info = 0;
        unsafe {
            lapack::zgetrs(b'N', n as i32, rhs.ncols() as i32, self.lu.as_slice(), n as i32, &self.ipiv, x.as_mut_slice(), n as i32, &mut info);
        }
        assert_eq!(info, 0, "zgetrs failed");
        x
    }

    pub fn solve_vec(&self, rhs: &CVec) -> CVec {
        let x = self.solve(&CMat::from_column_slice(rhs.len(), 1, rhs.as_slice()));
        CVec::from_column_slice(x.as_slice())
    }

    pub fn inverse(&self) -> CMat {
        let n = self.lu.nrows();
        self.solve(&CMat::identity(n, n))
    }
}

/// Solves `(lambda*I - a) X = rhs`; a singular shift is reported as a pole.
pub fn resolvent_apply(a: &CMat, lambda: C64, rhs: &CMat) -> Result<CMat> {
    if a.nrows() != a.ncols() || a.nrows() != rhs.nrows() {
        return Err(Error::Dimension(format!(
            "resolvent of {}x{} applied to {}x{}",
            a.nrows(),
            a.ncols(),
            rhs.nrows(),
            rhs.ncols()
        )));
    }
    let f = Factor::new(shifted(a, lambda)).ok_or(Error::TransferPole { re: lambda.re, im: lambda.im })?;
    Ok(f.solve(rhs))
}

/// `||(lambda*I - a)^{-1}||_2`, computed as `1/sigma_min`. Returns infinity on the spectrum.
pub fn resolvent_norm(a: &CMat, lambda: C64) -> f64 {
    let s = singular_values(&shifted(a, lambda));
    let smax = s.first().copied().unwrap_or(0.0);
    let smin = s.last().copied().unwrap_or(0.0);
    if smin <= 1e-14 * smax || smin == 0.0 {
        f64::INFINITY
    } else {
        1.0 / smin
    }
}

/// Complex Schur form `A = Q T Q^*` from LAPACK `zgees`; `Q` only when `vectors`.
pub fn schur(a: &CMat, vectors: bool) -> Result<(Option<CMat>, CMat)> {
    assert_eq!(a.nrows(), a.ncols(), "Schur form of a non-square matrix");
    let n = a.nrows();
    if n == 0 {
        return Ok((vectors.then(|| CMat::zeros(0, 0)), CMat::zeros(0, 0)));
    }
    if !is_finite(a) {
        return Err(Error::InvalidArgument("Schur form of a non-finite matrix".into()));
    }
    let ni = n as i32;
    let mut t = a.clone();
    let mut w = vec![C64::new(0.0, 0.0); n];
    let ldvs = if vectors { n } else { 1 };
    let mut vs = vec![C64::new(0.0, 0.0); ldvs * if vectors { n } else { 1 }];
    let mut rwork = vec![0.0; n];
    let mut bwork = vec![0i32; 1];
    let (mut sdim, mut info) = (0i32, 0i32);
    let jobvs = if vectors { b'V' } else { b'N' };
    let mut query = [C64::new(0.0, 0.0)];
    unsafe {
        lapack::zgees(jobvs, b'N', None, ni, t.as_mut_slice(), ni, &mut sdim, &mut w, &mut vs, ldvs as i32, &mut query, -1, &mut rwork, &mut bwork, &mut info);
    }
    let lwork = (query[0].re as usize).max(2 * n);
    let mut work = vec![C64::new(0.0, 0.0); lwork];
    unsafe {
        lapack::zgees(jobvs, b'N', None, ni, t.as_mut_slice(), ni, &mut sdim, &mut w, &mut vs, ldvs as i32, &mut work, lwork as i32, &mut rwork, &mut bwork, &mut info);
    }
    if info != 0 {
        return Err(Error::InvalidArgument(format!("Schur factorisation failed (info {info})")));
    }
    let q = vectors.then(|| CMat::from_vec(n, n, vs));
    Ok((q, t))
}

/// Full spectrum from the complex Schur form.
pub fn eigenvalues(a: &CMat) -> Vec<C64> {
    match schur(a, false) {
        Ok((_, t)) => t.diagonal().iter().copied().collect(),
        Err(_) => vec![C64::new(f64::NAN, f64::NAN); a.nrows()],
    }
}

pub fn spectral_abscissa(a: &CMat) -> f64 {
    eigenvalues(a).iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
}

/// Eigenpairs with eigenvectors from two steps of inverse iteration.
pub fn eigenpairs(a: &CMat) -> Vec<(C64, CVec)> {
    let n = a.nrows();
    let scale = norm2(a).max(1.0);
    eigenvalues(a)
        .into_iter()
        .map(|lam| {
            let mut shift = lam + c64(1e-10 * scale, 1e-10 * scale);
            let mut f = Factor::new(shifted(a, shift));
            while f.is_none() {
                shift += c64(1e-9 * scale, 0.0);
                f = Factor::new(shifted(a, shift));
            }
            let f = f.unwrap();
            let mut v = CVec::from_fn(n, |i, _| c64(1.0 + 0.1 * i as f64, 0.3));
            for _ in 0..3 {
                v = f.solve_vec(&v);
                let nv = v.norm();
                v /= c64(nv, 0.0);
            }
            (lam, v)
        })
        .collect()
}

/// Trapezoidal (Crank-Nicolson) one-step scheme for `x' = A x + f(t)`.
///
/// `x_{n+1} = M x_n + (I - dt/2 A)^{-1} dt/2 (f_n + f_{n+1})` with
/// `M = (I - dt/2 A)^{-1} (I + dt/2 A)`; the factorisation is computed once.
pub struct Trapezoid {
    pub dt: f64,
    m: CMat,
    factor: Factor,
}

impl Trapezoid {
    pub fn new(a: &CMat, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        let n = a.nrows();
        let h = c64(dt / 2.0, 0.0);
        let lhs = CMat::identity(n, n) - a * h;
        let rhs = CMat::identity(n, n) + a * h;
        let factor = Factor::new(lhs).ok_or(Error::StepResonance)?;
        let m = factor.solve(&rhs);
        Ok(Trapezoid { dt, m, factor })
    }

    pub fn propagator(&self) -> &CMat {
        &self.m
    }

    /// `(I - dt/2 A)^{-1} dt/2 B`, for forcing of the form `B w(t)`.
    pub fn input_map(&self, b: &CMat) -> CMat {
        self.factor.solve(b) * c64(self.dt / 2.0, 0.0)
    }

    pub fn step(&self, x: &CVec, f0: &CVec, f1: &CVec) -> CVec {
        let g = (f0 + f1) * c64(self.dt / 2.0, 0.0);
        &self.m * x + self.factor.solve_vec(&g)
    }
}

/// Exact one-step map for `x' = A x + B v(t)` with `v_k(t) = exp(i w_k t) v_k(0)`.
///
/// `x_{n+1} = e^{A dt} x_n + G v(t_n)` where the k-th column of `G` is
/// `(i w_k - A)^{-1} (e^{i w_k dt} - e^{A dt}) b_k`.
pub struct ExponentialInput {
    pub dt: f64,
    phi: CMat,
    gamma: CMat,
}

impl ExponentialInput {
    pub fn new(a: &CMat, b: &CMat, omegas: &[f64], dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        if b.ncols() != omegas.len() || b.nrows() != a.nrows() {
            return Err(Error::Dimension("input columns must match the frequency list".into()));
        }
        let n = a.nrows();
        let phi = (a * c64(dt, 0.0)).exp();
        let mut gamma = CMat::zeros(n, b.ncols());
        for (k, &w) in omegas.iter().enumerate() {
            let mut rhs = -&phi * b.column(k);
            rhs += b.column(k) * (ci(w * dt)).exp();
            let col = resolvent_apply(a, ci(w), &CMat::from_column_slice(n, 1, rhs.as_slice()))?;
            gamma.set_column(k, &col.column(0));
        }
        Ok(ExponentialInput { dt, phi, gamma })
    }

    pub fn step(&self, x: &CVec, v: &CVec) -> CVec {
        &self.phi * x + &self.gamma * v
    }
}

/// Sampled solution of an initial value problem.
#[derive(Clone, Debug)]
pub struct Samples {
    pub t: Vec<f64>,
    pub x: Vec<CVec>,
}

/// Integrates `x' = A x + f(t)` on `[0, t_end]` with the trapezoidal scheme,
/// keeping every `stride`-th state.
pub fn integrate_trajectory<F>(a: &CMat, forcing: F, x0: &CVec, t_end: f64, dt: f64, stride: usize) -> Result<Samples>
where
    F: Fn(f64) -> CVec,
{
    if a.nrows() != x0.len() {
        return Err(Error::Dimension("initial state does not match A".into()));
    }
    let stepper = Trapezoid::new(a, dt)?;
    let steps = step_count(t_end, dt)?;
    let stride = stride.max(1);
    let mut out = Samples { t: vec![0.0], x: vec![x0.clone()] };
    let mut x = x0.clone();
    let mut f0 = forcing(0.0);
    for n in 0..steps {
        let t1 = (n + 1) as f64 * dt;
        let f1 = forcing(t1);
        x = stepper.step(&x, &f0, &f1);
        f0 = f1;
        if (n + 1) % stride == 0 || n + 1 == steps {
            out.t.push(t1);
            out.x.push(x.clone());
        }
    }
    Ok(out)
}

/// Number of fixed steps covering `[0, t_end]`.
pub fn step_count(t_end: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !(t_end >= 0.0) {
        return Err(Error::InvalidArgument(format!("bad horizon T={t_end}, dt={dt}")));
    }
    Ok((t_end / dt - 1e-9).ceil().max(0.0) as usize)
}

/// Window integrals `t -> \int_t^{t+window} g(s) ds` of samples `g(j dt)` by the
/// composite trapezoidal rule, one value per sample start `j = 0..len-w`.
pub fn sliding_window_integral(samples: &[f64], dt: f64, window: f64) -> Result<Vec<f64>> {
    let w = (window / dt).round();
    if !(dt > 0.0) || w < 1.0 || (w * dt - window).abs() > 1e-9 * window.max(1.0) {
        return Err(Error::InvalidArgument(format!("window {window} is not a multiple of dt {dt}")));
    }
    let w = w as usize;
    if samples.len() < w + 1 {
        return Err(Error::InvalidArgument("horizon shorter than the integration window".into()));
    }
    let mut cs = Vec::with_capacity(samples.len());
    cs.push(0.0);
    for j in 1..samples.len() {
        cs.push(cs[j - 1] + 0.5 * dt * (samples[j - 1] + samples[j]));
    }
    Ok((0..samples.len() - w).map(|j| cs[j + w] - cs[j]).collect())
}

/// Weighted least squares line `y = slope*x + intercept`.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub slope_stderr: f64,
}

pub fn fit_line(x: &[f64], y: &[f64], w: Option<&[f64]>) -> Result<LineFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidArgument("line fit needs at least two paired samples".into()));
    }
    let ones = vec![1.0; x.len()];
    let w = w.unwrap_or(&ones);
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for i in 0..x.len() {
        let dx = x[i] - mx;
        let dy = y[i] - my;
        sxx += w[i] * dx * dx;
        sxy += w[i] * dx * dy;
        syy += w[i] * dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("degenerate abscissae in line fit".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = (0..x.len()).map(|i| w[i] * (y[i] - slope * x[i] - intercept).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let dof = (x.len() as f64 - 2.0).max(1.0);
    let slope_stderr = (sse / dof / sxx).sqrt();
    Ok(LineFit { slope, intercept, r2, slope_stderr })
}

/// Stacks matrices with equal column counts vertically.
pub fn vstack(blocks: &[&CMat]) -> CMat {
    let cols = blocks.first().map(|b| b.ncols()).unwrap_or(0);
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMat::zeros(rows, cols);
    let mut r = 0;
    for b in blocks {
        assert_eq!(b.ncols(), cols, "vstack column mismatch");
        out.view_mut((r, 0), b.shape()).copy_from(*b);
        r += b.nrows();
    }
    out
}

/// Stacks matrices with equal row counts horizontally.
pub fn hstack(blocks: &[&CMat]) -> CMat {
    let rows = blocks.first().map(|b| b.nrows()).unwrap_or(0);
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMat::zeros(rows, cols);
    let mut c = 0;
    for b in blocks {
        assert_eq!(b.nrows(), rows, "hstack row mismatch");
        out.view_mut((0, c), b.shape()).copy_from(*b);
        c += b.ncols();
    }
    out
}

/// Block matrix from a row-major grid of blocks.
pub fn block(rows: &[&[&CMat]]) -> CMat {
    let stacked: Vec<CMat> = rows.iter().map(|r| hstack(r)).collect();
    let refs: Vec<&CMat> = stacked.iter().collect();
    vstack(&refs)
}

/// Relative residual `||x|| / max(scale, tiny)` with Frobenius norms.
pub fn rel(residual: &CMat, scale: f64) -> f64 {
    residual.norm() / scale.max(f64::MIN_POSITIVE)
}
