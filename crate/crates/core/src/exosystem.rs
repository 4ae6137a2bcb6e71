//! Truncated diagonal exosystem `S = diag(i w_k)`, `|k| <= N`, and its signals.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{c64, ci, CMat, CVec, C64};

/// Declared coefficient decay law of a profile sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum DecayLaw {
    /// `|c_k| = scale * |k|^exponent` for `k != 0`.
    Power { exponent: f64, scale: f64 },
    /// `|c_k| = scale * exp(-rate |k|)`.
    Exponential { rate: f64, scale: f64 },
    /// Nonzero only at the listed modes.
    FiniteSupport { modes: Vec<i64> },
    Unspecified,
}

impl DecayLaw {
    pub fn magnitude(&self, k: i64) -> Option<f64> {
        match self {
            DecayLaw::Power { exponent, scale } if k != 0 => Some(scale * (k.abs() as f64).powf(*exponent)),
            DecayLaw::Exponential { rate, scale } => Some(scale * (-rate * k.abs() as f64).exp()),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalProfile {
    pub v0: DecayLaw,
    pub e: DecayLaw,
    pub f: DecayLaw,
}

#[derive(Clone, Debug)]
pub struct TruncatedExosystem {
    pub tau: f64,
    pub n: usize,
    pub omega: Vec<f64>,
    pub v0: CVec,
    /// Column `j` is `E phi_k` for the j-th mode.
    pub e_cols: CMat,
    /// Column `j` is `F phi_k` for the j-th mode.
    pub f_cols: CMat,
    pub profile: Option<SignalProfile>,
}

/// Exosystem with `w_k = 2 pi k / tau`, `k = -N..N`, and zero profiles of dimension 1.
pub fn build_periodic(tau: f64, n: usize) -> Result<TruncatedExosystem> {
    if !(tau > 0.0) {
        return Err(Error::InvalidArgument(format!("period must be positive, got {tau}")));
    }
    let m = 2 * n + 1;
    let omega = (0..m).map(|j| 2.0 * PI * (j as f64 - n as f64) / tau).collect();
    Ok(TruncatedExosystem {
        tau,
        n,
        omega,
        v0: CVec::zeros(m),
        e_cols: CMat::zeros(1, m),
        f_cols: CMat::zeros(1, m),
        profile: None,
    })
}

impl TruncatedExosystem {
    pub fn modes(&self) -> usize {
        self.omega.len()
    }

    pub fn ks(&self) -> Vec<i64> {
        (-(self.n as i64)..=self.n as i64).collect()
    }

    /// Vector position of mode `k`.
    pub fn index(&self, k: i64) -> usize {
        (k + self.n as i64) as usize
    }

    pub fn output_dim(&self) -> usize {
        self.f_cols.nrows()
    }

    pub fn disturbance_dim(&self) -> usize {
        self.e_cols.nrows()
    }

    /// Resizes the (zero) profile maps.
    pub fn with_dims(mut self, output_dim: usize, disturbance_dim: usize) -> Self {
        self.e_cols = CMat::zeros(disturbance_dim, self.modes());
        self.f_cols = CMat::zeros(output_dim, self.modes());
        self
    }

    pub fn min_gap(&self) -> f64 {
        let mut w = self.omega.clone();
        w.sort_by(f64::total_cmp);
        w.windows(2).map(|p| p[1] - p[0]).fold(f64::INFINITY, f64::min)
    }

    /// `v(t)`, with `v_k(t) = exp(i w_k t) v0_k`.
    pub fn state(&self, t: f64) -> CVec {
        CVec::from_fn(self.modes(), |j, _| (ci(self.omega[j] * t)).exp() * self.v0[j])
    }

    /// `y_ref(t) = -F v(t)`.
    pub fn reference(&self, t: f64) -> CVec {
        -(&self.f_cols * self.state(t))
    }

    /// `w(t) = E v(t)`.
    pub fn disturbance(&self, t: f64) -> CVec {
        &self.e_cols * self.state(t)
    }

    /// Largest violation of `c_{-k} v_{-k} = conj(c_k v_k)` over `E` and `F`.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for map in [&self.e_cols, &self.f_cols] {
            for j in 0..self.modes() {
                let jm = self.modes() - 1 - j;
                for r in 0..map.nrows() {
                    let a = map[(r, j)] * self.v0[j];
                    let b = (map[(r, jm)] * self.v0[jm]).conj();
                    worst = worst.max((a - b).norm());
                }
            }
        }
        worst
    }

    /// Largest relative deviation of the stored coefficients from the declared profile.
    pub fn profile_mismatch(&self) -> f64 {
        let Some(p) = &self.profile else { return 0.0 };
        let mut worst: f64 = 0.0;
        let mut check = |law: &DecayLaw, values: &dyn Fn(usize) -> f64| {
            for (j, k) in self.ks().into_iter().enumerate() {
                if let Some(m) = law.magnitude(k) {
                    worst = worst.max((values(j) - m).abs() / m.max(f64::MIN_POSITIVE));
                }
            }
            if let DecayLaw::FiniteSupport { modes } = law {
                for (j, k) in self.ks().into_iter().enumerate() {
                    if !modes.contains(&k) && values(j) != 0.0 {
                        worst = f64::INFINITY;
                    }
                }
            }
        };
        check(&p.v0, &|j| self.v0[j].norm());
        check(&p.e, &|j| self.e_cols.column(j).norm());
        check(&p.f, &|j| self.f_cols.column(j).norm());
        worst
    }

    /// `||S v0||`, the graph-norm part used for smooth initial data.
    pub fn sv0_norm(&self) -> f64 {
        self.omega.iter().zip(self.v0.iter()).map(|(w, v)| (w * v.norm()).powi(2)).sum::<f64>().sqrt()
    }

    pub fn to_doc(&self) -> ExosystemDoc {
        let pairs = |m: &CMat| -> Vec<Vec<[f64; 2]>> {
            (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect()).collect()
        };
        ExosystemDoc {
            tau: self.tau,
            n: self.n,
            omega: Some(self.omega.clone()),
            v0: self.v0.iter().map(|z| [z.re, z.im]).collect(),
            e: pairs(&self.e_cols),
            f: pairs(&self.f_cols),
            profile: self.profile.clone(),
        }
    }

    pub fn from_doc(doc: &ExosystemDoc) -> Result<Self> {
        let mut exo = build_periodic(doc.tau, doc.n)?;
        let m = exo.modes();
        if let Some(w) = &doc.omega {
            if w.len() != m {
                return Err(Error::Format(format!("omega has {} entries, expected {m}", w.len())));
            }
            exo.omega = w.clone();
        }
        if doc.v0.len() != m {
            return Err(Error::Format(format!("v0 has {} entries, expected {m}", doc.v0.len())));
        }
        exo.v0 = CVec::from_iterator(m, doc.v0.iter().map(|p| c64(p[0], p[1])));
        let mat = |rows: &Vec<Vec<[f64; 2]>>, name: &str| -> Result<CMat> {
            let mut out = CMat::zeros(rows.len(), m);
            for (r, row) in rows.iter().enumerate() {
                if row.len() != m {
                    return Err(Error::Format(format!("{name} row {r} has {} entries, expected {m}", row.len())));
                }
                for (c, p) in row.iter().enumerate() {
                    out[(r, c)] = c64(p[0], p[1]);
                }
            }
            Ok(out)
        };
        exo.e_cols = mat(&doc.e, "E")?;
        exo.f_cols = mat(&doc.f, "F")?;
        exo.profile = doc.profile.clone();
        if exo.min_gap() <= 0.0 {
            return Err(Error::Format("frequencies must be distinct".into()));
        }
        Ok(exo)
    }
}

/// JSON form of an exosystem. `E` and `F` are row-major, one `[re, im]` pair per mode.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExosystemDoc {
    pub tau: f64,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<Vec<f64>>,
    pub v0: Vec<[f64; 2]>,
    #[serde(rename = "E")]
    pub e: Vec<Vec<[f64; 2]>>,
    #[serde(rename = "F")]
    pub f: Vec<Vec<[f64; 2]>>,
    #[serde(default)]
    pub profile: Option<SignalProfile>,
}

/// The default 2pi-periodic reference: `y(t) = (t^3 - 3 pi t^2 + 2 pi^2 t)/12` on `[0, 2pi)`.
///
/// It is C^1 with a jump in the second derivative, and equals `sum_{k>=1} sin(kt)/k^3`.
pub fn default_reference(t: f64) -> f64 {
    let s = t.rem_euclid(2.0 * PI);
    (s * s * s - 3.0 * PI * s * s + 2.0 * PI * PI * s) / 12.0
}

/// Fourier coefficient of [`default_reference`] in the `exp(ikt)` convention.
pub fn default_reference_coefficient(k: i64) -> C64 {
    if k == 0 {
        return c64(0.0, 0.0);
    }
    let kk = k.abs() as f64;
    ci(-(k.signum() as f64) / (2.0 * kk * kk * kk))
}

/// Heat-example exosystem: period 2pi, `v0_0 = 1`, `v0_k = |k|^{-3/5}`,
/// `F phi_k = -y_r(k) |k|^{3/5}` (so that `-F v(t)` is the default reference),
/// and `E` generating `d(t) = cos 4t + sin(t)/2`.
pub fn heat_example_profiles(n: usize) -> Result<TruncatedExosystem> {
    if n < 4 {
        return Err(Error::InvalidArgument(format!("heat example needs N >= 4, got {n}")));
    }
    let mut exo = build_periodic(2.0 * PI, n)?;
    for (j, k) in exo.ks().into_iter().enumerate() {
        let kk = k.abs() as f64;
        exo.v0[j] = if k == 0 { c64(1.0, 0.0) } else { c64(kk.powf(-0.6), 0.0) };
        if k != 0 {
            exo.f_cols[(0, j)] = -default_reference_coefficient(k) * kk.powf(0.6);
        }
    }
    for k in [-4i64, 4] {
        let j = exo.index(k);
        exo.e_cols[(0, j)] = c64(0.5, 0.0) / exo.v0[j];
    }
    for k in [-1i64, 1] {
        let j = exo.index(k);
        exo.e_cols[(0, j)] = ci(-(k as f64) / 4.0) / exo.v0[j];
    }
    exo.profile = Some(SignalProfile {
        v0: DecayLaw::Power { exponent: -0.6, scale: 1.0 },
        e: DecayLaw::FiniteSupport { modes: vec![-4, -1, 1, 4] },
        f: DecayLaw::Power { exponent: -2.4, scale: 0.5 },
    });
    Ok(exo)
}

/// Discrete Fourier coefficients `c_k`, `|k| <= N`, of a real tau-periodic signal
/// sampled uniformly over one period, so that `y(t) ~ sum_k c_k exp(i w_k t)`.
pub fn fourier_ingest(times: &[f64], values: &[f64], tau: f64, n: usize) -> Result<Vec<C64>> {
    let m = times.len();
    if m != values.len() {
        return Err(Error::InvalidArgument("times and values differ in length".into()));
    }
    if m < 4 * n + 4 {
        return Err(Error::InvalidArgument(format!("need at least {} samples, got {m}", 4 * n + 4)));
    }
    let h = tau / m as f64;
    for (j, &t) in times.iter().enumerate() {
        if (t - times[0] - j as f64 * h).abs() > 1e-9 * tau {
            return Err(Error::InvalidArgument("samples are not uniform over one period".into()));
        }
    }
    let nn = n as i64;
    Ok((-nn..=nn)
        .map(|k| {
            let w = 2.0 * PI * k as f64 / tau;
            let s: C64 = times.iter().zip(values).map(|(&t, &y)| (ci(-w * t)).exp() * y).sum();
            s / m as f64
        })
        .collect())
}
