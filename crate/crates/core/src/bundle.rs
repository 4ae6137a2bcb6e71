//! On-disk formats: matrix bundles for plants, gains and controllers, and the CSV outputs.
//!
//! A matrix file starts with a `rows cols` line followed by one line per row holding
//! `re im` pairs in shortest round-trip notation.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::closedloop::{DecaySamples, Trajectory};
use crate::error::{Error, Result};
use crate::numerics::{c64, CMat};
use crate::plant::{HeatGeometry, PlantModel, StabilizationGains};
use crate::synthesis::{CheckResult, ControllerRealization, ModeBlock, SynthesisParams, Variant};

pub fn format_matrix(m: &CMat) -> String {
    let mut s = format!("{} {}\n", m.nrows(), m.ncols());
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| format!("{:e} {:e}", m[(r, c)].re, m[(r, c)].im)).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

pub fn parse_matrix(text: &str) -> Result<CMat> {
    let mut tokens = text.split_whitespace();
    let mut dim = |what: &str| -> Result<usize> {
        tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Format(format!("missing {what} in matrix header")))
    };
    let (rows, cols) = (dim("rows")?, dim("cols")?);
    let vals: Vec<f64> = tokens
        .map(|t| t.parse::<f64>().map_err(|_| Error::Format(format!("bad number `{t}`"))))
        .collect::<Result<_>>()?;
    if vals.len() != 2 * rows * cols {
        return Err(Error::Format(format!("expected {} numbers for a {rows}x{cols} matrix, found {}", 2 * rows * cols, vals.len())));
    }
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::Format("non-finite matrix entry".into()));
    }
    Ok(CMat::from_row_iterator(rows, cols, vals.chunks(2).map(|p| c64(p[0], p[1]))))
}

pub fn write_matrix(path: &Path, m: &CMat) -> Result<()> {
    fs::write(path, format_matrix(m))?;
    Ok(())
}

pub fn read_matrix(path: &Path) -> Result<CMat> {
    let text = fs::read_to_string(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    parse_matrix(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<()> {
    let s = serde_json::to_string_pretty(v).map_err(|e| Error::Format(e.to_string()))?;
    fs::write(path, s + "\n")?;
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

pub fn save_plant(dir: &Path, plant: &PlantModel) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (name, m) in [("A", &plant.a), ("B", &plant.b), ("Bd", &plant.bd), ("C", &plant.c), ("D", &plant.d)] {
        write_matrix(&dir.join(format!("{name}.txt")), m)?;
    }
    if let Some(g) = &plant.geometry {
        write_json(&dir.join("geometry.json"), g)?;
    }
    Ok(())
}

pub fn load_plant(dir: &Path) -> Result<PlantModel> {
    let m = |name: &str| read_matrix(&dir.join(format!("{name}.txt")));
    let mut plant = PlantModel::new(m("A")?, m("B")?, m("Bd")?, m("C")?, m("D")?)?;
    let geo = dir.join("geometry.json");
    if geo.exists() {
        plant.geometry = Some(read_json::<HeatGeometry>(&geo)?);
    }
    Ok(plant)
}

pub fn save_gains(dir: &Path, gains: &StabilizationGains) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_matrix(&dir.join("K2.txt"), &gains.k2)?;
    write_matrix(&dir.join("L1.txt"), &gains.l1)
}

pub fn load_gains(dir: &Path, plant: &PlantModel) -> Result<StabilizationGains> {
    StabilizationGains::new(plant, read_matrix(&dir.join("K2.txt"))?, read_matrix(&dir.join("L1.txt"))?)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ControllerManifest {
    pub variant: Variant,
    pub params: SynthesisParams,
    pub modes: usize,
    pub block_sizes: Vec<usize>,
    pub blocks: Vec<ModeBlock>,
    pub omegas: Vec<f64>,
    pub z0_dim: usize,
    pub state_dim: usize,
    pub checks: Vec<CheckResult>,
}

const CONTROLLER_FILES: [&str; 8] = ["G1", "G2", "K1", "K2", "L", "H", "calG1", "calG2"];

pub fn save_controller(dir: &Path, ctrl: &ControllerRealization) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mats = [&ctrl.g1, &ctrl.g2, &ctrl.k1, &ctrl.k2, &ctrl.l, &ctrl.h, &ctrl.cal_g1, &ctrl.cal_g2];
    for (name, m) in CONTROLLER_FILES.iter().zip(mats) {
        write_matrix(&dir.join(format!("{name}.txt")), m)?;
    }
    write_matrix(&dir.join("calK.txt"), &ctrl.cal_k)?;
    if let Some(k21) = &ctrl.k21 {
        write_matrix(&dir.join("K21.txt"), k21)?;
    }
    if let Some(l1) = &ctrl.l1 {
        write_matrix(&dir.join("L1.txt"), l1)?;
    }
    let manifest = ControllerManifest {
        variant: ctrl.variant,
        params: ctrl.params.clone(),
        modes: ctrl.blocks.len(),
        block_sizes: ctrl.blocks.iter().map(|b| b.size).collect(),
        blocks: ctrl.blocks.clone(),
        omegas: ctrl.blocks.iter().map(|b| b.omega).collect(),
        z0_dim: ctrl.z0_dim(),
        state_dim: ctrl.dim(),
        checks: ctrl.checks.clone(),
    };
    write_json(&dir.join("manifest.json"), &manifest)
}

pub fn load_controller(dir: &Path) -> Result<ControllerRealization> {
    let manifest: ControllerManifest = read_json(&dir.join("manifest.json"))?;
    let m = |name: &str| read_matrix(&dir.join(format!("{name}.txt")));
    let opt = |name: &str| -> Result<Option<CMat>> {
        let p = dir.join(format!("{name}.txt"));
        if p.exists() { read_matrix(&p).map(Some) } else { Ok(None) }
    };
    let ctrl = ControllerRealization {
        variant: manifest.variant,
        params: manifest.params,
        blocks: manifest.blocks,
        g1: m("G1")?,
        g2: m("G2")?,
        k1: m("K1")?,
        k2: m("K2")?,
        k21: opt("K21")?,
        l: m("L")?,
        l1: opt("L1")?,
        h: m("H")?,
        cal_g1: m("calG1")?,
        cal_g2: m("calG2")?,
        cal_k: m("calK")?,
        checks: manifest.checks,
    };
    if ctrl.cal_g1.nrows() != manifest.state_dim || ctrl.g1.nrows() != manifest.z0_dim {
        return Err(Error::Format("controller matrices do not match the manifest".into()));
    }
    Ok(ctrl)
}

fn num(x: f64) -> String {
    format!("{x:.14e}")
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

fn channel_names(prefix: &str, count: usize) -> Vec<String> {
    if count == 1 { vec![prefix.to_string()] } else { (1..=count).map(|i| format!("{prefix}_{i}")).collect() }
}

/// `t, y.., y_ref.., e_norm, u..` restricted to `t in [t_from, t_to]`.
pub fn write_trajectory_csv(path: &Path, traj: &Trajectory, t_from: f64, t_to: f64) -> Result<()> {
    let p = traj.y.first().map_or(1, |v| v.len());
    let m = traj.u.first().map_or(1, |v| v.len());
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    let mut header = vec!["t".to_string()];
    header.extend(channel_names("y", p));
    header.extend(channel_names("y_ref", p));
    header.push("e_norm".into());
    header.extend(channel_names("u", m));
    w.write_record(&header).map_err(csv_err)?;
    let eps = 1e-9 * traj.dt.max(1.0);
    for (j, &t) in traj.t.iter().enumerate() {
        if t < t_from - eps || t > t_to + eps {
            continue;
        }
        let mut rec = vec![num(t)];
        rec.extend(traj.y[j].iter().map(|&x| num(x)));
        rec.extend(traj.y_ref[j].iter().map(|&x| num(x)));
        rec.push(num(traj.e_norm[j]));
        rec.extend(traj.u[j].iter().map(|&x| num(x)));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// `t, I`
pub fn write_error_integrals_csv(path: &Path, ds: &DecaySamples) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["t", "I"]).map_err(csv_err)?;
    for (t, i) in ds.t.iter().zip(&ds.i) {
        w.write_record([num(*t), num(*i)]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Long format `t, xi2, x` of the probed boundary nodes; `xi2[j]` labels probe `j`.
pub fn write_boundary_csv(path: &Path, traj: &Trajectory, xi2: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["t", "xi2", "x"]).map_err(csv_err)?;
    for (t, row) in traj.probe_t.iter().zip(&traj.probe) {
        for (s, x) in xi2.iter().zip(row) {
            w.write_record([num(*t), num(*s), num(*x)]).map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `omega, norm`; infinite norms are written as `inf`.
pub fn write_scan_csv(path: &Path, omegas: &[f64], norms: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["omega", "norm"]).map_err(csv_err)?;
    for (o, n) in omegas.iter().zip(norms) {
        let v = if n.is_finite() { num(*n) } else { "inf".into() };
        w.write_record([num(*o), v]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `t, I` back from an error-integral CSV.
pub fn read_error_integrals_csv(path: &Path) -> Result<DecaySamples> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let (mut t, mut i) = (vec![], vec![]);
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let get = |j: usize| -> Result<f64> {
            rec.get(j).and_then(|s| s.parse().ok()).ok_or_else(|| Error::Format(format!("{}: bad row", path.display())))
        };
        t.push(get(0)?);
        i.push(get(1)?);
    }
    Ok(DecaySamples { t, i })
}

pub fn write_report<T: Serialize>(path: &Path, v: &T) -> Result<()> {
    write_json(path, v)
}
