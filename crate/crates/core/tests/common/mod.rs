#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robreg::exosystem::{heat_example_profiles, TruncatedExosystem};
use robreg::numerics::{c64, ci, CMat};
use robreg::synthesis::ModeBlock;
use robreg::plant::{build_heat2d, heat_stabilizers, PlantModel, StabilizationGains};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

/// Random matrix shifted so that its spectrum lies left of `-margin`.
pub fn random_hurwitz(rng: &mut ChaCha8Rng, n: usize, margin: f64) -> CMat {
    let m = random_matrix(rng, n, n);
    let r = robreg::numerics::norm2(&m);
    m - CMat::identity(n, n) * c64(r + margin, 0.0)
}

pub fn heat(grid: usize, modes: usize) -> (PlantModel, StabilizationGains, TruncatedExosystem) {
    let plant = build_heat2d(grid).unwrap();
    let gains = heat_stabilizers(&plant).unwrap();
    let exo = heat_example_profiles(modes).unwrap();
    (plant, gains, exo)
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1e-300)
}

/// Diagonal internal model with `2n + 1` modes of `p` channels each and random invertible `G2k`.
pub fn random_internal_model(seed: u64) -> (CMat, CMat, Vec<ModeBlock>) {
    let mut rng = rng(seed);
    let n = rng.random_range(0..=8usize);
    let p = rng.random_range(1..=3usize);
    let dim = (2 * n + 1) * p;
    let mut g1 = CMat::zeros(dim, dim);
    let mut g2 = CMat::zeros(dim, p);
    let mut blocks = Vec::new();
    for (j, k) in (-(n as i64)..=n as i64).enumerate() {
        let omega = k as f64 * rng.random_range(0.5..2.0) + 0.01 * j as f64;
        let off = j * p;
        for r in 0..p {
            g1[(off + r, off + r)] = ci(omega);
        }
        // random block, shifted away from singular
        let blk = random_matrix(&mut rng, p, p) + CMat::identity(p, p) * c64(1.5, 0.0);
        g2.view_mut((off, 0), (p, p)).copy_from(&blk);
        blocks.push(ModeBlock { k, omega, offset: off, size: p });
    }
    (g1, g2, blocks)
}
