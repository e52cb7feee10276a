#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use conjloc::{ChartPoint, SurfaceModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn sphere() -> SurfaceModel {
    SurfaceModel::sphere()
}

pub fn ellipsoid() -> SurfaceModel {
    SurfaceModel::ellipsoid(1.05, 1.0, 0.95).unwrap()
}

pub fn harmonic() -> SurfaceModel {
    SurfaceModel::sectoral_harmonic(3, 0.1).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Surface, base point and direction drawn across all built-in families.
pub fn draws(seed: u64, n: usize) -> Vec<(SurfaceModel, ChartPoint, f64)> {
    let families = [sphere(), ellipsoid(), harmonic()];
    let mut r = rng(seed);
    (0..n)
        .map(|i| {
            let p = ChartPoint::standard(r.gen_range(0.4..PI - 0.4), r.gen_range(0.0..TAU));
            (families[i % 3].clone(), p, r.gen_range(0.0..TAU))
        })
        .collect()
}
