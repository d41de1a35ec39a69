#![allow(dead_code)]

pub mod collocation;

#[allow(unused_imports)]
pub use vesicle_core::verify::fields;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vesicle_core::sphharm::ShCoeffs;
use vesicle_core::surface::{DomainSpec, SurfaceShape};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn domain() -> DomainSpec {
    DomainSpec::new(1.0, 4.0).unwrap()
}

/// Band-limited coefficients with ratio-0.5 decay, scaled so that the
/// largest nodal value is `amp`.
pub fn random_field(lmax: usize, lmin: usize, amp: f64, seed: u64) -> ShCoeffs {
    let mut r = rng(seed);
    let c = ShCoeffs::random_decaying(lmax, 1.0, 0.5, lmin, &mut r);
    let grid = vesicle_core::sphharm::SphGrid::build(2 * lmax).unwrap();
    let peak = grid.synthesize(&c).unwrap().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    c.scale(amp / peak)
}

pub fn random_shape(lmax: usize, amp: f64, seed: u64) -> SurfaceShape {
    SurfaceShape::new(domain(), random_field(lmax, 1, amp, seed)).unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}
