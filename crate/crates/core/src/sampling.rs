//! Seeded generators of orbit parameters for property checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::Vec3;
use crate::lorentz::{act, canonical_parabolic, random_element};
use crate::orbit_params::{to_euclidean, EuclideanOrbitParams, MinkowskiOrbitParams, OrbitClass};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn uniform_vec(rng: &mut ChaCha8Rng, half_width: f64) -> Vec3 {
    Vec3::new(
        rng.gen_range(-half_width..=half_width),
        rng.gen_range(-half_width..=half_width),
        rng.gen_range(-half_width..=half_width),
    )
}

pub fn unit_vec(rng: &mut ChaCha8Rng) -> Vec3 {
    let z: f64 = rng.gen_range(-1.0..=1.0);
    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let s = (1.0 - z * z).max(0.0).sqrt();
    Vec3::new(s * phi.cos(), s * phi.sin(), z)
}

/// Components of `A` and `L` uniform in `[-2, 2]`, rejecting `L^2 - (L.A)^2 <= 0.01`.
pub fn box_params(rng: &mut ChaCha8Rng) -> EuclideanOrbitParams {
    loop {
        let a = uniform_vec(rng, 2.0);
        let l = uniform_vec(rng, 2.0);
        let p = EuclideanOrbitParams::new_unchecked(a, l);
        if p.collision_gap() > 0.01 {
            return p;
        }
    }
}

/// `|A|` uniform in `[lo, hi]`, `|L|` uniform in `[0.5, 2]`, both in uniform
/// directions, keeping `L^2 - (L.A)^2` in `[0.25, 4]`.
fn shell_params(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> EuclideanOrbitParams {
    loop {
        let a = unit_vec(rng) * rng.gen_range(lo..=hi);
        let l = unit_vec(rng) * rng.gen_range(0.5..=2.0);
        let p = EuclideanOrbitParams::new_unchecked(a, l);
        let gap = p.collision_gap();
        if (0.25..=4.0).contains(&gap) {
            return p;
        }
    }
}

/// Bounded orbits with `|A| <= 0.8`.
pub fn elliptic_params(rng: &mut ChaCha8Rng) -> EuclideanOrbitParams {
    shell_params(rng, 0.0, 0.8)
}

/// Unbounded orbits with `|A|` in `[1.05, 1.5]`.
pub fn hyperbolic_params(rng: &mut ChaCha8Rng) -> EuclideanOrbitParams {
    shell_params(rng, 1.05, 1.5)
}

/// The canonical parabolic pair moved by a random group element with
/// rapidity at most 1, keeping `L^2 - (L.A)^2` in `[0.25, 4]`.
pub fn parabolic_params(rng: &mut ChaCha8Rng) -> MinkowskiOrbitParams {
    loop {
        let g = random_element(rng.gen(), 1.0);
        let Ok(p) = act(&g, &canonical_parabolic()) else {
            continue;
        };
        let gap = 1.0 / p.a().x0;
        if (0.25..=4.0).contains(&gap) {
            return p;
        }
    }
}

/// Bounded orbit with prescribed charge `mu = L . A`: `|A|` uniform in
/// `[0.3, 0.8]`, `L` the component `mu A / A^2` plus a random orthogonal part of
/// length in `[0.5, 2]`.
pub fn elliptic_with_charge(rng: &mut ChaCha8Rng, mu: f64) -> EuclideanOrbitParams {
    let a = unit_vec(rng) * rng.gen_range(0.3..=0.8);
    let a_hat = a / a.norm();
    let perp = loop {
        let w = unit_vec(rng);
        let rej = w - a_hat * w.dot(a_hat);
        if let Some(u) = rej.normalized() {
            if rej.norm() > 0.1 {
                break u;
            }
        }
    };
    let l = a * (mu / a.norm_sq()) + perp * rng.gen_range(0.5..=2.0);
    EuclideanOrbitParams::new_unchecked(a, l)
}

/// Cycles elliptic, parabolic, hyperbolic by `index`.
pub fn mixed_params(rng: &mut ChaCha8Rng, index: usize) -> (OrbitClass, EuclideanOrbitParams) {
    match index % 3 {
        0 => (OrbitClass::Elliptic, elliptic_params(rng)),
        1 => (OrbitClass::Parabolic, to_euclidean(&parabolic_params(rng))),
        _ => (OrbitClass::Hyperbolic, hyperbolic_params(rng)),
    }
}
