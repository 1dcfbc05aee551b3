//! Equation of motion, constants of motion, and orbit-to-state synthesis.
//!
//! ```text
//! r'' = -r' x B + (mu^2 / r^4 - 1 / r^3) r,     B = mu r / r^3
//! L = r x r' + mu r / r,                         A = L x r' + r / r
//! E = r'^2 / 2 - 1 / r + mu^2 / (2 r^2)
//! ```

mod integrator;

use thiserror::Error;

use crate::linalg::{cross3, dot3, Vec3};
use crate::orbit_params::{magnetic_charge, EuclideanOrbitParams};

pub use integrator::{drift_report, integrate, integrate_fixed, DriftReport, IntegratorConfig, Trajectory};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("position at the origin")]
    OriginPoint,
    #[error("non-finite state component")]
    NotFinite,
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("step limit {max_steps} reached at t = {t}")]
    StepLimitExceeded { max_steps: usize, t: f64 },
    #[error("near collision at t = {t}: r = {r:e} below guard radius {guard:e}")]
    NearCollision { t: f64, r: f64, guard: f64 },
    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },
}

/// Position, velocity and magnetic charge at time `t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseState {
    pub t: f64,
    pub q: Vec3,
    pub v: Vec3,
    pub mu: f64,
}

impl PhaseState {
    pub fn new(t: f64, q: Vec3, v: Vec3, mu: f64) -> Result<Self, DynamicsError> {
        if !(t.is_finite() && q.is_finite() && v.is_finite() && mu.is_finite()) {
            return Err(DynamicsError::NotFinite);
        }
        if q.norm() == 0.0 {
            return Err(DynamicsError::OriginPoint);
        }
        Ok(PhaseState { t, q, v, mu })
    }

    pub fn radius(&self) -> f64 {
        self.q.norm()
    }
}

fn checked_radius(q: Vec3) -> Result<f64, DynamicsError> {
    let r = q.norm();
    if r == 0.0 {
        Err(DynamicsError::OriginPoint)
    } else {
        Ok(r)
    }
}

/// Monopole field `B = mu q / |q|^3`.
pub fn magnetic_field(q: Vec3, mu: f64) -> Result<Vec3, DynamicsError> {
    let r = checked_radius(q)?;
    Ok(q * (mu / (r * r * r)))
}

pub fn acceleration(q: Vec3, v: Vec3, mu: f64) -> Result<Vec3, DynamicsError> {
    let r = checked_radius(q)?;
    Ok(accel_unchecked(q, v, mu, r))
}

#[inline]
pub(crate) fn accel_unchecked(q: Vec3, v: Vec3, mu: f64, r: f64) -> Vec3 {
    let r2 = r * r;
    let r3 = r2 * r;
    let field = q * (mu / r3);
    let radial = mu * mu / (r2 * r2) - 1.0 / r3;
    q * radial - cross3(v, field)
}

/// Canonical angular momentum `L = q x v + mu q / |q|`.
pub fn angular_momentum(s: &PhaseState) -> Result<Vec3, DynamicsError> {
    let r = checked_radius(s.q)?;
    Ok(cross3(s.q, s.v) + s.q * (s.mu / r))
}

/// Lenz vector `A = L x v + q / |q|`.
pub fn lenz_vector(s: &PhaseState) -> Result<Vec3, DynamicsError> {
    let r = checked_radius(s.q)?;
    let l = cross3(s.q, s.v) + s.q * (s.mu / r);
    Ok(cross3(l, s.v) + s.q / r)
}

pub fn energy(s: &PhaseState) -> Result<f64, DynamicsError> {
    let r = checked_radius(s.q)?;
    Ok(0.5 * s.v.norm_sq() - 1.0 / r + s.mu * s.mu / (2.0 * r * r))
}

/// The pair `(A, L)` carried by a state, without validation.
pub fn orbit_params_of(s: &PhaseState) -> Result<EuclideanOrbitParams, DynamicsError> {
    Ok(EuclideanOrbitParams::new_unchecked(lenz_vector(s)?, angular_momentum(s)?))
}

/// A state at `t = 0` whose constants of motion are the given `(A, L)`.
///
/// The position direction `n` is the unit vector in a plane containing `L`
/// and `A` with `L . n = mu` that is farthest from `A`; then
/// `v = (A - n) x L / L^2` and `q = v x (L - mu n) / v^2`. When `A` is
/// parallel to `L` the plane is `span(L, e)` for the first coordinate axis
/// `e` with `|e . L/|L|| < 0.9`, and `n` takes the non-negative branch.
pub fn synthesize_initial_state(p: &EuclideanOrbitParams) -> PhaseState {
    let lenz = p.lenz();
    let ang = p.angular_momentum();
    let mu = magnetic_charge(p);
    let l_sq = ang.norm_sq();
    let l_norm = l_sq.sqrt();
    let l_hat = ang / l_norm;
    let gap = l_sq - mu * mu;

    let perp = lenz - l_hat * dot3(lenz, l_hat);
    let parallel = cross3(ang, lenz).norm() <= 1e-14 * l_norm * lenz.norm();
    let (e_hat, beta_sign) = match (parallel, perp.normalized()) {
        (false, Some(e)) => (e, -1.0),
        _ => (fallback_axis(l_hat), 1.0),
    };
    let n = l_hat * (mu / l_norm) + e_hat * (beta_sign * gap.sqrt() / l_norm);

    let v = cross3(lenz - n, ang) / l_sq;
    let q = cross3(v, ang - n * mu) / v.norm_sq();
    PhaseState { t: 0.0, q, v, mu }
}

fn fallback_axis(l_hat: Vec3) -> Vec3 {
    let axis = [Vec3::E1, Vec3::E2, Vec3::E3].into_iter().find(|e| dot3(*e, l_hat).abs() < 0.9).unwrap_or(Vec3::E1);
    let e = axis - l_hat * dot3(axis, l_hat);
    e / e.norm()
}
