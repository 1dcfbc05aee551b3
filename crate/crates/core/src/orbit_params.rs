//! The two orbit parametrizations and the scalar orbit functionals.
//!
//! An oriented orbit is labelled either by the pair `(A, L)` of Euclidean
//! 3-vectors (Lenz vector and canonical angular momentum, subject to
//! `L^2 > (L . A)^2`) or by the pair `(a, l)` of Minkowski vectors subject to
//! `l . l = -1`, `a . l = 0`, `a0 > 0`. The two are related by
//!
//! ```text
//! (a, l)  ->  (A, L) = (a_spatial / a0, l_spatial / sqrt(a0))
//! (A, L)  ->  (a, l) = ((1, A) / (L^2 - mu^2), (mu, L) / sqrt(L^2 - mu^2)),  mu = L . A
//! ```
//!
//! Each formula lives on exactly one side of the bijection; functionals
//! needed on the other side go through [`to_minkowski`] / [`to_euclidean`].

use std::fmt;

use thiserror::Error;

use crate::linalg::{cross3, dot3, mdot, MinkVec4, Vec3};

/// Default slack for `L^2 - (L . A)^2 > slack`.
pub const DEFAULT_EUCLIDEAN_SLACK: f64 = 1e-12;
/// Default tolerance on `l . l = -1` and `a . l = 0`.
pub const DEFAULT_MINKOWSKI_TOL: f64 = 1e-9;
/// Default half-width of the parabolic band around `a . a = 0`.
pub const DEFAULT_CLASS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("non-finite component in {field}")]
    NotFinite { field: &'static str },
    #[error("colliding orbit: L^2 - (L.A)^2 = {gap:e} is not above the slack {slack:e}")]
    CollidingOrbit { gap: f64, slack: f64 },
    #[error("l.l = {l_sq} deviates from -1 by {deviation:e} (tolerance {tol:e})")]
    NotUnitSpacelike { l_sq: f64, deviation: f64, tol: f64 },
    #[error("a.l = {a_dot_l:e} exceeds tolerance {tol:e}")]
    NotOrthogonal { a_dot_l: f64, tol: f64 },
    #[error("a0 = {a0} is not positive")]
    NonPositiveA0 { a0: f64 },
    #[error("l has no spacelike part to normalize")]
    CannotReproject,
}

/// The Euclidean parametrization `(A, L)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EuclideanOrbitParams {
    lenz: Vec3,
    angular_momentum: Vec3,
}

impl EuclideanOrbitParams {
    /// Validates with [`DEFAULT_EUCLIDEAN_SLACK`].
    pub fn new(lenz: Vec3, angular_momentum: Vec3) -> Result<Self, ParamError> {
        Self::with_slack(lenz, angular_momentum, DEFAULT_EUCLIDEAN_SLACK)
    }

    pub fn with_slack(lenz: Vec3, angular_momentum: Vec3, slack: f64) -> Result<Self, ParamError> {
        let p = EuclideanOrbitParams { lenz, angular_momentum };
        validate_euclidean(&p, slack)?;
        Ok(p)
    }

    /// Builds without checking; callers must validate before using the functionals.
    pub fn new_unchecked(lenz: Vec3, angular_momentum: Vec3) -> Self {
        EuclideanOrbitParams { lenz, angular_momentum }
    }

    /// The Lenz vector `A`.
    pub fn lenz(&self) -> Vec3 {
        self.lenz
    }

    /// The canonical angular momentum `L`.
    pub fn angular_momentum(&self) -> Vec3 {
        self.angular_momentum
    }

    /// `L^2 - mu^2`, positive on valid parameters.
    pub fn collision_gap(&self) -> f64 {
        let mu = magnetic_charge(self);
        self.angular_momentum.norm_sq() - mu * mu
    }
}

/// The Minkowski parametrization `(a, l)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinkowskiOrbitParams {
    a: MinkVec4,
    l: MinkVec4,
}

impl MinkowskiOrbitParams {
    /// Validates with [`DEFAULT_MINKOWSKI_TOL`].
    pub fn new(a: MinkVec4, l: MinkVec4) -> Result<Self, ParamError> {
        Self::with_tol(a, l, DEFAULT_MINKOWSKI_TOL)
    }

    pub fn with_tol(a: MinkVec4, l: MinkVec4, tol: f64) -> Result<Self, ParamError> {
        let p = MinkowskiOrbitParams { a, l };
        validate_minkowski(&p, tol)?;
        Ok(p)
    }

    /// Projects `(a, l)` onto the constraint set before validating: `l` is
    /// rescaled to `l . l = -1`, then the component of `a` along `l` is removed.
    pub fn reprojected(a: MinkVec4, l: MinkVec4) -> Result<Self, ParamError> {
        let l_sq = l.square();
        if !(l_sq < 0.0) {
            return Err(ParamError::CannotReproject);
        }
        let l = l / (-l_sq).sqrt();
        // a . l / l . l with l . l = -1
        let a = a + l * mdot(a, l);
        Self::new(a, l)
    }

    pub fn new_unchecked(a: MinkVec4, l: MinkVec4) -> Self {
        MinkowskiOrbitParams { a, l }
    }

    pub fn a(&self) -> MinkVec4 {
        self.a
    }

    pub fn l(&self) -> MinkVec4 {
        self.l
    }
}

/// Orbit shape, from the sign of `a . a` (equivalently of `-E`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OrbitClass {
    Elliptic,
    Parabolic,
    Hyperbolic,
}

impl fmt::Display for OrbitClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            OrbitClass::Elliptic => "Elliptic",
            OrbitClass::Parabolic => "Parabolic",
            OrbitClass::Hyperbolic => "Hyperbolic",
        };
        f.write_str(s)
    }
}

/// Magnetic charge `mu = L . A`.
pub fn magnetic_charge(p: &EuclideanOrbitParams) -> f64 {
    dot3(p.angular_momentum, p.lenz)
}

pub fn to_minkowski(p: &EuclideanOrbitParams) -> Result<MinkowskiOrbitParams, ParamError> {
    to_minkowski_with_slack(p, DEFAULT_EUCLIDEAN_SLACK)
}

pub fn to_minkowski_with_slack(p: &EuclideanOrbitParams, slack: f64) -> Result<MinkowskiOrbitParams, ParamError> {
    validate_euclidean(p, slack)?;
    let mu = magnetic_charge(p);
    let gap = p.angular_momentum.norm_sq() - mu * mu;
    let root = gap.sqrt();
    let a = MinkVec4::from_parts(1.0, p.lenz) / gap;
    let l = MinkVec4::from_parts(mu, p.angular_momentum) / root;
    Ok(MinkowskiOrbitParams { a, l })
}

pub fn to_euclidean(p: &MinkowskiOrbitParams) -> EuclideanOrbitParams {
    let a0 = p.a.x0;
    EuclideanOrbitParams { lenz: p.a.spatial() / a0, angular_momentum: p.l.spatial() / a0.sqrt() }
}

/// `E = -(1 - A^2) / (2 (L^2 - mu^2))`.
pub fn energy_euclidean(p: &EuclideanOrbitParams) -> f64 {
    -(1.0 - p.lenz.norm_sq()) / (2.0 * p.collision_gap())
}

/// `E = -(a . a) / (2 a0)`.
pub fn energy_minkowski(p: &MinkowskiOrbitParams) -> f64 {
    -p.a.square() / (2.0 * p.a.x0)
}

/// `e = |L x A| / |L - mu A|`.
pub fn eccentricity(p: &EuclideanOrbitParams) -> f64 {
    let mu = magnetic_charge(p);
    let binormal = p.angular_momentum - p.lenz * mu;
    cross3(p.angular_momentum, p.lenz).norm() / binormal.norm()
}

/// `L - mu A`, a positive multiple of the binormal of the oriented orbit.
pub fn orbit_normal(p: &EuclideanOrbitParams) -> Vec3 {
    p.angular_momentum - p.lenz * magnetic_charge(p)
}

pub fn classify(p: &MinkowskiOrbitParams, tol: f64) -> OrbitClass {
    classify_value(p.a.square(), tol)
}

/// Classification by energy with the same symmetric band: `E < 0` is elliptic.
pub fn classify_energy(energy: f64, tol: f64) -> OrbitClass {
    classify_value(-energy, tol)
}

fn classify_value(v: f64, tol: f64) -> OrbitClass {
    if v > tol {
        OrbitClass::Elliptic
    } else if v < -tol {
        OrbitClass::Hyperbolic
    } else {
        OrbitClass::Parabolic
    }
}

/// Circle test `|L x A| <= tol |L|`.
pub fn is_circle(p: &EuclideanOrbitParams, tol: f64) -> bool {
    cross3(p.angular_momentum, p.lenz).norm() <= tol * p.angular_momentum.norm()
}

pub fn validate_euclidean(p: &EuclideanOrbitParams, slack: f64) -> Result<(), ParamError> {
    if !p.lenz.is_finite() {
        return Err(ParamError::NotFinite { field: "A" });
    }
    if !p.angular_momentum.is_finite() {
        return Err(ParamError::NotFinite { field: "L" });
    }
    let gap = p.collision_gap();
    if !(gap > slack) {
        return Err(ParamError::CollidingOrbit { gap, slack });
    }
    Ok(())
}

pub fn validate_minkowski(p: &MinkowskiOrbitParams, tol: f64) -> Result<(), ParamError> {
    if !p.a.is_finite() {
        return Err(ParamError::NotFinite { field: "a" });
    }
    if !p.l.is_finite() {
        return Err(ParamError::NotFinite { field: "l" });
    }
    let l_sq = p.l.square();
    let deviation = (l_sq + 1.0).abs();
    if !(deviation <= tol) {
        return Err(ParamError::NotUnitSpacelike { l_sq, deviation, tol });
    }
    let a_dot_l = mdot(p.a, p.l);
    if !(a_dot_l.abs() <= tol) {
        return Err(ParamError::NotOrthogonal { a_dot_l, tol });
    }
    if !(p.a.x0 > 0.0) {
        return Err(ParamError::NonPositiveA0 { a0: p.a.x0 });
    }
    Ok(())
}
