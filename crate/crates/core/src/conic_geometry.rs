//! The orbit as a point set.
//!
//! In 3D the orbit of `(A, L)` is cut out by
//! `r - A . r = L^2 - mu^2` and `L . r = mu r`. Lifting `r` to the future light
//! cone, `x = (|r|, r)`, turns it into the section of the cone by the affine
//! 2-plane `a . x = 1, l . x = 0`. Sampling works in that plane: every line
//! through a point `P` of the section meets it again at
//! `P + t d` with `t = -2 (P . d) / (d . d)`, which parametrizes ellipses,
//! parabolas and hyperbolas the same way and never needs the `mu != 0`
//! special case of the 3D equations.

use thiserror::Error;

use crate::linalg::{mdot, MinkVec4, Vec3};
use crate::orbit_params::{
    classify, magnetic_charge, EuclideanOrbitParams, MinkowskiOrbitParams, OrbitClass, DEFAULT_CLASS_TOL,
};

/// Default window for unbounded orbits, in units of `1 / a0`.
pub const DEFAULT_RANGE_CAP: f64 = 1e3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("point at the origin (the cone vertex is not part of any orbit)")]
    OriginPoint,
    #[error("at least 3 samples are required, got {0}")]
    TooFewSamples(usize),
    #[error("range cap {cap} is below the pericenter height {pericenter}")]
    RangeCapTooSmall { cap: f64, pericenter: f64 },
    #[error("degenerate orbit plane")]
    DegeneratePlane,
}

/// Residuals of the three orbit equations at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrbitResiduals {
    /// `r - A . r - (L^2 - mu^2)`
    pub rho1: f64,
    /// `L . r - mu r`
    pub rho2: f64,
    /// `(L - mu A) . r - mu (L^2 - mu^2)`
    pub rho_plane: f64,
}

impl OrbitResiduals {
    pub fn max_abs(&self) -> f64 {
        self.rho1.abs().max(self.rho2.abs()).max(self.rho_plane.abs())
    }
}

pub fn orbit_residuals(p: &EuclideanOrbitParams, r: Vec3) -> Result<OrbitResiduals, GeometryError> {
    let dist = r.norm();
    if dist == 0.0 {
        return Err(GeometryError::OriginPoint);
    }
    let lenz = p.lenz();
    let ang = p.angular_momentum();
    let mu = magnetic_charge(p);
    let gap = p.collision_gap();
    Ok(OrbitResiduals {
        rho1: dist - lenz.dot(r) - gap,
        rho2: ang.dot(r) - mu * dist,
        rho_plane: (ang - lenz * mu).dot(r) - mu * gap,
    })
}

/// `r -> (|r|, r)`, the unique future-null vector over `r`.
pub fn lift_to_cone(r: Vec3) -> Result<MinkVec4, GeometryError> {
    let dist = r.norm();
    if dist == 0.0 {
        return Err(GeometryError::OriginPoint);
    }
    Ok(MinkVec4::from_parts(dist, r))
}

/// `(a . x - 1, l . x)`.
pub fn plane_residuals(p: &MinkowskiOrbitParams, x: MinkVec4) -> (f64, f64) {
    (mdot(p.a(), x) - 1.0, mdot(p.l(), x))
}

/// Coordinates on the plane `a . x = 1, l . x = 0`: points are
/// `x_base + s w1 + t w2`.
///
/// `w1`, `w2` are Euclidean-orthonormal (as component arrays), and ordered so
/// that `w1 ^ w2` has the orientation of the plane (see [`plane_orientation`]).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlaneFrame {
    pub x_base: MinkVec4,
    pub w1: MinkVec4,
    pub w2: MinkVec4,
}

impl PlaneFrame {
    pub fn point(&self, s: f64, t: f64) -> MinkVec4 {
        self.x_base + self.w1 * s + self.w2 * t
    }
}

fn euclid_unit(v: MinkVec4) -> Option<MinkVec4> {
    let n = v.euclid_norm();
    (n > 0.0 && n.is_finite()).then(|| v / n)
}

fn reject(v: MinkVec4, basis: &[MinkVec4]) -> MinkVec4 {
    basis.iter().fold(v, |acc, b| acc - *b * acc.euclid_dot(*b))
}

/// Picks the coordinate axis (first one on ties) with the largest component
/// outside `span(basis)` and returns that component normalized.
fn next_axis(basis: &[MinkVec4]) -> Option<MinkVec4> {
    let mut best: Option<(f64, MinkVec4)> = None;
    for i in 0..4 {
        let r = reject(reject(MinkVec4::basis(i), basis), basis);
        let n = r.euclid_norm();
        if best.is_none_or(|(bn, _)| n > bn) {
            best = Some((n, r));
        }
    }
    best.and_then(|(_, r)| euclid_unit(r))
}

/// The time-space components `a0 l - l0 a` of the bivector `a ^ l`.
///
/// Its Hodge dual spans the orbit plane; on spatial projection the pair
/// `(u, v)` of in-plane directions is positively oriented iff
/// `(u x v) . plane_orientation(p) > 0`. For parameters coming from `(A, L)`
/// this vector is a positive multiple of `L - mu A`.
pub fn plane_orientation(p: &MinkowskiOrbitParams) -> Vec3 {
    let (a, l) = (p.a(), p.l());
    l.spatial() * a.x0 - a.spatial() * l.x0
}

fn positively_oriented(p: &MinkowskiOrbitParams, u: MinkVec4, v: MinkVec4) -> bool {
    u.spatial().cross(v.spatial()).dot(plane_orientation(p)) > 0.0
}

pub fn plane_frame(p: &MinkowskiOrbitParams) -> PlaneFrame {
    try_plane_frame(p).expect("valid orbit parameters span a 2-plane")
}

fn try_plane_frame(p: &MinkowskiOrbitParams) -> Result<PlaneFrame, GeometryError> {
    // The plane is {x : a_low . x = 1, l_low . x = 0} in Euclidean terms.
    let a_low = p.a().lowered();
    let l_low = p.l().lowered();
    let n1 = euclid_unit(a_low).ok_or(GeometryError::DegeneratePlane)?;
    let n2 = euclid_unit(reject(reject(l_low, &[n1]), &[n1])).ok_or(GeometryError::DegeneratePlane)?;

    // Minimum-norm point of the plane, inside span(n1, n2).
    let c1 = 1.0 / a_low.euclid_norm();
    let l_n1 = l_low.euclid_dot(n1);
    let l_n2 = l_low.euclid_dot(n2);
    let x_base = n1 * c1 - n2 * (c1 * l_n1 / l_n2);

    let w1 = next_axis(&[n1, n2]).ok_or(GeometryError::DegeneratePlane)?;
    let mut w2 = next_axis(&[n1, n2, w1]).ok_or(GeometryError::DegeneratePlane)?;
    if !positively_oriented(p, w1, w2) {
        w2 = -w2;
    }
    Ok(PlaneFrame { x_base, w1, w2 })
}

/// Sampling controls for [`sample_orbit_lifted`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleOptions {
    /// Unbounded orbits are cut at `x0 <= range_cap / a0`.
    pub range_cap: f64,
    pub class_tol: f64,
}

impl Default for SampleOptions {
    fn default() -> Self {
        SampleOptions { range_cap: DEFAULT_RANGE_CAP, class_tol: DEFAULT_CLASS_TOL }
    }
}

/// The pericenter of the section together with a tangent/normal pair there.
struct Pericenter {
    point: MinkVec4,
    /// Unit spacelike tangent (`T . T = -1`, `T0 = 0`).
    tangent: MinkVec4,
    /// In-plane direction with `N . T = 0`.
    normal: MinkVec4,
}

impl Pericenter {
    fn at(&self, psi: f64) -> MinkVec4 {
        let (s, c) = psi.sin_cos();
        let d = self.tangent * c + self.normal * s;
        let dd = d.square();
        let t = -2.0 * mdot(self.point, d) / dd;
        self.point + d * t
    }
}

fn pericenter(frame: &PlaneFrame) -> Result<Pericenter, GeometryError> {
    let (w1, w2) = (frame.w1, frame.w2);
    // The in-plane direction with zero time component is tangent to the
    // section wherever x0 is extremal.
    let raw = w1 * w2.x0 - w2 * w1.x0;
    let (tangent_dir, seed) = if raw.euclid_norm() > 1e-12 {
        (raw, if w1.x0.abs() >= w2.x0.abs() { w1 } else { w2 })
    } else {
        // purely spatial plane: x0 is constant along a circle
        (w1, w2)
    };
    let t_sq = tangent_dir.square();
    if !(t_sq < 0.0) {
        return Err(GeometryError::DegeneratePlane);
    }
    let tangent = tangent_dir / (-t_sq).sqrt();
    let normal_dir = seed + tangent * mdot(seed, tangent);
    let normal = euclid_unit(normal_dir).ok_or(GeometryError::DegeneratePlane)?;

    // Points of the plane with x . T = 0 form the line y + s N; intersect it
    // with the cone: (N.N) s^2 + 2 (y.N) s + y.y = 0.
    let y = frame.x_base + tangent * mdot(frame.x_base, tangent);
    let qa = normal.square();
    let qb = mdot(y, normal);
    let qc = y.square();
    let disc = (qb * qb - qa * qc).max(0.0);
    let root = disc.sqrt();
    let q = -(qb + qb.signum() * root);
    let mut candidates = Vec::with_capacity(2);
    if q != 0.0 {
        candidates.push(qc / q);
    }
    if qa != 0.0 {
        candidates.push(q / qa);
    }
    let point = candidates
        .into_iter()
        .map(|s| y + normal * s)
        .filter(|x| x.is_finite() && x.x0 > 0.0)
        .min_by(|u, v| u.x0.total_cmp(&v.x0))
        .ok_or(GeometryError::DegeneratePlane)?;
    Ok(Pericenter { point, tangent, normal })
}

/// Samples the lifted orbit (points of the future light cone on the plane
/// `a . x = 1, l . x = 0`), ordered along the orbit orientation.
///
/// Elliptic orbits are covered completely, starting at the pericenter.
/// Parabolic and hyperbolic orbits are sampled on the arc with
/// `x0 <= range_cap / a0`, endpoints included.
pub fn sample_orbit_lifted(
    p: &MinkowskiOrbitParams,
    n: usize,
    opts: &SampleOptions,
) -> Result<Vec<MinkVec4>, GeometryError> {
    if n < 3 {
        return Err(GeometryError::TooFewSamples(n));
    }
    let frame = try_plane_frame(p)?;
    let peri = pericenter(&frame)?;
    // Increasing psi runs along +T when P . N > 0; flip so the convex side of
    // the section lies to the left of the direction of travel.
    let sense = if positively_oriented(p, peri.tangent, peri.normal) { 1.0 } else { -1.0 };

    let psis: Vec<f64> = match classify(p, opts.class_tol) {
        OrbitClass::Elliptic => (0..n).map(|k| std::f64::consts::PI * k as f64 / n as f64).collect(),
        OrbitClass::Parabolic | OrbitClass::Hyperbolic => {
            let cap = opts.range_cap / p.a().x0;
            if !(peri.point.x0 < cap) {
                return Err(GeometryError::RangeCapTooSmall { cap, pericenter: peri.point.x0 });
            }
            let nn = peri.normal.square();
            let asymptote = if nn > 0.0 { (1.0 / nn.sqrt()).atan() } else { std::f64::consts::FRAC_PI_2 };
            let hi = cap_angle(&peri, asymptote, cap);
            let lo = -cap_angle(&peri, -asymptote, cap);
            (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
        }
    };
    Ok(psis.into_iter().map(|psi| peri.at(sense * psi)).collect())
}

/// Bisects for the angle in `(0, limit)` (or `(limit, 0)`) where the section
/// reaches height `cap`; returns its absolute value.
fn cap_angle(peri: &Pericenter, limit: f64, cap: f64) -> f64 {
    let mut inside = 0.0_f64;
    let mut outside = limit;
    for _ in 0..200 {
        let mid = 0.5 * (inside + outside);
        if mid == inside || mid == outside {
            break;
        }
        let x = peri.at(mid);
        if x.is_finite() && x.x0 > 0.0 && x.x0 <= cap {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    inside.abs()
}

/// Spatial parts of [`sample_orbit_lifted`] with default options.
pub fn sample_orbit(p: &MinkowskiOrbitParams, n: usize) -> Result<Vec<Vec3>, GeometryError> {
    sample_orbit_with(p, n, &SampleOptions::default())
}

pub fn sample_orbit_with(p: &MinkowskiOrbitParams, n: usize, opts: &SampleOptions) -> Result<Vec<Vec3>, GeometryError> {
    Ok(sample_orbit_lifted(p, n, opts)?.into_iter().map(MinkVec4::spatial).collect())
}
