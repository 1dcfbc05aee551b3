//! The group `O+(1,3) x R+` and its action `(lambda, M) . (a, l) = (lambda M a, M l)`
//! on Minkowski orbit parameters.
//!
//! Canonicalization follows the transitivity argument step by step: a boost,
//! then a spatial rotation, then a scaling. Reflections are available as group
//! elements but never produced by [`canonicalize_elliptic`],
//! [`canonicalize_parabolic`] or [`transport`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{
    cross3, dot3, mat4_apply, mat4_det, mat4_max_diff, mat4_mul, mat4_transpose, Mat4, MinkVec4, Vec3, ETA, IDENTITY4,
};
use crate::orbit_params::{MinkowskiOrbitParams, OrbitClass, ParamError};

/// Tolerance on `|dir| = 1` for boost, rotation and reflection inputs.
pub const UNIT_TOL: f64 = 1e-12;
/// Tolerance on the defining relations of a Lorentz matrix.
pub const GROUP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LorentzError {
    #[error("direction has norm {norm}, expected 1")]
    NonUnitDirection { norm: f64 },
    #[error("matrix is not Lorentz: |M^T eta M - eta| = {residual:e}")]
    NotLorentz { residual: f64 },
    #[error("matrix is not orthochronous: M00 = {m00}")]
    NotOrthochronous { m00: f64 },
    #[error("determinant {det} is not +-1")]
    BadDeterminant { det: f64 },
    #[error("scaling {lambda} is not a positive finite number")]
    BadScaling { lambda: f64 },
    #[error("image has a0 = {a0} <= 0: the action is undefined on this orbit")]
    SignFlip { a0: f64 },
    #[error("expected {expected} orbit, found {found}")]
    WrongClass { expected: OrbitClass, found: OrbitClass },
    #[error("hyperbolic orbits carry no group action")]
    HyperbolicUnsupported,
    #[error("a.a = {a_sq:e} is within {band:e} of the class boundary")]
    ClassBoundary { a_sq: f64, band: f64 },
    #[error(transparent)]
    InvalidImage(#[from] ParamError),
}

/// An element of `O+(1,3)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LorentzTransform {
    m: Mat4,
}

impl LorentzTransform {
    pub const IDENTITY: LorentzTransform = LorentzTransform { m: IDENTITY4 };

    /// Checks `M^T eta M = eta`, `M00 >= 1` and `det M = +-1`, all to [`GROUP_TOL`]
    /// relative to `max(1, max |M_ij|^2)`.
    pub fn new(m: Mat4) -> Result<Self, LorentzError> {
        let t = LorentzTransform { m };
        t.check(GROUP_TOL)?;
        Ok(t)
    }

    pub fn new_unchecked(m: Mat4) -> Self {
        LorentzTransform { m }
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.m
    }

    pub fn apply(&self, x: MinkVec4) -> MinkVec4 {
        mat4_apply(&self.m, x)
    }

    pub fn det(&self) -> f64 {
        mat4_det(&self.m)
    }

    fn scale(&self) -> f64 {
        let big = self.m.iter().flatten().fold(0.0f64, |acc, x| acc.max(x.abs()));
        big.max(1.0)
    }

    /// `max |M^T eta M - eta|`.
    pub fn metric_residual(&self) -> f64 {
        let g = mat4_mul(&mat4_transpose(&self.m), &mat4_mul(&ETA, &self.m));
        mat4_max_diff(&g, &ETA)
    }

    pub fn check(&self, tol: f64) -> Result<(), LorentzError> {
        let s2 = self.scale().powi(2);
        let residual = self.metric_residual();
        if !(residual <= tol * s2) {
            return Err(LorentzError::NotLorentz { residual });
        }
        let m00 = self.m[0][0];
        if !(m00 >= 1.0 - tol * s2) {
            return Err(LorentzError::NotOrthochronous { m00 });
        }
        let det = self.det();
        if !((det.abs() - 1.0).abs() <= tol * s2 * s2) {
            return Err(LorentzError::BadDeterminant { det });
        }
        Ok(())
    }

    pub fn compose(&self, other: &LorentzTransform) -> LorentzTransform {
        LorentzTransform { m: mat4_mul(&self.m, &other.m) }
    }

    /// `eta M^T eta`.
    #[allow(clippy::needless_range_loop)]
    pub fn inverse(&self) -> LorentzTransform {
        let mut m = mat4_transpose(&self.m);
        for i in 1..4 {
            m[0][i] = -m[0][i];
            m[i][0] = -m[i][0];
        }
        LorentzTransform { m }
    }
}

fn check_unit(dir: Vec3) -> Result<(), LorentzError> {
    let norm = dir.norm();
    if (norm - 1.0).abs() <= UNIT_TOL {
        Ok(())
    } else {
        Err(LorentzError::NonUnitDirection { norm })
    }
}

/// Pure boost along `dir` with the given rapidity.
pub fn boost(dir: Vec3, rapidity: f64) -> Result<LorentzTransform, LorentzError> {
    check_unit(dir)?;
    let (sh, ch) = (rapidity.sinh(), rapidity.cosh());
    let d = dir.to_array();
    let mut m = IDENTITY4;
    m[0][0] = ch;
    for i in 0..3 {
        m[0][i + 1] = sh * d[i];
        m[i + 1][0] = sh * d[i];
        for j in 0..3 {
            m[i + 1][j + 1] += (ch - 1.0) * d[i] * d[j];
        }
    }
    Ok(LorentzTransform { m })
}

/// The pure boost taking `(1, 0, 0, 0)` to the future unit timelike vector `u`.
fn boost_to(u: MinkVec4) -> LorentzTransform {
    let g = u.x0;
    let s = u.spatial().to_array();
    let mut m = IDENTITY4;
    m[0][0] = g;
    for i in 0..3 {
        m[0][i + 1] = s[i];
        m[i + 1][0] = s[i];
        for j in 0..3 {
            m[i + 1][j + 1] += s[i] * s[j] / (1.0 + g);
        }
    }
    LorentzTransform { m }
}

fn spatial_block(r: [[f64; 3]; 3]) -> LorentzTransform {
    let mut m = IDENTITY4;
    for i in 0..3 {
        for j in 0..3 {
            m[i + 1][j + 1] = r[i][j];
        }
    }
    LorentzTransform { m }
}

/// Rotation by `angle` about `axis` (right-handed), acting on the spatial part.
pub fn rotation(axis: Vec3, angle: f64) -> Result<LorentzTransform, LorentzError> {
    check_unit(axis)?;
    let (s, c) = angle.sin_cos();
    let k = axis.to_array();
    let mut r = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            r[i][j] = (1.0 - c) * k[i] * k[j] + if i == j { c } else { 0.0 };
        }
    }
    r[0][1] -= s * k[2];
    r[0][2] += s * k[1];
    r[1][0] += s * k[2];
    r[1][2] -= s * k[0];
    r[2][0] -= s * k[1];
    r[2][1] += s * k[0];
    Ok(spatial_block(r))
}

/// Reflection in the plane orthogonal to `normal`.
pub fn spatial_reflection(normal: Vec3) -> Result<LorentzTransform, LorentzError> {
    check_unit(normal)?;
    let n = normal.to_array();
    let mut r = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            r[i][j] = if i == j { 1.0 } else { 0.0 } - 2.0 * n[i] * n[j];
        }
    }
    Ok(spatial_block(r))
}

/// Rotation with rows `u1, u2, u1 x u2`: sends `u1` to axis 1 and `u2` to axis 2.
fn align_rows(u1: Vec3, u2: Vec3) -> LorentzTransform {
    let u3 = cross3(u1, u2);
    spatial_block([u1.to_array(), u2.to_array(), u3.to_array()])
}

/// Unit vector orthogonal to the unit `u1`, from the Gram-Schmidt rejection of
/// `hint`; when `hint` is (nearly) parallel to `u1`, the first coordinate axis
/// with `|axis . u1| < 0.9` is used instead.
fn orthogonal_unit(u1: Vec3, hint: Vec3) -> Vec3 {
    let rej = hint - u1 * dot3(hint, u1);
    if rej.norm() > 1e-8 * hint.norm() {
        return rej / rej.norm();
    }
    let axis = [Vec3::E1, Vec3::E2, Vec3::E3].into_iter().find(|e| dot3(*e, u1).abs() < 0.9).unwrap_or(Vec3::E1);
    let rej = axis - u1 * dot3(axis, u1);
    rej / rej.norm()
}

/// An element `(lambda, M)` of `O+(1,3) x R+`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SymmetryJson", into = "SymmetryJson")]
pub struct OrientedSymmetry {
    lambda: f64,
    transform: LorentzTransform,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SymmetryJson {
    lambda: f64,
    matrix: Mat4,
}

impl TryFrom<SymmetryJson> for OrientedSymmetry {
    type Error = LorentzError;
    fn try_from(j: SymmetryJson) -> Result<Self, LorentzError> {
        OrientedSymmetry::new(j.lambda, LorentzTransform::new(j.matrix)?)
    }
}

impl From<OrientedSymmetry> for SymmetryJson {
    fn from(g: OrientedSymmetry) -> Self {
        SymmetryJson { lambda: g.lambda, matrix: g.transform.m }
    }
}

impl OrientedSymmetry {
    pub const IDENTITY: OrientedSymmetry = OrientedSymmetry { lambda: 1.0, transform: LorentzTransform::IDENTITY };

    pub fn new(lambda: f64, transform: LorentzTransform) -> Result<Self, LorentzError> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(LorentzError::BadScaling { lambda });
        }
        Ok(OrientedSymmetry { lambda, transform })
    }

    pub fn from_transform(transform: LorentzTransform) -> Self {
        OrientedSymmetry { lambda: 1.0, transform }
    }

    pub fn scaling(lambda: f64) -> Result<Self, LorentzError> {
        Self::new(lambda, LorentzTransform::IDENTITY)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn transform(&self) -> &LorentzTransform {
        &self.transform
    }

    /// Distance to the identity: `max(|lambda - 1|, max |M - I|)`.
    pub fn distance_to_identity(&self) -> f64 {
        (self.lambda - 1.0).abs().max(mat4_max_diff(&self.transform.m, &IDENTITY4))
    }
}

/// `(lambda1 lambda2, M1 M2)`: apply `g2` first.
pub fn compose(g1: &OrientedSymmetry, g2: &OrientedSymmetry) -> OrientedSymmetry {
    OrientedSymmetry { lambda: g1.lambda * g2.lambda, transform: g1.transform.compose(&g2.transform) }
}

pub fn inverse(g: &OrientedSymmetry) -> OrientedSymmetry {
    OrientedSymmetry { lambda: 1.0 / g.lambda, transform: g.transform.inverse() }
}

/// `(lambda M a, M l)`, validated with [`crate::orbit_params::DEFAULT_MINKOWSKI_TOL`].
pub fn act(g: &OrientedSymmetry, p: &MinkowskiOrbitParams) -> Result<MinkowskiOrbitParams, LorentzError> {
    let (a, l) = act_raw(g, p);
    if !(a.x0 > 0.0) {
        return Err(LorentzError::SignFlip { a0: a.x0 });
    }
    Ok(MinkowskiOrbitParams::new(a, l)?)
}

/// The image pair with no validation; `a0` may have either sign.
pub fn act_raw(g: &OrientedSymmetry, p: &MinkowskiOrbitParams) -> (MinkVec4, MinkVec4) {
    (g.transform.apply(p.a()) * g.lambda, g.transform.apply(p.l()))
}

/// `max(|a - a'|, |l - l'|)` in the max norm.
pub fn params_distance(p: &MinkowskiOrbitParams, q: &MinkowskiOrbitParams) -> f64 {
    (p.a() - q.a()).max_abs().max((p.l() - q.l()).max_abs())
}

pub fn canonical_elliptic() -> MinkowskiOrbitParams {
    MinkowskiOrbitParams::new_unchecked(MinkVec4::new(1.0, 0.0, 0.0, 0.0), MinkVec4::new(0.0, 1.0, 0.0, 0.0))
}

pub fn canonical_parabolic() -> MinkowskiOrbitParams {
    MinkowskiOrbitParams::new_unchecked(MinkVec4::new(1.0, 0.0, 1.0, 0.0), MinkVec4::new(0.0, 1.0, 0.0, 0.0))
}

/// Class of `p` for the group action, with `(tol, 10 tol]` on either side of
/// `a . a = 0` reported as [`LorentzError::ClassBoundary`].
pub fn action_class(p: &MinkowskiOrbitParams, tol: f64) -> Result<OrbitClass, LorentzError> {
    let a_sq = p.a().square();
    let band = 10.0 * tol;
    if a_sq.abs() <= tol {
        Ok(OrbitClass::Parabolic)
    } else if a_sq.abs() <= band {
        Err(LorentzError::ClassBoundary { a_sq, band })
    } else if a_sq > 0.0 {
        Ok(OrbitClass::Elliptic)
    } else {
        Ok(OrbitClass::Hyperbolic)
    }
}

fn expect_class(p: &MinkowskiOrbitParams, tol: f64, expected: OrbitClass) -> Result<(), LorentzError> {
    let found = action_class(p, tol)?;
    if found == expected {
        Ok(())
    } else {
        Err(LorentzError::WrongClass { expected, found })
    }
}

/// Element sending an elliptic `p` to `((1,0,0,0), (0,1,0,0))`.
pub fn canonicalize_elliptic(p: &MinkowskiOrbitParams, tol: f64) -> Result<OrientedSymmetry, LorentzError> {
    expect_class(p, tol, OrbitClass::Elliptic)?;
    let a = p.a();
    let m = a.square().sqrt();
    // boost with velocity a_spatial / a0 into the rest frame of a
    let u = a / m;
    let to_rest = boost_to(MinkVec4::from_parts(u.x0, -u.spatial()));
    let l1 = to_rest.apply(p.l());
    // l is now (approximately) purely spatial
    let u1 = l1.spatial() / l1.spatial().norm();
    let rot = align_rows(u1, orthogonal_unit(u1, Vec3::ZERO));
    let a0 = to_rest.apply(a).x0;
    OrientedSymmetry::new(1.0 / a0, rot.compose(&to_rest))
}

/// Element sending a parabolic `p` to `((1,0,1,0), (0,1,0,0))`.
pub fn canonicalize_parabolic(p: &MinkowskiOrbitParams, tol: f64) -> Result<OrientedSymmetry, LorentzError> {
    expect_class(p, tol, OrbitClass::Parabolic)?;
    let l = p.l();
    let ls = l.spatial();
    let ls_norm = ls.norm();
    let l_hat = ls / ls_norm;
    // boost along l_hat removing the time component of l
    let kill = boost_to(MinkVec4::from_parts(ls_norm, l_hat * -l.x0));
    let l1 = kill.apply(l);
    let a1 = kill.apply(p.a());
    let u1 = l1.spatial() / l1.spatial().norm();
    let u2 = orthogonal_unit(u1, a1.spatial());
    let rot = align_rows(u1, u2);
    let a2 = rot.apply(a1);
    OrientedSymmetry::new(1.0 / a2.x0, rot.compose(&kill))
}

pub fn canonicalize(p: &MinkowskiOrbitParams, tol: f64) -> Result<OrientedSymmetry, LorentzError> {
    match action_class(p, tol)? {
        OrbitClass::Elliptic => canonicalize_elliptic(p, tol),
        OrbitClass::Parabolic => canonicalize_parabolic(p, tol),
        OrbitClass::Hyperbolic => Err(LorentzError::HyperbolicUnsupported),
    }
}

pub fn canonical_target(class: OrbitClass) -> Option<MinkowskiOrbitParams> {
    match class {
        OrbitClass::Elliptic => Some(canonical_elliptic()),
        OrbitClass::Parabolic => Some(canonical_parabolic()),
        OrbitClass::Hyperbolic => None,
    }
}

/// Element sending `p1` to `p2`: `canonicalize(p2)^-1 . canonicalize(p1)`.
pub fn transport(
    p1: &MinkowskiOrbitParams,
    p2: &MinkowskiOrbitParams,
    tol: f64,
) -> Result<OrientedSymmetry, LorentzError> {
    let c1 = action_class(p1, tol)?;
    let c2 = action_class(p2, tol)?;
    if c1 == OrbitClass::Hyperbolic || c2 == OrbitClass::Hyperbolic {
        return Err(LorentzError::HyperbolicUnsupported);
    }
    if c1 != c2 {
        return Err(LorentzError::WrongClass { expected: c1, found: c2 });
    }
    let g1 = canonicalize(p1, tol)?;
    let g2 = canonicalize(p2, tol)?;
    Ok(compose(&inverse(&g2), &g1))
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    let z: f64 = rng.gen_range(-1.0..=1.0);
    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let s = (1.0 - z * z).max(0.0).sqrt();
    Vec3::new(s * phi.cos(), s * phi.sin(), z)
}

/// A reproducible element: reflection with probability 1/2, a rotation about
/// a uniform axis, a boost with rapidity uniform in `[-max_rapidity, max_rapidity]`,
/// and a scaling log-uniform in `[1/4, 4]`.
pub fn random_element(seed: u64, max_rapidity: f64) -> OrientedSymmetry {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reflect = if rng.gen_bool(0.5) {
        spatial_reflection(random_unit(&mut rng)).expect("unit normal")
    } else {
        LorentzTransform::IDENTITY
    };
    let angle = rng.gen_range(0.0..std::f64::consts::TAU);
    let rot = rotation(random_unit(&mut rng), angle).expect("unit axis");
    let rapidity = if max_rapidity > 0.0 { rng.gen_range(-max_rapidity..=max_rapidity) } else { 0.0 };
    let b = boost(random_unit(&mut rng), rapidity).expect("unit direction");
    let lambda = 4f64.powf(rng.gen_range(-1.0..=1.0));
    OrientedSymmetry { lambda, transform: b.compose(&rot.compose(&reflect)) }
}

/// For a spacelike `a`, a boost whose image of `a` has negative time part.
///
/// The boost runs along `-a_spatial / |a_spatial|` with speed halfway between
/// `a0 / |a_spatial|` and 1. Returns `None` unless `a . a < -tol`.
pub fn sign_flip_witness(a: MinkVec4, tol: f64) -> Option<OrientedSymmetry> {
    if !(a.square() < -tol) {
        return None;
    }
    let s = a.spatial();
    let norm = s.norm();
    let beta = 0.5 * (a.x0 / norm + 1.0);
    let b = boost(s / -norm, beta.atanh()).ok()?;
    Some(OrientedSymmetry::from_transform(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbit_params::{to_euclidean, to_minkowski, EuclideanOrbitParams, DEFAULT_CLASS_TOL};
    use std::f64::consts::PI;

    const TOL: f64 = DEFAULT_CLASS_TOL;

    fn mink(a: [f64; 3], l: [f64; 3]) -> MinkowskiOrbitParams {
        to_minkowski(&EuclideanOrbitParams::new(Vec3::from_array(a), Vec3::from_array(l)).unwrap()).unwrap()
    }

    #[test]
    fn boost_examples() {
        let id = boost(Vec3::E1, 0.0).unwrap();
        assert_eq!(id.matrix(), &IDENTITY4);
        let chi = 0.7;
        let b = boost(Vec3::E1, chi).unwrap();
        let x = b.apply(MinkVec4::new(1.0, 0.0, 0.0, 0.0));
        assert!((x - MinkVec4::new(chi.cosh(), chi.sinh(), 0.0, 0.0)).max_abs() < 1e-15);
        assert_eq!(b.matrix()[0][0], chi.cosh());
        assert!((b.det() - 1.0).abs() < 1e-12);
        assert_eq!(b.matrix(), &mat4_transpose(b.matrix()));
        let d = Vec3::new(1.0, 2.0, -2.0) / 3.0;
        let round = boost(d, 1.3).unwrap().compose(&boost(d, -1.3).unwrap());
        assert!(mat4_max_diff(round.matrix(), &IDENTITY4) < 1e-12);
        assert!(matches!(boost(Vec3::new(1.0, 1.0, 0.0), 0.1), Err(LorentzError::NonUnitDirection { .. })));
    }

    #[test]
    fn rotation_and_reflection_examples() {
        let r = rotation(Vec3::E3, PI / 2.0).unwrap();
        let x = r.apply(MinkVec4::new(0.0, 1.0, 0.0, 0.0));
        assert!((x - MinkVec4::new(0.0, 0.0, 1.0, 0.0)).max_abs() < 1e-15);
        assert!((r.det() - 1.0).abs() < 1e-14);

        let f = spatial_reflection(Vec3::E1).unwrap();
        assert_eq!(f.apply(MinkVec4::new(0.0, 1.0, 0.0, 0.0)), MinkVec4::new(0.0, -1.0, 0.0, 0.0));
        assert_eq!(f.apply(MinkVec4::new(1.0, 0.0, 0.0, 0.0)), MinkVec4::new(1.0, 0.0, 0.0, 0.0));
        assert_eq!(f.det(), -1.0);
        assert_eq!(f.matrix()[0][0], 1.0);
        assert!(LorentzTransform::new(*f.matrix()).is_ok());
        assert!(rotation(Vec3::new(0.0, 0.0, 2.0), 1.0).is_err());
        assert!(spatial_reflection(Vec3::ZERO).is_err());
    }

    #[test]
    fn transform_checks_reject_non_lorentz_matrices() {
        let mut m = IDENTITY4;
        m[1][1] = 2.0;
        assert!(matches!(LorentzTransform::new(m), Err(LorentzError::NotLorentz { .. })));
        let mut t = IDENTITY4;
        t[0][0] = -1.0;
        assert!(matches!(LorentzTransform::new(t), Err(LorentzError::NotOrthochronous { .. })));
    }

    #[test]
    fn group_structure() {
        let g = random_element(7, 1.5);
        let id = OrientedSymmetry::IDENTITY;
        assert_eq!(compose(&id, &g), g);
        let inv = inverse(&g);
        assert_eq!(inv.lambda(), 1.0 / g.lambda());
        let eta_t_eta = mat4_mul(&ETA, &mat4_mul(&mat4_transpose(g.transform().matrix()), &ETA));
        assert_eq!(inv.transform().matrix(), &eta_t_eta);
        assert!(compose(&g, &inv).distance_to_identity() < 1e-10);
    }

    #[test]
    fn action_examples() {
        let p = canonical_elliptic();
        assert_eq!(act(&OrientedSymmetry::IDENTITY, &p).unwrap(), p);
        let q = act(&OrientedSymmetry::scaling(2.0).unwrap(), &p).unwrap();
        assert_eq!(q.a().to_array(), [2.0, 0.0, 0.0, 0.0]);
        assert_eq!(q.l().to_array(), [0.0, 1.0, 0.0, 0.0]);
        let e = to_euclidean(&q);
        assert_eq!(e.lenz(), Vec3::ZERO);
        assert!((e.angular_momentum() - Vec3::new(0.5f64.sqrt(), 0.0, 0.0)).max_abs() < 1e-15);
    }

    #[test]
    fn spacelike_a_can_be_flipped() {
        let p =
            MinkowskiOrbitParams::new(MinkVec4::new(1.0, 0.0, 2.0, 0.0), MinkVec4::new(0.0, 1.0, 0.0, 0.0)).unwrap();
        let g = sign_flip_witness(p.a(), TOL).unwrap();
        // speed 3/4 along -y, above the threshold 1/2
        assert!((g.transform().matrix()[0][0] - 1.0 / (1.0f64 - 0.5625).sqrt()).abs() < 1e-12);
        assert!(matches!(act(&g, &p), Err(LorentzError::SignFlip { a0 }) if a0 < 0.0));
        assert!(sign_flip_witness(canonical_elliptic().a(), TOL).is_none());
        assert!(sign_flip_witness(canonical_parabolic().a(), TOL).is_none());
    }

    fn canon_residual(g: &OrientedSymmetry, p: &MinkowskiOrbitParams, target: &MinkowskiOrbitParams) -> f64 {
        let (a, l) = act_raw(g, p);
        params_distance(&MinkowskiOrbitParams::new_unchecked(a, l), target)
    }

    #[test]
    fn canonicalize_elliptic_examples() {
        let c = canonical_elliptic();
        let g = canonicalize_elliptic(&c, TOL).unwrap();
        assert!(canon_residual(&g, &c, &c) < 1e-12);
        assert!(g.distance_to_identity() < 1e-12);

        let p = mink([0.5, 0.0, 0.0], [0.0, 0.0, 1.0]);
        let g = canonicalize_elliptic(&p, TOL).unwrap();
        assert!(canon_residual(&g, &p, &c) < 1e-8);
        assert!(g.transform().det() > 0.0);

        let p = mink([0.5, 0.0, 0.5], [0.0, 0.0, 2.0]);
        let g = canonicalize_elliptic(&p, TOL).unwrap();
        let image = act(&g, &p).unwrap();
        assert!(params_distance(&image, &c) < 1e-8);
        let e = to_euclidean(&image);
        assert!(e.lenz().dot(e.angular_momentum()).abs() < 1e-8);

        assert!(matches!(
            canonicalize_elliptic(&canonical_parabolic(), TOL),
            Err(LorentzError::WrongClass { found: OrbitClass::Parabolic, .. })
        ));
    }

    #[test]
    fn canonicalize_parabolic_examples() {
        let c = canonical_parabolic();
        let g = canonicalize_parabolic(&c, TOL).unwrap();
        assert!(canon_residual(&g, &c, &c) < 1e-12);

        let p = mink([0.0, 1.0, 0.0], [1.0, 0.0, 0.0]);
        let g = canonicalize_parabolic(&p, TOL).unwrap();
        assert!(canon_residual(&g, &p, &c) < 1e-12);

        for seed in 0..50 {
            let h = random_element(seed, 2.0);
            let p = act(&h, &c).unwrap();
            let g = canonicalize_parabolic(&p, TOL).unwrap();
            assert!(canon_residual(&g, &p, &c) < 1e-8, "seed {seed}");
            assert!(g.transform().det() > 0.0);
        }
    }

    #[test]
    fn near_boundary_is_rejected() {
        let a0 = 1.0;
        let a_sq = 5.0 * TOL;
        let ax = (a0 * a0 - a_sq).sqrt();
        let p = MinkowskiOrbitParams::new(MinkVec4::new(a0, 0.0, ax, 0.0), MinkVec4::new(0.0, 1.0, 0.0, 0.0)).unwrap();
        assert!(matches!(canonicalize_elliptic(&p, TOL), Err(LorentzError::ClassBoundary { .. })));
        assert!(matches!(canonicalize_parabolic(&p, TOL), Err(LorentzError::ClassBoundary { .. })));
    }

    #[test]
    fn transport_examples() {
        let p = mink([0.5, 0.0, 0.0], [0.0, 0.0, 1.0]);
        let g = transport(&p, &p, TOL).unwrap();
        assert!(params_distance(&act(&g, &p).unwrap(), &p) < 1e-10);

        let p1 = canonical_elliptic();
        let p2 = mink([0.5, 0.0, 0.5], [0.0, 0.0, 2.0]);
        let g = transport(&p1, &p2, TOL).unwrap();
        assert!(params_distance(&act(&g, &p1).unwrap(), &p2) < 1e-7);

        assert!(matches!(transport(&p1, &canonical_parabolic(), TOL), Err(LorentzError::WrongClass { .. })));
        let hyp = mink([1.5, 0.0, 0.0], [0.0, 0.0, 1.0]);
        assert!(matches!(transport(&hyp, &hyp, TOL), Err(LorentzError::HyperbolicUnsupported)));
    }

    #[test]
    fn random_elements_are_reproducible_and_valid() {
        assert_eq!(random_element(42, 2.0), random_element(42, 2.0));
        assert_ne!(random_element(42, 2.0), random_element(43, 2.0));
        let mut reflections = 0;
        for seed in 0..1000 {
            let g = random_element(seed, 2.0);
            g.transform().check(GROUP_TOL).unwrap();
            assert!(g.transform().metric_residual() < 1e-10);
            assert!((0.25..=4.0).contains(&g.lambda()));
            if g.transform().det() < 0.0 {
                reflections += 1;
            }
            let p = mink([0.3, -0.2, 0.1], [0.5, 1.0, -0.4]);
            act(&g, &p).unwrap();
        }
        assert!(reflections > 400 && reflections < 600);
    }

    #[test]
    fn json_form() {
        let g = random_element(3, 1.0);
        let s = serde_json::to_string(&g).unwrap();
        assert!(s.starts_with("{\"lambda\":"));
        assert!(s.contains("\"matrix\":[["));
        let back: OrientedSymmetry = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        let bad = r#"{"lambda":1.0,"matrix":[[1,0,0,0],[0,2,0,0],[0,0,1,0],[0,0,0,1]]}"#;
        assert!(serde_json::from_str::<OrientedSymmetry>(bad).is_err());
        let neg = r#"{"lambda":-1.0,"matrix":[[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]]}"#;
        assert!(serde_json::from_str::<OrientedSymmetry>(neg).is_err());
    }
}
