//! Euclidean 3-space and Minkowski 4-space primitives.
//!
//! The Minkowski product uses the signature `(+, -, -, -)`:
//! `a . b = a0 b0 - (a1 b1 + a2 b2 + a3 b3)`.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Index, Mul, Neg, Sub, SubAssign};

/// A vector in Euclidean 3-space.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec3 {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const E1: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const E2: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const E3: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub const fn new(x1: f64, x2: f64, x3: f64) -> Self {
        Vec3 { x1, x2, x3 }
    }

    pub fn from_array(v: [f64; 3]) -> Self {
        Vec3::new(v[0], v[1], v[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x1, self.x2, self.x3]
    }

    pub fn dot(self, other: Vec3) -> f64 {
        dot3(self, other)
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        cross3(self, other)
    }

    pub fn norm_sq(self) -> f64 {
        dot3(self, self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Unit vector in the same direction, or `None` for the zero vector.
    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        if n > 0.0 && n.is_finite() {
            Some(self / n)
        } else {
            None
        }
    }

    pub fn is_finite(self) -> bool {
        self.x1.is_finite() && self.x2.is_finite() && self.x3.is_finite()
    }

    /// Largest absolute component.
    pub fn max_abs(self) -> f64 {
        self.x1.abs().max(self.x2.abs()).max(self.x3.abs())
    }
}

/// Euclidean dot product.
pub fn dot3(u: Vec3, v: Vec3) -> f64 {
    u.x1 * v.x1 + u.x2 * v.x2 + u.x3 * v.x3
}

/// Right-handed cross product.
pub fn cross3(u: Vec3, v: Vec3) -> Vec3 {
    Vec3::new(u.x2 * v.x3 - u.x3 * v.x2, u.x3 * v.x1 - u.x1 * v.x3, u.x1 * v.x2 - u.x2 * v.x1)
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x1 + o.x1, self.x2 + o.x2, self.x3 + o.x3)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x1 - o.x1, self.x2 - o.x2, self.x3 - o.x3)
    }
}

impl SubAssign for Vec3 {
    fn sub_assign(&mut self, o: Vec3) {
        *self = *self - o;
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x1, -self.x2, -self.x3)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x1 * s, self.x2 * s, self.x3 * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x1 / s, self.x2 / s, self.x3 / s)
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x1,
            1 => &self.x2,
            2 => &self.x3,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

impl fmt::Display for Vec3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x1, self.x2, self.x3)
    }
}

/// A vector in Minkowski space `R^{1,3}`; `x0` is the temporal component.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MinkVec4 {
    pub x0: f64,
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl MinkVec4 {
    pub const ZERO: MinkVec4 = MinkVec4::new(0.0, 0.0, 0.0, 0.0);

    pub const fn new(x0: f64, x1: f64, x2: f64, x3: f64) -> Self {
        MinkVec4 { x0, x1, x2, x3 }
    }

    pub fn from_parts(x0: f64, spatial: Vec3) -> Self {
        MinkVec4::new(x0, spatial.x1, spatial.x2, spatial.x3)
    }

    pub fn from_array(v: [f64; 4]) -> Self {
        MinkVec4::new(v[0], v[1], v[2], v[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x0, self.x1, self.x2, self.x3]
    }

    /// Basis vector `e_i`, `i` in `0..4`.
    pub fn basis(i: usize) -> Self {
        let mut v = [0.0; 4];
        v[i] = 1.0;
        MinkVec4::from_array(v)
    }

    pub fn spatial(self) -> Vec3 {
        Vec3::new(self.x1, self.x2, self.x3)
    }

    /// Minkowski square `x . x`.
    pub fn square(self) -> f64 {
        mdot(self, self)
    }

    /// Euclidean dot product of the component arrays (not Lorentz invariant).
    pub fn euclid_dot(self, o: MinkVec4) -> f64 {
        self.x0 * o.x0 + self.x1 * o.x1 + self.x2 * o.x2 + self.x3 * o.x3
    }

    /// Euclidean length of the component array.
    pub fn euclid_norm(self) -> f64 {
        self.euclid_dot(self).sqrt()
    }

    /// Index lowering with `diag(1, -1, -1, -1)`; `mdot(u, v) == u.lowered().euclid_dot(v)`.
    pub fn lowered(self) -> MinkVec4 {
        MinkVec4::new(self.x0, -self.x1, -self.x2, -self.x3)
    }

    pub fn is_finite(self) -> bool {
        self.to_array().iter().all(|c| c.is_finite())
    }

    pub fn max_abs(self) -> f64 {
        self.to_array().iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

/// Lorentz product `u0 v0 - u . v`.
pub fn mdot(u: MinkVec4, v: MinkVec4) -> f64 {
    u.x0 * v.x0 - dot3(u.spatial(), v.spatial())
}

impl Add for MinkVec4 {
    type Output = MinkVec4;
    fn add(self, o: MinkVec4) -> MinkVec4 {
        MinkVec4::new(self.x0 + o.x0, self.x1 + o.x1, self.x2 + o.x2, self.x3 + o.x3)
    }
}

impl Sub for MinkVec4 {
    type Output = MinkVec4;
    fn sub(self, o: MinkVec4) -> MinkVec4 {
        MinkVec4::new(self.x0 - o.x0, self.x1 - o.x1, self.x2 - o.x2, self.x3 - o.x3)
    }
}

impl Neg for MinkVec4 {
    type Output = MinkVec4;
    fn neg(self) -> MinkVec4 {
        MinkVec4::new(-self.x0, -self.x1, -self.x2, -self.x3)
    }
}

impl Mul<f64> for MinkVec4 {
    type Output = MinkVec4;
    fn mul(self, s: f64) -> MinkVec4 {
        MinkVec4::new(self.x0 * s, self.x1 * s, self.x2 * s, self.x3 * s)
    }
}

impl Mul<MinkVec4> for f64 {
    type Output = MinkVec4;
    fn mul(self, v: MinkVec4) -> MinkVec4 {
        v * self
    }
}

impl Div<f64> for MinkVec4 {
    type Output = MinkVec4;
    fn div(self, s: f64) -> MinkVec4 {
        MinkVec4::new(self.x0 / s, self.x1 / s, self.x2 / s, self.x3 / s)
    }
}

impl Index<usize> for MinkVec4 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x0,
            1 => &self.x1,
            2 => &self.x2,
            3 => &self.x3,
            _ => panic!("MinkVec4 index {i} out of range"),
        }
    }
}

impl fmt::Display for MinkVec4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.x0, self.x1, self.x2, self.x3)
    }
}

/// Position of a Minkowski vector relative to the light cone.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CausalClass {
    TimelikeFuture,
    TimelikePast,
    NullFuture,
    NullPast,
    Spacelike,
    Zero,
}

/// Classifies `x` against the light cone. `|x . x| <= tol` counts as null.
pub fn causal_class(x: MinkVec4, tol: f64) -> CausalClass {
    if x.max_abs() <= tol {
        return CausalClass::Zero;
    }
    let sq = x.square();
    if sq.abs() <= tol {
        if x.x0 > 0.0 {
            CausalClass::NullFuture
        } else {
            CausalClass::NullPast
        }
    } else if sq > 0.0 {
        if x.x0 > 0.0 {
            CausalClass::TimelikeFuture
        } else {
            CausalClass::TimelikePast
        }
    } else {
        CausalClass::Spacelike
    }
}

/// Real 4x4 matrix, row-major.
pub type Mat4 = [[f64; 4]; 4];

pub const IDENTITY4: Mat4 = [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]];

/// The Minkowski metric `diag(1, -1, -1, -1)`.
pub const ETA: Mat4 = [[1.0, 0.0, 0.0, 0.0], [0.0, -1.0, 0.0, 0.0], [0.0, 0.0, -1.0, 0.0], [0.0, 0.0, 0.0, -1.0]];

pub fn mat4_mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn mat4_transpose(a: &Mat4) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for (i, row) in a.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            out[j][i] = *v;
        }
    }
    out
}

pub fn mat4_apply(m: &Mat4, x: MinkVec4) -> MinkVec4 {
    let v = x.to_array();
    let mut out = [0.0; 4];
    for (o, row) in out.iter_mut().zip(m.iter()) {
        *o = row.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
    }
    MinkVec4::from_array(out)
}

/// Determinant by cofactor expansion along the first row.
pub fn mat4_det(m: &Mat4) -> f64 {
    let minor = |skip: usize| -> f64 {
        let cols: Vec<usize> = (0..4).filter(|&c| c != skip).collect();
        let r = |i: usize, j: usize| m[i][cols[j]];
        r(1, 0) * (r(2, 1) * r(3, 2) - r(2, 2) * r(3, 1)) - r(1, 1) * (r(2, 0) * r(3, 2) - r(2, 2) * r(3, 0))
            + r(1, 2) * (r(2, 0) * r(3, 1) - r(2, 1) * r(3, 0))
    };
    (0..4)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * m[0][j] * minor(j)
        })
        .sum()
}

/// Determinant of the matrix whose columns are the four given vectors.
pub fn det4_columns(c: [MinkVec4; 4]) -> f64 {
    let mut m = [[0.0; 4]; 4];
    for (j, col) in c.iter().enumerate() {
        for (i, row) in m.iter_mut().enumerate() {
            row[j] = col[i];
        }
    }
    mat4_det(&m)
}

/// Largest absolute entry of `a - b`.
pub fn mat4_max_diff(a: &Mat4, b: &Mat4) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            worst = worst.max((a[i][j] - b[i][j]).abs());
        }
    }
    worst
}
