//! Geometry and dynamics of oriented MICZ-Kepler orbits.
//!
//! The MICZ-Kepler problem is the Kepler problem coupled to a magnetic
//! monopole of charge `mu`, with equation of motion
//!
//! ```text
//! r'' = -r' x B + (mu^2 / r^4 - 1 / r^3) r,    B = mu r / r^3.
//! ```
//!
//! Its non-colliding oriented orbits are labelled either by the conserved
//! pair `(A, L)` ([`orbit_params::EuclideanOrbitParams`]) or by a pair of
//! Minkowski vectors `(a, l)` ([`orbit_params::MinkowskiOrbitParams`]). In the
//! second picture the group `O+(1,3) x R+` acts linearly, and it acts
//! transitively on elliptic orbits and on parabolic orbits ([`lorentz`]).

// `!(x < y)` is used on purpose so that NaN falls into the reject branch
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod conic_geometry;
pub mod dynamics;
pub mod linalg;
pub mod lorentz;
pub mod orbit_params;
pub mod sampling;
pub mod verify;
