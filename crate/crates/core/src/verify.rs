//! Seeded self-check of the invariant families, reported as JSON.

use serde::Serialize;

use crate::conic_geometry::{lift_to_cone, orbit_residuals, plane_residuals, sample_orbit};
use crate::dynamics::{
    acceleration, angular_momentum, drift_report, integrate, lenz_vector, synthesize_initial_state, IntegratorConfig,
    PhaseState, Trajectory,
};
use crate::linalg::{cross3, mdot, MinkVec4, Vec3};
use crate::lorentz::{
    act, act_raw, action_class, canonical_target, canonicalize, params_distance, random_element, sign_flip_witness,
    transport,
};
use crate::orbit_params::{
    classify, classify_energy, eccentricity, energy_euclidean, energy_minkowski, is_circle, magnetic_charge,
    orbit_normal, to_euclidean, to_minkowski, validate_minkowski, EuclideanOrbitParams, MinkowskiOrbitParams,
    OrbitClass, DEFAULT_CLASS_TOL, DEFAULT_MINKOWSKI_TOL,
};
use crate::sampling;

/// Integration horizon of the dynamical families.
pub const HORIZON: f64 = 50.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    pub count: usize,
    /// Added to every component of `l` before the validation family runs.
    pub perturb: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { seed: 0, count: 100, perturb: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyReport {
    pub name: &'static str,
    pub passed: bool,
    pub cases: usize,
    pub failures: usize,
    /// Largest residual seen, in the units of `tolerance`.
    pub worst: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub count: usize,
    pub perturb: f64,
    pub all_passed: bool,
    pub families: Vec<FamilyReport>,
}

struct Tally {
    name: &'static str,
    tolerance: f64,
    cases: usize,
    failures: usize,
    worst: f64,
}

impl Tally {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Tally { name, tolerance, cases: 0, failures: 0, worst: 0.0 }
    }

    /// Records a residual that must stay below the tolerance.
    fn residual(&mut self, r: f64) {
        self.cases += 1;
        if r.is_nan() || r >= self.tolerance {
            self.failures += 1;
        }
        if r.is_nan() || r > self.worst {
            self.worst = r;
        }
    }

    /// One case judged by `ok`, with `r` still tracked as the worst residual.
    fn record(&mut self, ok: bool, r: f64) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
        }
        if r.is_nan() || r > self.worst {
            self.worst = r;
        }
    }

    fn check(&mut self, ok: bool) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
        }
    }

    fn finish(self) -> FamilyReport {
        FamilyReport {
            name: self.name,
            passed: self.failures == 0 && self.cases > 0,
            cases: self.cases,
            failures: self.failures,
            worst: self.worst,
            tolerance: self.tolerance,
        }
    }
}

/// Max-norm error of `(A, L)` relative to the max-norm of the pair.
pub fn pair_relative_error(p: &EuclideanOrbitParams, q: &EuclideanOrbitParams) -> f64 {
    let scale = p.lenz().max_abs().max(p.angular_momentum().max_abs());
    let diff = (p.lenz() - q.lenz()).max_abs().max((p.angular_momentum() - q.angular_momentum()).max_abs());
    diff / scale
}

/// Largest of `|l.l + 1|`, `|a.l|` and `max(0, -a0)`.
pub fn minkowski_defect(q: &MinkowskiOrbitParams) -> f64 {
    (q.l().square() + 1.0).abs().max(mdot(q.a(), q.l()).abs()).max((-q.a().x0).max(0.0))
}

/// `|(1 - e^2) - (L^2 - mu^2) (1 - A^2) / |L - mu A|^2|`, relative to `max(1, |1 - e^2|)`.
pub fn eccentricity_identity_residual(p: &EuclideanOrbitParams) -> f64 {
    let e = eccentricity(p);
    let lhs = 1.0 - e * e;
    let rhs = p.collision_gap() / orbit_normal(p).norm_sq() * (1.0 - p.lenz().norm_sq());
    (lhs - rhs).abs() / lhs.abs().max(1.0)
}

/// Largest of `|a.x - 1|`, `|l.x|` and `|x.x| / max(1, x0^2)`.
///
/// The null condition is measured relative to `x0^2`: its rounding floor grows
/// quadratically with the distance from the origin.
pub fn cone_lift_residual(q: &MinkowskiOrbitParams, x: MinkVec4) -> f64 {
    let (ra, rl) = plane_residuals(q, x);
    let null = x.square().abs() / (x.x0 * x.x0).max(1.0);
    ra.abs().max(rl.abs()).max(null)
}

fn integrated(p: &EuclideanOrbitParams) -> Option<Trajectory> {
    let s0 = synthesize_initial_state(p);
    integrate(&s0, HORIZON, &IntegratorConfig::default()).ok()
}

/// `(v x acc) . (L - mu A)` at one state.
pub fn binormal_alignment(s: &PhaseState, normal: Vec3) -> f64 {
    let acc = acceleration(s.q, s.v, s.mu).unwrap_or(Vec3::ZERO);
    cross3(s.v, acc).dot(normal)
}

/// Radius bound `2 (1 + e) / (-2E)` for bounded orbits.
pub fn bounded_radius(p: &EuclideanOrbitParams) -> f64 {
    2.0 * (1.0 + eccentricity(p)) / (-2.0 * energy_euclidean(p))
}

/// Radius strictly increasing over samples with `t >= t_from`.
pub fn escapes_after(tr: &Trajectory, t_from: f64) -> bool {
    let radii: Vec<f64> = tr.samples.iter().filter(|s| s.t >= t_from).map(|s| s.q.norm()).collect();
    radii.len() >= 2 && radii.windows(2).all(|w| w[1] > w[0])
}

pub fn run(opts: &VerifyOptions) -> VerifyReport {
    let n = opts.count;
    let mut families = Vec::new();

    let mut rng = sampling::rng(opts.seed);
    let static_samples: Vec<EuclideanOrbitParams> = (0..10 * n).map(|_| sampling::box_params(&mut rng)).collect();

    let mut bijection = Tally::new("bijection_round_trip", 1e-12);
    let mut energy = Tally::new("energy_coherence", 1e-12);
    let mut ecc = Tally::new("eccentricity_identity", 1e-12);
    let mut class = Tally::new("classification_coherence", 0.0);
    for p in &static_samples {
        let Ok(q) = to_minkowski(p) else {
            bijection.check(false);
            continue;
        };
        bijection.residual(pair_relative_error(p, &to_euclidean(&q)).max(minkowski_defect(&q)));
        let e = energy_euclidean(p);
        energy.residual((e - energy_minkowski(&q)).abs() / (1.0 + e.abs()));
        ecc.residual(eccentricity_identity_residual(p));
        class.check(classify(&q, DEFAULT_CLASS_TOL) == classify_energy(e, DEFAULT_CLASS_TOL));
    }

    let mut validation = Tally::new("validation", DEFAULT_MINKOWSKI_TOL);
    for p in static_samples.iter().take(n) {
        let Ok(q) = to_minkowski(p) else {
            validation.check(false);
            continue;
        };
        let l = q.l() + MinkVec4::new(1.0, 1.0, 1.0, 1.0) * opts.perturb;
        let q = MinkowskiOrbitParams::new_unchecked(q.a(), l);
        let defect = minkowski_defect(&q);
        validation.record(validate_minkowski(&q, DEFAULT_MINKOWSKI_TOL).is_ok(), defect);
    }

    let mut synthesis = Tally::new("synthesis_exactness", 1e-10);
    for p in static_samples.iter().take(n) {
        let s = synthesize_initial_state(p);
        let l = angular_momentum(&s).map(|l| (l - p.angular_momentum()).max_abs());
        let a = lenz_vector(&s).map(|a| (a - p.lenz()).max_abs());
        synthesis.residual(l.unwrap_or(f64::NAN).max(a.unwrap_or(f64::NAN)));
    }

    let mut conservation = Tally::new("conservation", 1e-6);
    let mut charge = Tally::new("charge_constraint_along_flow", 1e-8);
    let mut locus = Tally::new("orbit_locus", 1e-6);
    let mut orientation = Tally::new("orientation", 0.0);
    let mut conic = Tally::new("conic_samples", 1e-9);
    let mut lift = Tally::new("cone_lift", 1e-9);
    for i in 0..n {
        let (cls, p) = sampling::mixed_params(&mut rng, i);
        let normal = orbit_normal(&p);
        let mu = magnetic_charge(&p);
        let Some(tr) = integrated(&p) else {
            conservation.check(false);
            continue;
        };
        let d = drift_report(&tr);
        conservation.residual(d.max());
        for s in &tr.samples {
            let l = angular_momentum(s).unwrap_or(Vec3::ZERO);
            let a = lenz_vector(s).unwrap_or(Vec3::ZERO);
            charge.residual((l.dot(a) - mu).abs());
            locus.residual(orbit_residuals(&p, s.q).map(|r| r.max_abs()).unwrap_or(f64::NAN));
            orientation.check(binormal_alignment(s, normal) > 0.0);
        }
        match cls {
            OrbitClass::Elliptic => {
                let bound = bounded_radius(&p);
                class.check(tr.samples.iter().all(|s| s.q.norm() < bound));
            }
            _ => class.check(escapes_after(&tr, HORIZON / 2.0)),
        }
        if let Ok(q) = to_minkowski(&p) {
            for r in sample_orbit(&q, 64).unwrap_or_default() {
                conic.residual(orbit_residuals(&p, r).map(|x| x.max_abs()).unwrap_or(f64::NAN));
                let x = lift_to_cone(r).unwrap_or(MinkVec4::ZERO);
                lift.residual(cone_lift_residual(&q, x));
            }
        }
    }

    let mut circle = Tally::new("circular_orbit", 1e-6);
    let s0 = PhaseState { t: 0.0, q: Vec3::E1, v: Vec3::E2, mu: 0.0 };
    match integrate(&s0, std::f64::consts::TAU, &IntegratorConfig::default()) {
        Ok(tr) => {
            let end = tr.last();
            circle.residual((end.q - s0.q).max_abs().max((end.v - s0.v).max_abs()));
        }
        Err(_) => circle.check(false),
    }
    let circ = EuclideanOrbitParams::new_unchecked(Vec3::ZERO, Vec3::E3);
    circle.check(is_circle(&circ, 1e-12));

    let mut canon = Tally::new("canonicalization", 1e-8);
    let mut trans = Tally::new("transport", 1e-7);
    let mut ellipses = Vec::new();
    while ellipses.len() < n {
        let p = sampling::box_params(&mut rng);
        if let Ok(q) = to_minkowski(&p) {
            if action_class(&q, DEFAULT_CLASS_TOL) == Ok(OrbitClass::Elliptic) {
                ellipses.push(q);
            }
        }
    }
    let parabolas: Vec<_> = (0..n).map(|_| sampling::parabolic_params(&mut rng)).collect();
    for q in ellipses.iter().chain(&parabolas) {
        let target = canonical_target(classify(q, DEFAULT_CLASS_TOL));
        match (canonicalize(q, DEFAULT_CLASS_TOL), target) {
            (Ok(g), Some(t)) => {
                let (a, l) = act_raw(&g, q);
                canon.residual(params_distance(&MinkowskiOrbitParams::new_unchecked(a, l), &t));
            }
            _ => canon.check(false),
        }
    }
    let mut pairs: Vec<(MinkowskiOrbitParams, MinkowskiOrbitParams)> = Vec::new();
    for k in 0..n {
        pairs.push((ellipses[k], ellipses[(k + 1) % n]));
        pairs.push((parabolas[k], parabolas[(k + 1) % n]));
        let zero = to_minkowski(&sampling::elliptic_with_charge(&mut rng, 0.0));
        let one = to_minkowski(&sampling::elliptic_with_charge(&mut rng, 1.0));
        if let (Ok(z), Ok(o)) = (zero, one) {
            pairs.push((z, o));
        }
    }
    for (p1, p2) in &pairs {
        let res = transport(p1, p2, DEFAULT_CLASS_TOL).map(|g| act_raw(&g, p1));
        match res {
            Ok((a, l)) => {
                let scale = p2.a().max_abs().max(p2.l().max_abs()).max(1.0);
                let image = MinkowskiOrbitParams::new_unchecked(a, l);
                trans.residual(params_distance(&image, p2) / scale);
            }
            Err(_) => trans.check(false),
        }
    }

    let mut signs = Tally::new("sign_preservation", 0.0);
    for k in 0..10 * n {
        let g = random_element(opts.seed.wrapping_mul(1_000_003).wrapping_add(k as u64), 3.0);
        let dir = sampling::unit_vec(&mut rng);
        let a0 = 0.1 + 2.0 * (k as f64 / (10 * n) as f64);
        let spatial = if k % 2 == 0 { dir * a0 } else { dir * (0.5 * a0) };
        let a = MinkVec4::from_parts(a0, spatial);
        signs.check((g.transform().apply(a) * g.lambda()).x0 > 0.0);
    }
    for _ in 0..n {
        let q = to_minkowski(&sampling::hyperbolic_params(&mut rng));
        let flipped = q.ok().and_then(|q| {
            let w = sign_flip_witness(q.a(), DEFAULT_CLASS_TOL)?;
            Some(matches!(act(&w, &q), Err(crate::lorentz::LorentzError::SignFlip { .. })))
        });
        signs.check(flipped == Some(true));
    }

    for t in [
        bijection,
        energy,
        ecc,
        class,
        validation,
        synthesis,
        conservation,
        charge,
        locus,
        orientation,
        conic,
        lift,
        circle,
        canon,
        trans,
        signs,
    ] {
        families.push(t.finish());
    }
    let all_passed = families.iter().all(|f| f.passed);
    VerifyReport { seed: opts.seed, count: n, perturb: opts.perturb, all_passed, families }
}
