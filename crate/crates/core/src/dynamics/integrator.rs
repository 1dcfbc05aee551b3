//! Explicit Runge-Kutta integration of the equation of motion.
//!
//! The adaptive driver is Dormand-Prince 8(5,3) with Hairer's step-size
//! controller. The fixed-step driver uses the same eighth-order stages
//! without error control.

use serde::{Deserialize, Serialize};

use super::{accel_unchecked, angular_momentum, energy, lenz_vector, DynamicsError, PhaseState};
use crate::linalg::Vec3;

type State = [f64; 6];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig { rel_tol: 1e-10, abs_tol: 1e-12, max_step: 1.0, max_steps: 1_000_000 }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(DynamicsError::InvalidConfig("rel_tol must be positive"));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(DynamicsError::InvalidConfig("abs_tol must be positive"));
        }
        if !(self.max_step > 0.0) {
            return Err(DynamicsError::InvalidConfig("max_step must be positive"));
        }
        if self.max_steps == 0 {
            return Err(DynamicsError::InvalidConfig("max_steps must be positive"));
        }
        Ok(())
    }

    /// Radius below which integration stops with `NearCollision`.
    pub fn collision_radius(&self) -> f64 {
        self.abs_tol.sqrt()
    }
}

/// Accepted steps of one integration, starting with the initial state.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<PhaseState>,
    pub config_echo: IntegratorConfig,
}

impl Trajectory {
    pub fn last(&self) -> &PhaseState {
        self.samples.last().expect("trajectory has at least the initial sample")
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct DriftReport {
    pub max_dL: f64,
    pub max_dA: f64,
    pub max_dE: f64,
}

impl DriftReport {
    pub fn max(&self) -> f64 {
        self.max_dL.max(self.max_dA).max(self.max_dE)
    }
}

/// Largest deviation of `L`, `A` and `E` from their values at the first sample.
pub fn drift_report(tr: &Trajectory) -> DriftReport {
    let Some(first) = tr.samples.first() else {
        return DriftReport::default();
    };
    let l0 = angular_momentum(first).expect("trajectory samples avoid the origin");
    let a0 = lenz_vector(first).expect("trajectory samples avoid the origin");
    let e0 = energy(first).expect("trajectory samples avoid the origin");
    let mut rep = DriftReport::default();
    for s in &tr.samples[1..] {
        let (Ok(l), Ok(a), Ok(e)) = (angular_momentum(s), lenz_vector(s), energy(s)) else {
            continue;
        };
        rep.max_dL = rep.max_dL.max((l - l0).norm());
        rep.max_dA = rep.max_dA.max((a - a0).norm());
        rep.max_dE = rep.max_dE.max((e - e0).abs());
    }
    rep
}

// Hairer's DOP853 tableau: 12 stages, A strictly lower triangular.
const A: [[f64; 12]; 12] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.05260015195876773, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0197250569845379, 0.0591751709536137, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.02958758547680685, 0.0, 0.08876275643042054, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2413651341592667, 0.0, -0.8845494793282861, 0.924834003261792, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.037037037037037035, 0.0, 0.0, 0.17082860872947386, 0.12546768756682242, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.037109375, 0.0, 0.0, 0.17025221101954405, 0.06021653898045596, -0.017578125, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [
        0.03709200011850479,
        0.0,
        0.0,
        0.17038392571223998,
        0.10726203044637328,
        -0.015319437748624402,
        0.008273789163814023,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        0.6241109587160757,
        0.0,
        0.0,
        -3.3608926294469414,
        -0.868219346841726,
        27.59209969944671,
        20.154067550477894,
        -43.48988418106996,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        0.47766253643826434,
        0.0,
        0.0,
        -2.4881146199716677,
        -0.590290826836843,
        21.230051448181193,
        15.279233632882423,
        -33.28821096898486,
        -0.020331201708508627,
        0.0,
        0.0,
        0.0,
    ],
    [
        -0.9371424300859873,
        0.0,
        0.0,
        5.186372428844064,
        1.0914373489967295,
        -8.149787010746927,
        -18.52006565999696,
        22.739487099350505,
        2.4936055526796523,
        -3.0467644718982196,
        0.0,
        0.0,
    ],
    [
        2.273310147516538,
        0.0,
        0.0,
        -10.53449546673725,
        -2.0008720582248625,
        -17.9589318631188,
        27.94888452941996,
        -2.8589982771350235,
        -8.87285693353063,
        12.360567175794303,
        0.6433927460157636,
        0.0,
    ],
];
// Nodes; the stages only need them through the row sums of A.
#[allow(dead_code)]
const C: [f64; 12] = [
    0.0,
    0.05260015195876773,
    0.0789002279381516,
    0.1183503419072274,
    0.2816496580927726,
    0.3333333333333333,
    0.25,
    0.3076923076923077,
    0.6512820512820513,
    0.6,
    0.8571428571428571,
    1.0,
];
const B: [f64; 12] = [
    0.054293734116568765,
    0.0,
    0.0,
    0.0,
    0.0,
    4.450312892752409,
    1.8915178993145003,
    -5.801203960010585,
    0.3111643669578199,
    -0.1521609496625161,
    0.20136540080403034,
    0.04471061572777259,
];
const ER: [f64; 12] = [
    0.01312004499419488,
    0.0,
    0.0,
    0.0,
    0.0,
    -1.2251564463762044,
    -0.4957589496572502,
    1.6643771824549864,
    -0.35032884874997366,
    0.3341791187130175,
    0.08192320648511571,
    -0.022355307863886294,
];
const BHH: [f64; 3] = [0.2440944881889764, 0.7338466882816118, 0.022058823529411766];

const SAFE: f64 = 0.9;
const FAC1: f64 = 0.333;
const FAC2: f64 = 6.0;
const EXPO: f64 = 1.0 / 8.0;

fn pack(q: Vec3, v: Vec3) -> State {
    [q.x1, q.x2, q.x3, v.x1, v.x2, v.x3]
}

fn unpack(t: f64, y: &State, mu: f64) -> PhaseState {
    PhaseState { t, q: Vec3::new(y[0], y[1], y[2]), v: Vec3::new(y[3], y[4], y[5]), mu }
}

fn rhs(y: &State, mu: f64) -> State {
    let q = Vec3::new(y[0], y[1], y[2]);
    let v = Vec3::new(y[3], y[4], y[5]);
    let acc = accel_unchecked(q, v, mu, q.norm());
    [v.x1, v.x2, v.x3, acc.x1, acc.x2, acc.x3]
}

fn radius(y: &State) -> f64 {
    (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt()
}

/// One DOP853 step from `y` with stage zero `f0 = rhs(y)`. Returns the new
/// state and the squared-sum fifth- and third-order error estimates
/// (unscaled by `h`).
fn dop853_step(y: &State, f0: &State, h: f64, mu: f64, tol: Option<(f64, f64)>) -> (State, f64, f64) {
    let mut k = [[0.0; 6]; 12];
    k[0] = *f0;
    for s in 1..12 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = A[s][j];
            if a != 0.0 {
                for i in 0..6 {
                    ys[i] += h * a * kj[i];
                }
            }
        }
        k[s] = rhs(&ys, mu);
    }
    let mut incr = [0.0; 6];
    for (b, ks) in B.iter().zip(&k) {
        if *b != 0.0 {
            for i in 0..6 {
                incr[i] += b * ks[i];
            }
        }
    }
    let mut y_new = *y;
    for i in 0..6 {
        y_new[i] += h * incr[i];
    }
    let Some((rtol, atol)) = tol else {
        return (y_new, 0.0, 0.0);
    };
    let (mut err5, mut err3) = (0.0, 0.0);
    for i in 0..6 {
        let sk = atol + rtol * y[i].abs().max(y_new[i].abs());
        let mut e5 = 0.0;
        for (er, ks) in ER.iter().zip(&k) {
            e5 += er * ks[i];
        }
        let e3 = incr[i] - BHH[0] * k[0][i] - BHH[1] * k[8][i] - BHH[2] * k[11][i];
        err5 += (e5 / sk).powi(2);
        err3 += (e3 / sk).powi(2);
    }
    (y_new, err5, err3)
}

fn weighted_norm(x: &State, y: &State, rtol: f64, atol: f64) -> f64 {
    let sum: f64 = x.iter().zip(y).map(|(xi, yi)| (xi / (atol + rtol * yi.abs())).powi(2)).sum();
    (sum / 6.0).sqrt()
}

/// Hairer's starting step guess.
fn initial_step(y: &State, f0: &State, mu: f64, cfg: &IntegratorConfig, h_max: f64) -> f64 {
    let (rtol, atol) = (cfg.rel_tol, cfg.abs_tol);
    let dnf = weighted_norm(f0, y, rtol, atol);
    let dny = weighted_norm(y, y, rtol, atol);
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 { 1e-6 } else { 0.01 * dny / dnf };
    h = h.min(h_max);
    let mut y1 = *y;
    for i in 0..6 {
        y1[i] += h * f0[i];
    }
    let f1 = rhs(&y1, mu);
    let mut df = [0.0; 6];
    for i in 0..6 {
        df[i] = f1[i] - f0[i];
    }
    let der2 = weighted_norm(&df, y, rtol, atol) / h;
    let der12 = der2.max(dnf);
    let h1 = if der12 <= 1e-15 { (1e-6f64).max(h * 1e-3) } else { (0.01 / der12).powf(EXPO) };
    let h0 = (100.0 * h).min(h1).min(h_max);
    if h0.is_finite() && h0 > 0.0 {
        h0
    } else {
        1e-6f64.min(h_max)
    }
}

fn check_start(s0: &PhaseState, t_span: f64) -> Result<(), DynamicsError> {
    if !(s0.t.is_finite() && s0.q.is_finite() && s0.v.is_finite() && s0.mu.is_finite()) {
        return Err(DynamicsError::NotFinite);
    }
    if s0.q.norm() == 0.0 {
        return Err(DynamicsError::OriginPoint);
    }
    if !(t_span > 0.0 && t_span.is_finite()) {
        return Err(DynamicsError::InvalidConfig("integration time must be positive"));
    }
    Ok(())
}

/// Adaptive integration over `[s0.t, s0.t + t_span]`; one sample per accepted step.
pub fn integrate(s0: &PhaseState, t_span: f64, cfg: &IntegratorConfig) -> Result<Trajectory, DynamicsError> {
    check_start(s0, t_span)?;
    cfg.validate()?;
    let guard = cfg.collision_radius();
    if s0.q.norm() < guard {
        return Err(DynamicsError::NearCollision { t: s0.t, r: s0.q.norm(), guard });
    }
    let mu = s0.mu;
    let t_end = s0.t + t_span;
    let h_max = cfg.max_step.min(t_span);

    let mut t = s0.t;
    let mut y = pack(s0.q, s0.v);
    let mut f0 = rhs(&y, mu);
    let mut h = initial_step(&y, &f0, mu, cfg, h_max);
    let mut samples = vec![*s0];
    let mut last_rejected = false;
    let mut steps = 0usize;

    while t < t_end {
        if steps >= cfg.max_steps {
            return Err(DynamicsError::StepLimitExceeded { max_steps: cfg.max_steps, t });
        }
        steps += 1;
        if h <= 16.0 * f64::EPSILON * t.abs().max(1.0) {
            return Err(DynamicsError::StepSizeUnderflow { t });
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }
        let (y_new, err5, err3) = dop853_step(&y, &f0, h, mu, Some((cfg.rel_tol, cfg.abs_tol)));
        let mut deno = err5 + 0.01 * err3;
        if deno <= 0.0 {
            deno = 1.0;
        }
        let err = h * err5 * (1.0 / (6.0 * deno)).sqrt();
        if !err.is_finite() || y_new.iter().any(|x| !x.is_finite()) {
            h *= 0.25;
            last_rejected = true;
            continue;
        }
        let fac11 = err.powf(EXPO);
        if err <= 1.0 {
            let t_new = if last { t_end } else { t + h };
            let r = radius(&y_new);
            if r < guard {
                return Err(DynamicsError::NearCollision { t: t_new, r, guard });
            }
            t = t_new;
            y = y_new;
            f0 = rhs(&y, mu);
            samples.push(unpack(t, &y, mu));
            let fac = (fac11 / SAFE).clamp(1.0 / FAC2, 1.0 / FAC1);
            let mut h_new = (h / fac).min(h_max);
            if last_rejected {
                h_new = h_new.min(h);
            }
            last_rejected = false;
            h = h_new;
        } else {
            h /= (fac11 / SAFE).min(1.0 / FAC1);
            last_rejected = true;
        }
    }
    Ok(Trajectory { samples, config_echo: *cfg })
}

/// Integration with `ceil(t_span / h)` equal steps and no error control.
///
/// The echoed configuration carries the actual step as `max_step` and the
/// step count as `max_steps`.
pub fn integrate_fixed(s0: &PhaseState, t_span: f64, h: f64) -> Result<Trajectory, DynamicsError> {
    check_start(s0, t_span)?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(DynamicsError::InvalidConfig("step must be positive"));
    }
    let n = (t_span / h).ceil().max(1.0) as usize;
    let step = t_span / n as f64;
    let cfg = IntegratorConfig { max_step: step, max_steps: n, ..IntegratorConfig::default() };
    let guard = cfg.collision_radius();
    let mu = s0.mu;
    let mut y = pack(s0.q, s0.v);
    let mut samples = Vec::with_capacity(n + 1);
    samples.push(*s0);
    for i in 1..=n {
        let f0 = rhs(&y, mu);
        let (y_new, _, _) = dop853_step(&y, &f0, step, mu, None);
        let t = if i == n { s0.t + t_span } else { s0.t + step * i as f64 };
        let r = radius(&y_new);
        if !(r >= guard) {
            return Err(DynamicsError::NearCollision { t, r, guard });
        }
        y = y_new;
        samples.push(unpack(t, &y, mu));
    }
    Ok(Trajectory { samples, config_echo: cfg })
}
