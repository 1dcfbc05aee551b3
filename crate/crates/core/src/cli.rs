//! The `micz` command line.
//!
//! Exit codes: 0 success, 1 failed check or output error, 2 invalid input,
//! 3 integrator failure, 4 class error.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::conic_geometry::{sample_orbit_lifted, SampleOptions, DEFAULT_RANGE_CAP};
use crate::dynamics::{
    drift_report, integrate, synthesize_initial_state, DynamicsError, IntegratorConfig, PhaseState, Trajectory,
};
use crate::linalg::{MinkVec4, Vec3};
use crate::lorentz::{act_raw, canonical_target, canonicalize, params_distance, transport, LorentzError};
use crate::orbit_params::{
    classify, eccentricity, energy_euclidean, is_circle, magnetic_charge, to_euclidean, to_minkowski,
    EuclideanOrbitParams, MinkowskiOrbitParams, DEFAULT_CLASS_TOL,
};
use crate::verify::{self, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_INTEGRATOR: i32 = 3;
pub const EXIT_CLASS: i32 = 4;

/// Residual below which canonicalize and transport succeed.
pub const ACTION_RESIDUAL_TOL: f64 = 1e-7;
const CIRCLE_TOL: f64 = 1e-12;

#[derive(Parser, Debug)]
#[command(name = "micz", version, about = "Orbits of the Kepler problem with a magnetic monopole")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Convert a parameter file between (A, L) and (a, l).
    Convert {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Target form; defaults to the other one.
        #[arg(long, value_enum)]
        to: Option<Form>,
    },
    /// Charge, energy, eccentricity, class and circularity of an orbit.
    Info {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_CLASS_TOL)]
        tol: f64,
    },
    /// Points of the orbit as CSV `x,y,z,x0`.
    Sample {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 64)]
        n: usize,
        /// Largest `x0 * a0` for unbounded orbits.
        #[arg(long = "range-cap", default_value_t = DEFAULT_RANGE_CAP)]
        range_cap: f64,
        #[arg(long, default_value_t = DEFAULT_CLASS_TOL)]
        tol: f64,
    },
    /// Integrate from a state or parameter file; CSV `t,qx,qy,qz,vx,vy,vz`.
    ///
    /// The drift report goes to `--report` if given, otherwise to stderr.
    Integrate {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long = "T", default_value_t = 50.0)]
        t: f64,
        #[arg(long = "rel-tol", default_value_t = 1e-10)]
        rel_tol: f64,
        #[arg(long = "abs-tol", default_value_t = 1e-12)]
        abs_tol: f64,
        #[arg(long = "max-step", default_value_t = 1.0)]
        max_step: f64,
        #[arg(long = "max-steps", default_value_t = 1_000_000)]
        max_steps: usize,
    },
    /// Group element taking an orbit to its canonical representative.
    ///
    /// Prints the element as JSON and the residual on stderr.
    Canonicalize {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_CLASS_TOL)]
        tol: f64,
    },
    /// Group element taking the first orbit to the second.
    Transport {
        /// Source and target parameter files, in that order.
        #[arg(short, long, num_args = 1, required = true)]
        input: Vec<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_CLASS_TOL)]
        tol: f64,
    },
    /// Run the invariant suite on seeded random data.
    Verify {
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Offset added to `l` in the validation family.
        #[arg(long, default_value_t = 0.0)]
        perturb: f64,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum Form {
    Euclidean,
    Minkowski,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EuclideanFile {
    #[serde(rename = "A")]
    a: [f64; 3],
    #[serde(rename = "L")]
    l: [f64; 3],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MinkowskiFile {
    a: [f64; 4],
    l: [f64; 4],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StateFile {
    #[serde(default)]
    t: f64,
    q: [f64; 3],
    v: [f64; 3],
    mu: f64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum InputFile {
    Euclidean(EuclideanFile),
    Minkowski(MinkowskiFile),
    State(StateFile),
}

#[derive(Serialize)]
struct Info {
    mu: f64,
    energy: f64,
    eccentricity: f64,
    class: String,
    is_circle: bool,
}

/// A loaded parameter file, in the form it was written.
enum Params {
    Euclidean(EuclideanOrbitParams),
    Minkowski(MinkowskiOrbitParams),
}

impl Params {
    fn euclidean(&self) -> EuclideanOrbitParams {
        match self {
            Params::Euclidean(p) => *p,
            Params::Minkowski(q) => to_euclidean(q),
        }
    }

    fn minkowski(&self) -> Result<MinkowskiOrbitParams, Failure> {
        match self {
            Params::Euclidean(p) => to_minkowski(p).map_err(|e| Failure::invalid(e.to_string())),
            Params::Minkowski(q) => Ok(*q),
        }
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }

    fn invalid(message: impl Into<String>) -> Self {
        Self::new(EXIT_INVALID, message)
    }
}

impl From<LorentzError> for Failure {
    fn from(e: LorentzError) -> Self {
        let code = match e {
            LorentzError::WrongClass { .. }
            | LorentzError::HyperbolicUnsupported
            | LorentzError::ClassBoundary { .. }
            | LorentzError::SignFlip { .. } => EXIT_CLASS,
            _ => EXIT_INVALID,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<DynamicsError> for Failure {
    fn from(e: DynamicsError) -> Self {
        let code = match e {
            DynamicsError::StepLimitExceeded { .. }
            | DynamicsError::NearCollision { .. }
            | DynamicsError::StepSizeUnderflow { .. } => EXIT_INTEGRATOR,
            _ => EXIT_INVALID,
        };
        Failure::new(code, e.to_string())
    }
}

fn read_input(path: &Path) -> Result<InputFile, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        Failure::invalid(format!(
            "{}: expected {{\"A\",\"L\"}}, {{\"a\",\"l\"}} or {{\"q\",\"v\",\"mu\"}} ({e})",
            path.display()
        ))
    })
}

fn load_params(path: &Path) -> Result<Params, Failure> {
    match read_input(path)? {
        InputFile::Euclidean(f) => EuclideanOrbitParams::new(Vec3::from_array(f.a), Vec3::from_array(f.l))
            .map(Params::Euclidean)
            .map_err(|e| Failure::invalid(format!("{}: {e}", path.display()))),
        InputFile::Minkowski(f) => MinkowskiOrbitParams::new(MinkVec4::from_array(f.a), MinkVec4::from_array(f.l))
            .map(Params::Minkowski)
            .map_err(|e| Failure::invalid(format!("{}: {e}", path.display()))),
        InputFile::State(_) => {
            Err(Failure::invalid(format!("{}: expected orbit parameters, found a state", path.display())))
        }
    }
}

fn emit(output: &Option<PathBuf>, stdout: &mut dyn Write, body: &str) -> Result<(), Failure> {
    let res = match output {
        Some(path) => fs::write(path, body),
        None => stdout.write_all(body.as_bytes()),
    };
    res.map_err(|e| Failure::new(EXIT_FAILED, format!("cannot write output: {e}")))
}

fn json_line<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("serializable value");
    s.push('\n');
    s
}

fn euclidean_json(p: &EuclideanOrbitParams) -> String {
    json_line(&EuclideanFile { a: p.lenz().to_array(), l: p.angular_momentum().to_array() })
}

fn minkowski_json(q: &MinkowskiOrbitParams) -> String {
    json_line(&MinkowskiFile { a: q.a().to_array(), l: q.l().to_array() })
}

fn csv_row(out: &mut String, values: &[f64]) {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        if v.is_finite() {
            out.push_str(ryu::Buffer::new().format_finite(*v));
        } else {
            out.push_str(&v.to_string());
        }
    }
    out.push('\n');
}

pub fn trajectory_csv(tr: &Trajectory) -> String {
    let mut out = String::from("t,qx,qy,qz,vx,vy,vz\n");
    for s in &tr.samples {
        csv_row(&mut out, &[s.t, s.q.x1, s.q.x2, s.q.x3, s.v.x1, s.v.x2, s.v.x3]);
    }
    out
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cmd: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, Failure> {
    match cmd {
        Command::Convert { input, output, to } => {
            let params = load_params(&input)?;
            let target = to.unwrap_or(match params {
                Params::Euclidean(_) => Form::Minkowski,
                Params::Minkowski(_) => Form::Euclidean,
            });
            let body = match target {
                Form::Minkowski => minkowski_json(&params.minkowski()?),
                Form::Euclidean => euclidean_json(&params.euclidean()),
            };
            emit(&output, stdout, &body)?;
            Ok(EXIT_OK)
        }
        Command::Info { input, output, tol } => {
            let params = load_params(&input)?;
            let p = params.euclidean();
            let q = params.minkowski()?;
            let info = Info {
                mu: magnetic_charge(&p),
                energy: energy_euclidean(&p),
                eccentricity: eccentricity(&p),
                class: classify(&q, tol).to_string(),
                is_circle: is_circle(&p, CIRCLE_TOL),
            };
            emit(&output, stdout, &json_line(&info))?;
            Ok(EXIT_OK)
        }
        Command::Sample { input, output, n, range_cap, tol } => {
            let q = load_params(&input)?.minkowski()?;
            let opts = SampleOptions { range_cap, class_tol: tol };
            let points = sample_orbit_lifted(&q, n, &opts).map_err(|e| Failure::invalid(e.to_string()))?;
            let mut body = String::from("x,y,z,x0\n");
            for x in points {
                csv_row(&mut body, &[x.x1, x.x2, x.x3, x.x0]);
            }
            emit(&output, stdout, &body)?;
            Ok(EXIT_OK)
        }
        Command::Integrate { input, output, report, t, rel_tol, abs_tol, max_step, max_steps } => {
            let s0 = match read_input(&input)? {
                InputFile::State(f) => PhaseState::new(f.t, Vec3::from_array(f.q), Vec3::from_array(f.v), f.mu)?,
                _ => synthesize_initial_state(&load_params(&input)?.euclidean()),
            };
            let cfg = IntegratorConfig { rel_tol, abs_tol, max_step, max_steps };
            let tr = integrate(&s0, t, &cfg)?;
            emit(&output, stdout, &trajectory_csv(&tr))?;
            let drift = json_line(&drift_report(&tr));
            match report {
                Some(path) => fs::write(&path, drift)
                    .map_err(|e| Failure::new(EXIT_FAILED, format!("cannot write report: {e}")))?,
                None => stderr.write_all(drift.as_bytes()).map_err(|e| Failure::new(EXIT_FAILED, e.to_string()))?,
            }
            Ok(EXIT_OK)
        }
        Command::Canonicalize { input, output, tol } => {
            let q = load_params(&input)?.minkowski()?;
            let g = canonicalize(&q, tol)?;
            let target = canonical_target(classify(&q, tol)).ok_or(LorentzError::HyperbolicUnsupported)?;
            let (a, l) = act_raw(&g, &q);
            let residual = params_distance(&MinkowskiOrbitParams::new_unchecked(a, l), &target);
            finish_action(&output, stdout, stderr, &g, residual)
        }
        Command::Transport { input, output, tol } => {
            let [src, dst] = input.as_slice() else {
                return Err(Failure::invalid("transport takes exactly two --input files"));
            };
            let p1 = load_params(src)?.minkowski()?;
            let p2 = load_params(dst)?.minkowski()?;
            let g = transport(&p1, &p2, tol)?;
            let (a, l) = act_raw(&g, &p1);
            let scale = p2.a().max_abs().max(p2.l().max_abs()).max(1.0);
            let residual = params_distance(&MinkowskiOrbitParams::new_unchecked(a, l), &p2) / scale;
            finish_action(&output, stdout, stderr, &g, residual)
        }
        Command::Verify { output, seed, count, perturb } => {
            let report = verify::run(&VerifyOptions { seed, count, perturb });
            let mut body = serde_json::to_string_pretty(&report).expect("serializable report");
            body.push('\n');
            emit(&output, stdout, &body)?;
            Ok(if report.all_passed { EXIT_OK } else { EXIT_FAILED })
        }
    }
}

fn finish_action(
    output: &Option<PathBuf>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
    g: &crate::lorentz::OrientedSymmetry,
    residual: f64,
) -> Result<i32, Failure> {
    emit(output, stdout, &json_line(g))?;
    let _ = writeln!(stderr, "residual {residual:e}");
    Ok(if residual < ACTION_RESIDUAL_TOL { EXIT_OK } else { EXIT_FAILED })
}

/// Entry point for the binary.
pub fn main() -> i32 {
    let stdout = io::stdout();
    let stderr = io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}
