//! Command-line front end.
//!
//! Exit codes follow the verdict for `analyze` (0 oscillations, 1 stable,
//! 2 inconclusive); elsewhere 0 is success. Errors use 64 for usage
//! problems, 66 for unreadable input files, 70 for numerical failures (the
//! message names the failing stage) and 74 for output I/O failures. Reports
//! are written to a temporary file and renamed into place, so a crashed run
//! never leaves a partial file behind.

use crate::ddesim::{self, HistorySpec};
use crate::equilibrium::solve_equilibrium;
use crate::netmodel::{load_preset, NetworkSpec, PRESET_NAMES, PRESET_SUMMARIES};
use crate::regions::{self, AxisParameter, AxisScale, AxisSpec};
use crate::report::{analyze, parse_methods, Tolerances};
use crate::stability::{
    boundary_samples, nyquist_samples, nyquist_winding, LoopTransfer, Outcome, StabilityError,
    DEFAULT_SAMPLES,
};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const EXIT_OSCILLATIONS: i32 = 0;
pub const EXIT_STABLE: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_NOINPUT: i32 = 66;
pub const EXIT_NUMERICAL: i32 = 70;
pub const EXIT_IO: i32 = 74;

#[derive(Parser)]
#[command(
    name = "cyclosc",
    version,
    about = "Oscillation analysis for delayed cyclic gene networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Either a spec file or a preset name.
#[derive(Args)]
struct SpecSource {
    /// Network description (JSON file).
    #[arg(long, conflicts_with = "preset")]
    spec: Option<PathBuf>,
    /// Built-in network name (see `presets list`).
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Full analysis report with one verdict per method.
    Analyze {
        #[command(flatten)]
        source: SpecSource,
        /// Comma-separated: analytic, graphical, roots, nyquist, or all.
        #[arg(long, default_value = "analytic")]
        methods: String,
        /// Scalar root-find tolerance; other tolerances scale with it.
        #[arg(long)]
        tol: Option<f64>,
        /// JSON file overriding individual tolerances
        /// (keys: equilibrium, scalar, newton).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Report destination (JSON).
        #[arg(long)]
        out: PathBuf,
    },
    /// Integrate the delayed dynamics and classify the trajectory.
    Simulate {
        #[command(flatten)]
        source: SpecSource,
        /// Integration horizon.
        #[arg(long = "t-end")]
        t_end: f64,
        /// Fixed step (default: derived from delays and lifetimes).
        #[arg(long)]
        dt: Option<f64>,
        /// const:v1,...,v2N | history.csv | equilibrium+EPS%
        #[arg(long, default_value = "equilibrium+1%")]
        history: String,
        /// Keep every k-th output row.
        #[arg(long, default_value_t = 1)]
        stride: usize,
        /// Trajectory destination (CSV).
        #[arg(long)]
        out: PathBuf,
    },
    /// Map verdicts over a two-parameter grid.
    Sweep {
        /// Template network (JSON file).
        #[arg(long, conflicts_with = "preset")]
        template: Option<PathBuf>,
        /// Built-in template name.
        #[arg(long)]
        preset: Option<String>,
        /// Axis as param:lo:hi:n[:log], e.g. t_p-halflife:0.1:60:120:log
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        /// Grid destination (CSV); axis metadata lands next to it.
        #[arg(long)]
        out: PathBuf,
        /// Also refine and write the region boundary (CSV).
        #[arg(long)]
        boundary: Option<PathBuf>,
        /// Margin tolerance for boundary refinement.
        #[arg(long, default_value_t = 1e-6)]
        boundary_tol: f64,
    },
    /// Sample the loop transfer and report the winding number.
    Nyquist {
        #[command(flatten)]
        source: SpecSource,
        /// Truncation frequency (default: automatic roll-off search).
        #[arg(long = "omega-max")]
        omega_max: Option<f64>,
        /// Sweep samples before refinement.
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        n: usize,
        /// Curve destination (CSV: omega,re,im).
        #[arg(long)]
        out: PathBuf,
    },
    /// Sample the instability-region boundary for a dimensionless model.
    Boundary {
        #[arg(long = "N")]
        n: usize,
        #[arg(long = "Q")]
        q: f64,
        #[arg(long = "tau-tilde")]
        tau_tilde: f64,
        #[arg(long = "omega-max", default_value_t = 5.0)]
        omega_max: f64,
        /// Number of non-negative frequency samples.
        #[arg(long, default_value_t = 512)]
        samples: usize,
        /// Average gain; when set, the ring eigenvalues are written next to
        /// the curve.
        #[arg(long)]
        gain: Option<f64>,
        /// Curve destination (CSV: omega_tilde,re,im).
        #[arg(long)]
        out: PathBuf,
    },
    /// List or show the built-in networks.
    Presets {
        #[command(subcommand)]
        action: PresetsAction,
    },
}

#[derive(Subcommand)]
enum PresetsAction {
    /// One line per preset.
    List,
    /// Print a preset as spec JSON.
    Show { name: String },
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Failure {
        Failure {
            code,
            message: message.into(),
        }
    }
}

/// Entry point over explicit arguments; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = err.print();
            return code;
        }
    };

    if let Ok(threads) = std::env::var("CYCLOSC_THREADS") {
        if let Ok(count) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(count)
                .build_global();
        }
    }

    match dispatch(cli.command) {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("cyclosc: {}", failure.message);
            failure.code
        }
    }
}

/// Entry point over the process arguments.
pub fn run_from_env() -> i32 {
    run(std::env::args_os())
}

fn dispatch(command: Command) -> Result<i32, Failure> {
    match command {
        Command::Analyze {
            source,
            methods,
            tol,
            config,
            out,
        } => cmd_analyze(source, methods, tol, config, out),
        Command::Simulate {
            source,
            t_end,
            dt,
            history,
            stride,
            out,
        } => cmd_simulate(source, t_end, dt, history, stride, out),
        Command::Sweep {
            template,
            preset,
            x,
            y,
            out,
            boundary,
            boundary_tol,
        } => cmd_sweep(
            SpecSource {
                spec: template,
                preset,
            },
            x,
            y,
            out,
            boundary,
            boundary_tol,
        ),
        Command::Nyquist {
            source,
            omega_max,
            n,
            out,
        } => cmd_nyquist(source, omega_max, n, out),
        Command::Boundary {
            n,
            q,
            tau_tilde,
            omega_max,
            samples,
            gain,
            out,
        } => cmd_boundary(n, q, tau_tilde, omega_max, samples, gain, out),
        Command::Presets { action } => cmd_presets(action),
    }
}

fn load_spec(source: &SpecSource) -> Result<NetworkSpec, Failure> {
    match (&source.spec, &source.preset) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Failure::new(EXIT_NOINPUT, format!("cannot read {}: {e}", path.display()))
            })?;
            NetworkSpec::from_json(&text).map_err(|e| {
                Failure::new(
                    EXIT_NOINPUT,
                    format!("cannot parse {}: {e}", path.display()),
                )
            })
        }
        (None, Some(name)) => {
            load_preset(name).map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))
        }
        _ => Err(Failure::new(
            EXIT_USAGE,
            "exactly one of --spec or --preset is required",
        )),
    }
}

/// Write via a sibling temporary file and rename, so partial files never
/// appear under the target name.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let io_err =
        |e: std::io::Error| Failure::new(EXIT_IO, format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.persist(path)
        .map_err(|e| Failure::new(EXIT_IO, format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

fn tolerances(tol: Option<f64>, config: Option<PathBuf>) -> Result<Tolerances, Failure> {
    let mut result = match tol {
        Some(t) if t > 0.0 => Tolerances::from_scalar(t),
        Some(t) => {
            return Err(Failure::new(
                EXIT_USAGE,
                format!("--tol {t} must be positive"),
            ))
        }
        None => Tolerances::default(),
    };
    if let Some(path) = config {
        let text = std::fs::read_to_string(&path).map_err(|e| {
            Failure::new(EXIT_NOINPUT, format!("cannot read {}: {e}", path.display()))
        })?;
        // Partial configs inherit the already-selected values.
        let overrides: serde_json::Value = serde_json::from_str(&text).map_err(|e| {
            Failure::new(
                EXIT_NOINPUT,
                format!("cannot parse {}: {e}", path.display()),
            )
        })?;
        if let Some(v) = overrides.get("equilibrium").and_then(|v| v.as_f64()) {
            result.equilibrium = v;
        }
        if let Some(v) = overrides.get("scalar").and_then(|v| v.as_f64()) {
            result.scalar = v;
        }
        if let Some(v) = overrides.get("newton").and_then(|v| v.as_f64()) {
            result.newton = v;
        }
    }
    Ok(result)
}

fn cmd_analyze(
    source: SpecSource,
    methods: String,
    tol: Option<f64>,
    config: Option<PathBuf>,
    out: PathBuf,
) -> Result<i32, Failure> {
    let spec = load_spec(&source)?;
    let methods = parse_methods(&methods).map_err(|e| Failure::new(EXIT_USAGE, e))?;
    let tol = tolerances(tol, config)?;
    let report =
        analyze(&spec, &methods, &tol).map_err(|e| Failure::new(EXIT_NUMERICAL, e.to_string()))?;
    write_atomic(&out, report.to_json().as_bytes())?;
    Ok(match report.overall() {
        Outcome::OscillationsGuaranteed => EXIT_OSCILLATIONS,
        Outcome::LocallyStable => EXIT_STABLE,
        Outcome::Inconclusive => EXIT_INCONCLUSIVE,
    })
}

fn parse_history(text: &str, spec: &NetworkSpec) -> Result<HistorySpec, Failure> {
    if let Some(rest) = text.strip_prefix("const:") {
        let values: Result<Vec<f64>, _> = rest.split(',').map(|v| v.trim().parse()).collect();
        let values = values
            .map_err(|e| Failure::new(EXIT_USAGE, format!("bad --history constant list: {e}")))?;
        if values.len() != 2 * spec.len() {
            return Err(Failure::new(
                EXIT_USAGE,
                format!(
                    "--history const needs {} values (r1,p1,...), got {}",
                    2 * spec.len(),
                    values.len()
                ),
            ));
        }
        return Ok(HistorySpec::Constant(values));
    }
    if let Some(rest) = text.strip_prefix("equilibrium") {
        let eps = match rest {
            "" => 0.0,
            _ => {
                let trimmed = rest
                    .strip_prefix('+')
                    .and_then(|r| r.strip_suffix('%'))
                    .ok_or_else(|| {
                        Failure::new(
                            EXIT_USAGE,
                            format!("bad --history '{text}': expected equilibrium+EPS%"),
                        )
                    })?;
                trimmed.parse::<f64>().map_err(|e| {
                    Failure::new(EXIT_USAGE, format!("bad --history perturbation: {e}"))
                })? / 100.0
            }
        };
        let eq = solve_equilibrium(spec, crate::equilibrium::DEFAULT_TOL)
            .map_err(|e| Failure::new(EXIT_NUMERICAL, format!("equilibrium: {e}")))?;
        return Ok(HistorySpec::perturbed_equilibrium(&eq, eps));
    }
    let path = Path::new(text);
    let content = std::fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_NOINPUT, format!("cannot read {}: {e}", path.display())))?;
    ddesim::read_history_csv(&content).map_err(|e| {
        Failure::new(
            EXIT_NOINPUT,
            format!("cannot parse {}: {e}", path.display()),
        )
    })
}

fn cmd_simulate(
    source: SpecSource,
    t_end: f64,
    dt: Option<f64>,
    history: String,
    stride: usize,
    out: PathBuf,
) -> Result<i32, Failure> {
    let spec = load_spec(&source)?;
    let history = parse_history(&history, &spec)?;
    let traj = ddesim::integrate(&spec, &history, t_end, dt)
        .map_err(|e| Failure::new(EXIT_NUMERICAL, format!("simulation: {e}")))?;
    let mut buffer = Vec::new();
    ddesim::write_csv(&traj, stride, &mut buffer)
        .map_err(|e| Failure::new(EXIT_IO, e.to_string()))?;
    write_atomic(&out, &buffer)?;
    println!("{}", traj.classification);
    Ok(0)
}

/// Grid resolution used when an axis does not name one.
const DEFAULT_AXIS_POINTS: usize = 200;

fn parse_axis(text: &str) -> Result<AxisSpec, Failure> {
    let usage = || {
        Failure::new(
            EXIT_USAGE,
            format!("bad axis '{text}': expected param:lo:hi[:n][:log]"),
        )
    };
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() < 3 || parts.len() > 5 {
        return Err(usage());
    }
    let parameter =
        AxisParameter::parse(parts[0]).map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
    let lo: f64 = parts[1].parse().map_err(|_| usage())?;
    let hi: f64 = parts[2].parse().map_err(|_| usage())?;
    let mut n = DEFAULT_AXIS_POINTS;
    let mut scale = AxisScale::Linear;
    let mut rest = parts[3..].iter();
    if let Some(tok) = rest.next() {
        match tok.parse::<usize>() {
            Ok(count) => {
                n = count;
                match rest.next() {
                    None => {}
                    Some(&"log") => scale = AxisScale::Log10,
                    Some(&"linear") => {}
                    Some(other) => {
                        return Err(Failure::new(
                            EXIT_USAGE,
                            format!("bad axis scale '{other}': expected log or linear"),
                        ))
                    }
                }
            }
            Err(_) => match *tok {
                "log" if rest.next().is_none() => scale = AxisScale::Log10,
                "linear" if rest.next().is_none() => {}
                _ => return Err(usage()),
            },
        }
    }
    AxisSpec::new(parameter, lo, hi, n, scale).map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))
}

fn cmd_sweep(
    source: SpecSource,
    x: String,
    y: String,
    out: PathBuf,
    boundary: Option<PathBuf>,
    boundary_tol: f64,
) -> Result<i32, Failure> {
    let template = load_spec(&source)?;
    let x = parse_axis(&x)?;
    let y = parse_axis(&y)?;
    let grid = regions::scan(&template, &x, &y)
        .map_err(|e| Failure::new(EXIT_NUMERICAL, format!("sweep: {e}")))?;

    let mut buffer = Vec::new();
    regions::write_grid_csv(&grid, &mut buffer)
        .map_err(|e| Failure::new(EXIT_IO, e.to_string()))?;
    write_atomic(&out, &buffer)?;

    let meta = serde_json::to_string_pretty(&regions::axes_metadata(&grid))
        .expect("axis metadata serialization cannot fail");
    let mut meta_path = out.clone().into_os_string();
    meta_path.push(".meta.json");
    write_atomic(Path::new(&meta_path), meta.as_bytes())?;

    if let Some(boundary_path) = boundary {
        let points = regions::trace_boundary(&grid, boundary_tol);
        let mut buffer = Vec::new();
        regions::write_boundary_csv(&points, &mut buffer)
            .map_err(|e| Failure::new(EXIT_IO, e.to_string()))?;
        write_atomic(&boundary_path, &buffer)?;
    }
    Ok(0)
}

fn cmd_nyquist(
    source: SpecSource,
    omega_max: Option<f64>,
    n: usize,
    out: PathBuf,
) -> Result<i32, Failure> {
    let spec = load_spec(&source)?;
    let eq = solve_equilibrium(&spec, crate::equilibrium::DEFAULT_TOL)
        .map_err(|e| Failure::new(EXIT_NUMERICAL, format!("equilibrium: {e}")))?;
    let lt = LoopTransfer::from_equilibrium(&spec, &eq);

    let winding = match nyquist_winding(&lt, omega_max, n) {
        Ok(report) => Some(report),
        Err(StabilityError::Inconclusive(reason)) => {
            eprintln!("cyclosc: inconclusive: {reason}");
            None
        }
        Err(e) => return Err(Failure::new(EXIT_NUMERICAL, format!("nyquist: {e}"))),
    };

    let sweep_max = winding.map(|w| w.omega_max).or(omega_max).unwrap_or(10.0);
    let mut buffer = Vec::new();
    buffer.extend_from_slice(b"omega,re,im\n");
    for (w, g) in nyquist_samples(&lt, sweep_max, n) {
        buffer.extend_from_slice(format!("{w},{},{}\n", g.re, g.im).as_bytes());
    }
    write_atomic(&out, &buffer)?;

    match winding {
        Some(report) => {
            println!("{}", report.winding);
            Ok(0)
        }
        None => Ok(EXIT_INCONCLUSIVE),
    }
}

fn cmd_boundary(
    n: usize,
    q: f64,
    tau_tilde: f64,
    omega_max: f64,
    samples: usize,
    gain: Option<f64>,
    out: PathBuf,
) -> Result<i32, Failure> {
    let points = boundary_samples(q, tau_tilde, omega_max, samples)
        .map_err(|e| Failure::new(EXIT_NUMERICAL, format!("boundary: {e}")))?;
    let mut buffer = Vec::new();
    buffer.extend_from_slice(b"omega_tilde,re,im\n");
    for (w, z) in points {
        buffer.extend_from_slice(format!("{w},{},{}\n", z.re, z.im).as_bytes());
    }
    write_atomic(&out, &buffer)?;

    if let Some(l) = gain {
        if n == 0 {
            return Err(Failure::new(EXIT_USAGE, "--N must be >= 1"));
        }
        let mut ring = Vec::new();
        ring.extend_from_slice(b"k,re,im\n");
        for k in 1..=n {
            let lambda = Complex64::from_polar(l, (2 * k - 1) as f64 * PI / n as f64);
            ring.extend_from_slice(format!("{k},{},{}\n", lambda.re, lambda.im).as_bytes());
        }
        let mut ring_path = out.clone().into_os_string();
        ring_path.push(".ring.csv");
        write_atomic(Path::new(&ring_path), &ring)?;
    }
    Ok(0)
}

fn cmd_presets(action: PresetsAction) -> Result<i32, Failure> {
    match action {
        PresetsAction::List => {
            for (name, summary) in PRESET_NAMES.iter().zip(PRESET_SUMMARIES) {
                println!("{name:18} {summary}");
            }
            Ok(0)
        }
        PresetsAction::Show { name } => {
            let spec = load_preset(&name).map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
            println!("{}", spec.to_json());
            Ok(0)
        }
    }
}
