//! Direct integration of the delayed nonlinear dynamics and classification
//! of the long-run behavior.
//!
//! The integrator marches a fixed-step classical Runge-Kutta scheme while
//! delayed state values are read from a cubic Hermite interpolant of the
//! already-computed solution (and from the supplied history before time
//! zero). The step never exceeds one twentieth of the smallest positive
//! delay, so every stage lookup lands strictly in the stored past and the
//! method keeps its fourth order between delay breakpoints.

mod classify;
mod mps;

pub use classify::{classify, Classification, ClassifyConfig};
pub use mps::{mps_form_check, MpsReport};

use crate::netmodel::{hill_eval, NetworkSpec, SpecError};
use std::io::{self, Write};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SimError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("bad step dt = {dt}: {reason}")]
    BadStep { dt: f64, reason: String },
    #[error("t_end = {0} must be positive and finite")]
    BadHorizon(f64),
    #[error("invalid history: {0}")]
    HistoryDomain(String),
    #[error("state became non-finite at t = {t}; last valid time retained")]
    NonFinite { t: f64 },
    #[error("trajectory spans {span} but classification needs at least {required}")]
    TooShort { span: f64, required: f64 },
    #[error("not applicable: the network has no delays")]
    NotApplicable,
}

/// Initial data on `[-max_delay, 0]`.
///
/// State vectors are interleaved `[r_1, p_1, r_2, p_2, ...]`.
#[derive(Debug, Clone, PartialEq)]
pub enum HistorySpec {
    /// The same `2N` values at every past time.
    Constant(Vec<f64>),
    /// A sampled table, linearly interpolated; the grid must be strictly
    /// increasing and cover the delay span.
    Sampled {
        times: Vec<f64>,
        states: Vec<Vec<f64>>,
    },
}

impl HistorySpec {
    /// Constant history pinned at an equilibrium.
    pub fn equilibrium(eq: &crate::equilibrium::Equilibrium) -> HistorySpec {
        HistorySpec::Constant(interleave(&eq.r_star, &eq.p_star))
    }

    /// Constant history near the equilibrium: component `k` is scaled by
    /// `1 + rel * sin(k + 1)`.
    ///
    /// The fixed profile is deliberately asymmetric across genes. A uniform
    /// scaling of a symmetric ring's equilibrium excites only the
    /// gene-symmetric modes and can miss a rotating unstable mode entirely.
    pub fn perturbed_equilibrium(eq: &crate::equilibrium::Equilibrium, rel: f64) -> HistorySpec {
        HistorySpec::Constant(
            interleave(&eq.r_star, &eq.p_star)
                .iter()
                .enumerate()
                .map(|(k, v)| v * (1.0 + rel * ((k + 1) as f64).sin()))
                .collect(),
        )
    }

    fn validate(&self, dim: usize, span: f64) -> Result<(), SimError> {
        match self {
            HistorySpec::Constant(values) => {
                if values.len() != dim {
                    return Err(SimError::HistoryDomain(format!(
                        "constant history has {} values, the network needs {dim}",
                        values.len()
                    )));
                }
                if values.iter().any(|v| !(*v >= 0.0)) {
                    return Err(SimError::HistoryDomain(
                        "history values must be non-negative".into(),
                    ));
                }
            }
            HistorySpec::Sampled { times, states } => {
                if times.len() < 2 || times.len() != states.len() {
                    return Err(SimError::HistoryDomain(
                        "sampled history needs matching time and state rows (at least two)".into(),
                    ));
                }
                if times.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(SimError::HistoryDomain(
                        "history grid must be strictly increasing".into(),
                    ));
                }
                if times[0] > -span || *times.last().unwrap() < 0.0 {
                    return Err(SimError::HistoryDomain(format!(
                        "history [{}, {}] does not cover [-{span}, 0]",
                        times[0],
                        times.last().unwrap()
                    )));
                }
                for row in states {
                    if row.len() != dim {
                        return Err(SimError::HistoryDomain(format!(
                            "history row has {} values, the network needs {dim}",
                            row.len()
                        )));
                    }
                    if row.iter().any(|v| !(*v >= 0.0)) {
                        return Err(SimError::HistoryDomain(
                            "history values must be non-negative".into(),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    fn eval(&self, t: f64, idx: usize) -> f64 {
        match self {
            HistorySpec::Constant(values) => values[idx],
            HistorySpec::Sampled { times, states } => {
                if t <= times[0] {
                    return states[0][idx];
                }
                if t >= *times.last().unwrap() {
                    return states.last().unwrap()[idx];
                }
                let k = times.partition_point(|&x| x <= t) - 1;
                let u = (t - times[k]) / (times[k + 1] - times[k]);
                states[k][idx] * (1.0 - u) + states[k + 1][idx] * u
            }
        }
    }
}

fn interleave(r: &[f64], p: &[f64]) -> Vec<f64> {
    r.iter().zip(p).flat_map(|(&r, &p)| [r, p]).collect()
}

/// Simulated solution on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Uniform time grid from 0 to `t_end`.
    pub t: Vec<f64>,
    /// mRNA levels, one series per gene.
    pub r: Vec<Vec<f64>>,
    /// Protein levels, one series per gene.
    pub p: Vec<Vec<f64>>,
    /// Step size actually used.
    pub dt: f64,
    /// Long-run behavior of the first protein.
    pub classification: Classification,
}

/// Default step: a twentieth of the smallest positive delay and of the
/// fastest lifetime, and no coarser than `t_end / 1e5`.
pub fn default_step(spec: &NetworkSpec, t_end: f64) -> f64 {
    let mut dt = t_end / 1e5;
    for g in &spec.genes {
        dt = dt.min(1.0 / (20.0 * g.a)).min(1.0 / (20.0 * g.b));
        for tau in [g.tau_r, g.tau_p] {
            if tau > 0.0 {
                dt = dt.min(tau / 20.0);
            }
        }
    }
    dt
}

struct Integrator<'a> {
    spec: &'a NetworkSpec,
    history: &'a HistorySpec,
    dt: f64,
    dim: usize,
    /// Flattened solution rows, `dim` entries per grid point.
    ys: Vec<f64>,
    /// Flattened derivative rows matching `ys`.
    fs: Vec<f64>,
    /// Index of the last completed grid point.
    last: usize,
}

impl<'a> Integrator<'a> {
    /// Delayed state component at time `t <= t_last`, by cubic Hermite
    /// interpolation of the stored solution or from the history.
    fn lookup(&self, t: f64, idx: usize) -> f64 {
        if t <= 0.0 {
            return self.history.eval(t, idx);
        }
        let mut k = (t / self.dt) as usize;
        if k >= self.last {
            k = self.last - 1;
        }
        let u = t / self.dt - k as f64;
        let (y0, y1) = (
            self.ys[k * self.dim + idx],
            self.ys[(k + 1) * self.dim + idx],
        );
        let (f0, f1) = (
            self.fs[k * self.dim + idx],
            self.fs[(k + 1) * self.dim + idx],
        );
        let u2 = u * u;
        let u3 = u2 * u;
        (2.0 * u3 - 3.0 * u2 + 1.0) * y0
            + (u3 - 2.0 * u2 + u) * self.dt * f0
            + (-2.0 * u3 + 3.0 * u2) * y1
            + (u3 - u2) * self.dt * f1
    }

    fn derivative(&self, t: f64, y: &[f64], out: &mut [f64]) {
        let n = self.spec.len();
        for i in 0..n {
            let g = &self.spec.genes[i];
            let up = self.spec.upstream(i);
            let tau_p_up = self.spec.genes[up].tau_p;
            let p_delayed = if tau_p_up > 0.0 {
                self.lookup(t - tau_p_up, 2 * up + 1)
            } else {
                y[2 * up + 1]
            };
            let r_delayed = if g.tau_r > 0.0 {
                self.lookup(t - g.tau_r, 2 * i)
            } else {
                y[2 * i]
            };
            let (f, _) = hill_eval(g.regulation, p_delayed.max(0.0), self.spec.nu, g.p0)
                .expect("validated network keeps the Hill domain");
            out[2 * i] = -g.a * y[2 * i] + g.beta * f + g.alpha0;
            out[2 * i + 1] = -g.b * y[2 * i + 1] + g.c * r_delayed;
        }
    }
}

/// Integrate the delayed dynamics from `history` up to `t_end`.
///
/// `dt` defaults to [`default_step`]; an explicit step must not exceed the
/// smallest positive delay (stage lookups must stay in the stored past).
/// The trajectory is classified when it is long enough, otherwise it carries
/// [`Classification::Undetermined`].
pub fn integrate(
    spec: &NetworkSpec,
    history: &HistorySpec,
    t_end: f64,
    dt: Option<f64>,
) -> Result<Trajectory, SimError> {
    spec.validate()?;
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(SimError::BadHorizon(t_end));
    }
    let min_positive_delay = spec
        .genes
        .iter()
        .flat_map(|g| [g.tau_r, g.tau_p])
        .filter(|t| *t > 0.0)
        .fold(f64::INFINITY, f64::min);
    let dt = match dt {
        None => default_step(spec, t_end),
        Some(dt) => {
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(SimError::BadStep {
                    dt,
                    reason: "must be positive and finite".into(),
                });
            }
            if dt > min_positive_delay {
                return Err(SimError::BadStep {
                    dt,
                    reason: format!(
                        "exceeds the smallest positive delay {min_positive_delay}; delayed lookups would leave the stored past"
                    ),
                });
            }
            dt
        }
    };
    let steps = (t_end / dt).ceil().max(1.0) as usize;
    let dt = t_end / steps as f64;
    let dim = 2 * spec.len();
    history.validate(dim, spec.max_delay())?;

    let mut sim = Integrator {
        spec,
        history,
        dt,
        dim,
        ys: vec![0.0; (steps + 1) * dim],
        fs: vec![0.0; (steps + 1) * dim],
        last: 0,
    };
    let y0: Vec<f64> = (0..dim).map(|idx| history.eval(0.0, idx)).collect();
    sim.ys[..dim].copy_from_slice(&y0);

    let mut k1 = vec![0.0; dim];
    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];
    let mut stage = vec![0.0; dim];
    let mut y = y0;

    for step in 0..steps {
        let t = step as f64 * dt;
        sim.last = step;
        sim.derivative(t, &y, &mut k1);
        sim.fs[step * dim..(step + 1) * dim].copy_from_slice(&k1);

        for idx in 0..dim {
            stage[idx] = y[idx] + 0.5 * dt * k1[idx];
        }
        sim.derivative(t + 0.5 * dt, &stage, &mut k2);
        for idx in 0..dim {
            stage[idx] = y[idx] + 0.5 * dt * k2[idx];
        }
        sim.derivative(t + 0.5 * dt, &stage, &mut k3);
        for idx in 0..dim {
            stage[idx] = y[idx] + dt * k3[idx];
        }
        sim.derivative(t + dt, &stage, &mut k4);

        for idx in 0..dim {
            y[idx] += dt / 6.0 * (k1[idx] + 2.0 * k2[idx] + 2.0 * k3[idx] + k4[idx]);
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(SimError::NonFinite { t });
        }
        sim.ys[(step + 1) * dim..(step + 2) * dim].copy_from_slice(&y);
    }
    sim.last = steps;
    sim.derivative(t_end, &y, &mut k1);
    sim.fs[steps * dim..(steps + 1) * dim].copy_from_slice(&k1);

    let n = spec.len();
    let t: Vec<f64> = (0..=steps).map(|k| k as f64 * dt).collect();
    let mut r = vec![Vec::with_capacity(steps + 1); n];
    let mut p = vec![Vec::with_capacity(steps + 1); n];
    for k in 0..=steps {
        for i in 0..n {
            r[i].push(sim.ys[k * dim + 2 * i]);
            p[i].push(sim.ys[k * dim + 2 * i + 1]);
        }
    }
    let mut traj = Trajectory {
        t,
        r,
        p,
        dt,
        classification: Classification::Undetermined,
    };
    let cfg = ClassifyConfig::for_spec(spec);
    if let Ok(label) = classify(&traj, &cfg) {
        traj.classification = label;
    }
    Ok(traj)
}

/// Write the trajectory as CSV: header `t,r1,p1,...,rN,pN`, one row per
/// step (every `stride`-th row when `stride > 1`), 17 significant digits.
pub fn write_csv<W: Write>(traj: &Trajectory, stride: usize, mut w: W) -> io::Result<()> {
    let stride = stride.max(1);
    let n = traj.r.len();
    let mut header = String::from("t");
    for i in 1..=n {
        header.push_str(&format!(",r{i},p{i}"));
    }
    writeln!(w, "{header}")?;
    for k in (0..traj.t.len()).step_by(stride) {
        let mut row = format!("{:.16e}", traj.t[k]);
        for i in 0..n {
            row.push_str(&format!(",{:.16e},{:.16e}", traj.r[i][k], traj.p[i][k]));
        }
        writeln!(w, "{row}")?;
    }
    Ok(())
}

/// Parse a sampled history from trajectory-style CSV (`t,r1,p1,...`).
pub fn read_history_csv(text: &str) -> Result<HistorySpec, SimError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| SimError::HistoryDomain("empty history file".into()))?;
    let columns = header.split(',').count();
    if columns < 3 || columns % 2 == 0 {
        return Err(SimError::HistoryDomain(format!(
            "history header '{header}' must be t,r1,p1,...,rN,pN"
        )));
    }
    let mut times = Vec::new();
    let mut states = Vec::new();
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != columns {
            return Err(SimError::HistoryDomain(format!(
                "ragged history row '{line}'"
            )));
        }
        let mut values = fields.iter().map(|f| f.trim().parse::<f64>());
        let t = values
            .next()
            .unwrap()
            .map_err(|e| SimError::HistoryDomain(format!("bad time in '{line}': {e}")))?;
        let row: Result<Vec<f64>, _> = values.collect();
        times.push(t);
        states
            .push(row.map_err(|e| SimError::HistoryDomain(format!("bad value in '{line}': {e}")))?);
    }
    Ok(HistorySpec::Sampled { times, states })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{solve_equilibrium, DEFAULT_TOL};
    use crate::netmodel::load_preset;

    /// Near-equilibrium start for the three-gene ring (slightly offset per gene).
    pub(super) fn near_equilibrium_history() -> HistorySpec {
        HistorySpec::Constant(vec![0.699, 1.224, 0.698, 1.226, 0.697, 1.225])
    }

    #[test]
    fn counterexample_oscillates_from_published_start() {
        let spec = load_preset("counterexample").unwrap();
        let traj = integrate(&spec, &near_equilibrium_history(), 100.0, None).unwrap();
        assert_eq!(traj.classification, Classification::Oscillating);
    }

    #[test]
    fn delay_free_example_converges_and_delayed_oscillates() {
        let spec = load_preset("example7_nodelay").unwrap();
        let eq = solve_equilibrium(&spec, DEFAULT_TOL).unwrap();
        let history = HistorySpec::perturbed_equilibrium(&eq, 0.01);
        // The slow mode decays at roughly 0.02 per time unit, so certifying
        // the 1e-6 variation threshold needs a long horizon.
        let traj = integrate(&spec, &history, 900.0, None).unwrap();
        assert_eq!(traj.classification, Classification::Converged);

        // A uniform perturbation barely projects onto the unstable mode
        // (growth rate ~0.011), so the oscillation takes a long horizon to
        // clear the amplitude threshold.
        let delayed = load_preset("example7").unwrap();
        let eq = solve_equilibrium(&delayed, DEFAULT_TOL).unwrap();
        let history = HistorySpec::perturbed_equilibrium(&eq, 0.01);
        let traj = integrate(&delayed, &history, 1500.0, None).unwrap();
        assert_eq!(traj.classification, Classification::Oscillating);
    }

    #[test]
    fn equilibrium_history_stays_put() {
        for name in ["counterexample", "example7", "hes7_wild", "repressilator"] {
            let spec = load_preset(name).unwrap();
            let eq = solve_equilibrium(&spec, DEFAULT_TOL).unwrap();
            let history = HistorySpec::equilibrium(&eq);
            let horizon = 40.0 * spec.genes.iter().map(|g| 1.0 / g.b).fold(0.0, f64::max);
            let traj = integrate(&spec, &history, horizon, None).unwrap();
            for i in 0..spec.len() {
                let level = eq.p_star[i].max(1e-12);
                for &v in &traj.p[i] {
                    assert!(
                        (v - eq.p_star[i]).abs() <= 1e-6 * level,
                        "{name}: p{i} drifted to {v} from {}",
                        eq.p_star[i]
                    );
                }
            }
        }
    }

    #[test]
    fn trajectories_stay_nonnegative() {
        let spec = load_preset("repressilator").unwrap();
        let history = HistorySpec::Constant(vec![30.0, 0.0, 0.0, 55.0, 1.0, 0.1]);
        let traj = integrate(&spec, &history, 400.0, Some(0.02)).unwrap();
        for series in traj.r.iter().chain(&traj.p) {
            for &v in series {
                assert!(v >= -1e-9);
            }
        }
        assert_eq!(traj.classification, Classification::Oscillating);
    }

    #[test]
    fn fourth_order_convergence_on_the_counterexample() {
        let spec = load_preset("counterexample").unwrap();
        let history = near_equilibrium_history();
        let run = |dt: f64| {
            let traj = integrate(&spec, &history, 10.0, Some(dt)).unwrap();
            let m = traj.t.len() - 1;
            let state: Vec<f64> = (0..3).flat_map(|i| [traj.r[i][m], traj.p[i][m]]).collect();
            state
        };
        let err = |a: &[f64], b: &[f64]| -> f64 {
            a.iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max)
        };
        let coarse = run(0.025);
        let medium = run(0.0125);
        let fine = run(0.00625);
        let ratio = err(&coarse, &medium) / err(&medium, &fine);
        assert!(
            (8.0..40.0).contains(&ratio),
            "halving dt shrank the error by {ratio}, expected ~16"
        );
    }

    #[test]
    fn sampled_history_reproduces_constant_history() {
        let spec = load_preset("counterexample").unwrap();
        let constant = near_equilibrium_history();
        let values = match &constant {
            HistorySpec::Constant(v) => v.clone(),
            _ => unreachable!(),
        };
        let sampled = HistorySpec::Sampled {
            times: vec![-2.0, -0.5, 0.0],
            states: vec![values.clone(), values.clone(), values],
        };
        let a = integrate(&spec, &constant, 5.0, Some(0.01)).unwrap();
        let b = integrate(&spec, &sampled, 5.0, Some(0.01)).unwrap();
        assert_eq!(a.p, b.p);
    }

    #[test]
    fn input_validation() {
        let spec = load_preset("counterexample").unwrap();
        let history = near_equilibrium_history();
        assert!(matches!(
            integrate(&spec, &history, -1.0, None),
            Err(SimError::BadHorizon(_))
        ));
        assert!(matches!(
            integrate(&spec, &history, 10.0, Some(0.0)),
            Err(SimError::BadStep { .. })
        ));
        // Steps beyond the smallest delay would read the unwritten present.
        assert!(matches!(
            integrate(&spec, &history, 10.0, Some(0.7)),
            Err(SimError::BadStep { .. })
        ));
        let short = HistorySpec::Sampled {
            times: vec![-0.2, 0.0],
            states: vec![vec![0.0; 6], vec![0.0; 6]],
        };
        assert!(matches!(
            integrate(&spec, &short, 10.0, None),
            Err(SimError::HistoryDomain(_))
        ));
        let negative = HistorySpec::Constant(vec![-0.1; 6]);
        assert!(matches!(
            integrate(&spec, &negative, 10.0, None),
            Err(SimError::HistoryDomain(_))
        ));
    }

    #[test]
    fn csv_round_trip_shape() {
        let spec = load_preset("counterexample").unwrap();
        let traj = integrate(&spec, &near_equilibrium_history(), 2.0, Some(0.25)).unwrap();
        let mut buffer = Vec::new();
        write_csv(&traj, 1, &mut buffer).unwrap();
        let text = String::from_utf8(buffer).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,r1,p1,r2,p2,r3,p3");
        assert_eq!(lines.count(), traj.t.len());
        // Stride decimation keeps the first row and every fourth point.
        let mut decimated = Vec::new();
        write_csv(&traj, 4, &mut decimated).unwrap();
        let text = String::from_utf8(decimated).unwrap();
        assert_eq!(text.lines().count() - 1, (traj.t.len() + 3) / 4);
        // And the history parser accepts the trajectory format.
        let history = read_history_csv(&text).unwrap();
        match history {
            HistorySpec::Sampled { times, states } => {
                assert_eq!(times.len(), states.len());
                assert_eq!(states[0].len(), 6);
            }
            _ => panic!("expected sampled history"),
        }
    }
}
