//! Long-run labeling of a simulated trajectory.
//!
//! The first half is discarded as transient. On the first protein:
//! convergence means the last-quarter total variation falls below a
//! relative threshold; oscillation means at least three interior peaks with
//! sufficient amplitude and regular spacing. Homoclinic orbits are
//! numerically indistinguishable from long-period oscillations and are not
//! separated out.

use super::{SimError, Trajectory};
use crate::netmodel::NetworkSpec;
use serde::Serialize;

/// Long-run behavior of the first protein.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    Oscillating,
    Converged,
    Undetermined,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let label = match self {
            Classification::Oscillating => "Oscillating",
            Classification::Converged => "Converged",
            Classification::Undetermined => "Undetermined",
        };
        f.write_str(label)
    }
}

/// Tunable thresholds; the defaults are deliberate artifact choices, not
/// derived quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifyConfig {
    /// Minimal trajectory span: 20 times the slowest timescale.
    pub min_span: f64,
    /// Converged when the last-quarter total variation is below this times
    /// the mean level.
    pub convergence_tv: f64,
    /// Oscillating needs peak-to-trough amplitude above this times the mean
    /// level.
    pub min_amplitude: f64,
    /// Oscillating needs the inter-peak interval coefficient of variation
    /// at or below this.
    pub max_interval_cv: f64,
}

impl ClassifyConfig {
    /// Defaults for a given network: the span requirement tracks the slowest
    /// of the two lifetimes and the average delay.
    pub fn for_spec(spec: &NetworkSpec) -> ClassifyConfig {
        let slowest = spec
            .genes
            .iter()
            .flat_map(|g| [1.0 / g.a, 1.0 / g.b])
            .fold(spec.mean_delay(), f64::max);
        ClassifyConfig {
            min_span: 20.0 * slowest,
            convergence_tv: 1e-6,
            min_amplitude: 1e-3,
            max_interval_cv: 0.2,
        }
    }
}

/// Label the long-run behavior of `traj`.
pub fn classify(traj: &Trajectory, cfg: &ClassifyConfig) -> Result<Classification, SimError> {
    let m = traj.t.len();
    if m < 8 {
        return Err(SimError::TooShort {
            span: 0.0,
            required: cfg.min_span,
        });
    }
    let span = traj.t[m - 1] - traj.t[0];
    if span < cfg.min_span {
        return Err(SimError::TooShort {
            span,
            required: cfg.min_span,
        });
    }

    let p1 = &traj.p[0];
    let window = &p1[m / 2..];
    let mean = window.iter().sum::<f64>() / window.len() as f64;

    let last_quarter = &p1[3 * m / 4..];
    let tv: f64 = last_quarter.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    if tv <= cfg.convergence_tv * mean {
        return Ok(Classification::Converged);
    }

    let offset = m / 2;
    let mut peaks = Vec::new();
    for k in 1..window.len() - 1 {
        if window[k] > window[k - 1] && window[k] > window[k + 1] {
            peaks.push(traj.t[offset + k]);
        }
    }
    let amplitude = window.iter().fold(f64::MIN, |a, &v| a.max(v))
        - window.iter().fold(f64::MAX, |a, &v| a.min(v));

    if peaks.len() >= 3 && amplitude >= cfg.min_amplitude * mean {
        let intervals: Vec<f64> = peaks.windows(2).map(|w| w[1] - w[0]).collect();
        let mean_interval = intervals.iter().sum::<f64>() / intervals.len() as f64;
        let variance = intervals
            .iter()
            .map(|x| (x - mean_interval) * (x - mean_interval))
            .sum::<f64>()
            / intervals.len() as f64;
        let cv = variance.sqrt() / mean_interval;
        if cv <= cfg.max_interval_cv {
            return Ok(Classification::Oscillating);
        }
    }
    Ok(Classification::Undetermined)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(p1: Vec<f64>, dt: f64) -> Trajectory {
        let m = p1.len();
        Trajectory {
            t: (0..m).map(|k| k as f64 * dt).collect(),
            r: vec![vec![0.5; m]],
            p: vec![p1],
            dt,
            classification: Classification::Undetermined,
        }
    }

    fn cfg() -> ClassifyConfig {
        ClassifyConfig {
            min_span: 1.0,
            convergence_tv: 1e-6,
            min_amplitude: 1e-3,
            max_interval_cv: 0.2,
        }
    }

    #[test]
    fn constant_series_converges() {
        let traj = synthetic(vec![2.0; 4001], 0.01);
        assert_eq!(classify(&traj, &cfg()).unwrap(), Classification::Converged);
    }

    #[test]
    fn zero_series_converges() {
        let traj = synthetic(vec![0.0; 4001], 0.01);
        assert_eq!(classify(&traj, &cfg()).unwrap(), Classification::Converged);
    }

    #[test]
    fn steady_sinusoid_oscillates() {
        let p: Vec<f64> = (0..8000)
            .map(|k| 1.0 + 0.3 * (k as f64 * 0.01).sin())
            .collect();
        let traj = synthetic(p, 0.01);
        assert_eq!(
            classify(&traj, &cfg()).unwrap(),
            Classification::Oscillating
        );
    }

    #[test]
    fn irregular_wander_is_undetermined() {
        // A cubic chirp: peak spacing shrinks fourfold across the analysis
        // window, far past the allowed interval spread.
        let p: Vec<f64> = (0..8000)
            .map(|k| {
                let t = k as f64 * 0.01;
                2.0 + 0.5 * (t * t * t * 0.001).sin()
            })
            .collect();
        let traj = synthetic(p, 0.01);
        assert_eq!(
            classify(&traj, &cfg()).unwrap(),
            Classification::Undetermined
        );
    }

    #[test]
    fn short_trajectory_is_an_error() {
        let traj = synthetic(vec![1.0; 50], 0.01);
        assert!(matches!(
            classify(&traj, &cfg()),
            Err(SimError::TooShort { .. })
        ));
    }
}
