//! Nyquist test on the physical loop transfer, with no homogeneity
//! assumption.
//!
//! The return difference of the cycle is `1 + G(s)` with
//! `G(s) = prod_i c_i beta_i |zeta_i| e^{-s(tau_ri + tau_pi)} /
//! ((s + a_i)(s + b_i))`; the negative cycle sign folds into the plus sign.
//! All open-loop poles sit in the left half plane, so the number of unstable
//! closed-loop poles equals the winding number of `G(j omega)` around `-1`.

use super::{critical_gain, Method, Outcome, StabilityError, Verdict, SCALAR_TOL};
use crate::equilibrium::Equilibrium;
use crate::netmodel::NetworkSpec;
use num_complex::Complex64;
use std::f64::consts::PI;

/// One gene's contribution to the loop transfer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopStage {
    pub a: f64,
    pub b: f64,
    /// `c beta |zeta|` for this gene.
    pub gain: f64,
    /// Round-trip delay `tau_r + tau_p`.
    pub delay: f64,
}

/// Product-form loop transfer around the cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopTransfer {
    pub stages: Vec<LoopStage>,
}

impl LoopTransfer {
    /// Loop transfer of a network linearized at its equilibrium.
    pub fn from_equilibrium(spec: &NetworkSpec, eq: &Equilibrium) -> LoopTransfer {
        LoopTransfer {
            stages: spec
                .genes
                .iter()
                .zip(&eq.zeta)
                .map(|(g, z)| LoopStage {
                    a: g.a,
                    b: g.b,
                    gain: g.c * g.beta * z.abs(),
                    delay: g.tau_r + g.tau_p,
                })
                .collect(),
        }
    }

    /// Loop transfer from explicit per-gene parameters and gain magnitudes.
    pub fn from_parts(
        a: &[f64],
        b: &[f64],
        cbeta: &[f64],
        zeta_abs: &[f64],
        delay: &[f64],
    ) -> LoopTransfer {
        LoopTransfer {
            stages: (0..a.len())
                .map(|i| LoopStage {
                    a: a[i],
                    b: b[i],
                    gain: cbeta[i] * zeta_abs[i],
                    delay: delay[i],
                })
                .collect(),
        }
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        let mut g = Complex64::new(1.0, 0.0);
        for stage in &self.stages {
            g *= stage.gain * (-s * stage.delay).exp() / ((s + stage.a) * (s + stage.b));
        }
        g
    }

    fn eval_jomega(&self, omega: f64) -> Complex64 {
        self.eval(Complex64::new(0.0, omega))
    }

    /// Static loop gain `prod gain_i / (a_i b_i)`.
    pub fn dc_gain(&self) -> f64 {
        self.stages
            .iter()
            .map(|st| st.gain / (st.a * st.b))
            .product()
    }
}

/// Result of a winding computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindingReport {
    /// Number of closed-right-half-plane zeros of the return difference.
    pub winding: i64,
    /// Frequency the sweep was truncated at (after auto-extension).
    pub omega_max: f64,
    /// Total number of loop evaluations, including refinement.
    pub evaluations: usize,
}

/// Default number of sweep samples before refinement.
pub const DEFAULT_SAMPLES: usize = 4096;

fn frequency_grid(omega_max: f64, n: usize) -> Vec<f64> {
    // Hybrid coverage: linear samples resolve the large-scale sweep, the
    // log-spaced half resolves the low-frequency approach to the real axis.
    let half = n / 2;
    let mut grid = Vec::with_capacity(n + 1);
    for k in 0..=half {
        grid.push(omega_max * k as f64 / half as f64);
    }
    let lo = omega_max * 1e-6;
    for k in 0..half {
        grid.push(lo * (omega_max / lo).powf(k as f64 / (half - 1) as f64));
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mut full: Vec<f64> = grid.iter().skip(1).rev().map(|w| -w).collect();
    full.extend(grid);
    full
}

/// Winding number of the loop transfer around `-1`.
///
/// Samples `G(j omega)` over `[-omega_max, omega_max]` (auto-extended until
/// the tail gain drops below 0.1), closes the contour at infinity where the
/// strictly proper loop vanishes, and accumulates the argument of
/// `1 + G(j omega)`. Segments with an argument jump above `pi/2`, or any
/// jump above `pi/8` while the curve passes within 0.1 of `-1`, are bisected
/// adaptively; if refinement bottoms out the result is inconclusive rather
/// than a guess.
pub fn nyquist_winding(
    lt: &LoopTransfer,
    omega_max: Option<f64>,
    n: usize,
) -> Result<WindingReport, StabilityError> {
    if n < 2 || n % 2 != 0 {
        return Err(StabilityError::Domain {
            what: "n",
            value: n as f64,
            expected: "even and >= 2",
        });
    }
    let mut evaluations = 0usize;

    // Identically-zero loops (all gains flat at the operating point) never
    // wind.
    if lt.stages.iter().any(|st| st.gain == 0.0) {
        return Ok(WindingReport {
            winding: 0,
            omega_max: 0.0,
            evaluations: 0,
        });
    }

    let mut w_hi = omega_max.unwrap_or_else(|| {
        10.0 * lt
            .stages
            .iter()
            .map(|st| st.a.max(st.b))
            .fold(1.0, f64::max)
    });
    let mut guard = 0;
    while lt.eval_jomega(w_hi).norm() >= 0.1 {
        w_hi *= 2.0;
        guard += 1;
        if guard > 200 {
            return Err(StabilityError::Inconclusive(
                "loop gain does not roll off; cannot truncate the sweep".into(),
            ));
        }
    }

    let grid = frequency_grid(w_hi, n);
    let mut total_arg = 0.0;
    let mut prev_w = grid[0];
    let mut prev_f = Complex64::new(1.0, 0.0) + lt.eval_jomega(prev_w);
    evaluations += 1;
    for &w in &grid[1..] {
        let f = Complex64::new(1.0, 0.0) + lt.eval_jomega(w);
        evaluations += 1;
        total_arg += segment_arg(lt, prev_w, prev_f, w, f, 0, &mut evaluations)?;
        prev_w = w;
        prev_f = f;
    }

    // Traversing the imaginary axis upward keeps the right half plane on the
    // right, so right-half-plane zeros of 1 + G show up as clockwise
    // (negative) winding.
    let turns = total_arg / (2.0 * PI);
    let winding = -turns.round() as i64;
    if (turns - turns.round()).abs() > 0.25 {
        return Err(StabilityError::Inconclusive(format!(
            "accumulated winding {turns:.3} turns is not near an integer"
        )));
    }
    Ok(WindingReport {
        winding,
        omega_max: w_hi,
        evaluations,
    })
}

fn segment_arg(
    lt: &LoopTransfer,
    w1: f64,
    f1: Complex64,
    w2: f64,
    f2: Complex64,
    depth: usize,
    evaluations: &mut usize,
) -> Result<f64, StabilityError> {
    let delta = (f2 / f1).arg();
    let near_minus_one = f1.norm().min(f2.norm()) < 0.1;
    let limit = if near_minus_one { PI / 8.0 } else { PI / 2.0 };
    if delta.abs() <= limit {
        return Ok(delta);
    }
    if depth >= 48 {
        return Err(StabilityError::Inconclusive(format!(
            "sampling too coarse near omega = {w1}: phase jump {delta:.3} rad at depth {depth}"
        )));
    }
    let wm = 0.5 * (w1 + w2);
    *evaluations += 1;
    let fm = Complex64::new(1.0, 0.0) + lt.eval_jomega(wm);
    Ok(segment_arg(lt, w1, f1, wm, fm, depth + 1, evaluations)?
        + segment_arg(lt, wm, fm, w2, f2, depth + 1, evaluations)?)
}

/// Loop-transfer samples for plotting, swept from `-omega_max` to
/// `+omega_max`.
pub fn nyquist_samples(lt: &LoopTransfer, omega_max: f64, n: usize) -> Vec<(f64, Complex64)> {
    frequency_grid(omega_max, n.max(2))
        .into_iter()
        .map(|w| (w, lt.eval_jomega(w)))
        .collect()
}

/// Winding-based verdict for a network at its equilibrium.
///
/// Works on heterogeneous networks; the margin against the critical gain is
/// attached only when the reduction applies.
pub fn test_nyquist(
    spec: &NetworkSpec,
    eq: &Equilibrium,
    omega_max: Option<f64>,
    n: usize,
) -> Result<Verdict, StabilityError> {
    let lt = LoopTransfer::from_equilibrium(spec, eq);
    let (l, l_bar) = match crate::linearization::reduce(spec, eq) {
        Ok(rm) => (
            rm.l,
            critical_gain(rm.n, rm.q, rm.tau_tilde, SCALAR_TOL).unwrap_or(f64::NAN),
        ),
        Err(_) => (f64::NAN, f64::NAN),
    };
    let mut verdict = Verdict::from_margin(l, l_bar, Method::Nyquist);
    match nyquist_winding(&lt, omega_max, n) {
        Ok(report) => {
            verdict.outcome = if report.winding > 0 {
                Outcome::OscillationsGuaranteed
            } else {
                Outcome::LocallyStable
            };
        }
        Err(StabilityError::Inconclusive(_)) => verdict.outcome = Outcome::Inconclusive,
        Err(e) => return Err(e),
    }
    Ok(verdict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{solve_equilibrium, DEFAULT_TOL};
    use crate::netmodel::load_preset;

    fn loop_of(name: &str) -> LoopTransfer {
        let spec = load_preset(name).unwrap();
        let eq = solve_equilibrium(&spec, DEFAULT_TOL).unwrap();
        LoopTransfer::from_equilibrium(&spec, &eq)
    }

    #[test]
    fn counterexample_loop_is_the_published_one() {
        // 1.2^3 e^{-3s} / (s + 1)^6
        let lt = loop_of("counterexample");
        assert!((lt.dc_gain() - 1.2f64.powi(3)).abs() < 1e-3);
        let s = Complex64::new(0.3, 0.7);
        let reference = 1.2f64.powi(3) * (-3.0 * s).exp() / (s + 1.0).powu(6);
        let rel = (lt.eval(s) - reference).norm() / reference.norm();
        assert!(rel < 1e-3, "relative deviation {rel}");
    }

    #[test]
    fn counterexample_winds_twice() {
        let report = nyquist_winding(&loop_of("counterexample"), None, DEFAULT_SAMPLES).unwrap();
        assert_eq!(report.winding, 2);
    }

    #[test]
    fn stable_presets_do_not_wind() {
        for name in ["example7_nodelay", "hes7_mutant"] {
            let report = nyquist_winding(&loop_of(name), None, DEFAULT_SAMPLES).unwrap();
            assert_eq!(report.winding, 0, "{name}");
        }
    }

    #[test]
    fn unstable_presets_wind() {
        for name in ["example7", "hes7_wild", "repressilator"] {
            let report = nyquist_winding(&loop_of(name), None, DEFAULT_SAMPLES).unwrap();
            assert!(report.winding > 0, "{name}: {}", report.winding);
        }
    }

    #[test]
    fn flat_gain_loop_never_winds() {
        // All-zero gains arise when every Hill slope vanishes at the
        // operating point.
        let lt = LoopTransfer::from_parts(
            &[1.0, 1.0],
            &[2.0, 2.0],
            &[3.0, 3.0],
            &[0.0, 0.0],
            &[0.5, 0.5],
        );
        let report = nyquist_winding(&lt, None, DEFAULT_SAMPLES).unwrap();
        assert_eq!(report.winding, 0);
    }

    #[test]
    fn truncation_extends_until_rolloff() {
        let lt = loop_of("counterexample");
        let report = nyquist_winding(&lt, Some(0.01), 64).unwrap();
        assert!(lt.eval_jomega(report.omega_max).norm() < 0.1);
        assert_eq!(report.winding, 2);
    }

    #[test]
    fn heterogeneous_network_verdict() {
        // Heterogeneous degradation rates: the reduction refuses, the
        // winding test does not.
        let mut spec = load_preset("counterexample").unwrap();
        spec.genes[0].a = 1.35;
        spec.genes[2].b = 0.8;
        let eq = solve_equilibrium(&spec, DEFAULT_TOL).unwrap();
        assert!(crate::linearization::reduce(&spec, &eq).is_err());
        let verdict = test_nyquist(&spec, &eq, None, DEFAULT_SAMPLES).unwrap();
        assert!(verdict.outcome != Outcome::Inconclusive);
        assert!(verdict.margin.is_nan());
    }

    #[test]
    fn samples_are_conjugate_symmetric() {
        let lt = loop_of("counterexample");
        let samples = nyquist_samples(&lt, 5.0, 128);
        let m = samples.len();
        for k in 0..m / 2 {
            let (w_neg, g_neg) = samples[k];
            let (w_pos, g_pos) = samples[m - 1 - k];
            assert!((w_neg + w_pos).abs() < 1e-12);
            assert!((g_neg - g_pos.conj()).norm() < 1e-12);
        }
    }
}
