//! Boundary curve of the instability region and the gain thresholds read off
//! it.
//!
//! In normalized coordinates the boundary is
//! `(1 - Q^2 w^2 + 2jw) e^{j w tau_tilde}` for `w >= 0`; both its modulus and
//! its continued argument increase strictly with `w`. The ring eigenvalue
//! closest to the positive real axis sits at angle `pi/N`, so instability is
//! decided entirely by the boundary gain where the phase first reaches
//! `pi/N`: that gain is the critical average gain `L_bar`.

use super::{Method, StabilityError, Verdict};
use crate::linearization::ReducedModel;
use num_complex::Complex64;
use std::f64::consts::PI;

fn check_q(q: f64) -> Result<(), StabilityError> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(StabilityError::Domain {
            what: "Q",
            value: q,
            expected: "0 < Q <= 1",
        });
    }
    Ok(())
}

/// Modulus and unwrapped phase of the boundary map at `omega_tilde`.
///
/// The gain is `sqrt(Q^4 w^4 + 2(2 - Q^2) w^2 + 1)`; the phase starts at 0,
/// increases strictly, and is the continuous branch (the quadratic factor
/// never crosses the negative real axis from below, so `atan2` plus the
/// linear delay term is already unwrapped). Both outputs are strictly
/// increasing in `omega_tilde`.
pub fn phase_gain(q: f64, tau_tilde: f64, omega_tilde: f64) -> Result<(f64, f64), StabilityError> {
    check_q(q)?;
    if !(tau_tilde >= 0.0) {
        return Err(StabilityError::Domain {
            what: "tau_tilde",
            value: tau_tilde,
            expected: ">= 0",
        });
    }
    if !(omega_tilde >= 0.0) {
        return Err(StabilityError::Domain {
            what: "omega_tilde",
            value: omega_tilde,
            expected: ">= 0",
        });
    }
    let w2 = omega_tilde * omega_tilde;
    let q2 = q * q;
    let gain = (q2 * q2 * w2 * w2 + 2.0 * (2.0 - q2) * w2 + 1.0).sqrt();
    let phase = (2.0 * omega_tilde).atan2(1.0 - q2 * w2) + omega_tilde * tau_tilde;
    Ok((gain, phase))
}

/// Gain ceiling of the zero-delay criterion.
///
/// `W(N, Q) = 2 / (cos(pi/N) + sqrt(cos^2(pi/N) + Q^2 sin^2(pi/N)))`.
/// For a single gene the denominator vanishes: no gain destabilizes a
/// delay-free self-loop, and `W` is positive infinity.
pub fn threshold_w(n: usize, q: f64) -> Result<f64, StabilityError> {
    if n == 0 {
        return Err(StabilityError::Domain {
            what: "N",
            value: 0.0,
            expected: ">= 1",
        });
    }
    check_q(q)?;
    if n == 1 {
        return Ok(f64::INFINITY);
    }
    let angle = PI / n as f64;
    let (c, s) = (angle.cos(), angle.sin());
    Ok(2.0 / (c + (c * c + q * q * s * s).sqrt()))
}

fn discriminant(q: f64, l: f64) -> f64 {
    let q2 = q * q;
    4.0 * (1.0 - q2) + q2 * q2 * l * l
}

/// Frequency at which the boundary gain equals `L`, for `L > 1`.
///
/// Solves the biquadratic gain equation:
/// `omega_tilde* = sqrt(Q^2 - 2 + sqrt(D(Q, L))) / Q^2` with
/// `D = 4(1 - Q^2) + Q^4 L^2`.
pub fn crossing_frequency(q: f64, l: f64) -> Result<f64, StabilityError> {
    check_q(q)?;
    if !(l > 1.0) {
        return Err(StabilityError::NoCrossing { l });
    }
    let q2 = q * q;
    // Clamp guards the L -> 1+ limit where roundoff can leave a tiny
    // negative under the root.
    let inner = (q2 - 2.0 + discriminant(q, l).sqrt()).max(0.0);
    Ok(inner.sqrt() / q2)
}

/// Critical average gain: oscillations are guaranteed exactly when
/// `L > L_bar(N, Q, tau_tilde)`.
///
/// `L_bar` solves `arg(2 - sqrt(D) + 2j sqrt(Q^2 - 2 + sqrt(D))) =
/// pi/N - omega_tilde* tau_tilde` on `(1, W]`; the left side increases and
/// the right side decreases in `L_bar`, so bisection applies. At zero delay
/// it coincides with `W(N, Q)`.
pub fn critical_gain(n: usize, q: f64, tau_tilde: f64, tol: f64) -> Result<f64, StabilityError> {
    if n == 0 {
        return Err(StabilityError::Domain {
            what: "N",
            value: 0.0,
            expected: ">= 1",
        });
    }
    check_q(q)?;
    if !(tau_tilde >= 0.0) {
        return Err(StabilityError::Domain {
            what: "tau_tilde",
            value: tau_tilde,
            expected: ">= 0",
        });
    }
    if !(tol > 0.0) {
        return Err(StabilityError::Domain {
            what: "tol",
            value: tol,
            expected: "> 0",
        });
    }
    let w = threshold_w(n, q)?;
    if tau_tilde == 0.0 {
        return Ok(w);
    }

    let target = PI / n as f64;
    // Positive where L exceeds the critical gain.
    let excess = |l: f64| -> f64 {
        let sqrt_d = discriminant(q, l).sqrt();
        let im = (q * q - 2.0 + sqrt_d).max(0.0).sqrt();
        let lhs = (2.0 * im).atan2(2.0 - sqrt_d);
        let omega_star = im / (q * q);
        lhs - (target - omega_star * tau_tilde)
    };

    let mut lo = 1.0;
    let mut hi = if w.is_finite() {
        w
    } else {
        // Single-gene case: expand until the phase condition flips. The
        // critical gain blows up as the delay shrinks, so allow a huge but
        // finite bracket before giving up.
        let mut hi = 2.0;
        while excess(hi) < 0.0 {
            hi *= 4.0;
            if hi > 1e100 {
                return Err(StabilityError::Inconclusive(
                    "critical gain bracket expansion failed".into(),
                ));
            }
        }
        hi
    };
    if excess(hi) < 0.0 {
        // Roundoff can put the root a hair above W; the criterion then never
        // fires below W and W itself is the answer.
        return Ok(hi);
    }
    while hi - lo > tol * hi {
        let mid = 0.5 * (lo + hi);
        if excess(mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Critical synthesis/degradation ratio for the homogeneous repressive case.
///
/// `R_bar^2 = (L_bar / (nu - L_bar))^{1/nu} * nu / (nu - L_bar)`, defined
/// only when `nu > L_bar`; past that no ratio, however large, can certify
/// oscillations through this route.
pub fn critical_ratio(nu: f64, l_bar: f64) -> Result<f64, StabilityError> {
    if !(nu >= 1.0) {
        return Err(StabilityError::Domain {
            what: "nu",
            value: nu,
            expected: ">= 1",
        });
    }
    if !(l_bar > 1.0) {
        return Err(StabilityError::Domain {
            what: "l_bar",
            value: l_bar,
            expected: "> 1",
        });
    }
    if !(nu > l_bar) {
        return Err(StabilityError::NotApplicable { nu, l_bar });
    }
    let ratio = l_bar / (nu - l_bar);
    Ok((ratio.powf(1.0 / nu) * nu / (nu - l_bar)).sqrt())
}

/// Analytic verdict: compare the average gain against the critical gain.
pub fn test_analytic(rm: &ReducedModel, tol: f64) -> Result<Verdict, StabilityError> {
    let l_bar = critical_gain(rm.n, rm.q, rm.tau_tilde, tol)?;
    let mut verdict = Verdict::from_margin(rm.l, l_bar, Method::Analytic);
    verdict.omega_star = crossing_frequency(rm.q, rm.l).ok();
    verdict.omega_sharp = phase_crossing(rm.n, rm.q, rm.tau_tilde, tol);
    Ok(verdict)
}

/// Frequency where the unwrapped boundary phase reaches `pi/N`, if any.
fn phase_crossing(n: usize, q: f64, tau_tilde: f64, tol: f64) -> Option<f64> {
    let target = PI / n as f64;
    // With no delay the phase saturates below pi, so a single-gene loop
    // never reaches its target angle.
    if tau_tilde == 0.0 && n == 1 {
        return None;
    }
    let phase = |w: f64| phase_gain(q, tau_tilde, w).expect("domain pre-checked").1;
    let mut hi = 1.0;
    let mut guard = 0;
    while phase(hi) < target {
        hi *= 2.0;
        guard += 1;
        if guard > 200 {
            return None;
        }
    }
    let mut lo = 0.0;
    while hi - lo > tol * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if phase(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Frequency-sweep verdict: locate the phase crossing `Theta(w) = pi/N` and
/// compare the boundary gain there with `L`.
///
/// This is the graphical test made numeric; it must agree with
/// [`test_analytic`] on every input, since the boundary gain at the phase
/// crossing *is* the critical gain, reached by an independent route.
pub fn test_graphical(rm: &ReducedModel, tol: f64) -> Result<Verdict, StabilityError> {
    check_q(rm.q)?;
    let omega_sharp = phase_crossing(rm.n, rm.q, rm.tau_tilde, tol);
    let gain_at_crossing = match omega_sharp {
        Some(w) => phase_gain(rm.q, rm.tau_tilde, w)?.0,
        None => f64::INFINITY,
    };
    let mut verdict = Verdict::from_margin(rm.l, gain_at_crossing, Method::Graphical);
    verdict.omega_sharp = omega_sharp;
    verdict.omega_star = crossing_frequency(rm.q, rm.l).ok();
    Ok(verdict)
}

/// Sample the instability-region boundary for plotting.
///
/// Returns `(omega_tilde, point)` pairs swept from `-omega_max` to
/// `+omega_max` on a uniform grid of `n` non-negative frequencies; negative
/// frequencies carry the complex conjugates.
pub fn boundary_samples(
    q: f64,
    tau_tilde: f64,
    omega_max: f64,
    n: usize,
) -> Result<Vec<(f64, Complex64)>, StabilityError> {
    if n < 2 {
        return Err(StabilityError::Domain {
            what: "n",
            value: n as f64,
            expected: ">= 2",
        });
    }
    if !(omega_max > 0.0) {
        return Err(StabilityError::Domain {
            what: "omega_max",
            value: omega_max,
            expected: "> 0",
        });
    }
    let mut upper = Vec::with_capacity(n);
    for k in 0..n {
        let w = omega_max * k as f64 / (n - 1) as f64;
        let (gain, phase) = phase_gain(q, tau_tilde, w)?;
        upper.push((w, Complex64::from_polar(gain, phase)));
    }
    let mut samples: Vec<(f64, Complex64)> = upper
        .iter()
        .skip(1)
        .rev()
        .map(|&(w, z)| (-w, z.conj()))
        .collect();
    samples.extend(upper);
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{solve_equilibrium, DEFAULT_TOL};
    use crate::netmodel::load_preset;
    use crate::stability::{Outcome, SCALAR_TOL};

    fn rm(name: &str) -> ReducedModel {
        let spec = load_preset(name).unwrap();
        let eq = solve_equilibrium(&spec, DEFAULT_TOL).unwrap();
        crate::linearization::reduce(&spec, &eq).unwrap()
    }

    #[test]
    fn phase_gain_at_origin_and_reference_points() {
        let (g, p) = phase_gain(0.37, 2.0, 0.0).unwrap();
        assert_eq!((g, p), (1.0, 0.0));
        // Q = 1, no delay, w = 1: modulus 2, angle pi/2.
        let (g, p) = phase_gain(1.0, 0.0, 1.0).unwrap();
        assert!((g - 2.0).abs() < 1e-15);
        assert!((p - PI / 2.0).abs() < 1e-15);
        // The gain polynomial evaluated with the seven-gene example's values.
        let (g, _) = phase_gain(0.8, 1.0, 0.1523).unwrap();
        assert!((g - 1.031).abs() < 2e-3);
    }

    #[test]
    fn phase_gain_rejects_negative_frequency() {
        assert!(phase_gain(0.8, 1.0, -0.1).is_err());
        assert!(phase_gain(1.2, 1.0, 0.1).is_err());
    }

    #[test]
    fn phase_is_continuous_past_the_quadrant_flip() {
        // The quadratic factor crosses the imaginary axis at w = 1/Q; the
        // unwrapped phase must sail through pi/2 without a jump.
        let q = 0.6;
        let mut prev = 0.0;
        for k in 0..5000 {
            let w = 4.0 * k as f64 / 4999.0;
            let (_, phase) = phase_gain(q, 0.7, w).unwrap();
            assert!(phase >= prev);
            assert!(phase - prev < 0.01);
            prev = phase;
        }
        assert!(prev > PI);
    }

    #[test]
    fn threshold_reference_values() {
        assert!((threshold_w(7, 0.8).unwrap() - 1.0715).abs() < 1e-3);
        assert!((threshold_w(3, 0.745356).unwrap() - 1.519).abs() < 1e-3);
        assert!((threshold_w(2, 1.0).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(threshold_w(1, 0.674).unwrap(), f64::INFINITY);
        assert!(threshold_w(0, 0.5).is_err());
    }

    #[test]
    fn crossing_frequency_reference_values() {
        let w = crossing_frequency(0.8, 1.031).unwrap();
        assert!((w - 0.152).abs() < 3e-3);
        let w = crossing_frequency(0.674, 1.85).unwrap();
        assert!((w - 0.864).abs() < 5e-3);
        // L -> 1+ collapses to zero frequency.
        assert!(crossing_frequency(0.9, 1.0 + 1e-12).unwrap() < 1e-5);
        assert!(matches!(
            crossing_frequency(0.8, 0.9),
            Err(StabilityError::NoCrossing { .. })
        ));
    }

    #[test]
    fn crossing_frequency_inverts_the_gain() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let q: f64 = rng.gen_range(0.05..=1.0);
            let l: f64 = rng.gen_range(1.0001..5.0);
            let w = crossing_frequency(q, l).unwrap();
            let (gain, _) = phase_gain(q, 0.0, w).unwrap();
            assert!((gain - l).abs() < 1e-10 * l, "q={q} l={l}: gain {gain}");
        }
    }

    #[test]
    fn critical_gain_reference_values() {
        let tol = SCALAR_TOL;
        assert!((critical_gain(7, 0.8, 1.0, tol).unwrap() - 1.031).abs() < 5e-3);
        assert!((critical_gain(7, 0.8, 0.0, tol).unwrap() - 1.072).abs() < 2e-3);
        assert!((critical_gain(1, 0.674, 2.23, tol).unwrap() - 1.85).abs() < 1e-2);
        assert!((critical_gain(1, 0.575, 1.55, tol).unwrap() - 2.39).abs() < 1e-2);
    }

    #[test]
    fn critical_gain_equals_w_at_zero_delay() {
        for &(n, q) in &[(2, 0.3), (3, 0.745356), (7, 0.8), (12, 0.99)] {
            let w = threshold_w(n, q).unwrap();
            let lb = critical_gain(n, q, 0.0, SCALAR_TOL).unwrap();
            assert!((w - lb).abs() <= 1e-9 * w);
        }
    }

    #[test]
    fn critical_ratio_reference_values() {
        assert!((critical_ratio(2.6, 1.031).unwrap() - 1.187).abs() < 5e-3);
        assert!((critical_ratio(2.6, 1.072).unwrap() - 1.218).abs() < 5e-3);
        assert!((critical_ratio(2.0, 1.85).unwrap() - 6.99).abs() < 0.15);
        assert!(matches!(
            critical_ratio(2.0, 2.39),
            Err(StabilityError::NotApplicable { .. })
        ));
    }

    #[test]
    fn seven_gene_verdicts() {
        let with_delay = rm("example7");
        let v = test_analytic(&with_delay, SCALAR_TOL).unwrap();
        assert_eq!(v.outcome, Outcome::OscillationsGuaranteed);
        assert!(v.margin > 0.0);
        let nodelay = rm("example7_nodelay");
        let v0 = test_analytic(&nodelay, SCALAR_TOL).unwrap();
        assert_eq!(v0.outcome, Outcome::LocallyStable);
        assert!(v0.margin < 0.0);
    }

    #[test]
    fn hes7_mutation_stabilizes() {
        let v = test_analytic(&rm("hes7_wild"), SCALAR_TOL).unwrap();
        assert_eq!(v.outcome, Outcome::OscillationsGuaranteed);
        let v = test_analytic(&rm("hes7_mutant"), SCALAR_TOL).unwrap();
        assert_eq!(v.outcome, Outcome::LocallyStable);
        assert!((v.l - 1.97).abs() < 1e-2 && (v.l_bar - 2.39).abs() < 1e-2);
    }

    #[test]
    fn graphical_route_counterexample() {
        let v = test_graphical(&rm("counterexample"), SCALAR_TOL).unwrap();
        assert_eq!(v.outcome, Outcome::OscillationsGuaranteed);
        // The first ring eigenvalue (angle pi/3, radius 1.2) lies inside the
        // region: the boundary reaches that angle at a smaller modulus.
        let w_sharp = v.omega_sharp.unwrap();
        let (gain, phase) = phase_gain(1.0, 1.0, w_sharp).unwrap();
        assert!((phase - PI / 3.0).abs() < 1e-8);
        assert!(gain < 1.2);
    }

    #[test]
    fn graphical_stable_when_gain_below_unity() {
        let model = ReducedModel::from_dimensionless(4, 0.7, 2.0, 0.8).unwrap();
        let v = test_graphical(&model, SCALAR_TOL).unwrap();
        assert_eq!(v.outcome, Outcome::LocallyStable);
        assert!(v.omega_star.is_none());
    }

    #[test]
    fn single_gene_without_delay_never_oscillates() {
        let model = ReducedModel::from_dimensionless(1, 0.674, 0.0, 100.0).unwrap();
        let g = test_graphical(&model, SCALAR_TOL).unwrap();
        assert_eq!(g.outcome, Outcome::LocallyStable);
        assert!(g.omega_sharp.is_none());
        let a = test_analytic(&model, SCALAR_TOL).unwrap();
        assert_eq!(a.outcome, Outcome::LocallyStable);
        assert_eq!(a.l_bar, f64::INFINITY);
    }

    #[test]
    fn graphical_equals_analytic_on_presets() {
        for name in [
            "example7",
            "example7_nodelay",
            "counterexample",
            "hes7_wild",
            "hes7_mutant",
            "repressilator",
        ] {
            let model = rm(name);
            let a = test_analytic(&model, SCALAR_TOL).unwrap();
            let g = test_graphical(&model, SCALAR_TOL).unwrap();
            assert_eq!(a.outcome, g.outcome, "{name}");
            if a.l_bar.is_finite() {
                assert!((a.l_bar - g.l_bar).abs() < 1e-6 * a.l_bar, "{name}");
            }
        }
    }

    #[test]
    fn boundary_samples_reference_points() {
        let samples = boundary_samples(1.0, 1.0, 3.0, 301).unwrap();
        assert_eq!(samples.len(), 601);
        // The sweep is symmetric: first entry conjugates the last.
        assert_eq!(samples[0].0, -3.0);
        assert_eq!(samples[600].0, 3.0);
        assert!((samples[0].1 - samples[600].1.conj()).norm() < 1e-12);
        // w = 0 maps to 1 + 0j.
        let at_zero = samples[300];
        assert_eq!(at_zero.0, 0.0);
        assert!((at_zero.1 - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        // w = 1 maps to modulus 2 at angle pi/2 + 1.
        let at_one = samples[400];
        assert!((at_one.0 - 1.0).abs() < 1e-12);
        assert!((at_one.1.norm() - 2.0).abs() < 1e-12);
        let expected = Complex64::from_polar(2.0, PI / 2.0 + 1.0);
        assert!((at_one.1 - expected).norm() < 1e-12);
    }

    #[test]
    fn boundary_crosses_the_ring_radius_beyond_the_ring_angle() {
        // With the three-gene counterexample parameters the boundary reaches
        // modulus 1.2 at an angle past pi/3, which is what places the first
        // eigenvalue inside the region.
        let w_star = crossing_frequency(1.0, 1.2).unwrap();
        let (gain, phase) = phase_gain(1.0, 1.0, w_star).unwrap();
        assert!((gain - 1.2).abs() < 1e-10);
        assert!(phase > PI / 3.0);
    }

    #[test]
    fn boundary_samples_domain_errors() {
        assert!(boundary_samples(0.8, 0.5, 2.0, 1).is_err());
        assert!(boundary_samples(0.8, 0.5, -1.0, 16).is_err());
    }
}
