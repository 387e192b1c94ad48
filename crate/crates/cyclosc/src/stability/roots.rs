//! Poles of the closed loop: roots of `(T_r s + 1)(T_p s + 1) e^{s tau} =
//! lambda_k` for each ring eigenvalue.
//!
//! The loop is a retarded delay system, so only finitely many roots live to
//! the right of any vertical line and the rightmost one decides stability.
//! Roots are found by Newton iterations seeded from a grid over a bounded
//! rectangle; for zero delay each eigenvalue contributes a plain quadratic
//! solved in closed form.

use super::{critical_gain, Method, Outcome, StabilityError, Verdict, SCALAR_TOL};
use crate::linearization::ReducedModel;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Complex-plane rectangle the Newton seeds are drawn from. Only the closed
/// upper half is seeded; conjugate roots follow from the conjugate
/// eigenvalues by symmetry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchRect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_max: f64,
}

/// Converged roots grouped by the eigenvalue they belong to.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenvalueRoots {
    pub lambda: Complex64,
    pub roots: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicRoots {
    pub per_eigenvalue: Vec<EigenvalueRoots>,
    /// Root with the largest real part across all eigenvalues, if any
    /// converged.
    pub dominant: Option<Complex64>,
}

/// Default rectangle: two inverse mean lifetimes to either side of the
/// imaginary axis, two delay periods up.
pub fn default_search(rm: &ReducedModel) -> SearchRect {
    SearchRect {
        re_min: -2.0 / rm.t_arith,
        re_max: 2.0 / rm.t_arith,
        im_max: if rm.tau > 0.0 {
            4.0 * PI / rm.tau
        } else {
            4.0 * PI / rm.t_arith
        },
    }
}

fn char_fn(rm: &ReducedModel, lambda: Complex64, s: Complex64) -> (Complex64, Complex64) {
    let fr = rm.t_r * s + 1.0;
    let fp = rm.t_p * s + 1.0;
    let exp = (s * rm.tau).exp();
    let value = fr * fp * exp - lambda;
    let derivative = exp * (rm.t_r * fp + rm.t_p * fr + rm.tau * fr * fp);
    (value, derivative)
}

fn newton(
    rm: &ReducedModel,
    lambda: Complex64,
    seed: Complex64,
    tol: f64,
    escape: f64,
) -> Option<Complex64> {
    let mut s = seed;
    for _ in 0..60 {
        let (value, derivative) = char_fn(rm, lambda, s);
        if !value.is_finite() || !derivative.is_finite() || derivative.norm() == 0.0 {
            return None;
        }
        if value.norm() < tol {
            return Some(s);
        }
        s -= value / derivative;
        if !s.is_finite() || s.norm() > escape {
            return None;
        }
    }
    None
}

fn quadratic_roots(rm: &ReducedModel, lambda: Complex64) -> Vec<Complex64> {
    // (T_r s + 1)(T_p s + 1) = lambda, no exponential factor.
    let a = rm.t_r * rm.t_p;
    let b = rm.t_r + rm.t_p;
    let c = Complex64::new(1.0, 0.0) - lambda;
    let disc = (Complex64::new(b * b, 0.0) - 4.0 * a * c).sqrt();
    vec![(-b + disc) / (2.0 * a), (-b - disc) / (2.0 * a)]
}

const SEED_GRID: usize = 40;

/// Find the characteristic roots near the imaginary axis.
///
/// For each eigenvalue, Newton runs start from a grid over the closed upper
/// half of `search`; converged roots (`|g| < tol`) are de-duplicated at
/// pairwise distance `10 tol` and mirrored onto the conjugate eigenvalue.
/// An empty result means nothing converged; callers treat that as
/// inconclusive.
pub fn characteristic_roots(
    rm: &ReducedModel,
    search: Option<SearchRect>,
    tol: f64,
) -> CharacteristicRoots {
    let rect = search.unwrap_or_else(|| default_search(rm));
    let escape = 10.0 * (rect.re_max.abs() + rect.re_min.abs() + rect.im_max);

    let n = rm.n;
    let mut groups: Vec<Vec<Complex64>> = vec![Vec::new(); n];
    for (k, &lambda) in rm.lambda.iter().enumerate() {
        let mut found: Vec<Complex64> = Vec::new();
        if rm.tau == 0.0 {
            found = quadratic_roots(rm, lambda);
        } else if lambda.im >= 0.0 {
            // Upper-half eigenvalues are searched directly; their conjugate
            // partners inherit mirrored roots below.
            for i in 0..SEED_GRID {
                for j in 0..SEED_GRID {
                    let re = rect.re_min
                        + (rect.re_max - rect.re_min) * i as f64 / (SEED_GRID - 1) as f64;
                    let im = rect.im_max * j as f64 / (SEED_GRID - 1) as f64;
                    if let Some(root) = newton(rm, lambda, Complex64::new(re, im), tol, escape) {
                        if found.iter().all(|r| (r - root).norm() > 10.0 * tol) {
                            found.push(root);
                        }
                    }
                }
            }
        }
        groups[k] = found;
    }

    // A root of g for lambda conjugates into a root for conj(lambda), which
    // is the ring partner N + 1 - k (1-indexed).
    let mirrored: Vec<Vec<Complex64>> = (0..n)
        .map(|k| {
            let partner = n - 1 - k;
            let mut set = groups[k].clone();
            for r in &groups[partner] {
                let conj = r.conj();
                if set.iter().all(|x| (x - conj).norm() > 10.0 * tol) {
                    set.push(conj);
                }
            }
            set.sort_by(|x, y| y.re.total_cmp(&x.re).then(x.im.total_cmp(&y.im)));
            set
        })
        .collect();

    // Dominant roots come in conjugate pairs; report the upper-half one.
    let dominant = mirrored
        .iter()
        .flatten()
        .copied()
        .max_by(|x, y| {
            x.re.total_cmp(&y.re)
                .then(x.im.abs().total_cmp(&y.im.abs()))
        })
        .map(|s| if s.im < 0.0 { s.conj() } else { s });

    CharacteristicRoots {
        per_eigenvalue: rm
            .lambda
            .iter()
            .zip(mirrored)
            .map(|(&lambda, roots)| EigenvalueRoots { lambda, roots })
            .collect(),
        dominant,
    }
}

/// Verdict from the sign of the dominant root's real part.
///
/// The margin is still reported against the critical gain so that verdicts
/// from different routes stay comparable.
pub fn test_roots(rm: &ReducedModel, tol: f64) -> Result<Verdict, StabilityError> {
    let roots = characteristic_roots(rm, None, tol);
    let l_bar = critical_gain(rm.n, rm.q, rm.tau_tilde, SCALAR_TOL).unwrap_or(f64::NAN);
    let mut verdict = Verdict::from_margin(rm.l, l_bar, Method::Roots);
    match roots.dominant {
        None => verdict.outcome = Outcome::Inconclusive,
        Some(s) => {
            verdict.outcome = if s.re > 0.0 {
                Outcome::OscillationsGuaranteed
            } else {
                Outcome::LocallyStable
            };
        }
    }
    Ok(verdict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{solve_equilibrium, DEFAULT_TOL};
    use crate::netmodel::load_preset;
    use crate::stability::NEWTON_TOL;

    fn rm(name: &str) -> ReducedModel {
        let spec = load_preset(name).unwrap();
        let eq = solve_equilibrium(&spec, DEFAULT_TOL).unwrap();
        crate::linearization::reduce(&spec, &eq).unwrap()
    }

    #[test]
    fn counterexample_dominant_pair() {
        let model = rm("counterexample");
        let roots = characteristic_roots(&model, None, NEWTON_TOL);
        let dominant = roots.dominant.expect("search converged");
        let expected = Complex64::new(0.0212, 0.3634);
        assert!(
            (dominant - expected).norm() < 5e-3,
            "dominant root {dominant} vs published {expected}"
        );
        // The conjugate partner is present in the mirrored groups.
        let has_conjugate = roots
            .per_eigenvalue
            .iter()
            .flat_map(|g| &g.roots)
            .any(|r| (r - expected.conj()).norm() < 5e-3);
        assert!(has_conjugate);
    }

    #[test]
    fn every_reported_root_satisfies_the_equation() {
        let model = rm("counterexample");
        let roots = characteristic_roots(&model, None, NEWTON_TOL);
        for group in &roots.per_eigenvalue {
            assert!(!group.roots.is_empty());
            for &s in &group.roots {
                let (value, _) = char_fn(&model, group.lambda, s);
                assert!(
                    value.norm() < 10.0 * NEWTON_TOL,
                    "|g({s})| = {}",
                    value.norm()
                );
            }
        }
    }

    #[test]
    fn zero_delay_quadratic_cross_check() {
        // Two genes, no delay: each eigenvalue yields a plain quadratic.
        let model = ReducedModel::from_dimensionless(2, 0.8, 0.0, 1.7).unwrap();
        let roots = characteristic_roots(&model, None, NEWTON_TOL);
        // The N = 2 ring is purely imaginary: {jL, -jL}.
        for group in &roots.per_eigenvalue {
            for &s in &group.roots {
                let lhs = (model.t_r * s + 1.0) * (model.t_p * s + 1.0);
                assert!((lhs - group.lambda).norm() < 1e-9);
            }
        }
        assert!(roots.dominant.is_some());
    }

    #[test]
    fn stable_side_has_negative_dominant_root() {
        // Gain just below the critical value: every root sits strictly left
        // of the axis.
        let l_bar = critical_gain(3, 1.0, 1.0, 1e-12).unwrap();
        let model = ReducedModel::from_dimensionless(3, 1.0, 1.0, l_bar - 0.05).unwrap();
        let roots = characteristic_roots(&model, None, NEWTON_TOL);
        let dominant = roots.dominant.unwrap();
        assert!(dominant.re < 0.0, "dominant {dominant}");
        // And just above, the dominant root crosses over.
        let model = ReducedModel::from_dimensionless(3, 1.0, 1.0, l_bar + 0.05).unwrap();
        let dominant = characteristic_roots(&model, None, NEWTON_TOL)
            .dominant
            .unwrap();
        assert!(dominant.re > 0.0, "dominant {dominant}");
    }

    #[test]
    fn verdict_wrapper_matches_analytic() {
        for name in [
            "counterexample",
            "example7",
            "example7_nodelay",
            "hes7_mutant",
        ] {
            let model = rm(name);
            let by_roots = test_roots(&model, NEWTON_TOL).unwrap();
            let analytic = crate::stability::test_analytic(&model, SCALAR_TOL).unwrap();
            assert_eq!(by_roots.outcome, analytic.outcome, "{name}");
        }
    }
}
