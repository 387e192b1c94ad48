//! The unique steady state of a validated network and the linearized
//! interaction gains at that point.
//!
//! Setting both time derivatives to zero gives, per gene,
//! `r* = (beta * f(p_upstream) + alpha0) / a` and `p* = c * r* / b`. Composing
//! the per-gene steady maps once around the cycle yields a scalar return map
//! for the first protein. Under the negative-cycle assumption that map is
//! strictly decreasing, so it has exactly one fixed point, found by bisection.
//! Delays play no role here: they shift history, not fixed points.

use crate::netmodel::{hill_eval, NetworkSpec, SpecError};
use thiserror::Error;

/// Default relative tolerance on the fixed-point coordinate.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Bisection budget; more than enough to shrink any bracket below 1e-12.
const MAX_BISECTIONS: usize = 200;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EquilibriumError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("tolerance {tol} not reached after {budget} bisection steps")]
    ToleranceNotReached { tol: f64, budget: usize },
    #[error("return map is not bracketed on [0, {upper}]; the network violates the negative-cycle structure")]
    DegenerateBracket { upper: f64 },
    #[error("tol must be positive, got {0}")]
    BadTolerance(f64),
}

/// Steady state of the network together with the linearized gains.
#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    /// Steady mRNA level per gene.
    pub r_star: Vec<f64>,
    /// Steady protein level per gene.
    pub p_star: Vec<f64>,
    /// Hill slope of gene `i` at its upstream steady protein; the sign
    /// matches the regulation direction.
    pub zeta: Vec<f64>,
    /// Largest residual of the steady-state equations at the returned point
    /// (concentration/time).
    pub residual: f64,
}

/// Steady protein produced by gene `i` when its upstream protein sits at `u`.
fn steady_protein(spec: &NetworkSpec, i: usize, u: f64) -> Result<f64, SpecError> {
    let g = &spec.genes[i];
    let (f, _) = hill_eval(g.regulation, u, spec.nu, g.p0)?;
    Ok(g.c * (g.beta * f + g.alpha0) / (g.a * g.b))
}

/// One trip around the cycle: candidate `p_1 = x` propagated gene by gene
/// back to a new `p_1`.
fn return_map(spec: &NetworkSpec, x: f64) -> Result<f64, SpecError> {
    let n = spec.len();
    let mut u = x;
    for i in 1..n {
        u = steady_protein(spec, i, u)?;
    }
    steady_protein(spec, 0, u)
}

/// Upper bound for every steady protein level: production saturates at
/// `c (beta + alpha0) / (a b)`.
fn protein_bound(spec: &NetworkSpec) -> f64 {
    spec.genes
        .iter()
        .map(|g| g.c * (g.beta + g.alpha0) / (g.a * g.b))
        .fold(0.0, f64::max)
}

/// Compute the unique equilibrium of a validated network.
///
/// `tol` is relative on the fixed-point coordinate (default
/// [`DEFAULT_TOL`]). The returned gains satisfy `sign(zeta_i) = sign of the
/// i-th regulation`, and the steady state is independent of the delays.
pub fn solve_equilibrium(spec: &NetworkSpec, tol: f64) -> Result<Equilibrium, EquilibriumError> {
    spec.validate()?;
    if !(tol > 0.0) {
        return Err(EquilibriumError::BadTolerance(tol));
    }
    let n = spec.len();
    let upper = protein_bound(spec);

    let g = |x: f64| -> Result<f64, SpecError> { Ok(return_map(spec, x)? - x) };

    let mut lo = 0.0;
    let mut hi = upper;
    let g_lo = g(lo)?;
    if g_lo < 0.0 {
        return Err(EquilibriumError::DegenerateBracket { upper });
    }
    if g(hi)? > 0.0 {
        return Err(EquilibriumError::DegenerateBracket { upper });
    }

    let mut converged = g_lo == 0.0;
    if converged {
        hi = lo;
    }
    let mut steps = 0;
    while !converged {
        if steps >= MAX_BISECTIONS {
            return Err(EquilibriumError::ToleranceNotReached {
                tol,
                budget: MAX_BISECTIONS,
            });
        }
        steps += 1;
        let mid = 0.5 * (lo + hi);
        if g(mid)? >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        converged = hi - lo <= tol * hi.max(f64::MIN_POSITIVE) || lo == hi;
    }

    // Polish the midpoint with two guarded Newton steps on g(x) = F(x) - x;
    // the chain rule through the per-gene maps gives F' exactly.
    let mut x = 0.5 * (lo + hi);
    for _ in 0..2 {
        let (fx, dfx) = return_map_with_slope(spec, x)?;
        let gp = dfx - 1.0;
        if gp == 0.0 {
            break;
        }
        let next = x - (fx - x) / gp;
        if next.is_finite() && next >= lo && next <= hi {
            x = next;
        } else {
            break;
        }
    }

    // Forward substitution fixes the remaining components.
    let mut p_star = vec![0.0; n];
    p_star[0] = x;
    for i in 1..n {
        p_star[i] = steady_protein(spec, i, p_star[i - 1])?;
    }
    let mut r_star = vec![0.0; n];
    let mut zeta = vec![0.0; n];
    for i in 0..n {
        let gspec = &spec.genes[i];
        let u = p_star[spec.upstream(i)];
        let (f, df) = hill_eval(gspec.regulation, u, spec.nu, gspec.p0)?;
        r_star[i] = (gspec.beta * f + gspec.alpha0) / gspec.a;
        zeta[i] = df;
    }

    let mut residual: f64 = 0.0;
    for i in 0..n {
        let gspec = &spec.genes[i];
        let u = p_star[spec.upstream(i)];
        let (f, _) = hill_eval(gspec.regulation, u, spec.nu, gspec.p0)?;
        let dr = -gspec.a * r_star[i] + gspec.beta * f + gspec.alpha0;
        let dp = -gspec.b * p_star[i] + gspec.c * r_star[i];
        residual = residual.max(dr.abs()).max(dp.abs());
    }

    Ok(Equilibrium {
        r_star,
        p_star,
        zeta,
        residual,
    })
}

/// Return map along with its derivative at `x` (chain rule through the cycle).
fn return_map_with_slope(spec: &NetworkSpec, x: f64) -> Result<(f64, f64), SpecError> {
    let n = spec.len();
    let mut u = x;
    let mut slope = 1.0;
    for step in 1..=n {
        let i = step % n;
        let g = &spec.genes[i];
        let (f, df) = hill_eval(g.regulation, u, spec.nu, g.p0)?;
        let k = g.c / (g.a * g.b);
        u = k * (g.beta * f + g.alpha0);
        slope *= k * g.beta * df;
    }
    Ok((u, slope))
}

/// Linearized interaction gains `zeta_i` at a given steady protein profile.
///
/// `zeta_i` is the exact Hill derivative of gene `i`'s input nonlinearity at
/// the upstream steady protein level.
pub fn linear_gains(spec: &NetworkSpec, p_star: &[f64]) -> Result<Vec<f64>, EquilibriumError> {
    let n = spec.len();
    let mut zeta = Vec::with_capacity(n);
    for i in 0..n {
        let g = &spec.genes[i];
        let (_, df) = hill_eval(g.regulation, p_star[(i + n - 1) % n], spec.nu, g.p0)?;
        zeta.push(df);
    }
    Ok(zeta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{load_preset, GeneSpec, Regulation};

    /// Independent oracle for the homogeneous repressive case in normalized
    /// coordinates: the fixed point of `p = R^2 / (1 + p^nu)`, i.e. the root
    /// of `p (1 + p^nu) = R^2`, by plain scalar bisection.
    fn homogeneous_oracle(r_squared: f64, nu: f64) -> f64 {
        let f = |p: f64| p * (1.0 + p.powf(nu)) - r_squared;
        let mut lo = 0.0;
        let mut hi = r_squared.max(1.0);
        assert!(f(hi) > 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) <= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Oracle for the leaky repressilator steady state:
    /// `p (1 + p^2) = cb/(ab) + alpha0-term (1 + p^2)`; bisection on the
    /// monotone difference.
    fn repressilator_oracle(alpha: f64, alpha0: f64) -> f64 {
        let f = |p: f64| p * (1.0 + p * p) - alpha - alpha0 * (1.0 + p * p);
        let mut lo = 0.0;
        let mut hi = alpha + alpha0 + 1.0;
        assert!(f(hi) > 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) <= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn counterexample_fixed_point() {
        let spec = load_preset("counterexample").unwrap();
        let eq = solve_equilibrium(&spec, DEFAULT_TOL).unwrap();
        let oracle = homogeneous_oracle(1.7498 * 1.7498, 2.0);
        for &p in &eq.p_star {
            assert!((p - oracle).abs() < 1e-9, "p* = {p}, oracle = {oracle}");
            assert!((p - 1.2248).abs() < 1e-3);
        }
        // Near-equilibrium levels used in the published trajectory.
        for &r in &eq.r_star {
            assert!((r - 0.699).abs() < 1e-2);
        }
        assert!(eq.residual < 1e-9);
    }

    #[test]
    fn example7_fixed_point() {
        let spec = load_preset("example7").unwrap();
        let eq = solve_equilibrium(&spec, DEFAULT_TOL).unwrap();
        let oracle = homogeneous_oracle(1.44, 2.6);
        for &p in &eq.p_star {
            assert!((p - oracle).abs() < 1e-9);
            assert!((p - 0.8595).abs() < 1e-3);
        }
    }

    #[test]
    fn repressilator_fixed_point() {
        let spec = load_preset("repressilator").unwrap();
        let eq = solve_equilibrium(&spec, DEFAULT_TOL).unwrap();
        let oracle = repressilator_oracle(624.0, 0.0866);
        for &p in &eq.p_star {
            assert!((p - oracle).abs() < 1e-8, "p* = {p}, oracle = {oracle}");
            assert!((p - 8.53).abs() < 0.01);
        }
    }

    #[test]
    fn zero_production_forces_zero_state() {
        // A repressive ring with beta ~ 0 and no leak pins everything at zero.
        // (beta = 0 itself is rejected by validation, so probe the limit.)
        let mut spec = load_preset("counterexample").unwrap();
        for g in &mut spec.genes {
            g.beta = 1e-300;
        }
        let eq = solve_equilibrium(&spec, DEFAULT_TOL).unwrap();
        for (&r, &p) in eq.r_star.iter().zip(&eq.p_star) {
            assert!(r < 1e-290 && p < 1e-290);
        }
    }

    #[test]
    fn gain_signs_match_regulation() {
        let mut spec = load_preset("counterexample").unwrap();
        spec.genes[0].regulation = Regulation::Activate;
        spec.genes[1].regulation = Regulation::Activate;
        let eq = solve_equilibrium(&spec, DEFAULT_TOL).unwrap();
        for (g, &z) in spec.genes.iter().zip(&eq.zeta) {
            assert!(z * g.regulation.sign() >= 0.0);
            assert!(z != 0.0);
        }
    }

    #[test]
    fn gain_matches_finite_difference() {
        let spec = load_preset("example7").unwrap();
        let eq = solve_equilibrium(&spec, DEFAULT_TOL).unwrap();
        for i in 0..spec.len() {
            let u = eq.p_star[spec.upstream(i)];
            let h = u * 1e-6;
            let g = &spec.genes[i];
            let (fp, _) = hill_eval(g.regulation, u + h, spec.nu, g.p0).unwrap();
            let (fm, _) = hill_eval(g.regulation, u - h, spec.nu, g.p0).unwrap();
            let fd = (fp - fm) / (2.0 * h);
            assert!((eq.zeta[i] - fd).abs() / fd.abs() < 1e-6);
        }
    }

    #[test]
    fn delays_do_not_move_the_equilibrium() {
        let spec = load_preset("example7").unwrap();
        let mut nodelay = spec.clone();
        for g in &mut nodelay.genes {
            g.tau_r = 0.0;
            g.tau_p = 0.0;
        }
        let eq = solve_equilibrium(&spec, DEFAULT_TOL).unwrap();
        let eq0 = solve_equilibrium(&nodelay, DEFAULT_TOL).unwrap();
        assert_eq!(eq.p_star, eq0.p_star);
        assert_eq!(eq.r_star, eq0.r_star);
    }

    #[test]
    fn synthesis_rate_rebalancing_invariance() {
        // (c, beta) -> (k c, beta / k) preserves every p* and zeta; r* scales
        // by 1/k.
        let spec = load_preset("example7").unwrap();
        let eq = solve_equilibrium(&spec, DEFAULT_TOL).unwrap();
        for &k in &[0.125, 3.0, 40.0] {
            let mut scaled = spec.clone();
            for g in &mut scaled.genes {
                g.c *= k;
                g.beta /= k;
            }
            let eq_k = solve_equilibrium(&scaled, DEFAULT_TOL).unwrap();
            for i in 0..spec.len() {
                assert!((eq.p_star[i] - eq_k.p_star[i]).abs() < 1e-10 * eq.p_star[i]);
                assert!((eq.zeta[i] - eq_k.zeta[i]).abs() < 1e-10 * eq.zeta[i].abs());
                assert!((eq.r_star[i] / k - eq_k.r_star[i]).abs() < 1e-10 * eq_k.r_star[i]);
            }
        }
    }

    #[test]
    fn random_brackets_agree_on_the_fixed_point() {
        use rand::{Rng, SeedableRng};
        let spec = load_preset("counterexample").unwrap();
        let eq = solve_equilibrium(&spec, DEFAULT_TOL).unwrap();
        let p1 = eq.p_star[0];
        let upper = protein_bound(&spec);
        let g = |x: f64| return_map(&spec, x).unwrap() - x;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let mut lo = rng.gen_range(0.0..p1);
            let mut hi = rng.gen_range(p1..upper);
            assert!(g(lo) > 0.0 && g(hi) < 0.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if g(mid) >= 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= 10.0 * DEFAULT_TOL * hi {
                    break;
                }
            }
            assert!((0.5 * (lo + hi) - p1).abs() <= 10.0 * DEFAULT_TOL * p1.max(1.0));
        }
    }

    #[test]
    fn rejects_invalid_inputs() {
        let spec = load_preset("counterexample").unwrap();
        assert!(matches!(
            solve_equilibrium(&spec, 0.0),
            Err(EquilibriumError::BadTolerance(_))
        ));
        let mut positive = spec.clone();
        positive.genes[0].regulation = Regulation::Activate;
        assert!(matches!(
            solve_equilibrium(&positive, DEFAULT_TOL),
            Err(EquilibriumError::Spec(SpecError::PositiveCycle))
        ));
    }

    #[test]
    fn heterogeneous_network_is_fine_here() {
        // No homogeneity assumption enters the fixed-point computation.
        let spec = crate::netmodel::NetworkSpec {
            nu: 2.0,
            genes: vec![
                GeneSpec::repressing(1.0, 2.0, 0.7, 3.0, 0.1, 0.0),
                GeneSpec::repressing(0.5, 1.0, 2.0, 1.5, 0.0, 0.3),
                GeneSpec::repressing(2.0, 0.25, 1.0, 4.0, 0.2, 0.2),
            ],
        };
        let eq = solve_equilibrium(&spec, DEFAULT_TOL).unwrap();
        assert!(eq.residual < 1e-10);
        // Steady-state relations hold gene by gene.
        for i in 0..3 {
            let g = &spec.genes[i];
            assert!((eq.p_star[i] - g.c * eq.r_star[i] / g.b).abs() < 1e-9 * eq.p_star[i].max(1.0));
        }
    }
}
