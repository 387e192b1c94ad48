//! Reduction of a network with common degradation rates to its dimensionless
//! frequency-domain summary.
//!
//! With every gene sharing `a` and `b`, the loop linearized at the
//! equilibrium is a single scalar factor `phi(s) e^{s tau}` fed back through
//! a circulant gain matrix. Everything the instability criteria need is in a
//! handful of dimensionless groups: the lifetime-ratio `Q`, the normalized
//! average delay `tau_tilde`, the per-gene synthesis/degradation ratios `R_i`
//! and the average gain `L`, which is the radius of the gain matrix's
//! eigenvalue ring.

use crate::equilibrium::Equilibrium;
use crate::netmodel::NetworkSpec;
use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

/// Relative tolerance for the common-degradation-rate check.
pub const HOMOGENEITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ReduceError {
    #[error("gene {gene}: {field} = {value} differs from gene 0's {field0}; the reduction needs common degradation rates; apply worst_case_reduction first or use the Nyquist test")]
    Heterogeneous {
        gene: usize,
        field: &'static str,
        value: f64,
        field0: f64,
    },
    #[error("dimensionless inputs out of domain: {0}")]
    Domain(String),
}

/// Dimensionless summary of the linearized loop.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedModel {
    /// Number of genes.
    pub n: usize,
    /// mRNA lifetime `1/a`.
    pub t_r: f64,
    /// Protein lifetime `1/b`.
    pub t_p: f64,
    /// Arithmetic mean of the two lifetimes.
    pub t_arith: f64,
    /// Geometric mean of the two lifetimes.
    pub t_geom: f64,
    /// Lifetime ratio `t_geom / t_arith`, in (0, 1].
    pub q: f64,
    /// Average round-trip delay per gene.
    pub tau: f64,
    /// Delay normalized by the mean lifetime.
    pub tau_tilde: f64,
    /// Per-gene ratio `sqrt(c beta / (a b p0))` in normalized protein
    /// coordinates.
    pub r: Vec<f64>,
    /// Average gain: geometric mean of `|zeta_i| c_i beta_i / (a b)`.
    pub l: f64,
    /// Eigenvalues of the interaction matrix: `L e^{j(2k-1)pi/N}`.
    pub lambda: Vec<Complex64>,
}

fn eigen_ring(n: usize, l: f64) -> Vec<Complex64> {
    (1..=n)
        .map(|k| Complex64::from_polar(l, (2 * k - 1) as f64 * PI / n as f64))
        .collect()
}

/// Reduce a validated spec plus its equilibrium to the dimensionless form.
///
/// Fails with [`ReduceError::Heterogeneous`] when the degradation rates
/// differ between genes beyond [`HOMOGENEITY_TOL`] relative. Heterogeneous
/// synthesis rates, delays and half-saturations are fine: delays enter only
/// through their cycle average and the gains through their geometric mean.
pub fn reduce(spec: &NetworkSpec, eq: &Equilibrium) -> Result<ReducedModel, ReduceError> {
    let n = spec.len();
    let a0 = spec.genes[0].a;
    let b0 = spec.genes[0].b;
    for (i, g) in spec.genes.iter().enumerate() {
        if (g.a - a0).abs() > HOMOGENEITY_TOL * a0.abs().max(g.a.abs()) {
            return Err(ReduceError::Heterogeneous {
                gene: i,
                field: "a",
                value: g.a,
                field0: a0,
            });
        }
        if (g.b - b0).abs() > HOMOGENEITY_TOL * b0.abs().max(g.b.abs()) {
            return Err(ReduceError::Heterogeneous {
                gene: i,
                field: "b",
                value: g.b,
                field0: b0,
            });
        }
    }

    let t_r = 1.0 / a0;
    let t_p = 1.0 / b0;
    let t_arith = 0.5 * (t_r + t_p);
    let t_geom = (t_r * t_p).sqrt();
    let q = t_geom / t_arith;
    let tau = spec.mean_delay();
    let tau_tilde = tau / t_arith;

    let r = spec
        .genes
        .iter()
        .map(|g| (g.c * g.beta / (g.a * g.b * g.p0)).sqrt())
        .collect();

    // Geometric mean of the loop gains |zeta_i| c_i beta_i / (a_i b_i); the
    // half-saturation scale cancels out of the product, so this matches the
    // normalized-coordinate gains as well.
    let l = if eq.zeta.contains(&0.0) {
        0.0
    } else {
        let log_sum: f64 = spec
            .genes
            .iter()
            .zip(&eq.zeta)
            .map(|(g, z)| (z.abs() * g.c * g.beta / (g.a * g.b)).ln())
            .sum();
        (log_sum / n as f64).exp()
    };

    Ok(ReducedModel {
        n,
        t_r,
        t_p,
        t_arith,
        t_geom,
        q,
        tau,
        tau_tilde,
        r,
        l,
        lambda: eigen_ring(n, l),
    })
}

impl ReducedModel {
    /// Build a reduced model directly from the four dimensionless groups,
    /// with the mean lifetime normalized to 1.
    pub fn from_dimensionless(
        n: usize,
        q: f64,
        tau_tilde: f64,
        l: f64,
    ) -> Result<Self, ReduceError> {
        if n == 0 {
            return Err(ReduceError::Domain("n must be >= 1".into()));
        }
        if !(q > 0.0 && q <= 1.0) {
            return Err(ReduceError::Domain(format!("Q = {q} must lie in (0, 1]")));
        }
        if !(tau_tilde >= 0.0) {
            return Err(ReduceError::Domain(format!(
                "tau_tilde = {tau_tilde} must be >= 0"
            )));
        }
        if !(l >= 0.0) {
            return Err(ReduceError::Domain(format!("L = {l} must be >= 0")));
        }
        let spread = (1.0 - q * q).max(0.0).sqrt();
        Ok(ReducedModel {
            n,
            t_r: 1.0 + spread,
            t_p: 1.0 - spread,
            t_arith: 1.0,
            t_geom: q,
            q,
            tau: tau_tilde,
            tau_tilde,
            r: vec![l.sqrt(); n],
            l,
            lambda: eigen_ring(n, l),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{solve_equilibrium, DEFAULT_TOL};
    use crate::netmodel::load_preset;

    fn reduced(name: &str) -> ReducedModel {
        let spec = load_preset(name).unwrap();
        let eq = solve_equilibrium(&spec, DEFAULT_TOL).unwrap();
        reduce(&spec, &eq).unwrap()
    }

    #[test]
    fn example7_dimensionless_groups() {
        let rm = reduced("example7");
        assert!((rm.q - 0.800).abs() < 1e-12);
        for &r in &rm.r {
            assert!((r - 1.200).abs() < 1e-12);
        }
        assert!((rm.tau - 0.52).abs() < 1e-12);
        assert!((rm.tau_tilde - 1.00).abs() < 2e-3);
        assert!((rm.l - 1.048).abs() < 2e-3, "L = {}", rm.l);
    }

    #[test]
    fn counterexample_eigenvalue_ring() {
        let rm = reduced("counterexample");
        assert_eq!(rm.lambda.len(), 3);
        for lam in &rm.lambda {
            assert!(
                (lam.norm() - 1.200).abs() < 2e-3,
                "|lambda| = {}",
                lam.norm()
            );
        }
        let mut args: Vec<f64> = rm.lambda.iter().map(|l| l.arg()).collect();
        args.sort_by(f64::total_cmp);
        assert!((args[0] + PI / 3.0).abs() < 1e-12);
        assert!((args[1] - PI / 3.0).abs() < 1e-12);
        assert!((args[2].abs() - PI).abs() < 1e-12);
    }

    #[test]
    fn hes7_table_values() {
        let wild = reduced("hes7_wild");
        assert!((wild.q - 0.674).abs() < 2e-3);
        assert!((wild.tau_tilde - 2.23).abs() < 1e-2);
        assert!((wild.r[0] - 21.5).abs() < 1e-6);
        assert!((wild.l - 1.97).abs() < 1e-2);
        let mutant = reduced("hes7_mutant");
        assert!((mutant.q - 0.575).abs() < 2e-3);
        assert!((mutant.tau_tilde - 1.55).abs() < 1e-2);
        assert!((mutant.r[0] - 26.4).abs() < 0.2);
        assert!((mutant.l - 1.97).abs() < 1e-2);
    }

    #[test]
    fn equal_lifetimes_give_unit_q() {
        let rm = reduced("counterexample");
        assert_eq!(rm.q, 1.0);
        assert_eq!(rm.t_r, rm.t_p);
    }

    #[test]
    fn eigenvalue_product_matches_ring_pattern() {
        for name in ["example7", "counterexample", "hes7_wild", "repressilator"] {
            let rm = reduced(name);
            let prod: Complex64 = rm.lambda.iter().product();
            let sign = if rm.n % 2 == 0 { 1.0 } else { -1.0 };
            let expected = sign * rm.l.powi(rm.n as i32);
            assert!(
                (prod.re - expected).abs() <= 1e-9 * expected.abs(),
                "{name}: {prod} vs {expected}"
            );
            assert!(prod.im.abs() <= 1e-9 * expected.abs());
        }
    }

    #[test]
    fn no_delay_means_zero_tau_tilde() {
        let rm = reduced("example7_nodelay");
        assert_eq!(rm.tau_tilde, 0.0);
        assert_eq!(rm.tau, 0.0);
    }

    #[test]
    fn cyclic_relabeling_preserves_the_summary() {
        let spec = load_preset("example7").unwrap();
        let base = reduced("example7");
        for shift in 1..spec.len() {
            let mut rotated = spec.clone();
            rotated.genes.rotate_left(shift);
            let eq = solve_equilibrium(&rotated, DEFAULT_TOL).unwrap();
            let rm = reduce(&rotated, &eq).unwrap();
            assert!((rm.l - base.l).abs() < 1e-12);
            assert_eq!(rm.q, base.q);
            assert!((rm.tau_tilde - base.tau_tilde).abs() < 1e-15);
        }
    }

    #[test]
    fn heterogeneous_rates_are_rejected() {
        let mut spec = load_preset("example7").unwrap();
        spec.genes[3].a = 1.3;
        let eq = solve_equilibrium(&spec, DEFAULT_TOL).unwrap();
        let err = reduce(&spec, &eq).unwrap_err();
        match err {
            ReduceError::Heterogeneous { gene, field, .. } => {
                assert_eq!((gene, field), (3, "a"));
            }
            other => panic!("unexpected error {other:?}"),
        }
        // The message tells the caller where to go next.
        assert!(err.to_string().contains("worst_case_reduction"));
    }

    #[test]
    fn synthetic_model_round_trip() {
        let rm = ReducedModel::from_dimensionless(5, 0.8, 1.3, 2.0).unwrap();
        assert_eq!(rm.n, 5);
        assert!((rm.t_geom - 0.8).abs() < 1e-15);
        assert!((0.5 * (rm.t_r + rm.t_p) - 1.0).abs() < 1e-15);
        assert!(((rm.t_r * rm.t_p).sqrt() - rm.q).abs() < 1e-12);
        assert_eq!(rm.lambda[0].norm(), 2.0);
        assert!(ReducedModel::from_dimensionless(0, 0.5, 0.0, 1.0).is_err());
        assert!(ReducedModel::from_dimensionless(3, 1.5, 0.0, 1.0).is_err());
    }
}
