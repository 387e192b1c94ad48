//! Check that the delayed network fits the monotone cyclic feedback form.
//!
//! The dynamics can be rewritten, after time rescaling by the total delay
//! and sign flips of selected coordinates, as a chain in which each
//! component is driven positively by the next and the loop closes with a
//! single signed delayed coupling. The sign bookkeeping (`rho`, `sigma`,
//! `z*`) is combinatorial; the coupling slopes are checked numerically at
//! random positive states. This form is what restricts the long-run
//! behavior to equilibria, periodic orbits and homoclinic orbits.

use super::SimError;
use crate::netmodel::{hill_eval, NetworkSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Outcome of the cyclic-form transformation check.
#[derive(Debug, Clone, PartialEq)]
pub struct MpsReport {
    /// Total delay around the loop (the time rescaling factor).
    pub total_delay: f64,
    /// Per-coordinate sign flips of the transformation (length `2N`).
    pub sigma: Vec<i8>,
    /// Per-coupling slope signs (length `2N`).
    pub rho: Vec<i8>,
    /// Product of the slope signs; must equal the cycle sign.
    pub z_star: i8,
    /// Whether every sampled sign-adjusted coupling slope was strictly
    /// positive.
    pub all_positive: bool,
    /// Number of random states sampled.
    pub samples: usize,
}

/// Verify the transformation to monotone cyclic feedback form.
///
/// Returns [`SimError::NotApplicable`] when the network has no delays (the
/// rescaling degenerates). The slope conditions are evaluated at `samples`
/// random positive protein levels, log-uniform around each gene's
/// half-saturation.
pub fn mps_form_check(spec: &NetworkSpec, samples: usize) -> Result<MpsReport, SimError> {
    spec.validate()?;
    let n = spec.len();
    let total_delay: f64 = spec.genes.iter().map(|g| g.tau_r + g.tau_p).sum();
    if total_delay == 0.0 {
        return Err(SimError::NotApplicable);
    }

    // Chain slot 2i-1 (1-indexed) couples through the Hill slope of gene
    // N-i+2; slot 2i couples linearly through a synthesis rate.
    let mut rho = vec![1i8; 2 * n];
    for i in 1..=n {
        let gene = (2 * n - i + 1) % n; // paper gene N-i+2, zero-indexed
        rho[2 * i - 2] = spec.genes[gene].regulation.sign() as i8;
    }
    let mut sigma = vec![1i8; 2 * n];
    for s in 1..2 * n {
        sigma[s] = sigma[s - 1] * rho[s];
    }
    let z_star: i8 = rho.iter().product();
    debug_assert_eq!(z_star as f64, spec.cycle_sign());

    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    let mut all_positive = true;
    for _ in 0..samples {
        // One random positive protein level per gene.
        let p: Vec<f64> = spec
            .genes
            .iter()
            .map(|g| g.p0 * 10f64.powf(rng.gen_range(-2.0..2.0)))
            .collect();
        for i in 1..=n {
            // Linear coupling of slot 2i-1 into slot 2i: c * T * rho_{2i}.
            let gene = n - i; // paper gene N-i+1, zero-indexed
            let linear = spec.genes[gene].c * total_delay * rho[2 * i - 1] as f64;
            all_positive &= linear > 0.0;
        }
        for i in 1..n {
            // Hill coupling of slot 2i into slot 2i+1 for paper gene N-i+1.
            let gene = n - i;
            let g = &spec.genes[gene];
            let (_, df) = hill_eval(g.regulation, p[gene], spec.nu, g.p0)
                .expect("validated network keeps the Hill domain");
            let slope = g.beta * total_delay * (sigma[2 * i - 1] * sigma[2 * i]) as f64 * df;
            all_positive &= slope > 0.0;
        }
        // The closing coupling carries the loop sign; the chain condition
        // weights it by z*.
        let g = &spec.genes[0];
        let (_, df) = hill_eval(g.regulation, p[0], spec.nu, g.p0)
            .expect("validated network keeps the Hill domain");
        let closing = g.beta * total_delay * sigma[2 * n - 1] as f64 * df;
        all_positive &= (z_star as f64) * closing > 0.0;
    }

    Ok(MpsReport {
        total_delay,
        sigma,
        rho,
        z_star,
        all_positive,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{load_preset, GeneSpec, Regulation};

    #[test]
    fn counterexample_sign_pattern() {
        let spec = load_preset("counterexample").unwrap();
        let report = mps_form_check(&spec, 25).unwrap();
        assert_eq!(report.total_delay, 3.0);
        assert_eq!(report.rho, vec![-1, 1, -1, 1, -1, 1]);
        assert_eq!(report.z_star, -1);
        assert_eq!(report.sigma, vec![1, 1, -1, -1, 1, 1]);
        assert!(report.all_positive);
    }

    #[test]
    fn mixed_signs_still_close_negatively() {
        // Two genes, one repressor: the rho product keeps a single -1.
        let spec = NetworkSpec {
            nu: 2.0,
            genes: vec![
                GeneSpec {
                    regulation: Regulation::Activate,
                    ..GeneSpec::repressing(1.0, 1.0, 1.0, 2.0, 0.3, 0.1)
                },
                GeneSpec::repressing(1.0, 1.0, 1.0, 2.0, 0.2, 0.4),
            ],
        };
        let report = mps_form_check(&spec, 25).unwrap();
        assert_eq!(report.rho.iter().filter(|r| **r == -1).count(), 1);
        assert_eq!(report.z_star, -1);
        assert!(report.all_positive);
    }

    #[test]
    fn delay_free_network_is_not_applicable() {
        let spec = load_preset("repressilator").unwrap();
        assert_eq!(mps_form_check(&spec, 10), Err(SimError::NotApplicable));
    }

    #[test]
    fn positive_cycles_are_rejected_before_any_transformation() {
        let mut spec = load_preset("counterexample").unwrap();
        spec.genes[0].regulation = Regulation::Activate;
        assert!(matches!(
            mps_form_check(&spec, 10),
            Err(SimError::Spec(crate::netmodel::SpecError::PositiveCycle))
        ));
    }

    #[test]
    fn every_preset_with_delay_passes() {
        for name in ["counterexample", "example7", "hes7_wild", "hes7_mutant"] {
            let spec = load_preset(name).unwrap();
            let report = mps_form_check(&spec, 50).unwrap();
            assert!(report.all_positive, "{name}");
            assert_eq!(report.z_star as f64, spec.cycle_sign(), "{name}");
        }
    }
}
