//! Worst-case reduction over a box of parameter uncertainties.
//!
//! Over interval bounds on rates, delays and gain magnitudes, the hardest
//! member to destabilize is the one with the fastest degradation, weakest
//! synthesis, shortest delays and smallest gains. If the homogeneous network
//! built from those extremes is unstable, every member of the box is, and
//! oscillations are certified for the whole family.

use super::{LoopTransfer, StabilityError};
use crate::linearization::ReducedModel;
use crate::netmodel::{GeneSpec, NetworkSpec, Regulation};
use rand::Rng;
use std::f64::consts::PI;

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Interval {
        Interval { lo, hi }
    }

    /// Degenerate interval holding a single value.
    pub fn point(v: f64) -> Interval {
        Interval { lo: v, hi: v }
    }

    /// Symmetric relative widening: `[v (1 - rel), v (1 + rel)]`.
    pub fn around(v: f64, rel: f64) -> Interval {
        Interval {
            lo: v * (1.0 - rel),
            hi: v * (1.0 + rel),
        }
    }

    fn check(&self, what: &str) -> Result<(), StabilityError> {
        if !(self.lo <= self.hi) {
            return Err(StabilityError::EmptyInterval {
                what: what.to_string(),
                lo: self.lo,
                hi: self.hi,
            });
        }
        Ok(())
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        if self.lo == self.hi {
            self.lo
        } else {
            rng.gen_range(self.lo..=self.hi)
        }
    }
}

/// Per-gene uncertainty intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneBounds {
    pub a: Interval,
    pub b: Interval,
    pub c: Interval,
    pub beta: Interval,
    pub tau_r: Interval,
    pub tau_p: Interval,
    /// Bounds on the gain magnitude `|zeta|`.
    pub zeta_abs: Interval,
}

/// Uncertainty box over the whole network.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterBounds {
    pub genes: Vec<GeneBounds>,
}

impl ParameterBounds {
    /// Draw one member of the box uniformly.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> SampledMember {
        SampledMember {
            a: self.genes.iter().map(|g| g.a.sample(rng)).collect(),
            b: self.genes.iter().map(|g| g.b.sample(rng)).collect(),
            c: self.genes.iter().map(|g| g.c.sample(rng)).collect(),
            beta: self.genes.iter().map(|g| g.beta.sample(rng)).collect(),
            tau_r: self.genes.iter().map(|g| g.tau_r.sample(rng)).collect(),
            tau_p: self.genes.iter().map(|g| g.tau_p.sample(rng)).collect(),
            zeta_abs: self.genes.iter().map(|g| g.zeta_abs.sample(rng)).collect(),
        }
    }
}

/// A concrete parameter tuple drawn from a [`ParameterBounds`] box.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledMember {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub beta: Vec<f64>,
    pub tau_r: Vec<f64>,
    pub tau_p: Vec<f64>,
    pub zeta_abs: Vec<f64>,
}

impl SampledMember {
    /// Loop transfer of this member, gains taken as given.
    pub fn loop_transfer(&self) -> LoopTransfer {
        let cbeta: Vec<f64> = self.c.iter().zip(&self.beta).map(|(c, b)| c * b).collect();
        let delay: Vec<f64> = self
            .tau_r
            .iter()
            .zip(&self.tau_p)
            .map(|(r, p)| r + p)
            .collect();
        LoopTransfer::from_parts(&self.a, &self.b, &cbeta, &self.zeta_abs, &delay)
    }
}

/// Homogeneous extreme-parameter network whose instability certifies
/// instability across the whole box.
#[derive(Debug, Clone, PartialEq)]
pub struct WorstCase {
    /// The extreme-parameter network. Its Hill data are placeholders: the
    /// gains below are prescribed, not derived from an equilibrium.
    pub spec: NetworkSpec,
    /// Per-gene gain magnitudes (the lower interval ends).
    pub zeta_abs: Vec<f64>,
}

impl WorstCase {
    /// Dimensionless summary built directly from the prescribed gains.
    pub fn reduced_model(&self) -> ReducedModel {
        let n = self.spec.len();
        let g0 = &self.spec.genes[0];
        let t_r = 1.0 / g0.a;
        let t_p = 1.0 / g0.b;
        let t_arith = 0.5 * (t_r + t_p);
        let t_geom = (t_r * t_p).sqrt();
        let tau = self.spec.mean_delay();
        let r_sq = g0.c * g0.beta / (g0.a * g0.b);
        let l = if self.zeta_abs.contains(&0.0) {
            0.0
        } else {
            let log_sum: f64 = self.zeta_abs.iter().map(|z| (z * r_sq).ln()).sum();
            (log_sum / n as f64).exp()
        };
        ReducedModel {
            n,
            t_r,
            t_p,
            t_arith,
            t_geom,
            q: t_geom / t_arith,
            tau,
            tau_tilde: tau / t_arith,
            r: vec![r_sq.sqrt(); n],
            l,
            lambda: (1..=n)
                .map(|k| num_complex::Complex64::from_polar(l, (2 * k - 1) as f64 * PI / n as f64))
                .collect(),
        }
    }

    /// Loop transfer of the extreme network with the prescribed gains.
    pub fn loop_transfer(&self) -> LoopTransfer {
        let n = self.spec.len();
        let g0 = &self.spec.genes[0];
        LoopTransfer::from_parts(
            &vec![g0.a; n],
            &vec![g0.b; n],
            &vec![g0.c * g0.beta; n],
            &self.zeta_abs,
            &vec![g0.tau_r + g0.tau_p; n],
        )
    }
}

/// Collapse an uncertainty box onto its hardest-to-destabilize member.
///
/// Degradation rates take their largest upper bounds across all genes,
/// synthesis rates and delays their smallest lower bounds, and each gain its
/// own lower bound signed by the regulation pattern. Instability of the
/// result certifies instability of every member of the box.
pub fn worst_case_reduction(
    bounds: &ParameterBounds,
    signs: &[Regulation],
) -> Result<WorstCase, StabilityError> {
    if bounds.genes.is_empty() || bounds.genes.len() != signs.len() {
        return Err(StabilityError::EmptyInterval {
            what: format!(
                "bounds for {} genes against {} signs",
                bounds.genes.len(),
                signs.len()
            ),
            lo: 0.0,
            hi: 0.0,
        });
    }
    for (i, g) in bounds.genes.iter().enumerate() {
        for (name, iv) in [
            ("a", g.a),
            ("b", g.b),
            ("c", g.c),
            ("beta", g.beta),
            ("tau_r", g.tau_r),
            ("tau_p", g.tau_p),
            ("zeta", g.zeta_abs),
        ] {
            iv.check(&format!("gene {i} {name}"))?;
        }
    }

    let a = bounds.genes.iter().map(|g| g.a.hi).fold(f64::MIN, f64::max);
    let b = bounds.genes.iter().map(|g| g.b.hi).fold(f64::MIN, f64::max);
    let c = bounds.genes.iter().map(|g| g.c.lo).fold(f64::MAX, f64::min);
    let beta = bounds
        .genes
        .iter()
        .map(|g| g.beta.lo)
        .fold(f64::MAX, f64::min);
    let tau_r = bounds
        .genes
        .iter()
        .map(|g| g.tau_r.lo)
        .fold(f64::MAX, f64::min);
    let tau_p = bounds
        .genes
        .iter()
        .map(|g| g.tau_p.lo)
        .fold(f64::MAX, f64::min);
    let zeta_abs: Vec<f64> = bounds.genes.iter().map(|g| g.zeta_abs.lo).collect();

    let spec = NetworkSpec {
        nu: 1.0,
        genes: signs
            .iter()
            .map(|&regulation| GeneSpec {
                a,
                b,
                c,
                beta,
                tau_r,
                tau_p,
                regulation,
                alpha0: 0.0,
                p0: 1.0,
            })
            .collect(),
    };
    Ok(WorstCase { spec, zeta_abs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stability::{nyquist_winding, test_analytic, Outcome, DEFAULT_SAMPLES, SCALAR_TOL};
    use rand::SeedableRng;

    fn counterexample_box(widen_delay_upper: f64) -> ParameterBounds {
        ParameterBounds {
            genes: (0..3)
                .map(|_| GeneBounds {
                    a: Interval::new(0.99, 1.005),
                    b: Interval::new(0.99, 1.005),
                    c: Interval::new(1.745, 1.755),
                    beta: Interval::new(1.745, 1.755),
                    tau_r: Interval::new(0.49, 0.51 + widen_delay_upper),
                    tau_p: Interval::new(0.49, 0.51 + widen_delay_upper),
                    zeta_abs: Interval::new(0.388, 0.395),
                })
                .collect(),
        }
    }

    #[test]
    fn point_intervals_pass_through() {
        let bounds = ParameterBounds {
            genes: (0..3)
                .map(|_| GeneBounds {
                    a: Interval::point(1.0),
                    b: Interval::point(1.0),
                    c: Interval::point(1.7498),
                    beta: Interval::point(1.7498),
                    tau_r: Interval::point(0.5),
                    tau_p: Interval::point(0.5),
                    zeta_abs: Interval::point(0.3919),
                })
                .collect(),
        };
        let wc = worst_case_reduction(&bounds, &[Regulation::Repress; 3]).unwrap();
        let g = &wc.spec.genes[0];
        assert_eq!((g.a, g.b, g.c, g.beta), (1.0, 1.0, 1.7498, 1.7498));
        assert_eq!((g.tau_r, g.tau_p), (0.5, 0.5));
        assert_eq!(wc.zeta_abs, vec![0.3919; 3]);
        let rm = wc.reduced_model();
        assert!((rm.l - 1.2).abs() < 1e-3);
    }

    #[test]
    fn delay_upper_bounds_do_not_enter() {
        let tight =
            worst_case_reduction(&counterexample_box(0.0), &[Regulation::Repress; 3]).unwrap();
        let widened =
            worst_case_reduction(&counterexample_box(5.0), &[Regulation::Repress; 3]).unwrap();
        assert_eq!(tight, widened);
    }

    #[test]
    fn empty_interval_is_rejected() {
        let mut bounds = counterexample_box(0.0);
        bounds.genes[1].c = Interval::new(2.0, 1.0);
        assert!(matches!(
            worst_case_reduction(&bounds, &[Regulation::Repress; 3]),
            Err(StabilityError::EmptyInterval { .. })
        ));
    }

    #[test]
    fn certified_box_members_all_wind() {
        let bounds = counterexample_box(0.0);
        let wc = worst_case_reduction(&bounds, &[Regulation::Repress; 3]).unwrap();
        let verdict = test_analytic(&wc.reduced_model(), SCALAR_TOL).unwrap();
        assert_eq!(
            verdict.outcome,
            Outcome::OscillationsGuaranteed,
            "reduction must certify"
        );
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..100 {
            let member = bounds.sample(&mut rng);
            let report = nyquist_winding(&member.loop_transfer(), None, DEFAULT_SAMPLES).unwrap();
            assert!(report.winding > 0, "member {member:?} failed to wind");
        }
    }
}
