//! Network definitions: per-gene kinetic parameters, Hill nonlinearities,
//! cycle-sign validation and the built-in benchmark networks.
//!
//! A network is a ring of `N` genes. Gene `i` transcribes mRNA at rate
//! `beta_i * f_i(p_{i-1})` where `f_i` is a repressing or activating Hill
//! function of the upstream protein, degrades mRNA at rate `a_i`, produces
//! protein from mRNA at rate `c_i` and degrades protein at rate `b_i`.
//! `tau_r` delays mRNA availability for translation, `tau_p` delays the
//! protein's regulatory action downstream.

use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;
use thiserror::Error;

/// Direction of transcriptional regulation exerted by the upstream protein.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regulation {
    Repress,
    Activate,
}

impl Regulation {
    /// +1 for activation, -1 for repression.
    pub fn sign(self) -> f64 {
        match self {
            Regulation::Repress => -1.0,
            Regulation::Activate => 1.0,
        }
    }
}

fn default_p0() -> f64 {
    1.0
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

fn is_unit(x: &f64) -> bool {
    *x == 1.0
}

/// Kinetic parameters of a single gene.
///
/// Units: rates are 1/time, `beta` and `alpha0` are concentration/time,
/// delays are time, `p0` is a concentration. Values are plain `f64`s with
/// documented units; nothing enforces dimensional consistency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneSpec {
    /// mRNA degradation rate (> 0).
    pub a: f64,
    /// Protein degradation rate (> 0).
    pub b: f64,
    /// Protein synthesis (translation) rate (> 0).
    pub c: f64,
    /// Maximal transcription rate (> 0).
    pub beta: f64,
    /// Transcription delay (>= 0).
    pub tau_r: f64,
    /// Translation delay (>= 0).
    pub tau_p: f64,
    /// Whether the upstream protein represses or activates this gene.
    pub regulation: Regulation,
    /// Basal (leaky) transcription rate (>= 0, default 0).
    #[serde(default, skip_serializing_if = "is_zero")]
    pub alpha0: f64,
    /// Half-saturation scale of the incoming Hill function (> 0, default 1).
    #[serde(default = "default_p0", skip_serializing_if = "is_unit")]
    pub p0: f64,
}

impl GeneSpec {
    /// Repressing gene with unit half-saturation and no leak.
    pub fn repressing(a: f64, b: f64, c: f64, beta: f64, tau_r: f64, tau_p: f64) -> Self {
        GeneSpec {
            a,
            b,
            c,
            beta,
            tau_r,
            tau_p,
            regulation: Regulation::Repress,
            alpha0: 0.0,
            p0: 1.0,
        }
    }
}

/// A cyclic network: gene `i` is regulated by protein `i - 1`, with gene 0
/// regulated by the last gene's protein. `nu` is the shared Hill coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    /// Hill coefficient (cooperativity), >= 1.
    pub nu: f64,
    /// Genes in cyclic order.
    pub genes: Vec<GeneSpec>,
}

/// Errors from network validation, Hill evaluation and preset lookup.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum SpecError {
    #[error("network has no genes")]
    EmptyNetwork,
    #[error("positive cycle: the product of regulation signs is +1; the oscillation criteria require a negative cycle")]
    PositiveCycle,
    #[error("gene {gene}: {field} = {value} must be strictly positive")]
    NonPositiveRate {
        gene: usize,
        field: &'static str,
        value: f64,
    },
    #[error("gene {gene}: {field} = {value} must be non-negative")]
    NegativeDelay {
        gene: usize,
        field: &'static str,
        value: f64,
    },
    #[error("gene {gene}: basal rate alpha0 = {value} must be non-negative")]
    NegativeBasalRate { gene: usize, value: f64 },
    #[error("Hill coefficient nu = {nu} must be >= 1")]
    BadHillCoefficient { nu: f64 },
    #[error("Hill function argument out of domain: {what} = {value}")]
    HillDomain { what: &'static str, value: f64 },
    #[error("unknown preset '{name}' (expected one of {available:?})")]
    UnknownPreset {
        name: String,
        available: &'static [&'static str],
    },
}

impl NetworkSpec {
    /// Number of genes in the cycle.
    pub fn len(&self) -> usize {
        self.genes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genes.is_empty()
    }

    /// Product of the regulation signs around the cycle.
    pub fn cycle_sign(&self) -> f64 {
        self.genes.iter().map(|g| g.regulation.sign()).product()
    }

    /// Index of the gene whose protein regulates gene `i`.
    pub fn upstream(&self, i: usize) -> usize {
        (i + self.len() - 1) % self.len()
    }

    /// Largest single delay in the network (the history span a simulation needs).
    pub fn max_delay(&self) -> f64 {
        self.genes
            .iter()
            .flat_map(|g| [g.tau_r, g.tau_p])
            .fold(0.0, f64::max)
    }

    /// Per-gene round-trip delay `tau_r + tau_p`, averaged over the cycle.
    pub fn mean_delay(&self) -> f64 {
        self.genes.iter().map(|g| g.tau_r + g.tau_p).sum::<f64>() / self.len() as f64
    }

    /// Check every per-gene and network-wide invariant.
    ///
    /// Rates must be strictly positive, delays non-negative, `nu >= 1`, and
    /// the cycle sign must be negative: with a positive cycle almost all
    /// trajectories converge to an equilibrium and the oscillation analysis
    /// does not apply.
    pub fn validate(&self) -> Result<(), SpecError> {
        if self.genes.is_empty() {
            return Err(SpecError::EmptyNetwork);
        }
        if !(self.nu >= 1.0) {
            return Err(SpecError::BadHillCoefficient { nu: self.nu });
        }
        for (i, g) in self.genes.iter().enumerate() {
            for (field, value) in [
                ("a", g.a),
                ("b", g.b),
                ("c", g.c),
                ("beta", g.beta),
                ("p0", g.p0),
            ] {
                if !(value > 0.0) || !value.is_finite() {
                    return Err(SpecError::NonPositiveRate {
                        gene: i,
                        field,
                        value,
                    });
                }
            }
            for (field, value) in [("tau_r", g.tau_r), ("tau_p", g.tau_p)] {
                if !(value >= 0.0) || !value.is_finite() {
                    return Err(SpecError::NegativeDelay {
                        gene: i,
                        field,
                        value,
                    });
                }
            }
            if !(g.alpha0 >= 0.0) || !g.alpha0.is_finite() {
                return Err(SpecError::NegativeBasalRate {
                    gene: i,
                    value: g.alpha0,
                });
            }
        }
        if self.cycle_sign() > 0.0 {
            return Err(SpecError::PositiveCycle);
        }
        Ok(())
    }

    /// Serialize to the JSON interchange form (`{"nu": ..., "genes": [...]}`).
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("NetworkSpec serialization cannot fail")
    }

    /// Deserialize from the JSON interchange form.
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Evaluate the Hill nonlinearity and its derivative with respect to `p`.
///
/// Repression: `1 / (1 + (p/p0)^nu)`. Activation: `(p/p0)^nu / (1 + (p/p0)^nu)`.
/// Both values lie in `[0, 1]`; the derivative is exact and carries the sign
/// of the regulation. At `p = 0` the derivative is `±nu/p0` for `nu = 1` and
/// `0` for `nu > 1`, computed analytically rather than by limits.
pub fn hill_eval(kind: Regulation, p: f64, nu: f64, p0: f64) -> Result<(f64, f64), SpecError> {
    if !(p >= 0.0) {
        return Err(SpecError::HillDomain {
            what: "p",
            value: p,
        });
    }
    if !(nu >= 1.0) {
        return Err(SpecError::HillDomain {
            what: "nu",
            value: nu,
        });
    }
    if !(p0 > 0.0) {
        return Err(SpecError::HillDomain {
            what: "p0",
            value: p0,
        });
    }
    let x = p / p0;
    // Saturation-safe forms: each stays finite for any x >= 0.
    let f_rep = 1.0 / (1.0 + x.powf(nu));
    let f_act = if x == 0.0 {
        0.0
    } else {
        1.0 / (1.0 + x.powf(-nu))
    };
    // |d/dp| = (nu/p0) x^(nu-1) / (1 + x^nu)^2, written as f_rep * f_act / x
    // away from zero so that huge x cannot overflow the numerator.
    let slope_mag = if x == 0.0 {
        // x^(nu-1) at x = 0: one for nu = 1 (0^0 = 1), zero for nu > 1.
        (nu / p0) * 0f64.powf(nu - 1.0)
    } else {
        (nu / p0) * f_rep * f_act / x
    };
    match kind {
        Regulation::Repress => Ok((f_rep, -slope_mag)),
        Regulation::Activate => Ok((f_act, slope_mag)),
    }
}

/// Names accepted by [`load_preset`].
pub const PRESET_NAMES: [&str; 6] = [
    "example7",
    "example7_nodelay",
    "counterexample",
    "repressilator",
    "hes7_wild",
    "hes7_mutant",
];

/// One-line description of each preset, in [`PRESET_NAMES`] order.
pub const PRESET_SUMMARIES: [&str; 6] = [
    "seven-gene repressive ring, heterogeneous synthesis rates and delays",
    "the seven-gene ring with all delays removed",
    "three-gene repressive ring on the stability boundary of the spiral test it disproves",
    "three-gene repressor ring with leaky promoters, no delays",
    "single-gene Hes7 self-repression, wild-type half-lives (minutes)",
    "single-gene Hes7 self-repression, stabilized-protein mutant",
];

/// Half-saturation scale for the Hes7 presets.
///
/// The published model leaves the half-saturation implicit; this value is
/// chosen so that the wild-type synthesis/degradation ratio
/// `R = sqrt(c*beta/(a*b*p0))` comes out at the reported 21.5.
pub fn hes7_p0() -> f64 {
    let a = LN_2 / 3.0;
    let b = LN_2 / 20.0;
    let r = 21.5;
    (4.5 * 33.0) / (a * b * r * r)
}

fn hes7(protein_half_life: f64) -> NetworkSpec {
    NetworkSpec {
        nu: 2.0,
        genes: vec![GeneSpec {
            a: LN_2 / 3.0,
            b: LN_2 / protein_half_life,
            c: 4.5,
            beta: 33.0,
            tau_r: 7.0,
            tau_p: 30.0,
            regulation: Regulation::Repress,
            alpha0: 0.0,
            p0: hes7_p0(),
        }],
    }
}

fn example7(with_delays: bool) -> NetworkSpec {
    let c = [1.92, 3.84, 1.92, 3.84, 3.84, 1.92, 1.92];
    let beta = [4.32, 2.16, 4.32, 2.16, 2.16, 4.32, 4.32];
    let tau_r = [0.31, 0.26, 0.31, 0.31, 0.26, 0.26, 0.31];
    let tau_p = [0.21, 0.26, 0.21, 0.21, 0.26, 0.26, 0.21];
    NetworkSpec {
        nu: 2.6,
        genes: (0..7)
            .map(|i| GeneSpec {
                a: 1.2,
                b: 4.8,
                c: c[i],
                beta: beta[i],
                tau_r: if with_delays { tau_r[i] } else { 0.0 },
                tau_p: if with_delays { tau_p[i] } else { 0.0 },
                regulation: Regulation::Repress,
                alpha0: 0.0,
                p0: 1.0,
            })
            .collect(),
    }
}

/// Return one of the built-in benchmark networks by name.
pub fn load_preset(name: &str) -> Result<NetworkSpec, SpecError> {
    let spec = match name {
        "example7" => example7(true),
        "example7_nodelay" => example7(false),
        "counterexample" => NetworkSpec {
            nu: 2.0,
            genes: (0..3)
                .map(|_| GeneSpec::repressing(1.0, 1.0, 1.7498, 1.7498, 0.5, 0.5))
                .collect(),
        },
        "repressilator" => NetworkSpec {
            nu: 2.0,
            genes: (0..3)
                .map(|_| GeneSpec {
                    a: 1.0,
                    b: 0.2,
                    c: 0.2,
                    beta: 624.0,
                    tau_r: 0.0,
                    tau_p: 0.0,
                    regulation: Regulation::Repress,
                    alpha0: 0.0866,
                    p0: 1.0,
                })
                .collect(),
        },
        "hes7_wild" => hes7(20.0),
        "hes7_mutant" => hes7(30.0),
        _ => {
            return Err(SpecError::UnknownPreset {
                name: name.to_string(),
                available: &PRESET_NAMES,
            })
        }
    };
    debug_assert!(spec.validate().is_ok());
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(n: usize, regulation: Vec<Regulation>) -> NetworkSpec {
        NetworkSpec {
            nu: 2.0,
            genes: (0..n)
                .map(|i| GeneSpec {
                    regulation: regulation[i],
                    ..GeneSpec::repressing(1.0, 1.0, 1.0, 1.0, 0.1, 0.2)
                })
                .collect(),
        }
    }

    #[test]
    fn hill_limits_and_midpoints() {
        let (f, _) = hill_eval(Regulation::Repress, 0.0, 2.0, 1.0).unwrap();
        assert_eq!(f, 1.0);
        let (f, _) = hill_eval(Regulation::Repress, 1.0, 2.0, 1.0).unwrap();
        assert_eq!(f, 0.5);
        let (f, _) = hill_eval(Regulation::Activate, 0.0, 2.0, 1.0).unwrap();
        assert_eq!(f, 0.0);
        let (f, _) = hill_eval(Regulation::Repress, 1e300, 2.0, 1.0).unwrap();
        assert!(f >= 0.0 && f < 1e-12);
        let (f, d) = hill_eval(Regulation::Activate, 1e300, 2.0, 1.0).unwrap();
        assert!((f - 1.0).abs() < 1e-12);
        assert!(d.is_finite() && d >= 0.0);
    }

    #[test]
    fn hill_reference_values() {
        // 1/(1 + 1.2248^2) by direct arithmetic.
        let (f, _) = hill_eval(Regulation::Repress, 1.2248, 2.0, 1.0).unwrap();
        assert!((f - 0.4000).abs() < 1e-3, "f = {f}");
        // (0.5)^3 / (1 + 0.5^3) by direct arithmetic.
        let (f, _) = hill_eval(Regulation::Activate, 1.0, 3.0, 2.0).unwrap();
        assert!((f - 0.125 / 1.125).abs() < 1e-12);
        assert!((f - 0.1111).abs() < 1e-4);
    }

    #[test]
    fn hill_derivative_at_zero() {
        let (_, d) = hill_eval(Regulation::Activate, 0.0, 1.0, 2.0).unwrap();
        assert_eq!(d, 0.5); // nu/p0 at nu = 1
        let (_, d) = hill_eval(Regulation::Activate, 0.0, 1.5, 2.0).unwrap();
        assert_eq!(d, 0.0);
        let (_, d) = hill_eval(Regulation::Repress, 0.0, 1.0, 4.0).unwrap();
        assert_eq!(d, -0.25);
        let (_, d) = hill_eval(Regulation::Repress, 0.0, 2.0, 1.0).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn hill_derivative_matches_finite_differences() {
        // Central differences over a log-spaced grid spanning a decade to
        // either side of the half-saturation point, where the difference
        // quotient is well conditioned in f64.
        for kind in [Regulation::Repress, Regulation::Activate] {
            for &(nu, p0) in &[(1.0, 1.0), (2.0, 1.0), (2.6, 0.5), (4.0, 40.0)] {
                for k in -10..=10 {
                    let p = p0 * 10f64.powf(k as f64 / 10.0);
                    let h = p * 1e-6;
                    let (_, d) = hill_eval(kind, p, nu, p0).unwrap();
                    let (f_plus, _) = hill_eval(kind, p + h, nu, p0).unwrap();
                    let (f_minus, _) = hill_eval(kind, p - h, nu, p0).unwrap();
                    let fd = (f_plus - f_minus) / (2.0 * h);
                    let scale = d.abs().max(1e-300);
                    assert!(
                        (d - fd).abs() / scale < 1e-6,
                        "kind={kind:?} nu={nu} p0={p0} p={p}: analytic {d} vs fd {fd}"
                    );
                }
            }
        }
    }

    #[test]
    fn hill_domain_errors() {
        assert!(hill_eval(Regulation::Repress, -1.0, 2.0, 1.0).is_err());
        assert!(hill_eval(Regulation::Repress, 1.0, 0.5, 1.0).is_err());
        assert!(hill_eval(Regulation::Repress, 1.0, 2.0, 0.0).is_err());
        assert!(hill_eval(Regulation::Repress, f64::NAN, 2.0, 1.0).is_err());
    }

    #[test]
    fn validate_accepts_negative_cycles() {
        use Regulation::*;
        assert!(ring(3, vec![Repress; 3]).validate().is_ok());
        // Single self-repressing gene (the Hes7 shape).
        assert!(ring(1, vec![Repress]).validate().is_ok());
        // Even ring with a single repressor.
        assert!(ring(2, vec![Repress, Activate]).validate().is_ok());
    }

    #[test]
    fn validate_rejects_positive_cycles() {
        use Regulation::*;
        let spec = ring(3, vec![Repress, Repress, Activate]);
        assert_eq!(spec.validate(), Err(SpecError::PositiveCycle));
        let spec = ring(2, vec![Activate, Activate]);
        assert_eq!(spec.validate(), Err(SpecError::PositiveCycle));
    }

    #[test]
    fn validate_names_the_offending_gene() {
        let mut spec = ring(3, vec![Regulation::Repress; 3]);
        spec.genes[1].b = 0.0;
        assert_eq!(
            spec.validate(),
            Err(SpecError::NonPositiveRate {
                gene: 1,
                field: "b",
                value: 0.0
            })
        );
        let mut spec = ring(3, vec![Regulation::Repress; 3]);
        spec.genes[2].tau_p = -0.5;
        assert_eq!(
            spec.validate(),
            Err(SpecError::NegativeDelay {
                gene: 2,
                field: "tau_p",
                value: -0.5
            })
        );
        let mut spec = ring(3, vec![Regulation::Repress; 3]);
        spec.nu = 0.9;
        assert_eq!(
            spec.validate(),
            Err(SpecError::BadHillCoefficient { nu: 0.9 })
        );
    }

    #[test]
    fn validate_is_pure() {
        let spec = ring(3, vec![Regulation::Repress; 3]);
        assert_eq!(spec.validate(), spec.validate());
        let bad = ring(2, vec![Regulation::Activate; 2]);
        assert_eq!(bad.validate(), bad.validate());
    }

    #[test]
    fn presets_pass_validation() {
        for name in PRESET_NAMES {
            let spec = load_preset(name).unwrap();
            spec.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        assert!(load_preset("nope").is_err());
    }

    #[test]
    fn counterexample_parameters() {
        let spec = load_preset("counterexample").unwrap();
        assert_eq!(spec.len(), 3);
        assert_eq!(spec.nu, 2.0);
        for g in &spec.genes {
            assert_eq!((g.a, g.b, g.c, g.beta), (1.0, 1.0, 1.7498, 1.7498));
            assert_eq!((g.tau_r, g.tau_p), (0.5, 0.5));
        }
    }

    #[test]
    fn hes7_parameters() {
        let spec = load_preset("hes7_wild").unwrap();
        let g = &spec.genes[0];
        assert!((g.a - 0.231).abs() < 5e-4);
        assert!((g.b - 0.0347).abs() < 5e-5);
        assert_eq!((g.c, g.beta, g.tau_r, g.tau_p), (4.5, 33.0, 7.0, 30.0));
        assert!((g.p0 - 40.1).abs() < 0.1, "p0 = {}", g.p0);
        let mutant = load_preset("hes7_mutant").unwrap();
        assert!((mutant.genes[0].b - LN_2 / 30.0).abs() < 1e-15);
        assert_eq!(mutant.genes[0].p0, g.p0);
    }

    #[test]
    fn example7_parameters() {
        let spec = load_preset("example7").unwrap();
        assert_eq!(spec.len(), 7);
        assert_eq!(spec.nu, 2.6);
        for g in &spec.genes {
            assert_eq!((g.a, g.b), (1.2, 4.8));
            // Every gene shares the same synthesis product.
            assert!((g.c * g.beta - 8.2944).abs() < 1e-12);
        }
        assert!((spec.mean_delay() - 0.52).abs() < 1e-12);
        let nodelay = load_preset("example7_nodelay").unwrap();
        assert_eq!(nodelay.mean_delay(), 0.0);
    }

    #[test]
    fn json_round_trip() {
        for name in PRESET_NAMES {
            let spec = load_preset(name).unwrap();
            let back = NetworkSpec::from_json(&spec.to_json()).unwrap();
            assert_eq!(spec.len(), back.len());
            for (g, h) in spec.genes.iter().zip(&back.genes) {
                for (x, y) in [
                    (g.a, h.a),
                    (g.b, h.b),
                    (g.c, h.c),
                    (g.beta, h.beta),
                    (g.tau_r, h.tau_r),
                    (g.tau_p, h.tau_p),
                    (g.alpha0, h.alpha0),
                    (g.p0, h.p0),
                ] {
                    let scale = x.abs().max(1e-300);
                    assert!((x - y).abs() / scale < 1e-12);
                }
            }
        }
    }

    #[test]
    fn json_defaults_for_omitted_fields() {
        let text = r#"{
            "nu": 2.0,
            "genes": [
                {"a": 1.0, "b": 1.0, "c": 1.0, "beta": 2.0,
                 "tau_r": 0.0, "tau_p": 0.5, "regulation": "repress"}
            ]
        }"#;
        let spec = NetworkSpec::from_json(text).unwrap();
        assert_eq!(spec.genes[0].alpha0, 0.0);
        assert_eq!(spec.genes[0].p0, 1.0);
        assert_eq!(spec.genes[0].regulation, Regulation::Repress);
    }
}
