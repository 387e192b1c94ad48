//! End-to-end analysis of one network: equilibrium, reduction, thresholds
//! and a verdict per requested method, serialized as a JSON report.

use crate::equilibrium::{solve_equilibrium, Equilibrium, EquilibriumError};
use crate::linearization::{reduce, ReduceError, ReducedModel};
use crate::netmodel::{NetworkSpec, SpecError};
use crate::stability::{
    characteristic_roots, critical_gain, critical_ratio, nyquist_winding, test_analytic,
    test_graphical, threshold_w, LoopTransfer, Method, Outcome, StabilityError, Verdict,
    DEFAULT_SAMPLES, NEWTON_TOL, SCALAR_TOL,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Solver tolerances, adjustable as one knob or individually.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Relative tolerance on the equilibrium coordinate.
    pub equilibrium: f64,
    /// Tolerance for scalar root finds (critical gain, phase crossing).
    pub scalar: f64,
    /// Newton tolerance for complex characteristic roots.
    pub newton: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            equilibrium: crate::equilibrium::DEFAULT_TOL,
            scalar: SCALAR_TOL,
            newton: NEWTON_TOL,
        }
    }
}

impl Tolerances {
    /// One user dial: every tolerance scales proportionally with
    /// `scalar_tol` relative to its default.
    pub fn from_scalar(scalar_tol: f64) -> Tolerances {
        let factor = scalar_tol / SCALAR_TOL;
        Tolerances {
            equilibrium: crate::equilibrium::DEFAULT_TOL * factor,
            scalar: scalar_tol,
            newton: NEWTON_TOL * factor,
        }
    }
}

#[derive(Debug, Error)]
pub enum AnalyzeError {
    #[error("validation: {0}")]
    Spec(#[from] SpecError),
    #[error("equilibrium: {0}")]
    Equilibrium(#[from] EquilibriumError),
    #[error("linearization: {0}")]
    Reduce(#[from] ReduceError),
    #[error("stability: {0}")]
    Stability(#[from] StabilityError),
}

#[derive(Debug, Clone, Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumReport {
    pub r_star: Vec<f64>,
    pub p_star: Vec<f64>,
    pub zeta: Vec<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReducedReport {
    pub n: usize,
    pub t_r: f64,
    pub t_p: f64,
    pub t_arith: f64,
    pub t_geom: f64,
    pub q: f64,
    pub tau: f64,
    pub tau_tilde: f64,
    pub r: Vec<f64>,
    pub l: f64,
    /// Ring eigenvalues as `[re, im]` pairs.
    pub eigenvalues: Vec<[f64; 2]>,
}

/// Critical quantities; absent entries mean "no finite value applies".
#[derive(Debug, Clone, Serialize)]
pub struct ThresholdsReport {
    pub w: Option<f64>,
    pub l_bar: Option<f64>,
    pub r_bar: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerdictReport {
    pub method: Method,
    pub outcome: Outcome,
    pub margin: Option<f64>,
    pub l: Option<f64>,
    pub l_bar: Option<f64>,
    pub n: Option<usize>,
    pub q: Option<f64>,
    pub tau_tilde: Option<f64>,
    pub omega_sharp: Option<f64>,
    pub omega_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub winding: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dominant_root: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub tool: ToolInfo,
    pub spec: NetworkSpec,
    pub equilibrium: EquilibriumReport,
    pub reduced: Option<ReducedReport>,
    pub thresholds: Option<ThresholdsReport>,
    pub verdicts: Vec<VerdictReport>,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn verdict_report(v: &Verdict, rm: Option<&ReducedModel>) -> VerdictReport {
    VerdictReport {
        method: v.method,
        outcome: v.outcome,
        margin: finite(v.margin),
        l: finite(v.l),
        l_bar: finite(v.l_bar),
        n: rm.map(|rm| rm.n),
        q: rm.map(|rm| rm.q),
        tau_tilde: rm.map(|rm| rm.tau_tilde),
        omega_sharp: v.omega_sharp,
        omega_star: v.omega_star,
        winding: None,
        dominant_root: None,
    }
}

impl AnalysisReport {
    /// Consensus outcome: agreement among conclusive methods, otherwise
    /// inconclusive.
    pub fn overall(&self) -> Outcome {
        let mut conclusive = self
            .verdicts
            .iter()
            .map(|v| v.outcome)
            .filter(|o| *o != Outcome::Inconclusive);
        match conclusive.next() {
            None => Outcome::Inconclusive,
            Some(first) => {
                if conclusive.all(|o| o == first) {
                    first
                } else {
                    Outcome::Inconclusive
                }
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

/// Parse a comma-separated method list; `all` expands to every method.
pub fn parse_methods(text: &str) -> Result<Vec<Method>, String> {
    if text.trim() == "all" {
        return Ok(vec![
            Method::Analytic,
            Method::Graphical,
            Method::Roots,
            Method::Nyquist,
        ]);
    }
    text.split(',')
        .map(|tok| match tok.trim() {
            "analytic" => Ok(Method::Analytic),
            "graphical" => Ok(Method::Graphical),
            "roots" => Ok(Method::Roots),
            "nyquist" => Ok(Method::Nyquist),
            other => Err(format!(
                "unknown method '{other}' (expected analytic, graphical, roots, nyquist or all)"
            )),
        })
        .collect()
}

fn needs_reduction(methods: &[Method]) -> bool {
    methods.iter().any(|m| !matches!(m, Method::Nyquist))
}

/// Run the full pipeline on one network.
///
/// The reduction step requires common degradation rates; for heterogeneous
/// networks restrict `methods` to the Nyquist test.
pub fn analyze(
    spec: &NetworkSpec,
    methods: &[Method],
    tol: &Tolerances,
) -> Result<AnalysisReport, AnalyzeError> {
    spec.validate()?;
    let eq = solve_equilibrium(spec, tol.equilibrium)?;
    let reduced = match reduce(spec, &eq) {
        Ok(rm) => Some(rm),
        Err(err) if needs_reduction(methods) => return Err(err.into()),
        Err(_) => None,
    };

    let thresholds = reduced.as_ref().map(|rm| {
        let w = threshold_w(rm.n, rm.q).ok().and_then(finite);
        let l_bar = critical_gain(rm.n, rm.q, rm.tau_tilde, tol.scalar).ok();
        let r_bar = l_bar.and_then(|lb| critical_ratio(spec.nu, lb).ok());
        ThresholdsReport {
            w,
            l_bar: l_bar.and_then(finite),
            r_bar,
        }
    });

    let mut verdicts = Vec::with_capacity(methods.len());
    for &method in methods {
        let report = match method {
            Method::Analytic => {
                let rm = reduced.as_ref().expect("checked by needs_reduction");
                verdict_report(&test_analytic(rm, tol.scalar)?, Some(rm))
            }
            Method::Graphical => {
                let rm = reduced.as_ref().expect("checked by needs_reduction");
                verdict_report(&test_graphical(rm, tol.scalar)?, Some(rm))
            }
            Method::Roots => {
                let rm = reduced.as_ref().expect("checked by needs_reduction");
                let roots = characteristic_roots(rm, None, tol.newton);
                let l_bar = critical_gain(rm.n, rm.q, rm.tau_tilde, tol.scalar)?;
                let mut v = Verdict::from_margin(rm.l, l_bar, Method::Roots);
                v.outcome = match roots.dominant {
                    None => Outcome::Inconclusive,
                    Some(s) if s.re > 0.0 => Outcome::OscillationsGuaranteed,
                    Some(_) => Outcome::LocallyStable,
                };
                let mut report = verdict_report(&v, Some(rm));
                report.dominant_root = roots.dominant.map(|s| [s.re, s.im]);
                report
            }
            Method::Nyquist => {
                let lt = LoopTransfer::from_equilibrium(spec, &eq);
                let (l, l_bar) = match &reduced {
                    Some(rm) => (
                        rm.l,
                        critical_gain(rm.n, rm.q, rm.tau_tilde, tol.scalar).unwrap_or(f64::NAN),
                    ),
                    None => (f64::NAN, f64::NAN),
                };
                let mut v = Verdict::from_margin(l, l_bar, Method::Nyquist);
                let mut winding = None;
                match nyquist_winding(&lt, None, DEFAULT_SAMPLES) {
                    Ok(report) => {
                        winding = Some(report.winding);
                        v.outcome = if report.winding > 0 {
                            Outcome::OscillationsGuaranteed
                        } else {
                            Outcome::LocallyStable
                        };
                    }
                    Err(StabilityError::Inconclusive(_)) => v.outcome = Outcome::Inconclusive,
                    Err(e) => return Err(e.into()),
                }
                let mut report = verdict_report(&v, reduced.as_ref());
                report.winding = winding;
                report
            }
        };
        verdicts.push(report);
    }

    Ok(AnalysisReport {
        tool: ToolInfo {
            name: "cyclosc",
            version: env!("CARGO_PKG_VERSION"),
        },
        spec: spec.clone(),
        equilibrium: EquilibriumReport {
            r_star: eq.r_star.clone(),
            p_star: eq.p_star.clone(),
            zeta: eq.zeta.clone(),
            residual: eq.residual,
        },
        reduced: reduced.as_ref().map(reduced_report),
        thresholds,
        verdicts,
    })
}

fn reduced_report(rm: &ReducedModel) -> ReducedReport {
    ReducedReport {
        n: rm.n,
        t_r: rm.t_r,
        t_p: rm.t_p,
        t_arith: rm.t_arith,
        t_geom: rm.t_geom,
        q: rm.q,
        tau: rm.tau,
        tau_tilde: rm.tau_tilde,
        r: rm.r.clone(),
        l: rm.l,
        eigenvalues: rm.lambda.iter().map(|z| [z.re, z.im]).collect(),
    }
}

/// Equilibrium plus the pieces `analyze` computes, for callers that want the
/// intermediates rather than the serialized report.
pub fn solve_pipeline(
    spec: &NetworkSpec,
    tol: &Tolerances,
) -> Result<(Equilibrium, ReducedModel), AnalyzeError> {
    spec.validate()?;
    let eq = solve_equilibrium(spec, tol.equilibrium)?;
    let rm = reduce(spec, &eq)?;
    Ok((eq, rm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::load_preset;

    #[test]
    fn report_for_the_seven_gene_example() {
        let spec = load_preset("example7").unwrap();
        let methods = parse_methods("all").unwrap();
        let report = analyze(&spec, &methods, &Tolerances::default()).unwrap();
        assert_eq!(report.verdicts.len(), 4);
        assert_eq!(report.overall(), Outcome::OscillationsGuaranteed);
        let reduced = report.reduced.as_ref().unwrap();
        assert!((reduced.q - 0.8).abs() < 1e-12);
        let thresholds = report.thresholds.as_ref().unwrap();
        assert!((thresholds.l_bar.unwrap() - 1.031).abs() < 5e-3);
        assert!((thresholds.r_bar.unwrap() - 1.187).abs() < 5e-3);
        // Winding and dominant-root witnesses surface in the verdict list.
        let nyquist = report
            .verdicts
            .iter()
            .find(|v| v.method == Method::Nyquist)
            .unwrap();
        assert!(nyquist.winding.unwrap() > 0);
        let roots = report
            .verdicts
            .iter()
            .find(|v| v.method == Method::Roots)
            .unwrap();
        assert!(roots.dominant_root.unwrap()[0] > 0.0);
    }

    #[test]
    fn json_has_only_finite_numbers() {
        // A single gene without delay has an infinite critical gain; the
        // report must render it as null, never as a non-finite number.
        let mut spec = load_preset("hes7_wild").unwrap();
        spec.genes[0].tau_r = 0.0;
        spec.genes[0].tau_p = 0.0;
        let report = analyze(
            &spec,
            &parse_methods("analytic,graphical").unwrap(),
            &Tolerances::default(),
        )
        .unwrap();
        assert_eq!(report.overall(), Outcome::LocallyStable);
        assert!(report.thresholds.as_ref().unwrap().l_bar.is_none());
        let text = report.to_json();
        assert!(!text.contains("inf") && !text.contains("NaN"));
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!(value["verdicts"][0]["margin"].is_null());
    }

    #[test]
    fn heterogeneous_spec_needs_the_nyquist_route() {
        let mut spec = load_preset("counterexample").unwrap();
        spec.genes[1].a = 2.0;
        let err = analyze(
            &spec,
            &parse_methods("analytic").unwrap(),
            &Tolerances::default(),
        );
        assert!(matches!(err, Err(AnalyzeError::Reduce(_))));
        let report = analyze(
            &spec,
            &parse_methods("nyquist").unwrap(),
            &Tolerances::default(),
        )
        .unwrap();
        assert!(report.reduced.is_none());
        assert_ne!(report.overall(), Outcome::Inconclusive);
    }

    #[test]
    fn method_parsing() {
        assert_eq!(parse_methods("analytic").unwrap(), vec![Method::Analytic]);
        assert_eq!(
            parse_methods("roots, nyquist").unwrap(),
            vec![Method::Roots, Method::Nyquist]
        );
        assert_eq!(parse_methods("all").unwrap().len(), 4);
        assert!(parse_methods("magic").is_err());
    }

    #[test]
    fn tolerance_scaling() {
        let t = Tolerances::from_scalar(1e-8);
        assert!((t.equilibrium - 1e-10).abs() < 1e-22);
        assert!((t.scalar - 1e-8).abs() < 1e-20);
        assert!((t.newton - 1e-6).abs() < 1e-18);
    }
}
