//! Local stability of the equilibrium, hence existence of oscillations.
//!
//! The loop is unstable exactly when an eigenvalue of the interaction matrix
//! falls inside the region swept by `phi(j omega) e^{j omega tau}`; since the
//! eigenvalues sit on a ring of radius `L`, everything reduces to comparing
//! `L` with the boundary gain at the phase `pi/N`. Four routes to a verdict
//! are provided and cross-checked: the frequency-sweep test, the closed-form
//! critical-gain test, characteristic-root finding and Nyquist winding.

use serde::Serialize;

mod criteria;
mod nyquist;
mod robust;
mod roots;

pub use criteria::{
    boundary_samples, critical_gain, critical_ratio, crossing_frequency, phase_gain, test_analytic,
    test_graphical, threshold_w,
};
pub use nyquist::{
    nyquist_samples, nyquist_winding, test_nyquist, LoopTransfer, WindingReport, DEFAULT_SAMPLES,
};
pub use robust::{
    worst_case_reduction, GeneBounds, Interval, ParameterBounds, SampledMember, WorstCase,
};
pub use roots::{
    characteristic_roots, default_search, test_roots, CharacteristicRoots, EigenvalueRoots,
    SearchRect,
};

use thiserror::Error;

/// Margins inside this band are treated as the stable side; the criteria are
/// strict inequalities, so a tie cannot certify oscillations.
pub const TIE_BAND: f64 = 1e-9;

/// Default tolerance for scalar root finds (critical gain, phase crossing).
pub const SCALAR_TOL: f64 = 1e-10;

/// Default tolerance for Newton iterations on complex characteristic roots.
pub const NEWTON_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum StabilityError {
    #[error("{what} = {value} is outside the valid domain ({expected})")]
    Domain {
        what: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("no gain crossing exists: L = {l} <= 1")]
    NoCrossing { l: f64 },
    #[error("not applicable: nu = {nu} <= critical gain {l_bar}")]
    NotApplicable { nu: f64, l_bar: f64 },
    #[error("empty interval for {what}: [{lo}, {hi}]")]
    EmptyInterval { what: String, lo: f64, hi: f64 },
    #[error("inconclusive: {0}")]
    Inconclusive(String),
}

/// Three-valued verdict on the existence of oscillations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Outcome {
    /// The equilibrium is locally unstable, so protein levels oscillate.
    OscillationsGuaranteed,
    /// The linearization is stable; no oscillation certificate.
    LocallyStable,
    /// The method could not certify either side.
    Inconclusive,
}

/// Which route produced a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Analytic,
    Graphical,
    Roots,
    Nyquist,
}

/// Stability verdict with its numeric margin and witness frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub outcome: Outcome,
    /// `L - L_bar`; positive margins certify oscillations. May be `-inf`
    /// when no finite critical gain exists, or NaN for methods that do not
    /// compute one.
    pub margin: f64,
    /// Average gain of the loop.
    pub l: f64,
    /// Critical gain the margin is measured against.
    pub l_bar: f64,
    /// Dimensionless frequency where the boundary phase reaches `pi/N`.
    pub omega_sharp: Option<f64>,
    /// Dimensionless frequency where the boundary gain reaches `L`.
    pub omega_star: Option<f64>,
    pub method: Method,
}

impl Verdict {
    pub(crate) fn from_margin(l: f64, l_bar: f64, method: Method) -> Verdict {
        let margin = l - l_bar;
        let outcome = if margin > TIE_BAND {
            Outcome::OscillationsGuaranteed
        } else {
            Outcome::LocallyStable
        };
        Verdict {
            outcome,
            margin,
            l,
            l_bar,
            omega_sharp: None,
            omega_star: None,
            method,
        }
    }
}
