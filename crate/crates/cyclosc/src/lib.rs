//! Decides whether a cyclic gene regulatory network with transcription and
//! translation delays is guaranteed to oscillate.
//!
//! The pipeline: describe the ring ([`netmodel`]), find its unique steady
//! state ([`equilibrium`]), collapse the linearization to four dimensionless
//! groups ([`linearization`]), and test instability, hence oscillation, by
//! several independent routes ([`stability`]). Verdicts can be cross-checked
//! by direct delay-differential-equation simulation ([`ddesim`]) and mapped
//! over parameter planes ([`regions`]). The `cyclosc` binary exposes all of
//! it from the command line ([`cli`]).

pub mod cli;
pub mod ddesim;
pub mod equilibrium;
pub mod linearization;
pub mod netmodel;
pub mod regions;
pub mod report;
pub mod stability;

pub use equilibrium::{solve_equilibrium, Equilibrium};
pub use linearization::{reduce, ReducedModel};
pub use netmodel::{hill_eval, load_preset, GeneSpec, NetworkSpec, Regulation};
pub use report::{analyze, AnalysisReport, Tolerances};
pub use stability::{Outcome, Verdict};

// Every code block in the guide compiles and runs against this crate, so
// the book cannot drift out of sync with the library.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/equilibrium.md")]
    mod equilibrium {}
    #[doc = include_str!("../../../book/src/linearization.md")]
    mod linearization {}
    #[doc = include_str!("../../../book/src/criteria.md")]
    mod criteria {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/robustness.md")]
    mod robustness {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/regions.md")]
    mod regions {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli_reference {}
}
