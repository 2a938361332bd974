//! Cross-technique verification for probabilistic systems.
//!
//! * [`model`] parses guarded-command models; [`chain`] builds their
//!   discrete-time Markov chains.
//! * [`prop`] checks path properties on a chain.
//! * [`scenario`] renders the robot handover model and its requirements.
//! * [`simtest`] runs seeded simulation campaigns with assertion monitors.
//! * [`assure`] records, calibrates and compares the resulting assurances.

pub mod model;
pub mod chain;
pub mod prop;
pub mod scenario;
pub mod simtest;
pub mod assure;

/// Book chapters, compiled so their snippets run as doc tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/properties.md")]
    mod properties {}
    #[doc = include_str!("../../../book/src/scenario.md")]
    mod scenario {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/assurance.md")]
    mod assurance {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
