//! Combinatorial synthesis of modular systems scored with interval multiset
//! estimates.
//!
//! * [`estimates`]: scales, the estimate poset, proximity and medians.
//! * [`model`]: component trees, design alternatives and compatibility.
//! * [`synthesis`]: leaf-to-root composition and Pareto filtering.
//! * [`choice`]: budgeted one-per-group selection with a median objective.
//! * [`improvement`]: bottlenecks and budgeted improvement by elements.
//! * [`aggregation`]: supersolution, kernel and kernel extension.
//! * [`golden`]: bundled-dataset checks against reference annotations.
//! * [`cli`]: the `morphsynth` command line.

pub mod aggregation;
pub mod choice;
pub mod cli;
pub mod estimates;
pub mod golden;
pub mod improvement;
pub mod model;
pub mod synthesis;

use thiserror::Error;

/// Any library error, tagged with its module.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Estimate(#[from] estimates::EstimateError),
    #[error(transparent)]
    Model(#[from] model::ModelError),
    #[error(transparent)]
    Synthesis(#[from] synthesis::SynthesisError),
    #[error(transparent)]
    Choice(#[from] choice::ChoiceError),
    #[error(transparent)]
    Improvement(#[from] improvement::ImprovementError),
    #[error(transparent)]
    Aggregation(#[from] aggregation::AggregationError),
}

impl Error {
    /// `module::Variant`, e.g. `choice::Infeasible`.
    pub fn name(&self) -> String {
        let (module, name) = match self {
            Self::Estimate(e) => ("estimates", e.name()),
            Self::Model(e) => ("model", e.name()),
            Self::Synthesis(e) => ("synthesis", e.name()),
            Self::Choice(e) => ("choice", e.name()),
            Self::Improvement(e) => ("improvement", e.name()),
            Self::Aggregation(e) => ("aggregation", e.name()),
        };
        format!("{module}::{name}")
    }
}
