//! Discrete Bayesian-network modelling in four phases: information-theoretic
//! feature scoring, structure learning, Bayes-factor model comparison with
//! cross-validation, and posterior-predictive classification.
//!
//! Every phase writes plain CSV or text artifacts so that each decision can
//! be audited on its own; see [`pipeline`] for the file-based workflow and
//! the `examples/` directory for one runnable program per capability.

pub mod bayesnet;
pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod infotheory;
pub mod mcmc;
pub mod modelselect;
pub mod pipeline;
pub mod structlearn;
pub mod synth;

pub use error::{Error, Result};
