//! DAGs, conjugate Dirichlet CPTs and exact enumeration queries.

pub mod dag;
pub mod inference;
pub mod network;

pub use dag::Dag;
pub use inference::{
    evidence_from_names, joint_query, marginal, sensitivity, sensitivity_report, target_pair_marginals, unnormalized_marginal,
    DEFAULT_ENUMERATION_CAP,
};
pub use network::{family_counts, fit_conjugate, Cpt, FittedNetwork, ParamNetwork, Prior};
