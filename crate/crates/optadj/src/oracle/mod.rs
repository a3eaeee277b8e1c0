//! Exact population computations over finite discrete laws: interventional
//! means, influence functions and their variances, identity checks and
//! seeded searches for witness laws.

mod estimands;
mod identities;
mod joint;
mod law;
mod search;

pub use estimands::{
    eval_eif, interventional_mean, ipw_mean, ipw_mean_of, iterated_identity_gap, iterated_mean_of,
    outcome_regression, propensity, psi_td, psi_ti, reference_eif, sequential, sequential_of,
    treatment_indicator, Sequential,
};
pub use identities::{verify_identity, Contrast, Identity, IdentityReport, IDENTITY_TOLERANCE};
pub use joint::{Joint, RandomVar};
pub use law::{DiscreteLaw, RandomLawSpec, DEFAULT_EPSILON, DEFAULT_MAX_STATES};
pub use search::{
    centered_direction, falsify_time_dep, interaction_law, law_for_trial, pathwise_derivative,
    row_score, search_witness, treatment_levels, Witness, FALSIFICATION_TOLERANCE,
};
