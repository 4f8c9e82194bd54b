//! Exact-arithmetic workbench for causal Bayesian networks.
//!
//! The crate models discrete causal Bayesian networks with exact rational
//! parameters and provides:
//!
//! - enumeration and variable-elimination inference, observational and
//!   interventional ([`inference`]);
//! - parameter-level constraints — context-specific independences,
//!   conditional functional dependencies, functional dependencies, and
//!   state declarations — with a checker and a seeded constrained-model
//!   sampler ([`constraints`]);
//! - three model surgeries: functional elimination of a variable, state
//!   extension, and state permutation ([`transforms`]);
//! - a small expression language for identification formulas evaluated
//!   against observational distributions only ([`estimand`]);
//! - a gallery of certificate fixtures — pairs of models that agree
//!   observationally but disagree on a target causal effect — together
//!   with their verification recipes ([`gallery`]).
//!
//! All probabilities are nonnegative rationals in lowest terms; equality
//! checks throughout are exact, never approximate.

pub mod constraints;
pub mod estimand;
pub mod gallery;
pub mod inference;
pub mod io;
pub mod json;
pub mod model;
pub mod rat;
pub mod rng;
pub mod transforms;

pub use inference::{
    causal_effect, conditional, dist_equal, eliminate_ve, intervene, joint, marginal,
    marginal_given, Dist, InferenceError,
};
pub use model::{build_model, CausalGraph, Cbn, Cpt, Instantiation, ModelError, Variable};
pub use rat::{parse_rat, Rat, RatError};
