//! Online learning to rank from top-k feedback.
//!
//! The learner shows a ranked list of `m` items each round but only observes
//! the relevance of the few top-ranked items (`k << m`), while being judged
//! on the full list. This crate implements both standard settings plus the
//! analysis tooling around them:
//!
//! - [`noncontextual`]: a fixed item set, blocked exploration feeding a
//!   follow-the-perturbed-leader subroutine; handles SumLoss, PairwiseLoss,
//!   DCG and Precision@n.
//! - [`contextual`]: query-document lists scored by a linear ranker, trained
//!   by projected online gradient descent on unbiased surrogate-gradient
//!   estimates built from the restricted feedback ([`surrogates`]).
//! - [`partial_monitoring`]: the finite game matrices for the fixed-item
//!   setting and numeric global/local observability tests, which separate
//!   the learnable measures from NDCG/AP/AUC.
//! - [`adversary`]: relevance-stream generators, including a pair of
//!   feedback-indistinguishable distributions with different optimal
//!   rankings.
//! - [`datasets`], [`experiment`]: query-document ingestion/synthesis and
//!   the multi-seed experiment harness behind the CLI.

pub mod adversary;
pub mod contextual;
pub mod datasets;
pub mod error;
pub mod experiment;
pub mod measures;
pub mod noncontextual;
pub mod partial_monitoring;
pub mod rng;
pub mod surrogates;
pub mod types;

pub use error::{Error, Result};
pub use measures::MeasureId;
pub use rng::Rng;
pub use surrogates::SurrogateId;
pub use types::{
    argsort_desc, enumerate_permutations, FeatureMatrix, Permutation, RelevanceVector,
    ScoreVector, TopKFeedback,
};
