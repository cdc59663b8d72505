//! Shared fixtures for the benchmarks.

use toprank::datasets::{synthesize_contextual, QueryRecord};
use toprank::types::{FeatureMatrix, RelevanceVector, ScoreVector};
use toprank::Rng;

/// A random score vector with distinct entries.
pub fn random_scores(m: usize, rng: &mut Rng) -> ScoreVector {
    ScoreVector::new((0..m).map(|_| rng.next_f64()).collect()).unwrap()
}

/// A random binary relevance vector.
pub fn random_relevance(m: usize, rng: &mut Rng) -> RelevanceVector {
    RelevanceVector::binary((0..m).map(|_| (rng.next_u64() & 1) as u8).collect()).unwrap()
}

/// A dense feature matrix with entries in [-1, 1].
pub fn random_features(m: usize, d: usize, rng: &mut Rng) -> FeatureMatrix {
    FeatureMatrix::new(m, d, (0..m * d).map(|_| rng.next_f64() * 2.0 - 1.0).collect()).unwrap()
}

/// A small synthetic query stream.
pub fn query_stream(queries: usize, m: usize, d: usize) -> Vec<QueryRecord> {
    synthesize_contextual(queries, m, d, 0.1, 7).unwrap().0.records
}
