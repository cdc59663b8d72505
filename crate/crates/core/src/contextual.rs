//! Online ranking of query-document lists from top-k feedback: a linear
//! scorer trained by projected online gradient descent on unbiased
//! surrogate-gradient estimates.
//!
//! Each round the learner scores the document list with its weight vector
//! and, with probability `1 - gamma_t`, shows the sorted list; otherwise it
//! shows the ranking of a fresh uniform score draw. Equivalently the shown
//! ranking follows `(1 - gamma) 1(sigma = sorted) + gamma / m!`. Only the
//! top-k relevances come back; they feed the propensity-weighted gradient
//! estimator, a descent step, and a projection onto the radius-`U` ball.
//!
//! When the observed top items differ from the deterministic ranking's, the
//! raw propensity is the small exploration probability and the estimate
//! explodes. Those mismatch rounds optionally scale gamma up inside the
//! denominator only (`mismatch_boost`); the step becomes biased but bounded,
//! and the log records every boosted round so the bias stays auditable.

use std::fmt::Write as _;

use crate::datasets::QueryRecord;
use crate::error::{Error, Result};
use crate::measures;
use crate::rng::Rng;
use crate::surrogates::{self, Propensities, SurrogateId};
use crate::types::{argsort_desc, FeatureMatrix, Permutation, ScoreVector, TopKFeedback};

/// Parameters of a contextual run. Schedules: `gamma_t = gamma_scale /
/// t^(1/3)` (clamped to 0.45) and `eta_t = eta_scale / t^(2/3)`.
#[derive(Debug, Clone)]
pub struct ContextualConfig {
    pub surrogate: SurrogateId,
    /// Exploration scale; must lie in (0, 1/2).
    pub gamma_scale: f64,
    /// Learning-rate scale.
    pub eta_scale: f64,
    /// Weight-ball radius `U`.
    pub radius: f64,
    /// Factor applied to gamma inside the estimator denominator on mismatch
    /// rounds; 1 disables boosting.
    pub mismatch_boost: f64,
    /// Documents per list.
    pub items: usize,
    /// Feature dimension.
    pub dim: usize,
}

impl ContextualConfig {
    pub fn new(surrogate: SurrogateId, items: usize, dim: usize, radius: f64) -> Result<Self> {
        Self::with_schedules(surrogate, items, dim, radius, 0.1, 0.01, 10.0)
    }

    pub fn with_schedules(
        surrogate: SurrogateId,
        items: usize,
        dim: usize,
        radius: f64,
        gamma_scale: f64,
        eta_scale: f64,
        mismatch_boost: f64,
    ) -> Result<Self> {
        if surrogate.required_feedback().is_none() {
            return Err(Error::Config(format!(
                "{surrogate} has no top-k gradient estimator; use it as a \
                 full-information baseline instead"
            )));
        }
        if !(gamma_scale > 0.0 && gamma_scale < 0.5) {
            return Err(Error::Config(format!(
                "exploration scale must lie in (0, 1/2), got {gamma_scale}"
            )));
        }
        if eta_scale <= 0.0 || radius <= 0.0 || !eta_scale.is_finite() || !radius.is_finite() {
            return Err(Error::Config(
                "learning rate and radius must be positive".to_string(),
            ));
        }
        if !mismatch_boost.is_finite() || mismatch_boost < 1.0 {
            return Err(Error::Config(format!(
                "mismatch boost must be at least 1, got {mismatch_boost}"
            )));
        }
        if items < 2 || dim == 0 {
            return Err(Error::Config(
                "need at least two documents and one feature".to_string(),
            ));
        }
        Ok(Self {
            surrogate,
            gamma_scale,
            eta_scale,
            radius,
            mismatch_boost,
            items,
            dim,
        })
    }

    /// Exploration probability at round `t` (1-based), clamped below 1/2.
    pub fn gamma_at(&self, t: usize) -> f64 {
        (self.gamma_scale / (t as f64).powf(1.0 / 3.0)).min(0.45)
    }

    /// Step size at round `t` (1-based).
    pub fn eta_at(&self, t: usize) -> f64 {
        self.eta_scale / (t as f64).powf(2.0 / 3.0)
    }
}

/// Linear ranker state; the weight norm never exceeds the configured radius.
#[derive(Debug, Clone)]
pub struct RankerState {
    pub weights: Vec<f64>,
    /// Round counter, 1-based: the round about to be played.
    pub round: usize,
}

impl RankerState {
    pub fn new(dim: usize) -> Self {
        Self {
            weights: vec![0.0; dim],
            round: 1,
        }
    }

    pub fn weight_norm(&self) -> f64 {
        self.weights.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// What one round's action looked like.
#[derive(Debug, Clone)]
pub struct ActOutcome {
    /// Scores actually played (either the deterministic ones or a uniform
    /// draw).
    pub shown_scores: ScoreVector,
    pub shown_perm: Permutation,
    /// Deterministic scores `X w` and their ranking; the estimator and the
    /// propensities are built around these.
    pub det_scores: ScoreVector,
    pub det_perm: Permutation,
    pub explored: bool,
    /// Exploration probability the round was played with; the update step
    /// builds its propensities from this value.
    pub gamma: f64,
}

/// Plays one round: with probability `1 - gamma` the deterministic sorted
/// list, otherwise the ranking of a fresh uniform score vector.
/// `gamma = 0` never explores.
pub fn act(
    state: &RankerState,
    features: &FeatureMatrix,
    gamma: f64,
    rng: &mut Rng,
) -> Result<ActOutcome> {
    if !(0.0..0.5).contains(&gamma) {
        return Err(Error::Config(format!(
            "exploration probability must lie in [0, 1/2), got {gamma}"
        )));
    }
    if features.cols() != state.weights.len() {
        return Err(Error::InvalidInput(format!(
            "feature dimension {} does not match weights {}",
            features.cols(),
            state.weights.len()
        )));
    }
    let det_scores = ScoreVector::new(features.times_vec(&state.weights))?;
    let det_perm = argsort_desc(&det_scores, rng);
    let explored = gamma > 0.0 && rng.next_f64() < gamma;
    let (shown_scores, shown_perm) = if explored {
        let draw =
            ScoreVector::new((0..features.rows()).map(|_| rng.next_f64()).collect::<Vec<_>>())?;
        let perm = argsort_desc(&draw, rng);
        (draw, perm)
    } else {
        (det_scores.clone(), det_perm.clone())
    };
    Ok(ActOutcome {
        shown_scores,
        shown_perm,
        det_scores,
        det_perm,
        explored,
        gamma,
    })
}

/// Result of one descent step.
#[derive(Debug, Clone)]
pub struct UpdateOutcome {
    pub state: RankerState,
    /// Whether the mismatch boost rescaled the propensity this round.
    pub boosted: bool,
}

fn project_to_ball(weights: &mut [f64], radius: f64) {
    let norm: f64 = weights.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > radius {
        let scale = radius / norm;
        for w in weights.iter_mut() {
            *w *= scale;
        }
    }
}

/// True when the observed top items no longer pin the large propensity
/// term: a plain top-item mismatch at depth 1, an unordered pair mismatch at
/// depth 2 (the pair estimator is symmetric in the observed order).
fn is_mismatch(required_k: usize, shown: &Permutation, det: &Permutation) -> bool {
    match required_k {
        1 => shown.item_at_rank(0) != det.item_at_rank(0),
        _ => {
            let mut a = [shown.item_at_rank(0), shown.item_at_rank(1)];
            let mut b = [det.item_at_rank(0), det.item_at_rank(1)];
            a.sort_unstable();
            b.sort_unstable();
            a != b
        }
    }
}

/// Builds the gradient estimate from the round's feedback, steps, projects.
pub fn update(
    state: &RankerState,
    features: &FeatureMatrix,
    outcome: &ActOutcome,
    feedback: &TopKFeedback,
    config: &ContextualConfig,
) -> Result<UpdateOutcome> {
    let required = config
        .surrogate
        .required_feedback()
        .expect("validated at config construction");
    if feedback.k < required {
        return Err(Error::Contract(format!(
            "{} needs top-{required} feedback, got top-{}",
            config.surrogate, feedback.k
        )));
    }
    let t = state.round;
    // The acted-with gamma, not a recomputed one: propensities must describe
    // the distribution the shown ranking was actually drawn from. Without
    // exploration every item's propensity floor is zero and no unbiased
    // estimate exists.
    if outcome.gamma <= 0.0 {
        return Err(Error::Config(
            "cannot build propensity-weighted estimates from a round played              without exploration"
                .to_string(),
        ));
    }
    let mut propensities = Propensities::new(
        outcome.gamma,
        config.items,
        outcome.det_perm.item_at_rank(0),
        Some(outcome.det_perm.item_at_rank(1)),
    )?;
    let boosted = config.mismatch_boost > 1.0
        && is_mismatch(required, &feedback.perm, &outcome.det_perm);
    if boosted {
        propensities = propensities.with_boosted_gamma(config.mismatch_boost);
    }

    let estimate = surrogates::estimate_gradient(
        config.surrogate,
        &outcome.det_scores,
        feedback,
        &propensities,
        features,
    )?;
    let eta = config.eta_at(t);
    let mut weights = state.weights.clone();
    for (w, g) in weights.iter_mut().zip(&estimate) {
        *w -= eta * g;
    }
    project_to_ball(&mut weights, config.radius);
    Ok(UpdateOutcome {
        state: RankerState {
            weights,
            round: t + 1,
        },
        boosted,
    })
}

/// Per-round record of a contextual run.
#[derive(Debug, Clone)]
pub struct ContextualRunRow {
    pub round: usize,
    pub explored: bool,
    pub boosted: bool,
    /// Surrogate loss of the played scores against the hidden relevance.
    pub surrogate_loss: f64,
    /// Cumulative mean truncated-NDCG (cutoff 10) of the shown rankings.
    pub avg_ndcg10: f64,
}

#[derive(Debug, Clone)]
pub struct ContextualRunLog {
    pub surrogate: SurrogateId,
    pub rows: Vec<ContextualRunRow>,
}

impl ContextualRunLog {
    pub fn final_avg_ndcg10(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.avg_ndcg10)
    }

    pub fn boosted_rounds(&self) -> usize {
        self.rows.iter().filter(|r| r.boosted).count()
    }

    /// CSV with the `round,explored,boosted,surrogate_loss,avg_ndcg10`
    /// schema; booleans as 0/1, floats shortest-roundtrip.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("round,explored,boosted,surrogate_loss,avg_ndcg10\n");
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.round,
                r.explored as u8,
                r.boosted as u8,
                r.surrogate_loss,
                r.avg_ndcg10
            )
            .expect("string write cannot fail");
        }
        out
    }

    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

fn record_at(records: &[QueryRecord], t: usize) -> &QueryRecord {
    &records[(t - 1) % records.len()]
}

fn check_records(records: &[QueryRecord], items: usize, dim: usize) -> Result<()> {
    if records.is_empty() {
        return Err(Error::Config("empty query stream".to_string()));
    }
    for r in records {
        if r.num_docs() != items || r.features.cols() != dim {
            return Err(Error::Config(format!(
                "query {} is {}x{}, expected {items}x{dim} (normalize list lengths first)",
                r.qid,
                r.num_docs(),
                r.features.cols()
            )));
        }
    }
    Ok(())
}

/// Runs the partial-feedback learner for `horizon` rounds, cycling through
/// `records` in order. Logs the surrogate loss of the played scores and the
/// truncated NDCG of the shown ranking, both against the hidden relevance.
pub fn run_contextual(
    config: &ContextualConfig,
    records: &[QueryRecord],
    horizon: usize,
    rng: &mut Rng,
) -> Result<ContextualRunLog> {
    check_records(records, config.items, config.dim)?;
    let required = config.surrogate.required_feedback().expect("validated");
    let mut state = RankerState::new(config.dim);
    let mut rows = Vec::with_capacity(horizon);
    let mut ndcg_sum = 0.0;
    for t in 1..=horizon {
        let record = record_at(records, t);
        let outcome = act(&state, &record.features, config.gamma_at(t), rng)?;
        let feedback =
            TopKFeedback::observe(outcome.shown_perm.clone(), &record.relevance, required)?;
        let loss = surrogates::value(config.surrogate, &outcome.shown_scores, &record.relevance);
        ndcg_sum += measures::ndcg_at(&outcome.shown_perm, &record.relevance, 10);
        let step = update(&state, &record.features, &outcome, &feedback, config)?;
        debug_assert!(step.state.weight_norm() <= config.radius + 1e-9);
        rows.push(ContextualRunRow {
            round: t,
            explored: outcome.explored,
            boosted: step.boosted,
            surrogate_loss: loss,
            avg_ndcg10: ndcg_sum / t as f64,
        });
        state = step.state;
    }
    Ok(ContextualRunLog {
        surrogate: config.surrogate,
        rows,
    })
}

/// Full-information baseline: online gradient descent on the ListNet cross
/// entropy with the whole relevance vector revealed each round
/// (`eta_t = eta_scale / sqrt(t)`), no exploration.
pub fn run_listnet_baseline(
    records: &[QueryRecord],
    horizon: usize,
    dim: usize,
    radius: f64,
    eta_scale: f64,
    rng: &mut Rng,
) -> Result<ContextualRunLog> {
    if records.is_empty() {
        return Err(Error::Config("empty query stream".to_string()));
    }
    let items = records[0].num_docs();
    check_records(records, items, dim)?;
    let mut weights = vec![0.0f64; dim];
    let mut rows = Vec::with_capacity(horizon);
    let mut ndcg_sum = 0.0;
    for t in 1..=horizon {
        let record = record_at(records, t);
        let scores = ScoreVector::new(record.features.times_vec(&weights))?;
        let perm = argsort_desc(&scores, rng);
        let loss = surrogates::value(SurrogateId::ListNetCe, &scores, &record.relevance);
        ndcg_sum += measures::ndcg_at(&perm, &record.relevance, 10);
        let grad = record.features.transpose_times_vec(&surrogates::gradient(
            SurrogateId::ListNetCe,
            &scores,
            &record.relevance,
        ));
        let eta = eta_scale / (t as f64).sqrt();
        for (w, g) in weights.iter_mut().zip(&grad) {
            *w -= eta * g;
        }
        project_to_ball(&mut weights, radius);
        rows.push(ContextualRunRow {
            round: t,
            explored: false,
            boosted: false,
            surrogate_loss: loss,
            avg_ndcg10: ndcg_sum / t as f64,
        });
    }
    Ok(ContextualRunLog {
        surrogate: SurrogateId::ListNetCe,
        rows,
    })
}

/// No-feedback baseline: a fresh uniformly random ranking every round.
/// `surrogate` only selects which loss is logged.
pub fn run_random_baseline(
    records: &[QueryRecord],
    horizon: usize,
    surrogate: SurrogateId,
    rng: &mut Rng,
) -> Result<ContextualRunLog> {
    if records.is_empty() {
        return Err(Error::Config("empty query stream".to_string()));
    }
    let mut rows = Vec::with_capacity(horizon);
    let mut ndcg_sum = 0.0;
    for t in 1..=horizon {
        let record = record_at(records, t);
        let m = record.num_docs();
        let scores = ScoreVector::new((0..m).map(|_| rng.next_f64()).collect::<Vec<_>>())?;
        let perm = argsort_desc(&scores, rng);
        let loss = surrogates::value(surrogate, &scores, &record.relevance);
        ndcg_sum += measures::ndcg_at(&perm, &record.relevance, 10);
        rows.push(ContextualRunRow {
            round: t,
            explored: false,
            boosted: false,
            surrogate_loss: loss,
            avg_ndcg10: ndcg_sum / t as f64,
        });
    }
    Ok(ContextualRunLog { surrogate, rows })
}

/// Approximate best fixed weight vector in hindsight: deterministic
/// full-gradient descent on the cumulative surrogate over the realized
/// stream, with the step size halved whenever a pass fails to improve.
/// An approximation oracle, not an exact minimizer.
pub fn offline_best_weights(
    surrogate: SurrogateId,
    records: &[QueryRecord],
    horizon: usize,
    dim: usize,
    radius: f64,
    passes: usize,
) -> Result<Vec<f64>> {
    if records.is_empty() {
        return Err(Error::Config("empty query stream".to_string()));
    }
    let objective = |w: &[f64]| -> Result<f64> {
        let mut total = 0.0;
        for t in 1..=horizon {
            let record = record_at(records, t);
            let scores = ScoreVector::new(record.features.times_vec(w))?;
            total += surrogates::value(surrogate, &scores, &record.relevance);
        }
        Ok(total / horizon as f64)
    };
    let mut weights = vec![0.0f64; dim];
    let mut best_value = objective(&weights)?;
    let mut eta = 1.0f64;
    for _ in 0..passes {
        let mut grad = vec![0.0f64; dim];
        for t in 1..=horizon {
            let record = record_at(records, t);
            let scores = ScoreVector::new(record.features.times_vec(&weights))?;
            let g = record.features.transpose_times_vec(&surrogates::gradient(
                surrogate,
                &scores,
                &record.relevance,
            ));
            for (a, b) in grad.iter_mut().zip(&g) {
                *a += b / horizon as f64;
            }
        }
        let mut candidate = weights.clone();
        for (w, g) in candidate.iter_mut().zip(&grad) {
            *w -= eta * g;
        }
        project_to_ball(&mut candidate, radius);
        let value = objective(&candidate)?;
        if value <= best_value {
            weights = candidate;
            best_value = value;
        } else {
            eta /= 2.0;
        }
    }
    Ok(weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::synthesize_contextual;
    use crate::types::RelevanceVector;

    fn small_config(surrogate: SurrogateId) -> ContextualConfig {
        ContextualConfig::new(surrogate, 4, 3, 5.0).unwrap()
    }

    fn toy_records(queries: usize, m: usize, d: usize, seed: u64) -> Vec<QueryRecord> {
        synthesize_contextual(queries, m, d, 0.1, seed).unwrap().0.records
    }

    #[test]
    fn config_guards() {
        assert!(matches!(
            ContextualConfig::with_schedules(SurrogateId::Squared, 4, 3, 5.0, 1.0, 0.01, 10.0),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            ContextualConfig::with_schedules(SurrogateId::Squared, 4, 3, 5.0, 0.5, 0.01, 10.0),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            ContextualConfig::new(SurrogateId::ListNetCe, 4, 3, 5.0),
            Err(Error::Config(_))
        ));
        let cfg = small_config(SurrogateId::Kl);
        assert!(cfg.gamma_at(1) <= 0.45);
        assert!((cfg.gamma_at(8) - 0.05).abs() < 1e-12);
        assert!((cfg.eta_at(8) - 0.0025).abs() < 1e-12);
    }

    #[test]
    fn zero_gamma_never_explores() {
        let mut rng = Rng::new(4);
        let state = RankerState {
            weights: vec![0.3, -0.1, 0.2],
            round: 1,
        };
        let x = FeatureMatrix::new(4, 3, (0..12).map(|i| i as f64 * 0.1).collect()).unwrap();
        for _ in 0..200 {
            let out = act(&state, &x, 0.0, &mut rng).unwrap();
            assert!(!out.explored);
            assert_eq!(out.shown_perm, out.det_perm);
            assert_eq!(out.shown_scores.values(), x.times_vec(&state.weights));
        }
        assert!(act(&state, &x, 0.5, &mut rng).is_err());
    }

    #[test]
    fn shown_ranking_follows_the_exploration_mixture() {
        // Empirical law of the shown permutation: (1 - gamma) on the sorted
        // one, gamma / m! on each ranking.
        let mut rng = Rng::new(10);
        let state = RankerState {
            weights: vec![1.0, 0.5],
            round: 1,
        };
        let x = FeatureMatrix::new(3, 2, vec![1.0, 0.0, 0.5, 0.2, 0.1, 0.9]).unwrap();
        let gamma = 0.3;
        let reps = 100_000;
        let mut counts = std::collections::HashMap::new();
        let mut det_perm = None;
        for _ in 0..reps {
            let out = act(&state, &x, gamma, &mut rng).unwrap();
            det_perm.get_or_insert(out.det_perm.clone());
            *counts
                .entry(out.shown_perm.rank_to_item().to_vec())
                .or_insert(0usize) += 1;
        }
        let det = det_perm.unwrap();
        for (perm, count) in counts {
            let p = if perm == det.rank_to_item() {
                (1.0 - gamma) + gamma / 6.0
            } else {
                gamma / 6.0
            };
            let expect = reps as f64 * p;
            let three_sigma = 3.0 * (reps as f64 * p * (1.0 - p)).sqrt();
            assert!(
                (count as f64 - expect).abs() <= three_sigma,
                "perm {perm:?}: {count} vs {expect}"
            );
        }
    }

    #[test]
    fn zero_gradient_leaves_weights_unchanged() {
        // KL at s = 0 with revealed grade 0 gives a zero estimate whichever
        // ranking was shown.
        let cfg = small_config(SurrogateId::Kl);
        let state = RankerState::new(3);
        let x = FeatureMatrix::new(4, 3, vec![0.5; 12]).unwrap();
        let mut rng = Rng::new(6);
        let rel = RelevanceVector::binary(vec![0, 0, 0, 0]).unwrap();
        for _ in 0..50 {
            let outcome = act(&state, &x, cfg.gamma_at(1), &mut rng).unwrap();
            let feedback = TopKFeedback::observe(outcome.shown_perm.clone(), &rel, 1).unwrap();
            let step = update(&state, &x, &outcome, &feedback, &cfg).unwrap();
            assert_eq!(step.state.weights, vec![0.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn steps_leaving_the_ball_land_exactly_on_it() {
        let cfg = ContextualConfig::with_schedules(
            SurrogateId::Squared,
            4,
            3,
            0.001, // tiny ball so any real step exits
            0.1,
            0.5,
            1.0,
        )
        .unwrap();
        let state = RankerState::new(3);
        let x = FeatureMatrix::new(4, 3, (0..12).map(|i| (i as f64 - 6.0) * 0.2).collect())
            .unwrap();
        let mut rng = Rng::new(9);
        let outcome = act(&state, &x, 0.1, &mut rng).unwrap();
        let rel = RelevanceVector::binary(vec![1, 1, 0, 0]).unwrap();
        let feedback = TopKFeedback::observe(outcome.shown_perm.clone(), &rel, 1).unwrap();
        let step = update(&state, &x, &outcome, &feedback, &cfg).unwrap();
        assert!((step.state.weight_norm() - 0.001).abs() < 1e-12);
    }

    #[test]
    fn single_round_step_matches_hand_arithmetic() {
        // Identity features, squared surrogate, no exploration, no boost:
        // w_2 = w_1 - eta_1 * 2(s - R(top) e_top / p(top)).
        let cfg = ContextualConfig::with_schedules(
            SurrogateId::Squared,
            3,
            3,
            100.0,
            0.2,
            0.01,
            1.0,
        )
        .unwrap();
        let state = RankerState {
            weights: vec![0.4, 0.2, 0.1],
            round: 1,
        };
        let x = FeatureMatrix::identity(3);
        let mut rng = Rng::new(3);
        // Take the first non-exploring round so the shown ranking is the
        // deterministic one the hand arithmetic assumes.
        let outcome = loop {
            let o = act(&state, &x, cfg.gamma_at(1), &mut rng).unwrap();
            if !o.explored {
                break o;
            }
        };
        assert_eq!(outcome.det_perm.item_at_rank(0), 0);
        let rel = RelevanceVector::binary(vec![1, 0, 0]).unwrap();
        let feedback = TopKFeedback::observe(outcome.shown_perm.clone(), &rel, 1).unwrap();
        let step = update(&state, &x, &outcome, &feedback, &cfg).unwrap();

        let gamma = cfg.gamma_at(1);
        let p_match = 1.0 - gamma + gamma / 3.0;
        let mut expected_grad = [2.0 * 0.4, 2.0 * 0.2, 2.0 * 0.1];
        expected_grad[0] -= 2.0 / p_match;
        let eta = cfg.eta_at(1);
        for i in 0..3 {
            let expect = state.weights[i] - eta * expected_grad[i];
            assert!(
                (step.state.weights[i] - expect).abs() < 1e-12,
                "coordinate {i}"
            );
        }
    }

    #[test]
    fn round_randomness_keeps_the_estimate_conditionally_unbiased() {
        // Freeze weights and the query; replay only the round's coin flips
        // (boost disabled) and average the estimates.
        let cfg = ContextualConfig::with_schedules(
            SurrogateId::Squared,
            4,
            3,
            10.0,
            0.3,
            0.01,
            1.0,
        )
        .unwrap();
        let state = RankerState {
            weights: vec![0.5, -0.3, 0.2],
            round: 1, // gamma_at(1) = 0.3
        };
        let records = toy_records(1, 4, 3, 21);
        let record = &records[0];
        let mut rng = Rng::new(123);
        let det_scores = ScoreVector::new(record.features.times_vec(&state.weights)).unwrap();
        let exact = record.features.transpose_times_vec(&surrogates::gradient(
            SurrogateId::Squared,
            &det_scores,
            &record.relevance,
        ));
        let draws = 150_000;
        let mut sum = [0.0; 3];
        let mut sum_sq = [0.0; 3];
        for _ in 0..draws {
            let outcome = act(&state, &record.features, cfg.gamma_at(1), &mut rng).unwrap();
            let feedback =
                TopKFeedback::observe(outcome.shown_perm.clone(), &record.relevance, 1).unwrap();
            let step = update(&state, &record.features, &outcome, &feedback, &cfg).unwrap();
            assert!(!step.boosted);
            // Recover the estimate from the step: w2 = w1 - eta z.
            let eta = cfg.eta_at(1);
            for i in 0..3 {
                let z = (state.weights[i] - step.state.weights[i]) / eta;
                sum[i] += z;
                sum_sq[i] += z * z;
            }
        }
        for i in 0..3 {
            let mean = sum[i] / draws as f64;
            let var = (sum_sq[i] / draws as f64 - mean * mean).max(0.0);
            let se = (var / draws as f64).sqrt();
            assert!(
                (mean - exact[i]).abs() <= 3.0 * se + 1e-9,
                "coordinate {i}: {mean} vs {} (se {se})",
                exact[i]
            );
        }
    }

    #[test]
    fn boosted_rounds_are_flagged_in_the_log() {
        let cfg = ContextualConfig::with_schedules(
            SurrogateId::Squared,
            6,
            4,
            5.0,
            0.45,
            0.01,
            10.0,
        )
        .unwrap();
        let records = toy_records(20, 6, 4, 3);
        let mut rng = Rng::new(15);
        let log = run_contextual(&cfg, &records, 2000, &mut rng).unwrap();
        let boosted = log.boosted_rounds();
        // Early gamma is 0.45, so mismatch rounds are common.
        assert!(boosted > 0, "no boosted rounds logged");
        for row in &log.rows {
            if row.boosted {
                // A boost can only happen on a round that showed a
                // non-deterministic top item, which requires exploration.
                assert!(row.explored);
            }
        }
    }

    #[test]
    fn learner_beats_random_on_rankable_data() {
        let records = toy_records(50, 8, 4, 99);
        let cfg = ContextualConfig::new(SurrogateId::Kl, 8, 4, 8.0).unwrap();
        let mut rng = Rng::new(1);
        let learner = run_contextual(&cfg, &records, 4000, &mut rng).unwrap();
        let mut rng = Rng::new(2);
        let random = run_random_baseline(&records, 4000, SurrogateId::Kl, &mut rng).unwrap();
        assert!(
            learner.final_avg_ndcg10() > random.final_avg_ndcg10() + 0.05,
            "learner {} vs random {}",
            learner.final_avg_ndcg10(),
            random.final_avg_ndcg10()
        );
    }

    #[test]
    fn random_baseline_curve_is_flat() {
        // No feedback, no learning: past the first noisy rounds the running
        // mean barely moves.
        let records = toy_records(30, 8, 4, 44);
        let mut rng = Rng::new(6);
        let log = run_random_baseline(&records, 5000, SurrogateId::Squared, &mut rng).unwrap();
        let early = log.rows[499].avg_ndcg10;
        let late = log.final_avg_ndcg10();
        assert!((early - late).abs() < 0.03, "drifted from {early} to {late}");
    }

    #[test]
    fn listnet_baseline_learns_with_full_information() {
        let records = toy_records(50, 8, 4, 5);
        let mut rng = Rng::new(3);
        let listnet = run_listnet_baseline(&records, 3000, 4, 8.0, 0.01, &mut rng).unwrap();
        let mut rng = Rng::new(4);
        let random = run_random_baseline(&records, 3000, SurrogateId::ListNetCe, &mut rng).unwrap();
        assert!(listnet.final_avg_ndcg10() > random.final_avg_ndcg10() + 0.05);
    }

    #[test]
    fn cumulative_surrogate_regret_grows_sublinearly() {
        let records = toy_records(100, 6, 4, 17);
        let horizon = 4000;
        let cfg = ContextualConfig::new(SurrogateId::Squared, 6, 4, 6.0).unwrap();
        let mut rng = Rng::new(8);
        let log = run_contextual(&cfg, &records, horizon, &mut rng).unwrap();

        let best = offline_best_weights(SurrogateId::Squared, &records, horizon, 4, 6.0, 50)
            .unwrap();
        // Cumulative loss of the fixed comparator along the same stream.
        let mut comparator_cum = Vec::with_capacity(horizon);
        let mut acc = 0.0;
        for t in 1..=horizon {
            let record = record_at(&records, t);
            let scores = ScoreVector::new(record.features.times_vec(&best)).unwrap();
            acc += surrogates::value(SurrogateId::Squared, &scores, &record.relevance);
            comparator_cum.push(acc);
        }
        let mut learner_cum = 0.0;
        let mut points = Vec::new();
        for (t, row) in log.rows.iter().enumerate() {
            learner_cum += row.surrogate_loss;
            let t1 = t + 1;
            if t1 >= horizon / 10 {
                let regret = (learner_cum - comparator_cum[t]).max(1e-9);
                points.push(((t1 as f64).ln(), regret.ln()));
            }
        }
        let n = points.len() as f64;
        let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
        let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
        let slope = points
            .iter()
            .map(|p| (p.0 - mean_x) * (p.1 - mean_y))
            .sum::<f64>()
            / points.iter().map(|p| (p.0 - mean_x).powi(2)).sum::<f64>();
        assert!(slope < 0.9, "log-log regret slope {slope}");
    }

    #[test]
    fn run_logs_serialize_deterministically() {
        let records = toy_records(10, 5, 3, 1);
        let cfg = ContextualConfig::new(SurrogateId::Squared, 5, 3, 4.0).unwrap();
        let a = run_contextual(&cfg, &records, 500, &mut Rng::new(12)).unwrap();
        let b = run_contextual(&cfg, &records, 500, &mut Rng::new(12)).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert!(a.to_csv().starts_with("round,explored,boosted,"));
    }
}
