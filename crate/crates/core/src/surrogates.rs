//! Ranking surrogates: values, exact score-space gradients, and unbiased
//! gradient estimators built from top-k feedback.
//!
//! A surrogate replaces a discontinuous ranking measure with a continuous
//! function `phi(s, R)` of the score vector. Whether its gradient can be
//! estimated without bias from the relevance of only the top `k` ranked
//! items is a structural property: the gradient must decompose into terms
//! each touching at most `k` coordinates of `R`. That gives each surrogate a
//! required feedback depth:
//!
//! | surrogate        | required k | convex |
//! |------------------|------------|--------|
//! | squared          | 1          | yes    |
//! | RankSVM hinge    | 2          | yes    |
//! | unnormalized KL  | 1          | yes    |
//! | smoothed DCG@1   | 1          | no     |
//! | ListNet CE       | full list  | yes    |
//!
//! The ListNet cross-entropy gradient does not decompose over any `k < m`,
//! so its estimator constructor refuses; it stays available as the
//! full-information baseline. [`decomposability_counterexamples`] recomputes
//! the numeric witnesses behind both refusals.
//!
//! Estimators divide by the propensity of the observed top item(s) under the
//! round's ranking distribution; [`Propensities`] carries the compact closed
//! form, so no sum over `m!` permutations is ever needed.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::types::{FeatureMatrix, RelevanceVector, ScoreVector, TopKFeedback};

/// Default smoothing width for the smoothed-DCG surrogate.
pub const DEFAULT_SMOOTHING: f64 = 0.01;

/// Identifies a ranking surrogate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SurrogateId {
    /// Pointwise squared loss `||s - R||^2`.
    Squared,
    /// Pairwise hinge `sum_{i != j} 1(R(i) > R(j)) max(0, 1 + s(j) - s(i))`.
    RankSvm,
    /// Listwise unnormalized KL divergence between `exp(R)` and `exp(s)`.
    Kl,
    /// Non-convex smoothed DCG@1 with softmax temperature `smoothing`.
    SmoothDcg { smoothing: f64 },
    /// ListNet cross entropy on softmax distributions; full information only.
    ListNetCe,
}

impl SurrogateId {
    /// Feedback depth needed for an unbiased gradient estimator, or `None`
    /// when nothing short of the full relevance vector suffices.
    pub fn required_feedback(&self) -> Option<usize> {
        match self {
            SurrogateId::Squared | SurrogateId::Kl | SurrogateId::SmoothDcg { .. } => Some(1),
            SurrogateId::RankSvm => Some(2),
            SurrogateId::ListNetCe => None,
        }
    }

    pub fn is_convex(&self) -> bool {
        !matches!(self, SurrogateId::SmoothDcg { .. })
    }
}

impl fmt::Display for SurrogateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SurrogateId::Squared => write!(f, "squared"),
            SurrogateId::RankSvm => write!(f, "ranksvm"),
            SurrogateId::Kl => write!(f, "kl"),
            SurrogateId::SmoothDcg { .. } => write!(f, "smoothdcg"),
            SurrogateId::ListNetCe => write!(f, "listnet"),
        }
    }
}

impl FromStr for SurrogateId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "squared" | "sq" => Ok(SurrogateId::Squared),
            "ranksvm" | "svm" => Ok(SurrogateId::RankSvm),
            "kl" => Ok(SurrogateId::Kl),
            "smoothdcg" | "sdcg" => Ok(SurrogateId::SmoothDcg {
                smoothing: DEFAULT_SMOOTHING,
            }),
            "listnet" | "listnetce" => Ok(SurrogateId::ListNetCe),
            other => Err(Error::InvalidInput(format!("unknown surrogate '{other}'"))),
        }
    }
}

fn grade_gain(g: u8) -> f64 {
    2f64.powi(g as i32) - 1.0
}

/// Numerically stable softmax of `v / temperature`.
fn softmax_scaled(v: &[f64], temperature: f64) -> Vec<f64> {
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = v.iter().map(|&x| ((x - max) / temperature).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

fn softmax(v: &[f64]) -> Vec<f64> {
    softmax_scaled(v, 1.0)
}

/// Surrogate value `phi(s, R)`.
pub fn value(id: SurrogateId, s: &ScoreVector, rel: &RelevanceVector) -> f64 {
    assert_eq!(s.len(), rel.len(), "score/relevance size mismatch");
    let s = s.values();
    match id {
        SurrogateId::Squared => s
            .iter()
            .zip(rel.grades())
            .map(|(&si, &g)| (si - g as f64) * (si - g as f64))
            .sum(),
        SurrogateId::RankSvm => {
            let m = s.len();
            let mut total = 0.0;
            for i in 0..m {
                for j in 0..m {
                    if i != j && rel.grade(i) > rel.grade(j) {
                        total += (1.0 + s[j] - s[i]).max(0.0);
                    }
                }
            }
            total
        }
        SurrogateId::Kl => s
            .iter()
            .zip(rel.grades())
            .map(|(&si, &g)| {
                let er = (g as f64).exp();
                er * (g as f64 - si) - er + si.exp()
            })
            .sum(),
        SurrogateId::SmoothDcg { smoothing } => {
            let q = softmax_scaled(s, smoothing);
            q.iter()
                .zip(rel.grades())
                .map(|(&qi, &g)| grade_gain(g) * qi)
                .sum()
        }
        SurrogateId::ListNetCe => {
            let ps = softmax(s);
            let pr = softmax(&rel.grades().iter().map(|&g| g as f64).collect::<Vec<_>>());
            -pr.iter().zip(&ps).map(|(&p, &q)| p * q.ln()).sum::<f64>()
        }
    }
}

/// Exact gradient of `phi` with respect to the score vector (length `m`).
/// The hinge uses the subgradient with a strict `1 + s(j) > s(i)` indicator,
/// the same convention the estimator uses, so the two stay consistent at
/// kinks.
pub fn gradient(id: SurrogateId, s: &ScoreVector, rel: &RelevanceVector) -> Vec<f64> {
    assert_eq!(s.len(), rel.len(), "score/relevance size mismatch");
    let s = s.values();
    let m = s.len();
    match id {
        SurrogateId::Squared => s
            .iter()
            .zip(rel.grades())
            .map(|(&si, &g)| 2.0 * (si - g as f64))
            .collect(),
        SurrogateId::RankSvm => {
            let mut grad = vec![0.0; m];
            for i in 0..m {
                for j in 0..m {
                    if i != j && rel.grade(i) > rel.grade(j) && 1.0 + s[j] > s[i] {
                        grad[j] += 1.0;
                        grad[i] -= 1.0;
                    }
                }
            }
            grad
        }
        SurrogateId::Kl => s
            .iter()
            .zip(rel.grades())
            .map(|(&si, &g)| si.exp() - (g as f64).exp())
            .collect(),
        SurrogateId::SmoothDcg { smoothing } => {
            let q = softmax_scaled(s, smoothing);
            let mean_gain: f64 = q
                .iter()
                .zip(rel.grades())
                .map(|(&qi, &g)| grade_gain(g) * qi)
                .sum();
            (0..m)
                .map(|j| (grade_gain(rel.grade(j)) - mean_gain) * q[j] / smoothing)
                .collect()
        }
        SurrogateId::ListNetCe => {
            let ps = softmax(s);
            let pr = softmax(&rel.grades().iter().map(|&g| g as f64).collect::<Vec<_>>());
            ps.iter().zip(&pr).map(|(&q, &p)| q - p).collect()
        }
    }
}

/// Compact propensities of the round's ranking distribution: with
/// probability `1 - gamma` the deterministic sorted ranking is shown,
/// otherwise a uniformly random one. `top1`/`top2` are the deterministic
/// ranking's first two items.
///
/// ```
/// use toprank::surrogates::Propensities;
///
/// let pr = Propensities::new(0.1, 5, 0, Some(1)).unwrap();
/// assert!((pr.top1_probability(0) - 0.92).abs() < 1e-12);
/// assert!((pr.top1_probability(3) - 0.02).abs() < 1e-12);
/// let total: f64 = (0..5).map(|j| pr.top1_probability(j)).sum();
/// assert!((total - 1.0).abs() < 1e-12);
/// ```
#[derive(Debug, Clone, Copy)]
pub struct Propensities {
    gamma: f64,
    m: usize,
    top1: usize,
    top2: Option<usize>,
}

impl Propensities {
    pub fn new(gamma: f64, m: usize, top1: usize, top2: Option<usize>) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 0.5) {
            return Err(Error::Config(format!(
                "exploration weight must lie in (0, 1/2), got {gamma}"
            )));
        }
        if m < 2 || top1 >= m || top2.is_some_and(|t| t >= m || t == top1) {
            return Err(Error::InvalidInput(
                "propensity top items out of range".to_string(),
            ));
        }
        Ok(Self {
            gamma,
            m,
            top1,
            top2,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Rescales the exploration weight inside the probability formulas.
    /// Deliberately unvalidated: mismatch rounds scale gamma up to tame the
    /// tiny denominators, accepting a known bias.
    pub fn with_boosted_gamma(mut self, factor: f64) -> Self {
        self.gamma *= factor;
        self
    }

    /// Probability that `observed_top` ends up ranked first.
    pub fn top1_probability(&self, observed_top: usize) -> f64 {
        let uniform = self.gamma / self.m as f64;
        if observed_top == self.top1 {
            1.0 - self.gamma + uniform
        } else {
            uniform
        }
    }

    /// Probability that the ordered pair `observed` fills ranks 1 and 2.
    pub fn top2_probability(&self, observed: (usize, usize)) -> f64 {
        let top2 = self
            .top2
            .expect("top-2 propensity requires the deterministic second item");
        let uniform = self.gamma / (self.m * (self.m - 1)) as f64;
        if observed == (self.top1, top2) {
            1.0 - self.gamma + uniform
        } else {
            uniform
        }
    }
}

/// Probability that `observed_top` is ranked first (free-function form).
pub fn propensity_top1(pr: &Propensities, observed_top: usize) -> f64 {
    pr.top1_probability(observed_top)
}

/// Probability of the ordered pair `observed` in ranks 1, 2.
pub fn propensity_top2(pr: &Propensities, observed: (usize, usize)) -> f64 {
    pr.top2_probability(observed)
}

/// Unbiased estimator of the parameter-space gradient `X^T grad_s phi(s, R)`
/// from top-k feedback on the shown ranking. `s` must be the deterministic
/// score vector the propensities were built around, not the perturbed one.
pub fn estimate_gradient(
    id: SurrogateId,
    s: &ScoreVector,
    feedback: &TopKFeedback,
    propensities: &Propensities,
    features: &FeatureMatrix,
) -> Result<Vec<f64>> {
    let required = id.required_feedback().ok_or_else(|| {
        Error::Contract(format!(
            "{id} admits no unbiased gradient estimator from top-k feedback; \
             its gradient does not decompose over fewer than m coordinates"
        ))
    })?;
    if feedback.k < required {
        return Err(Error::Contract(format!(
            "{id} needs top-{required} feedback, got top-{}",
            feedback.k
        )));
    }
    if features.rows() != s.len() || feedback.perm.len() != s.len() {
        return Err(Error::InvalidInput(
            "feature matrix, scores and feedback sizes disagree".to_string(),
        ));
    }

    let score_space = match id {
        SurrogateId::RankSvm => {
            let (j1, j2) = (feedback.perm.item_at_rank(0), feedback.perm.item_at_rank(1));
            let denom = propensities.top2_probability((j1, j2))
                + propensities.top2_probability((j2, j1));
            rank_svm_pair_estimator(s.values(), feedback, denom)
        }
        _ => {
            let j = feedback.perm.item_at_rank(0);
            let denom = propensities.top1_probability(j);
            single_coordinate_estimator(id, s.values(), j, feedback.revealed[0], denom)
        }
    };
    Ok(features.transpose_times_vec(&score_space))
}

/// Score-space estimator for the k = 1 surrogates: the decomposition term of
/// the observed coordinate divided by its propensity.
fn single_coordinate_estimator(
    id: SurrogateId,
    s: &[f64],
    item: usize,
    grade: u8,
    denom: f64,
) -> Vec<f64> {
    let m = s.len();
    let mut v = vec![0.0; m];
    match id {
        SurrogateId::Squared => {
            // 2(s - R(j) e_j / p(j))
            for (vi, &si) in v.iter_mut().zip(s) {
                *vi = 2.0 * si;
            }
            v[item] -= 2.0 * grade as f64 / denom;
        }
        SurrogateId::Kl => {
            v[item] = (s[item].exp() - (grade as f64).exp()) / denom;
        }
        SurrogateId::SmoothDcg { smoothing } => {
            let q = softmax_scaled(s, smoothing);
            let scale = grade_gain(grade) / (denom * smoothing);
            for (j, vj) in v.iter_mut().enumerate() {
                let indicator = if j == item { q[item] } else { 0.0 };
                *vj = scale * (indicator - q[item] * q[j]);
            }
        }
        SurrogateId::RankSvm | SurrogateId::ListNetCe => {
            unreachable!("handled by the caller")
        }
    }
    v
}

/// Symmetrized two-coordinate estimator for the hinge surrogate: both order
/// assignments of the observed pair over the summed pair propensity.
fn rank_svm_pair_estimator(s: &[f64], feedback: &TopKFeedback, denom: f64) -> Vec<f64> {
    let (j1, j2) = (feedback.perm.item_at_rank(0), feedback.perm.item_at_rank(1));
    let (g1, g2) = (feedback.revealed[0], feedback.revealed[1]);
    let mut v = vec![0.0; s.len()];
    let mut add_term = |i: usize, gi: u8, j: usize, gj: u8| {
        if gi > gj && 1.0 + s[j] > s[i] {
            v[j] += 1.0;
            v[i] -= 1.0;
        }
    };
    add_term(j1, g1, j2, g2);
    add_term(j2, g2, j1, g1);
    for vi in v.iter_mut() {
        *vi /= denom;
    }
    v
}

/// The `1 -> 2` operator norm of `X^T`, which equals the maximum row 2-norm
/// of `X`; it bounds every estimator here via `||X^T v||_2 <= norm ||v||_1`.
pub fn operator_norm_1_to_2(features: &FeatureMatrix) -> f64 {
    features.max_row_norm()
}

/// Constant `C` such that the estimator's second moment obeys
/// `E ||z||_2^2 <= C / gamma`.
///
/// Squared, hinge and KL use the explicit constants from the second-moment
/// analysis (`m^4 R_D^4 U^2 R_max^2`, `16 m^4 R_D^2`, `m^2 R_D^2 e^{2 R_D U}`);
/// the KL chain additionally needs `R_max <= R_D * U` so the score term
/// dominates. All are loose upper bounds, not tight values. Smoothed DCG has
/// no published constant; the value here follows the same argument with the
/// numerator bounded by `2 G(R_max) / smoothing`.
pub fn second_moment_constant(
    id: SurrogateId,
    m: usize,
    feature_radius: f64,
    param_radius: f64,
    max_grade: u8,
) -> Result<f64> {
    let m = m as f64;
    let rd = feature_radius;
    let u = param_radius;
    let rmax = max_grade as f64;
    match id {
        SurrogateId::Squared => Ok(m.powi(4) * rd.powi(4) * u * u * rmax * rmax),
        SurrogateId::RankSvm => Ok(16.0 * m.powi(4) * rd * rd),
        SurrogateId::Kl => Ok(m * m * rd * rd * (2.0 * rd * u).exp()),
        SurrogateId::SmoothDcg { smoothing } => {
            let num = 2.0 * grade_gain(max_grade) / smoothing;
            Ok(num * num * m * m * rd * rd)
        }
        SurrogateId::ListNetCe => Err(Error::Contract(
            "no top-k estimator exists for the ListNet surrogate".to_string(),
        )),
    }
}

/// Numeric witnesses that the hinge gradient cannot decompose over single
/// coordinates of `R` and the ListNet gradient cannot decompose at all.
#[derive(Debug, Clone, Copy)]
pub struct DecomposabilityReport {
    /// Change of the hinge gradient's first coordinate when `R(1)` flips,
    /// holding the other grades at (0,0) and at (1,1) respectively. A
    /// function of `R(1)` alone would change by the same amount both times.
    pub ranksvm_coefficient_deltas: (f64, f64),
    /// Mixed partial of the ListNet gradient's first coordinate in
    /// `R(1), R(2)`; nonzero, so that coordinate is no function of `R(1)`.
    pub listnet_mixed_partial: f64,
    /// Largest mixed partial of any squared-loss gradient coordinate in a
    /// foreign relevance coordinate; zero up to finite-difference noise.
    pub squared_mixed_partial_max: f64,
}

impl DecomposabilityReport {
    pub fn confirms_impossibility(&self) -> bool {
        let (d0, d1) = self.ranksvm_coefficient_deltas;
        (d1 - d0).abs() > 1.0 && self.listnet_mixed_partial.abs() > 1e-3
    }
}

pub fn decomposability_counterexamples() -> DecomposabilityReport {
    let s = ScoreVector::new(vec![1.0, 0.0, 0.0]).unwrap();
    let hinge_coeff = |grades: &[u8]| -> f64 {
        let rel = RelevanceVector::binary(grades.to_vec()).unwrap();
        gradient(SurrogateId::RankSvm, &s, &rel)[0]
    };
    let delta_low = (hinge_coeff(&[1, 0, 0]) - hinge_coeff(&[0, 0, 0])).abs();
    let delta_high = (hinge_coeff(&[1, 1, 1]) - hinge_coeff(&[0, 1, 1])).abs();

    // ListNet gradient coordinate 0 as a real function of R, differentiated
    // numerically in R(1) and R(2).
    let listnet_coeff = |r: &[f64]| -> f64 {
        let pr = softmax(r);
        let ps = softmax(s.values());
        ps[0] - pr[0]
    };
    let h = 1e-4;
    let base = [0.3, 0.5, 0.1];
    let shifted = |d1: f64, d2: f64| {
        let mut r = base;
        r[0] += d1;
        r[1] += d2;
        listnet_coeff(&r)
    };
    let listnet_mixed =
        (shifted(h, h) - shifted(h, -h) - shifted(-h, h) + shifted(-h, -h)) / (4.0 * h * h);

    // The squared loss decomposes: coordinate i depends on R(i) alone.
    let squared_coeff = |r: &[f64], i: usize| 2.0 * (s.values()[i] - r[i]);
    let mut squared_max = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            if i == j {
                continue;
            }
            let f = |d1: f64, d2: f64| {
                let mut r = [0.2, 0.7, 0.4];
                r[i] += d1;
                r[j] += d2;
                squared_coeff(&r, i)
            };
            let mixed = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4.0 * h * h);
            squared_max = squared_max.max(mixed.abs());
        }
    }

    DecomposabilityReport {
        ranksvm_coefficient_deltas: (delta_low, delta_high),
        listnet_mixed_partial: listnet_mixed,
        squared_mixed_partial_max: squared_max,
    }
}
