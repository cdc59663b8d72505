//! Relevance-stream generators for the fixed-item experiments, plus an
//! executable demonstration that normalized measures can be hopeless: a pair
//! of distributions over relevance vectors that no top-1-feedback learner
//! can tell apart, yet whose optimal rankings differ.

use std::fmt;

use crate::error::{Error, Result};
use crate::measures;
use crate::rng::Rng;
use crate::types::RelevanceVector;

/// Emits independent corrupted copies of a fixed binary relevance vector:
/// each coordinate flips independently with probability `flip_prob` every
/// round.
#[derive(Debug, Clone)]
pub struct CorruptionStream {
    true_relevance: Vec<u8>,
    flip_prob: f64,
    remaining: usize,
    rng: Rng,
}

impl CorruptionStream {
    pub fn true_relevance(&self) -> &[u8] {
        &self.true_relevance
    }
}

impl Iterator for CorruptionStream {
    type Item = RelevanceVector;

    fn next(&mut self) -> Option<RelevanceVector> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let grades = self
            .true_relevance
            .iter()
            .map(|&g| {
                if self.rng.next_f64() < self.flip_prob {
                    1 - g
                } else {
                    g
                }
            })
            .collect();
        Some(RelevanceVector::binary(grades).expect("flips keep grades binary"))
    }
}

/// Stream of `horizon` corrupted copies of the vector with the first `ones`
/// items relevant; deterministic per seed.
pub fn simulated_stream(
    items: usize,
    ones: usize,
    flip_prob: f64,
    horizon: usize,
    seed: u64,
) -> Result<CorruptionStream> {
    if ones > items {
        return Err(Error::Config(format!(
            "cannot mark {ones} of {items} items relevant"
        )));
    }
    if !(0.0..0.5).contains(&flip_prob) {
        return Err(Error::Config(format!(
            "flip probability must lie in [0, 0.5), got {flip_prob}"
        )));
    }
    let mut true_relevance = vec![0u8; items];
    for g in true_relevance.iter_mut().take(ones) {
        *g = 1;
    }
    Ok(CorruptionStream {
        true_relevance,
        flip_prob,
        remaining: horizon,
        rng: Rng::new(seed),
    })
}

/// Two distributions over the same support of binary relevance vectors.
#[derive(Debug, Clone)]
pub struct DistributionPair {
    support: Vec<RelevanceVector>,
    base: Vec<f64>,
    alt: Vec<f64>,
}

impl DistributionPair {
    pub fn new(
        support: Vec<RelevanceVector>,
        base: Vec<f64>,
        alt: Vec<f64>,
    ) -> Result<Self> {
        if support.len() != base.len() || support.len() != alt.len() {
            return Err(Error::InvalidInput(
                "support and probability vectors must have equal length".to_string(),
            ));
        }
        for probs in [&base, &alt] {
            if probs.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                return Err(Error::InvalidInput(
                    "probabilities must lie in [0, 1]".to_string(),
                ));
            }
            let total: f64 = probs.iter().sum();
            if (total - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidInput(format!(
                    "probabilities sum to {total}, expected 1"
                )));
            }
        }
        Ok(Self { support, base, alt })
    }

    /// The three-item construction with matching expected relevance but
    /// different normalized-gain rankings. Support order: 000, 110, 101,
    /// 011, 100, 010, 001, 111.
    pub fn canonical() -> Self {
        let grades: [[u8; 3]; 8] = [
            [0, 0, 0],
            [1, 1, 0],
            [1, 0, 1],
            [0, 1, 1],
            [1, 0, 0],
            [0, 1, 0],
            [0, 0, 1],
            [1, 1, 1],
        ];
        let support = grades
            .iter()
            .map(|g| RelevanceVector::binary(g.to_vec()).unwrap())
            .collect();
        let base = vec![0.0, 0.1, 0.15, 0.05, 0.2, 0.3, 0.2, 0.0];
        let alt = vec![0.0, 0.3, 0.0, 0.0, 0.15, 0.15, 0.4, 0.0];
        Self::new(support, base, alt).expect("canonical pair is well-formed")
    }

    pub fn support(&self) -> &[RelevanceVector] {
        &self.support
    }

    fn probs(&self, alt: bool) -> &[f64] {
        if alt {
            &self.alt
        } else {
            &self.base
        }
    }

    /// `E[R]` per item.
    pub fn expected_relevance(&self, alt: bool) -> Vec<f64> {
        let m = self.support[0].len();
        let mut out = vec![0.0; m];
        for (rel, &p) in self.support.iter().zip(self.probs(alt)) {
            for (o, &g) in out.iter_mut().zip(rel.grades()) {
                *o += p * g as f64;
            }
        }
        out
    }

    /// `E[G(R) / Z(R)]` per item, with `G(g) = 2^g - 1` and `Z` the ideal
    /// DCG normalizer. Zero-probability outcomes contribute nothing, which
    /// keeps the all-zero vector's undefined ratio out of the sum.
    pub fn expected_normalized_gain(&self, alt: bool) -> Vec<f64> {
        let m = self.support[0].len();
        let mut out = vec![0.0; m];
        for (rel, &p) in self.support.iter().zip(self.probs(alt)) {
            if p == 0.0 {
                continue;
            }
            let z = measures::ideal_dcg(rel);
            if z == 0.0 {
                continue;
            }
            for (o, &g) in out.iter_mut().zip(rel.grades()) {
                *o += p * measures::grade_gain(g) / z;
            }
        }
        out
    }

    /// `P(R(item) = 1)`, the relevance-bit rate any top-1 observer of `item`
    /// sees.
    pub fn top_item_hit_rate(&self, alt: bool, item: usize) -> f64 {
        self.expected_relevance(alt)[item]
    }
}

/// Numeric summary of the construction.
#[derive(Debug, Clone)]
pub struct IndistinguishabilityReport {
    pub expected_relevance_base: Vec<f64>,
    pub expected_relevance_alt: Vec<f64>,
    /// Largest coordinate gap between the two expectations (feedback
    /// indistinguishability demands this be zero).
    pub expected_relevance_gap: f64,
    pub normalized_gain_base: Vec<f64>,
    pub normalized_gain_alt: Vec<f64>,
    /// Items sorted by descending normalized gain under the base
    /// distribution (strict ordering).
    pub ranking_base: Vec<usize>,
    /// Unique top item under the alternative distribution.
    pub top_item_alt: usize,
}

impl IndistinguishabilityReport {
    /// True when the two distributions are indistinguishable from top-1
    /// feedback yet disagree on the best item.
    pub fn demonstrates_gap(&self) -> bool {
        self.expected_relevance_gap < 1e-12 && self.ranking_base[0] != self.top_item_alt
    }
}

impl fmt::Display for IndistinguishabilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fmt_vec = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x:.4}"))
                .collect::<Vec<_>>()
                .join(", ")
        };
        writeln!(f, "expected relevance (base): ({})", fmt_vec(&self.expected_relevance_base))?;
        writeln!(f, "expected relevance (alt):  ({})", fmt_vec(&self.expected_relevance_alt))?;
        writeln!(f, "coordinate gap:            {:.3e}", self.expected_relevance_gap)?;
        writeln!(f, "normalized gain (base):    ({})", fmt_vec(&self.normalized_gain_base))?;
        writeln!(f, "normalized gain (alt):     ({})", fmt_vec(&self.normalized_gain_alt))?;
        let ranking: Vec<String> = self.ranking_base.iter().map(|i| (i + 1).to_string()).collect();
        writeln!(f, "best-to-worst items (base): {}", ranking.join(" > "))?;
        writeln!(f, "top item (alt):             {}", self.top_item_alt + 1)?;
        write!(
            f,
            "verdict: identical feedback distributions, different optima: {}",
            if self.demonstrates_gap() { "yes" } else { "no" }
        )
    }
}

/// Builds the canonical pair and summarizes it: equal expected relevance
/// vectors (so every score vector's top-item feedback has identical law
/// under both), yet normalized-gain sort orders that put different items
/// first.
pub fn indistinguishability_report() -> IndistinguishabilityReport {
    let pair = DistributionPair::canonical();
    let base = pair.expected_relevance(false);
    let alt = pair.expected_relevance(true);
    let gap = base
        .iter()
        .zip(&alt)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let gain_base = pair.expected_normalized_gain(false);
    let gain_alt = pair.expected_normalized_gain(true);

    let mut ranking_base: Vec<usize> = (0..gain_base.len()).collect();
    ranking_base.sort_by(|&a, &b| gain_base[b].partial_cmp(&gain_base[a]).unwrap());
    let top_item_alt = (0..gain_alt.len())
        .max_by(|&a, &b| gain_alt[a].partial_cmp(&gain_alt[b]).unwrap())
        .unwrap();

    IndistinguishabilityReport {
        expected_relevance_base: base,
        expected_relevance_alt: alt,
        expected_relevance_gap: gap,
        normalized_gain_base: gain_base,
        normalized_gain_alt: gain_alt,
        ranking_base,
        top_item_alt,
    }
}
