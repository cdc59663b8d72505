//! Finite-game view of ranking with top-1 feedback: loss and feedback
//! matrices over all `m!` rankings and `(n+1)^m` relevance vectors, signal
//! matrices, and numeric global/local observability tests.
//!
//! Observability is a span condition: a loss-difference row must lie in the
//! space spanned by the (transposed) signal-matrix columns of the admissible
//! actions. Whether the game admits sublinear regret at all, and at which
//! rate, hinges on these conditions, so the tests here are two-sided: "in
//! span" demands a relative least-squares residual below [`SPAN_TOL`], while
//! "not in span" is only asserted when the residual exceeds
//! [`NOT_IN_SPAN_MARGIN`]. The gap guards against conditioning artifacts.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::measures::MeasureId;
use crate::types::{enumerate_permutations, Permutation, RelevanceVector};

/// Residual below which a vector counts as inside the span.
pub const SPAN_TOL: f64 = 1e-9;

/// Residual above which a vector is asserted to be outside the span.
pub const NOT_IN_SPAN_MARGIN: f64 = 1e-3;

/// Capacity guard on the adversary's action count.
pub const MAX_OUTCOMES: usize = 4096;

/// Capacity guard on the item count (learner has `m!` actions).
pub const MAX_GAME_ITEMS: usize = 6;

/// Loss and feedback matrices of the top-1-feedback ranking game.
///
/// Learner actions are ordered lexicographically by their item-to-rank
/// arrays; adversary actions are relevance vectors in counting order with
/// item 0's grade as the most significant digit. Gain measures are negated
/// into losses on construction so a single code path serves both
/// orientations; `is_gain` records how to read values back out.
#[derive(Debug, Clone)]
pub struct GameMatrices {
    m: usize,
    n: u8,
    measure: MeasureId,
    is_gain: bool,
    loss: Vec<Vec<f64>>,
    feedback: Vec<Vec<u8>>,
    learner_actions: Vec<Permutation>,
    adversary_actions: Vec<RelevanceVector>,
}

impl GameMatrices {
    pub fn items(&self) -> usize {
        self.m
    }

    pub fn max_grade(&self) -> u8 {
        self.n
    }

    pub fn measure(&self) -> MeasureId {
        self.measure
    }

    pub fn is_gain(&self) -> bool {
        self.is_gain
    }

    pub fn num_actions(&self) -> usize {
        self.learner_actions.len()
    }

    pub fn num_outcomes(&self) -> usize {
        self.adversary_actions.len()
    }

    /// Row of the minimization-oriented loss matrix (gains negated).
    pub fn loss_row(&self, action: usize) -> &[f64] {
        &self.loss[action]
    }

    /// Row of raw measure values, orientation restored.
    pub fn measure_row(&self, action: usize) -> Vec<f64> {
        let sign = if self.is_gain { -1.0 } else { 1.0 };
        self.loss[action].iter().map(|&v| sign * v).collect()
    }

    /// Top-1 feedback symbols for one learner action across all outcomes.
    pub fn feedback_row(&self, action: usize) -> &[u8] {
        &self.feedback[action]
    }

    pub fn learner_actions(&self) -> &[Permutation] {
        &self.learner_actions
    }

    pub fn adversary_actions(&self) -> &[RelevanceVector] {
        &self.adversary_actions
    }

    /// Index of the learner action with this rank-to-item array.
    pub fn action_index(&self, perm: &Permutation) -> Option<usize> {
        self.learner_actions.iter().position(|p| p == perm)
    }
}

/// Enumerates relevance vectors in counting order, item 0 most significant.
fn enumerate_relevance_vectors(m: usize, n: u8) -> Vec<RelevanceVector> {
    let base = n as usize + 1;
    let count = base.pow(m as u32);
    let mut out = Vec::with_capacity(count);
    for code in 0..count {
        let mut grades = vec![0u8; m];
        let mut rest = code;
        for slot in (0..m).rev() {
            grades[slot] = (rest % base) as u8;
            rest /= base;
        }
        out.push(RelevanceVector::new(grades, n).expect("grades in range by construction"));
    }
    out
}

/// Builds the full game for `measure` over `m` items and grades `0..=n`.
pub fn build_game(measure: MeasureId, m: usize, n: u8) -> Result<GameMatrices> {
    if m == 0 || m > MAX_GAME_ITEMS {
        return Err(Error::Capacity(format!(
            "game construction supports 1..={MAX_GAME_ITEMS} items, got {m}"
        )));
    }
    let outcomes = (n as usize + 1).checked_pow(m as u32).unwrap_or(usize::MAX);
    if outcomes > MAX_OUTCOMES {
        return Err(Error::Capacity(format!(
            "(n+1)^m = {outcomes} exceeds the {MAX_OUTCOMES} outcome limit"
        )));
    }
    if measure.requires_binary() && n != 1 {
        return Err(Error::Domain(format!(
            "{measure} requires binary relevance (n = 1), got n = {n}"
        )));
    }

    // Lexicographic enumeration of item-to-rank arrays; invert to store the
    // rank-to-item form used everywhere else.
    let learner_actions: Vec<Permutation> = enumerate_permutations(m)?
        .into_iter()
        .map(|p| p.inverse())
        .collect();
    let adversary_actions = enumerate_relevance_vectors(m, n);

    let sign = if measure.is_gain() { -1.0 } else { 1.0 };
    let mut loss = Vec::with_capacity(learner_actions.len());
    let mut feedback = Vec::with_capacity(learner_actions.len());
    for perm in &learner_actions {
        let top = perm.item_at_rank(0);
        let mut loss_row = Vec::with_capacity(adversary_actions.len());
        let mut fb_row = Vec::with_capacity(adversary_actions.len());
        for rel in &adversary_actions {
            loss_row.push(sign * measure.evaluate(perm, rel)?);
            fb_row.push(rel.grade(top));
        }
        loss.push(loss_row);
        feedback.push(fb_row);
    }

    Ok(GameMatrices {
        m,
        n,
        measure,
        is_gain: measure.is_gain(),
        loss,
        feedback,
        learner_actions,
        adversary_actions,
    })
}

/// 0/1 matrix recording which feedback symbol each adversary action produces
/// under one learner action: `entry(g, l) = 1` iff the feedback is grade `g`.
#[derive(Debug, Clone)]
pub struct SignalMatrix {
    symbols: usize,
    outcomes: usize,
    data: Vec<f64>,
}

impl SignalMatrix {
    fn from_feedback_row(row: &[u8], symbols: usize) -> Self {
        let mut data = vec![0.0; symbols * row.len()];
        for (l, &g) in row.iter().enumerate() {
            data[g as usize * row.len() + l] = 1.0;
        }
        Self {
            symbols,
            outcomes: row.len(),
            data,
        }
    }

    pub fn num_symbols(&self) -> usize {
        self.symbols
    }

    pub fn num_outcomes(&self) -> usize {
        self.outcomes
    }

    pub fn entry(&self, symbol: usize, outcome: usize) -> f64 {
        self.data[symbol * self.outcomes + outcome]
    }

    /// Row `symbol` as a vector over adversary actions. These rows are the
    /// columns of the transposed signal matrix that span tests draw from.
    pub fn symbol_indicator(&self, symbol: usize) -> &[f64] {
        &self.data[symbol * self.outcomes..(symbol + 1) * self.outcomes]
    }
}

/// One signal matrix per learner action.
pub fn signal_matrices(game: &GameMatrices) -> Vec<SignalMatrix> {
    let symbols = game.n as usize + 1;
    game.feedback
        .iter()
        .map(|row| SignalMatrix::from_feedback_row(row, symbols))
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Orthonormal basis of the span of `columns` via modified Gram-Schmidt with
/// a second orthogonalization pass. Near-dependent columns are dropped.
fn orthonormal_basis(columns: impl Iterator<Item = Vec<f64>>) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for mut v in columns {
        let initial = norm(&v);
        if initial == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&v, b);
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= c * bi;
                }
            }
        }
        let remaining = norm(&v);
        if remaining > 1e-10 * initial {
            for vi in v.iter_mut() {
                *vi /= remaining;
            }
            basis.push(v);
        }
    }
    basis
}

/// Projector onto the span of a set of signal-matrix columns.
struct SpanProjector {
    basis: Vec<Vec<f64>>,
}

impl SpanProjector {
    fn for_actions(signals: &[SignalMatrix], actions: &[usize]) -> Self {
        let columns = actions.iter().flat_map(|&a| {
            let s = &signals[a];
            (0..s.num_symbols()).map(move |g| s.symbol_indicator(g).to_vec())
        });
        Self {
            basis: orthonormal_basis(columns),
        }
    }

    /// `v` minus its projection onto the span.
    fn residual(&self, v: &[f64]) -> Vec<f64> {
        let mut r = v.to_vec();
        for _ in 0..2 {
            for b in &self.basis {
                let c = dot(&r, b);
                for (ri, bi) in r.iter_mut().zip(b) {
                    *ri -= c * bi;
                }
            }
        }
        r
    }
}

/// Result of a span test: worst relative residual over the tested pairs.
#[derive(Debug, Clone, Copy)]
pub struct ObservabilityOutcome {
    pub holds: bool,
    pub max_residual: f64,
    /// Action pair attaining the worst residual, when any pair was tested.
    pub worst_pair: Option<(usize, usize)>,
}

/// Tests whether every pairwise loss difference lies in the combined span of
/// all actions' signal columns. Returns the worst relative residual.
pub fn global_observability(game: &GameMatrices) -> ObservabilityOutcome {
    let signals = signal_matrices(game);
    let all: Vec<usize> = (0..game.num_actions()).collect();
    let projector = SpanProjector::for_actions(&signals, &all);

    let residuals: Vec<Vec<f64>> = game
        .loss
        .iter()
        .map(|row| projector.residual(row))
        .collect();

    let mut max_residual = 0.0f64;
    let mut worst_pair = None;
    for i in 0..game.num_actions() {
        for j in (i + 1)..game.num_actions() {
            let diff_res: f64 = residuals[i]
                .iter()
                .zip(&residuals[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let diff_norm: f64 = game.loss[i]
                .iter()
                .zip(&game.loss[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let rel = if diff_norm == 0.0 {
                0.0
            } else {
                diff_res / diff_norm
            };
            if rel > max_residual {
                max_residual = rel;
                worst_pair = Some((i, j));
            }
        }
    }
    ObservabilityOutcome {
        holds: max_residual < SPAN_TOL,
        max_residual,
        worst_pair,
    }
}

/// All pairs of actions that differ by one adjacent transposition: the same
/// two items swapped between consecutive ranks, everything else equal. Those
/// are exactly the neighboring action pairs when the measure's rank discount
/// is strictly monotone (SumLoss, PairwiseLoss, DCG). Precision@n's discount
/// is flat inside the cutoff, so its neighborhood structure is undefined
/// here and the call is rejected.
pub fn neighbor_pairs(game: &GameMatrices) -> Result<Vec<(usize, usize)>> {
    match game.measure {
        MeasureId::SumLoss | MeasureId::PairwiseLoss | MeasureId::Dcg => {}
        other => {
            return Err(Error::Contract(format!(
                "neighbor pairs require a strictly rank-monotone measure; {other} is not"
            )))
        }
    }
    let index: HashMap<&[usize], usize> = game
        .learner_actions
        .iter()
        .enumerate()
        .map(|(i, p)| (p.rank_to_item(), i))
        .collect();
    let mut pairs = Vec::new();
    for (i, perm) in game.learner_actions.iter().enumerate() {
        for rank in 0..game.m - 1 {
            let mut swapped = perm.rank_to_item().to_vec();
            swapped.swap(rank, rank + 1);
            let j = index[swapped.as_slice()];
            if i < j {
                pairs.push((i, j));
            }
        }
    }
    pairs.sort_unstable();
    Ok(pairs)
}

/// Span test for one action pair restricted to the signal columns of
/// `neighborhood` (callers typically pass the pair itself, and may widen it).
pub fn local_observability(
    game: &GameMatrices,
    pair: (usize, usize),
    neighborhood: &[usize],
) -> Result<ObservabilityOutcome> {
    let (i, j) = pair;
    if i >= game.num_actions() || j >= game.num_actions() {
        return Err(Error::InvalidInput(format!(
            "action pair ({i}, {j}) out of range for {} actions",
            game.num_actions()
        )));
    }
    if neighborhood.iter().any(|&a| a >= game.num_actions()) {
        return Err(Error::InvalidInput(
            "neighborhood contains an out-of-range action".to_string(),
        ));
    }
    let signals = signal_matrices(game);
    let projector = SpanProjector::for_actions(&signals, neighborhood);
    let diff: Vec<f64> = game.loss[i]
        .iter()
        .zip(&game.loss[j])
        .map(|(a, b)| a - b)
        .collect();
    let diff_norm = norm(&diff);
    let rel = if diff_norm == 0.0 {
        0.0
    } else {
        norm(&projector.residual(&diff)) / diff_norm
    };
    Ok(ObservabilityOutcome {
        holds: rel < SPAN_TOL,
        max_residual: rel,
        worst_pair: Some(pair),
    })
}

/// Writes `loss.csv` and `feedback.csv` under `dir` in the row/column layout
/// of the game tables: rows labelled by item-to-rank arrays, columns by
/// grade strings.
pub fn dump_matrices_csv(game: &GameMatrices, dir: &std::path::Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let labels: Vec<String> = game
        .adversary_actions
        .iter()
        .map(|r| r.grades().iter().map(|g| g.to_string()).collect())
        .collect();
    let header = format!("action,{}\n", labels.join(","));

    let mut loss_csv = header.clone();
    let mut feedback_csv = header;
    for (i, perm) in game.learner_actions.iter().enumerate() {
        let label: String = perm
            .ranks_of_items()
            .iter()
            .map(|r| (r + 1).to_string())
            .collect::<Vec<_>>()
            .join("");
        let values: Vec<String> = game.measure_row(i).iter().map(|v| v.to_string()).collect();
        loss_csv.push_str(&format!("{label},{}\n", values.join(",")));
        let fb: Vec<String> = game.feedback[i].iter().map(|g| g.to_string()).collect();
        feedback_csv.push_str(&format!("{label},{}\n", fb.join(",")));
    }
    std::fs::write(dir.join("loss.csv"), loss_csv)?;
    std::fs::write(dir.join("feedback.csv"), feedback_csv)?;
    Ok(())
}
