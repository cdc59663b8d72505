//! Blocked exploration/exploitation for ranking a fixed item set from top-k
//! feedback, with a follow-the-perturbed-leader subroutine.
//!
//! The horizon is cut into blocks. Inside each block, `ceil(m/k)` rounds are
//! sacrificed to exploration: the items are partitioned into cells of size
//! `k`, and each cell takes the top `k` ranks in one uniformly chosen round,
//! so its relevances are revealed. The vector assembled from those revealed
//! grades is an unbiased estimate of the block's average (transformed)
//! relevance vector, because each exploration round is marginally uniform
//! within the block. Every other round exploits: items are sorted by the
//! accumulated estimate plus a uniform perturbation on `[0, 1/epsilon]` per
//! coordinate, which implicitly samples from a distribution over all `m!`
//! rankings in `O(m log m)` time.
//!
//! The accumulated estimate is frozen for the whole block, so exploitation
//! rankings are independent of the feedback the current block collects.
//!
//! Supported measures are the linear family (SumLoss, PairwiseLoss, DCG,
//! Precision@n); the normalized measures admit no sublinear-regret strategy
//! under this feedback model and are rejected.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::measures::{self, MeasureId};
use crate::rng::Rng;
use crate::types::{argsort_desc, Permutation, RelevanceVector, ScoreVector, TopKFeedback};

/// Parameters of one blocked run.
#[derive(Debug, Clone)]
pub struct BlockConfig {
    /// Time horizon `T`.
    pub horizon: usize,
    /// Number of blocks `K`; the block size is `ceil(T / K)`.
    pub num_blocks: usize,
    /// Feedback depth `k`.
    pub feedback_depth: usize,
    /// Item count `m`.
    pub items: usize,
    /// Largest relevance grade `n`.
    pub max_grade: u8,
    /// Perturbation scale; draws are uniform on `[0, 1/epsilon]`.
    pub epsilon: f64,
    pub measure: MeasureId,
    /// Apply the `2^g - 1` grade transform when assembling estimates
    /// (required for DCG; the identity on binary grades).
    pub transform_grades: bool,
}

impl BlockConfig {
    pub fn new(
        horizon: usize,
        num_blocks: usize,
        feedback_depth: usize,
        items: usize,
        max_grade: u8,
        epsilon: f64,
        measure: MeasureId,
    ) -> Result<Self> {
        check_measure_supported(measure)?;
        if items == 0 || feedback_depth == 0 || feedback_depth > items {
            return Err(Error::Config(format!(
                "feedback depth {feedback_depth} outside 1..={items}"
            )));
        }
        if num_blocks == 0 || num_blocks > horizon {
            return Err(Error::Config(format!(
                "block count {num_blocks} outside 1..={horizon}"
            )));
        }
        if !epsilon.is_finite() || epsilon <= 0.0 {
            return Err(Error::Config(format!(
                "perturbation scale must be positive, got {epsilon}"
            )));
        }
        let cfg = Self {
            horizon,
            num_blocks,
            feedback_depth,
            items,
            max_grade,
            epsilon,
            measure,
            transform_grades: measure == MeasureId::Dcg,
        };
        let cells_needed = cfg.num_cells();
        if cells_needed > cfg.block_size() {
            return Err(Error::Config(format!(
                "block size {} cannot hold {cells_needed} exploration rounds",
                cfg.block_size()
            )));
        }
        Ok(cfg)
    }

    /// `ceil(T / K)`.
    pub fn block_size(&self) -> usize {
        self.horizon.div_ceil(self.num_blocks)
    }

    /// `ceil(m / k)`: exploration rounds needed per block.
    pub fn num_cells(&self) -> usize {
        self.items.div_ceil(self.feedback_depth)
    }
}

fn check_measure_supported(measure: MeasureId) -> Result<()> {
    match measure {
        MeasureId::SumLoss
        | MeasureId::PairwiseLoss
        | MeasureId::Dcg
        | MeasureId::PrecisionAt(_) => Ok(()),
        other => Err(Error::Config(format!(
            "the blocked algorithm handles sumloss, pairwiseloss, dcg and precision@n; \
             {other} admits no sublinear-regret strategy under top-k feedback"
        ))),
    }
}

/// Chooses the block count and perturbation scale for a horizon:
/// `K = round(m^(1/3) T^(2/3) / ceil(m/k)^(2/3))` clamped to feasibility, and
/// `epsilon = 1 / sqrt(mK)`, additionally divided by `(2^n - 1)^2` for DCG.
/// Constant factors are 1; callers may override both via [`BlockConfig`].
pub fn plan_blocks(
    horizon: usize,
    items: usize,
    feedback_depth: usize,
    max_grade: u8,
    measure: MeasureId,
) -> Result<BlockConfig> {
    check_measure_supported(measure)?;
    if items == 0 || feedback_depth == 0 || feedback_depth > items {
        return Err(Error::Config(format!(
            "feedback depth {feedback_depth} outside 1..={items}"
        )));
    }
    let cells = items.div_ceil(feedback_depth);
    if horizon < items || horizon < items * cells {
        return Err(Error::Config(format!(
            "horizon {horizon} too short: need at least m * ceil(m/k) = {}",
            items * cells
        )));
    }
    let raw = (items as f64).powf(1.0 / 3.0) * (horizon as f64).powf(2.0 / 3.0)
        / (cells as f64).powf(2.0 / 3.0);
    let num_blocks = (raw.round() as usize).clamp(1, horizon / cells);
    let epsilon = default_epsilon(measure, items, num_blocks, max_grade);
    BlockConfig::new(
        horizon,
        num_blocks,
        feedback_depth,
        items,
        max_grade,
        epsilon,
        measure,
    )
}

fn default_epsilon(measure: MeasureId, items: usize, blocks: usize, max_grade: u8) -> f64 {
    match measure {
        MeasureId::Dcg => {
            let g = 2f64.powi(max_grade as i32) - 1.0;
            1.0 / (g * g * ((items * blocks) as f64).sqrt())
        }
        _ => 1.0 / ((items * blocks) as f64).sqrt(),
    }
}

/// Partitions items into `ceil(m/k)` cells of `k` consecutive items each
/// (the last cell may be short): with m = 7, k = 2 the cells are
/// (0,1), (2,3), (4,5), (6).
pub fn cells(items: usize, feedback_depth: usize) -> Vec<Vec<usize>> {
    (0..items)
        .collect::<Vec<_>>()
        .chunks(feedback_depth)
        .map(|c| c.to_vec())
        .collect()
}

/// The exploration ranking for one cell: the cell's items fill the top ranks
/// in cell order, every other item follows in ascending id order.
pub fn exploration_perm(cell_index: usize, cells: &[Vec<usize>], items: usize) -> Permutation {
    let cell = &cells[cell_index];
    let mut rank_to_item = cell.clone();
    let mut in_cell = vec![false; items];
    for &i in cell {
        in_cell[i] = true;
    }
    rank_to_item.extend((0..items).filter(|&i| !in_cell[i]));
    Permutation::from_rank_to_item(rank_to_item).expect("cells partition the items")
}

/// Builds the block's relevance estimate from one feedback tuple per cell:
/// the component of an item in cell `j` is the (optionally `2^g - 1`
/// transformed) grade revealed at that item's slot in cell `j`'s round.
pub fn assemble_estimate(
    feedbacks: &[Option<TopKFeedback>],
    cells: &[Vec<usize>],
    transform_grades: bool,
) -> Result<Vec<f64>> {
    if feedbacks.len() != cells.len() {
        return Err(Error::State(format!(
            "expected {} cell feedbacks, got {}",
            cells.len(),
            feedbacks.len()
        )));
    }
    let items: usize = cells.iter().map(Vec::len).sum();
    let mut estimate = vec![0.0; items];
    for (j, (fb, cell)) in feedbacks.iter().zip(cells).enumerate() {
        let fb = fb
            .as_ref()
            .ok_or_else(|| Error::State(format!("no exploration feedback for cell {j}")))?;
        for (slot, &item) in cell.iter().enumerate() {
            debug_assert_eq!(fb.perm.item_at_rank(slot), item);
            let g = fb.revealed[slot];
            estimate[item] = if transform_grades {
                measures::grade_gain(g)
            } else {
                g as f64
            };
        }
    }
    Ok(estimate)
}

/// One perturbed-leader ranking: sort the accumulated information vector
/// plus per-coordinate uniform noise on `[0, 1/epsilon]`, descending. For
/// the linear measures this is simultaneously the loss minimizer and the
/// gain maximizer over all rankings of the perturbed vector.
pub fn ftpl_step(s_hat: &[f64], epsilon: f64, rng: &mut Rng) -> Permutation {
    let perturbed: Vec<f64> = s_hat.iter().map(|&s| s + rng.next_f64() / epsilon).collect();
    let scores = ScoreVector::new(perturbed).expect("perturbed scores are finite");
    argsort_desc(&scores, rng)
}

/// Per-round record of a run.
#[derive(Debug, Clone)]
pub struct RunRow {
    pub round: usize,
    pub explored: bool,
    /// Measure value of the shown ranking against the hidden full relevance.
    pub value: f64,
    pub cum_value: f64,
    /// Best fixed ranking's cumulative value on the rounds so far.
    pub best_cum_value: f64,
    /// `(cum - best)/t` for losses, `(best - cum)/t` for gains.
    pub avg_regret: f64,
}

/// Round-by-round log of one run.
#[derive(Debug, Clone)]
pub struct RunLog {
    pub measure: MeasureId,
    pub rows: Vec<RunRow>,
}

impl RunLog {
    pub fn final_avg_regret(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.avg_regret)
    }

    pub fn avg_regret_series(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.avg_regret).collect()
    }

    /// CSV with the `round,phase,loss,cum_loss,best_cum_loss,avg_regret`
    /// schema. Float formatting is shortest-roundtrip, so identical runs
    /// serialize byte-identically.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("round,phase,loss,cum_loss,best_cum_loss,avg_regret\n");
        for r in &self.rows {
            let phase = if r.explored { "explore" } else { "exploit" };
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.round, phase, r.value, r.cum_value, r.best_cum_value, r.avg_regret
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

/// Incremental best-fixed-ranking value. All four supported measures are
/// optimized by sorting the summed (transformed) relevance vector, so the
/// best cumulative value is a function of prefix sums; sorting's optimality
/// is exhaustively cross-checked in tests up to m = 5.
struct HindsightTracker {
    measure: MeasureId,
    sums: Vec<f64>,
    /// PairwiseLoss differs from SumLoss by a ranking-independent offset of
    /// `q(q+1)/2` per round (q = relevant count), accumulated here.
    pairwise_offset: f64,
}

impl HindsightTracker {
    fn new(measure: MeasureId, items: usize) -> Self {
        Self {
            measure,
            sums: vec![0.0; items],
            pairwise_offset: 0.0,
        }
    }

    fn push(&mut self, rel: &RelevanceVector) {
        let transform = self.measure == MeasureId::Dcg;
        for (s, &g) in self.sums.iter_mut().zip(rel.grades()) {
            *s += if transform {
                measures::grade_gain(g)
            } else {
                g as f64
            };
        }
        if self.measure == MeasureId::PairwiseLoss {
            let q = rel.ones() as f64;
            self.pairwise_offset += q * (q + 1.0) / 2.0;
        }
    }

    fn best_cum_value(&self) -> f64 {
        let mut sorted = self.sums.clone();
        sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite sums"));
        match self.measure {
            MeasureId::SumLoss => sorted
                .iter()
                .enumerate()
                .map(|(rank, &v)| (rank + 1) as f64 * v)
                .sum(),
            MeasureId::PairwiseLoss => {
                let sum_loss: f64 = sorted
                    .iter()
                    .enumerate()
                    .map(|(rank, &v)| (rank + 1) as f64 * v)
                    .sum();
                sum_loss - self.pairwise_offset
            }
            MeasureId::Dcg => sorted
                .iter()
                .enumerate()
                .map(|(rank, &v)| measures::rank_discount(rank) * v)
                .sum(),
            MeasureId::PrecisionAt(n) => sorted.iter().take(n).sum(),
            _ => unreachable!("unsupported measures rejected at construction"),
        }
    }
}

struct RegretLogger {
    measure: MeasureId,
    tracker: HindsightTracker,
    cum_value: f64,
    rows: Vec<RunRow>,
}

impl RegretLogger {
    fn new(measure: MeasureId, items: usize, horizon: usize) -> Self {
        Self {
            measure,
            tracker: HindsightTracker::new(measure, items),
            cum_value: 0.0,
            rows: Vec::with_capacity(horizon),
        }
    }

    fn record(&mut self, perm: &Permutation, rel: &RelevanceVector, explored: bool) -> Result<()> {
        let value = self.measure.evaluate(perm, rel)?;
        self.cum_value += value;
        self.tracker.push(rel);
        let best = self.tracker.best_cum_value();
        let t = (self.rows.len() + 1) as f64;
        let avg_regret = if self.measure.is_gain() {
            (best - self.cum_value) / t
        } else {
            (self.cum_value - best) / t
        };
        self.rows.push(RunRow {
            round: self.rows.len() + 1,
            explored,
            value,
            cum_value: self.cum_value,
            best_cum_value: best,
            avg_regret,
        });
        Ok(())
    }
}

fn next_relevance(
    stream: &mut dyn Iterator<Item = RelevanceVector>,
    items: usize,
    round: usize,
) -> Result<RelevanceVector> {
    let rel = stream
        .next()
        .ok_or_else(|| Error::Config(format!("relevance stream ended before round {round}")))?;
    if rel.len() != items {
        return Err(Error::Config(format!(
            "round {round}: relevance vector has {} items, expected {items}",
            rel.len()
        )));
    }
    Ok(rel)
}

/// Runs the blocked algorithm against a hidden relevance stream. Exploration
/// rounds are scored like any other round: the learner pays for exploring.
///
/// If the block size does not divide the horizon, the trailing short block
/// runs exploitation-only with the last accumulated estimate, preserving the
/// unbiasedness of every completed block.
pub fn run_noncontextual(
    config: &BlockConfig,
    stream: &mut dyn Iterator<Item = RelevanceVector>,
    rng: &mut Rng,
) -> Result<RunLog> {
    let m = config.items;
    let cells = cells(m, config.feedback_depth);
    let block_size = config.block_size();
    let full_blocks = config.horizon / block_size;

    let mut s_hat = vec![0.0f64; m];
    let mut logger = RegretLogger::new(config.measure, m, config.horizon);
    let mut round = 0usize;

    for _ in 0..full_blocks {
        // Draw order assigns cell j to the j-th drawn time point, keeping
        // each cell's exploration round marginally uniform over the block.
        let times = rng.sample_without_replacement(block_size, cells.len());
        let mut cell_at_offset: Vec<Option<usize>> = vec![None; block_size];
        for (cell, &offset) in times.iter().enumerate() {
            cell_at_offset[offset] = Some(cell);
        }
        let mut collected: Vec<Option<TopKFeedback>> = vec![None; cells.len()];

        for &explore_cell in &cell_at_offset {
            round += 1;
            let rel = next_relevance(stream, m, round)?;
            match explore_cell {
                Some(cell) => {
                    let perm = exploration_perm(cell, &cells, m);
                    let fb = TopKFeedback::observe(perm.clone(), &rel, config.feedback_depth)?;
                    collected[cell] = Some(fb);
                    logger.record(&perm, &rel, true)?;
                }
                None => {
                    let perm = ftpl_step(&s_hat, config.epsilon, rng);
                    logger.record(&perm, &rel, false)?;
                }
            }
        }

        let estimate = assemble_estimate(&collected, &cells, config.transform_grades)?;
        for (s, e) in s_hat.iter_mut().zip(&estimate) {
            *s += e;
        }
    }

    while round < config.horizon {
        round += 1;
        let rel = next_relevance(stream, m, round)?;
        let perm = ftpl_step(&s_hat, config.epsilon, rng);
        logger.record(&perm, &rel, false)?;
    }

    Ok(RunLog {
        measure: config.measure,
        rows: logger.rows,
    })
}

/// Perturbed-leader baseline that sees the full relevance vector every round
/// (no blocking, no exploration). With `epsilon = None` the scale defaults
/// to the planned form with the block count replaced by the horizon.
pub fn run_full_information(
    horizon: usize,
    items: usize,
    max_grade: u8,
    measure: MeasureId,
    epsilon: Option<f64>,
    stream: &mut dyn Iterator<Item = RelevanceVector>,
    rng: &mut Rng,
) -> Result<RunLog> {
    check_measure_supported(measure)?;
    let epsilon = match epsilon {
        Some(e) if e > 0.0 && e.is_finite() => e,
        Some(e) => {
            return Err(Error::Config(format!(
                "perturbation scale must be positive, got {e}"
            )))
        }
        None => default_epsilon(measure, items, horizon, max_grade),
    };
    let transform = measure == MeasureId::Dcg;
    let mut s_hat = vec![0.0f64; items];
    let mut logger = RegretLogger::new(measure, items, horizon);
    for round in 1..=horizon {
        let rel = next_relevance(stream, items, round)?;
        let perm = ftpl_step(&s_hat, epsilon, rng);
        logger.record(&perm, &rel, false)?;
        for (s, &g) in s_hat.iter_mut().zip(rel.grades()) {
            *s += if transform {
                measures::grade_gain(g)
            } else {
                g as f64
            };
        }
    }
    Ok(RunLog {
        measure,
        rows: logger.rows,
    })
}
