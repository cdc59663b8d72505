//! Multi-seed experiment harness: runs a grid of configurations, aggregates
//! per-round curves across seeds (median and quartiles), and emits one CSV
//! per grid point plus a plot script for offline rendering.
//!
//! Seeds are shared across grid points so comparisons are paired; each run
//! derives its own generators from the seed, so results do not depend on
//! worker scheduling, and reruns with the same spec are byte-identical.

use std::fmt::Write as _;
use std::path::PathBuf;

use rayon::prelude::*;

use crate::adversary::simulated_stream;
use crate::contextual::{
    run_contextual, run_listnet_baseline, run_random_baseline, ContextualConfig,
};
use crate::datasets::{self, QueryRecord};
use crate::error::{Error, Result};
use crate::measures::MeasureId;
use crate::noncontextual::{run_full_information, run_noncontextual, BlockConfig};
use crate::rng::Rng;
use crate::surrogates::SurrogateId;

/// Offset between a run's stream seed and its learner seed, so the two
/// generators never share a stream.
const LEARNER_SEED_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

/// Which family of curves an experiment produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// Effect of the block count: one curve per `K` at fixed depth.
    BlockSize,
    /// Effect of the feedback depth: one curve per `k` at the reference `K`.
    FeedbackDepth,
    /// Top-1 blocked learner against the full-information baseline.
    FullInfo,
    /// Contextual surrogates against the full-information and random
    /// baselines.
    Contextual,
}

impl std::str::FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "block-size" | "blocksize" => Ok(Scenario::BlockSize),
            "feedback" | "feedback-depth" => Ok(Scenario::FeedbackDepth),
            "full-info" | "fullinfo" => Ok(Scenario::FullInfo),
            "contextual" => Ok(Scenario::Contextual),
            other => Err(Error::InvalidInput(format!("unknown scenario '{other}'"))),
        }
    }
}

/// Parameter grid and shared settings for one experiment.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub scenario: Scenario,
    pub out_dir: PathBuf,
    /// Base seeds; every grid point runs once per seed.
    pub seeds: Vec<u64>,
    pub items: usize,
    pub horizon: usize,
    pub measure: MeasureId,
    /// Relevant items in the fixed-set stream.
    pub ones: usize,
    pub flip_prob: f64,
    /// Block-count grid (block-size scenario).
    pub block_counts: Vec<usize>,
    /// Feedback-depth grid (feedback scenario).
    pub depths: Vec<usize>,
    /// Block count used by the feedback and full-info scenarios.
    pub reference_blocks: usize,
    /// Surrogate grid (contextual scenario).
    pub surrogates: Vec<SurrogateId>,
    pub include_listnet: bool,
    pub include_random: bool,
    /// Contextual data parameters.
    pub queries: usize,
    pub dim: usize,
    pub noise: f64,
    pub radius: f64,
    pub data_seed: u64,
    /// Load this ranking file instead of synthesizing (contextual only).
    pub data_path: Option<PathBuf>,
    /// Schedule constants for the contextual learners. The published
    /// per-round schedules keep their form (`gamma / t^(1/3)`,
    /// `eta / t^(2/3)`); these constants are calibrated for the desk-scale
    /// horizon, where the production-scale constants converge too slowly.
    pub gamma_scale: f64,
    pub eta_scale: f64,
}

impl ExperimentSpec {
    /// Defaults matching the desk-scale study: m = 20, T = 10000 over DCG
    /// with 5 relevant items and 10% corruption for the fixed-set scenarios;
    /// 500 synthetic queries, d = 10, T = 20000 for the contextual one.
    pub fn new(scenario: Scenario, out_dir: PathBuf, seeds: Vec<u64>) -> Self {
        let contextual = scenario == Scenario::Contextual;
        Self {
            scenario,
            out_dir,
            seeds,
            items: 20,
            horizon: if contextual { 20_000 } else { 10_000 },
            measure: MeasureId::Dcg,
            ones: 5,
            flip_prob: 0.1,
            block_counts: vec![10, 200, 400],
            depths: vec![1, 5, 10],
            reference_blocks: 200,
            surrogates: vec![
                SurrogateId::Squared,
                SurrogateId::RankSvm,
                SurrogateId::Kl,
                SurrogateId::SmoothDcg {
                    smoothing: crate::surrogates::DEFAULT_SMOOTHING,
                },
            ],
            include_listnet: contextual,
            include_random: contextual,
            queries: 500,
            dim: 10,
            noise: 0.1,
            radius: 10.0,
            data_seed: 0,
            data_path: None,
            gamma_scale: 0.3,
            eta_scale: 0.03,
        }
    }
}

#[derive(Debug, Clone)]
enum RunnerKind {
    Blocked { num_blocks: usize, depth: usize },
    FullInfo,
    Surrogate(SurrogateId),
    ListNet,
    Random,
}

#[derive(Debug, Clone)]
struct GridPoint {
    label: String,
    kind: RunnerKind,
}

/// One grid point's aggregated curve (or its failure).
#[derive(Debug, Clone)]
pub struct GridOutcome {
    pub label: String,
    /// Median metric per round across seeds (average regret for the
    /// fixed-set scenarios, average truncated NDCG for the contextual one).
    pub median: Vec<f64>,
    pub q25: Vec<f64>,
    pub q75: Vec<f64>,
    pub error: Option<String>,
}

impl GridOutcome {
    pub fn final_median(&self) -> f64 {
        self.median.last().copied().unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub outcomes: Vec<GridOutcome>,
    pub metric_name: &'static str,
}

impl ExperimentReport {
    pub fn all_succeeded(&self) -> bool {
        self.outcomes.iter().all(|o| o.error.is_none())
    }

    pub fn outcome(&self, label: &str) -> Option<&GridOutcome> {
        self.outcomes.iter().find(|o| o.label == label)
    }
}

fn grid_points(spec: &ExperimentSpec) -> Result<Vec<GridPoint>> {
    let mut points = Vec::new();
    match spec.scenario {
        Scenario::BlockSize => {
            for &k in &spec.block_counts {
                points.push(GridPoint {
                    label: format!("K{k}"),
                    kind: RunnerKind::Blocked {
                        num_blocks: k,
                        depth: 1,
                    },
                });
            }
        }
        Scenario::FeedbackDepth => {
            for &d in &spec.depths {
                points.push(GridPoint {
                    label: format!("k{d}"),
                    kind: RunnerKind::Blocked {
                        num_blocks: spec.reference_blocks,
                        depth: d,
                    },
                });
            }
        }
        Scenario::FullInfo => {
            points.push(GridPoint {
                label: "top1".to_string(),
                kind: RunnerKind::Blocked {
                    num_blocks: spec.reference_blocks,
                    depth: 1,
                },
            });
            points.push(GridPoint {
                label: "full".to_string(),
                kind: RunnerKind::FullInfo,
            });
        }
        Scenario::Contextual => {
            for &s in &spec.surrogates {
                points.push(GridPoint {
                    label: s.to_string(),
                    kind: RunnerKind::Surrogate(s),
                });
            }
            if spec.include_listnet {
                points.push(GridPoint {
                    label: "listnet".to_string(),
                    kind: RunnerKind::ListNet,
                });
            }
            if spec.include_random {
                points.push(GridPoint {
                    label: "random".to_string(),
                    kind: RunnerKind::Random,
                });
            }
        }
    }
    if points.is_empty() {
        return Err(Error::Config("experiment grid is empty".to_string()));
    }
    Ok(points)
}

/// Loads or synthesizes the contextual query stream, normalized to `items`
/// documents per query. Returns the records and their feature dimension
/// (loaded files dictate their own dimension).
fn contextual_records(spec: &ExperimentSpec) -> Result<(Vec<QueryRecord>, usize)> {
    let dataset = match &spec.data_path {
        Some(path) => datasets::load_svmlight_ranking(path, 4)?,
        None => {
            datasets::synthesize_contextual(
                spec.queries,
                spec.items,
                spec.dim,
                spec.noise,
                spec.data_seed,
            )?
            .0
        }
    };
    let dim = dataset.dim;
    let records = dataset
        .records
        .iter()
        .map(|r| datasets::truncate_or_pad(r, spec.items))
        .collect::<Result<Vec<_>>>()?;
    Ok((records, dim))
}

fn run_one(
    spec: &ExperimentSpec,
    records: Option<&(Vec<QueryRecord>, usize)>,
    kind: &RunnerKind,
    seed: u64,
) -> Result<Vec<f64>> {
    let learner_seed = seed.wrapping_add(LEARNER_SEED_STRIDE);
    match kind {
        RunnerKind::Blocked { num_blocks, depth } => {
            // Streams are binary, so the DCG gain factor (2^n - 1)^2 is 1
            // and one perturbation scale serves every measure.
            let epsilon = 1.0 / ((spec.items * num_blocks) as f64).sqrt();
            let cfg = BlockConfig::new(
                spec.horizon,
                *num_blocks,
                *depth,
                spec.items,
                1,
                epsilon,
                spec.measure,
            )?;
            let mut stream =
                simulated_stream(spec.items, spec.ones, spec.flip_prob, spec.horizon, seed)?;
            let log = run_noncontextual(&cfg, &mut stream, &mut Rng::new(learner_seed))?;
            Ok(log.avg_regret_series())
        }
        RunnerKind::FullInfo => {
            let mut stream =
                simulated_stream(spec.items, spec.ones, spec.flip_prob, spec.horizon, seed)?;
            let log = run_full_information(
                spec.horizon,
                spec.items,
                1,
                spec.measure,
                None,
                &mut stream,
                &mut Rng::new(learner_seed),
            )?;
            Ok(log.avg_regret_series())
        }
        RunnerKind::Surrogate(surrogate) => {
            let (records, dim) = records.expect("contextual scenario prepares records");
            let cfg = ContextualConfig::with_schedules(
                *surrogate,
                spec.items,
                *dim,
                spec.radius,
                spec.gamma_scale,
                spec.eta_scale,
                10.0,
            )?;
            let log = run_contextual(&cfg, records, spec.horizon, &mut Rng::new(learner_seed))?;
            Ok(log.rows.iter().map(|r| r.avg_ndcg10).collect())
        }
        RunnerKind::ListNet => {
            let (records, dim) = records.expect("contextual scenario prepares records");
            let log = run_listnet_baseline(
                records,
                spec.horizon,
                *dim,
                spec.radius,
                0.01,
                &mut Rng::new(learner_seed),
            )?;
            Ok(log.rows.iter().map(|r| r.avg_ndcg10).collect())
        }
        RunnerKind::Random => {
            let (records, _) = records.expect("contextual scenario prepares records");
            let log = run_random_baseline(
                records,
                spec.horizon,
                SurrogateId::Squared,
                &mut Rng::new(learner_seed),
            )?;
            Ok(log.rows.iter().map(|r| r.avg_ndcg10).collect())
        }
    }
}

/// Linear interpolation quantile of an unsorted sample.
fn quantile(values: &mut [f64], q: f64) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).expect("metrics are finite"));
    let pos = q * (values.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    values[lo] + (values[hi] - values[lo]) * (pos - lo as f64)
}

/// Aggregates equal-length per-seed series into median and quartile curves.
/// Order-insensitive in the seeds.
pub fn aggregate_series(per_seed: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let rounds = per_seed.first().map_or(0, Vec::len);
    let mut median = Vec::with_capacity(rounds);
    let mut q25 = Vec::with_capacity(rounds);
    let mut q75 = Vec::with_capacity(rounds);
    for t in 0..rounds {
        let mut column: Vec<f64> = per_seed.iter().map(|s| s[t]).collect();
        q25.push(quantile(&mut column, 0.25));
        median.push(quantile(&mut column, 0.5));
        q75.push(quantile(&mut column, 0.75));
    }
    (median, q25, q75)
}

fn curve_csv(median: &[f64], q25: &[f64], q75: &[f64]) -> String {
    let mut out = String::from("round,median,q25,q75\n");
    for t in 0..median.len() {
        writeln!(out, "{},{},{},{}", t + 1, median[t], q25[t], q75[t])
            .expect("string write cannot fail");
    }
    out
}

fn plot_script(labels: &[String], metric: &str) -> String {
    let list = labels
        .iter()
        .map(|l| format!("\"{l}\""))
        .collect::<Vec<_>>()
        .join(", ");
    format!(
        r#"#!/usr/bin/env python3
"""Renders the aggregated curves next to this script into curves.png."""
import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = Path(__file__).resolve().parent
LABELS = [{list}]

for label in LABELS:
    rounds, median, q25, q75 = [], [], [], []
    with open(HERE / f"{{label}}.csv") as fh:
        for row in csv.DictReader(fh):
            rounds.append(int(row["round"]))
            median.append(float(row["median"]))
            q25.append(float(row["q25"]))
            q75.append(float(row["q75"]))
    plt.plot(rounds, median, label=label)
    plt.fill_between(rounds, q25, q75, alpha=0.2)

plt.xlabel("round")
plt.ylabel("{metric}")
plt.legend()
plt.tight_layout()
plt.savefig(HERE / "curves.png", dpi=150)
print(f"wrote {{HERE / 'curves.png'}}")
"#
    )
}

/// Runs every grid point for every seed, writes one aggregated CSV per grid
/// point (`<label>.csv`), a `summary.csv` and a `plot.py` under the
/// experiment's output directory. Grid points fail independently; the
/// report records each failure and `all_succeeded` reflects the whole grid.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    if spec.seeds.is_empty() {
        return Err(Error::Config("seed list must not be empty".to_string()));
    }
    let points = grid_points(spec)?;
    let records = if spec.scenario == Scenario::Contextual {
        Some(contextual_records(spec)?)
    } else {
        None
    };
    let metric_name = if spec.scenario == Scenario::Contextual {
        "avg_ndcg10"
    } else {
        "avg_regret"
    };

    // One task per (grid point, seed); results keyed so scheduling order
    // cannot matter.
    let tasks: Vec<(usize, u64)> = points
        .iter()
        .enumerate()
        .flat_map(|(p, _)| spec.seeds.iter().map(move |&s| (p, s)))
        .collect();
    let results: Vec<(usize, u64, Result<Vec<f64>>)> = tasks
        .par_iter()
        .map(|&(p, seed)| {
            let res = run_one(spec, records.as_ref(), &points[p].kind, seed);
            (p, seed, res)
        })
        .collect();

    std::fs::create_dir_all(&spec.out_dir)?;
    let mut outcomes = Vec::with_capacity(points.len());
    for (p, point) in points.iter().enumerate() {
        let mut per_seed: Vec<(u64, Vec<f64>)> = Vec::new();
        let mut error = None;
        for (_, seed, res) in results.iter().filter(|(i, _, _)| *i == p) {
            match res {
                Ok(series) => per_seed.push((*seed, series.clone())),
                Err(e) => error = Some(e.to_string()),
            }
        }
        per_seed.sort_by_key(|(seed, _)| *seed);
        let outcome = if let Some(msg) = error {
            GridOutcome {
                label: point.label.clone(),
                median: Vec::new(),
                q25: Vec::new(),
                q75: Vec::new(),
                error: Some(msg),
            }
        } else {
            let series: Vec<Vec<f64>> = per_seed.into_iter().map(|(_, s)| s).collect();
            let (median, q25, q75) = aggregate_series(&series);
            std::fs::write(
                spec.out_dir.join(format!("{}.csv", point.label)),
                curve_csv(&median, &q25, &q75),
            )?;
            GridOutcome {
                label: point.label.clone(),
                median,
                q25,
                q75,
                error: None,
            }
        };
        outcomes.push(outcome);
    }

    let labels: Vec<String> = outcomes
        .iter()
        .filter(|o| o.error.is_none())
        .map(|o| o.label.clone())
        .collect();
    std::fs::write(spec.out_dir.join("plot.py"), plot_script(&labels, metric_name))?;

    let mut summary = String::from("label,status,final_median\n");
    for o in &outcomes {
        match &o.error {
            None => {
                writeln!(summary, "{},ok,{}", o.label, o.final_median())
                    .expect("string write cannot fail")
            }
            Some(e) => writeln!(summary, "{},error: {},", o.label, e.replace(',', ";"))
                .expect("string write cannot fail"),
        }
    }
    std::fs::write(spec.out_dir.join("summary.csv"), summary)?;

    Ok(ExperimentReport {
        outcomes,
        metric_name,
    })
}

/// Least-squares slope of `ln(value)` against `ln(round)` over the rows with
/// `round >= from_round`. `values[t]` is the metric at round `t + 1`; values
/// are floored at 1e-12 before taking logs.
pub fn log_log_slope(values: &[f64], from_round: usize) -> f64 {
    let points: Vec<(f64, f64)> = values
        .iter()
        .enumerate()
        .filter(|(t, _)| t + 1 >= from_round)
        .map(|(t, &v)| (((t + 1) as f64).ln(), v.max(1e-12).ln()))
        .collect();
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let cov: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let var: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    cov / var
}

/// Per-curve summary used by the comparison report.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSummary {
    pub label: String,
    pub final_median: f64,
    /// Log-log slope of the median cumulative metric over the last 80% of
    /// rounds.
    pub tail_slope: f64,
}

/// Reads aggregated curve CSVs (as written by [`run_experiment`]) and
/// summarizes each: final median and tail slope of the cumulative metric.
pub fn compare_report(files: &[PathBuf]) -> Result<Vec<CurveSummary>> {
    let mut out = Vec::with_capacity(files.len());
    for path in files {
        let text = std::fs::read_to_string(path)?;
        let mut lines = text.lines();
        let header = lines.next().unwrap_or("");
        if header != "round,median,q25,q75" {
            return Err(Error::Schema(format!(
                "{}: expected header 'round,median,q25,q75', found '{header}'",
                path.display()
            )));
        }
        let mut medians = Vec::new();
        for (i, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(Error::Schema(format!(
                    "{}: row {} has {} fields",
                    path.display(),
                    i + 2,
                    fields.len()
                )));
            }
            let median: f64 = fields[1].parse().map_err(|_| Error::Parse {
                line: i + 2,
                msg: format!("bad median '{}'", fields[1]),
            })?;
            medians.push(median);
        }
        if medians.is_empty() {
            return Err(Error::Schema(format!("{}: no data rows", path.display())));
        }
        // Cumulative metric = per-round average times the round index.
        let cumulative: Vec<f64> = medians
            .iter()
            .enumerate()
            .map(|(t, &v)| v * (t + 1) as f64)
            .collect();
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        out.push(CurveSummary {
            label,
            final_median: *medians.last().expect("nonempty"),
            tail_slope: log_log_slope(&cumulative, medians.len() / 5),
        });
    }
    Ok(out)
}

/// Serializes curve summaries as CSV.
pub fn summaries_to_csv(summaries: &[CurveSummary]) -> String {
    let mut out = String::from("label,final_median,tail_slope\n");
    for s in summaries {
        writeln!(out, "{},{},{}", s.label, s.final_median, s.tail_slope)
            .expect("string write cannot fail");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::Path;

    fn tiny_spec(dir: &Path) -> ExperimentSpec {
        let mut spec = ExperimentSpec::new(Scenario::BlockSize, dir.to_path_buf(), vec![1, 2, 3]);
        spec.items = 5;
        spec.horizon = 300;
        spec.ones = 2;
        spec.block_counts = vec![5, 20];
        spec
    }

    fn temp_dir(name: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("toprank_exp_{name}"));
        std::fs::remove_dir_all(&dir).ok();
        dir
    }

    #[test]
    fn empty_seed_list_is_a_config_error() {
        let spec = ExperimentSpec::new(Scenario::BlockSize, temp_dir("noseeds"), vec![]);
        assert!(matches!(run_experiment(&spec), Err(Error::Config(_))));
    }

    #[test]
    fn reruns_write_byte_identical_aggregates() {
        let dir = temp_dir("rerun");
        let spec = tiny_spec(&dir);
        run_experiment(&spec).unwrap();
        let first = std::fs::read_to_string(dir.join("K5.csv")).unwrap();
        run_experiment(&spec).unwrap();
        let second = std::fs::read_to_string(dir.join("K5.csv")).unwrap();
        assert_eq!(first, second);
        assert!(dir.join("plot.py").exists());
        assert!(dir.join("summary.csv").exists());
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn aggregation_is_seed_order_invariant() {
        let dir_a = temp_dir("order_a");
        let dir_b = temp_dir("order_b");
        let mut spec_a = tiny_spec(&dir_a);
        spec_a.seeds = vec![1, 2, 3];
        let mut spec_b = tiny_spec(&dir_b);
        spec_b.seeds = vec![3, 1, 2];
        run_experiment(&spec_a).unwrap();
        run_experiment(&spec_b).unwrap();
        for label in ["K5", "K20"] {
            let a = std::fs::read_to_string(dir_a.join(format!("{label}.csv"))).unwrap();
            let b = std::fs::read_to_string(dir_b.join(format!("{label}.csv"))).unwrap();
            assert_eq!(a, b);
        }
        std::fs::remove_dir_all(&dir_a).ok();
        std::fs::remove_dir_all(&dir_b).ok();
    }

    #[test]
    fn failing_grid_points_do_not_abort_the_rest() {
        let dir = temp_dir("partial");
        let mut spec = tiny_spec(&dir);
        // Block count 300 forces block size 1 < ceil(5/1) exploration rounds.
        spec.block_counts = vec![5, 300];
        let report = run_experiment(&spec).unwrap();
        assert!(!report.all_succeeded());
        assert!(report.outcome("K5").unwrap().error.is_none());
        assert!(report.outcome("K300").unwrap().error.is_some());
        assert!(dir.join("K5.csv").exists());
        assert!(!dir.join("K300.csv").exists());
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn contextual_scenario_produces_all_curves() {
        let dir = temp_dir("ctx");
        let mut spec = ExperimentSpec::new(Scenario::Contextual, dir.clone(), vec![1, 2]);
        spec.items = 5;
        spec.dim = 3;
        spec.queries = 20;
        spec.horizon = 200;
        spec.radius = 5.0;
        spec.surrogates = vec![SurrogateId::Squared];
        let report = run_experiment(&spec).unwrap();
        assert!(report.all_succeeded());
        for label in ["squared", "listnet", "random"] {
            assert!(report.outcome(label).is_some(), "missing {label}");
            assert!(dir.join(format!("{label}.csv")).exists());
        }
        assert_eq!(report.metric_name, "avg_ndcg10");
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn comparison_summaries_are_stable_and_schema_checked() {
        let dir = temp_dir("cmp");
        let spec = tiny_spec(&dir);
        run_experiment(&spec).unwrap();
        let files = vec![dir.join("K5.csv"), dir.join("K20.csv")];
        let a = compare_report(&files).unwrap();
        let b = compare_report(&files).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 2);
        assert_eq!(a[0].label, "K5");
        let csv = summaries_to_csv(&a);
        assert!(csv.starts_with("label,final_median,tail_slope\n"));

        let bad = dir.join("bad.csv");
        std::fs::write(&bad, "round,median\n1,0.5\n").unwrap();
        assert!(matches!(
            compare_report(&[bad]),
            Err(Error::Schema(_))
        ));
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn slope_of_a_power_law_is_its_exponent() {
        let values: Vec<f64> = (1..=2000).map(|t| 3.0 * (t as f64).powf(0.66)).collect();
        let slope = log_log_slope(&values, 200);
        assert!((slope - 0.66).abs() < 1e-6);
    }
}
