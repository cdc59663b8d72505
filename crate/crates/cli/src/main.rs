//! `toprank`: simulators and analyzers for online learning to rank from
//! top-k feedback.
//!
//! Verbs:
//! - `observability`: build the finite-game matrices for a measure and test
//!   global/local observability numerically.
//! - `noncontextual`: one blocked run (or the full-information baseline)
//!   against a corrupted-relevance stream, logged to CSV.
//! - `contextual`: one surrogate-gradient run on query-document data (real
//!   or synthetic), with optional full-information and random baselines.
//! - `experiment`: multi-seed curve grids with median/quartile aggregation
//!   and a generated plot script.
//! - `adversary demo-impossibility`: print the indistinguishable-pair
//!   construction.
//! - `compare`: summarize aggregated curve CSVs.
//!
//! Every run with the same seed produces byte-identical CSV output. Each
//! subcommand accepts `--config <file>` with flat `key=value` lines naming
//! the same long options; explicit flags win.

mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::Overlay;
use toprank::adversary::{indistinguishability_report, simulated_stream};
use toprank::contextual::{
    run_contextual, run_listnet_baseline, run_random_baseline, ContextualConfig,
};
use toprank::datasets;
use toprank::experiment::{
    compare_report, run_experiment, summaries_to_csv, ExperimentSpec, Scenario,
};
use toprank::noncontextual::{run_full_information, run_noncontextual, plan_blocks, BlockConfig};
use toprank::partial_monitoring::{
    build_game, dump_matrices_csv, global_observability, local_observability, neighbor_pairs,
};
use toprank::surrogates::DEFAULT_SMOOTHING;
use toprank::{MeasureId, Result, Rng, SurrogateId};

#[derive(Parser)]
#[command(
    name = "toprank",
    version,
    about = "Online learning to rank from top-k feedback"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build game matrices and test global/local observability.
    Observability(ObservabilityArgs),
    /// Run the blocked fixed-item-set learner against a corrupted stream.
    Noncontextual(NoncontextualArgs),
    /// Run the contextual surrogate-gradient learner on ranking data.
    Contextual(ContextualArgs),
    /// Run a multi-seed experiment grid and aggregate the curves.
    Experiment(ExperimentArgs),
    /// Adversary constructions.
    Adversary(AdversaryArgs),
    /// Summarize aggregated curve CSVs (final medians and tail slopes).
    Compare(CompareArgs),
}

#[derive(Args)]
struct ObservabilityArgs {
    /// Ranking measure (sumloss, pairwiseloss, dcg, ndcg, precision@N, ap, auc).
    #[arg(long)]
    measure: Option<MeasureId>,
    /// Item count.
    #[arg(long)]
    m: Option<usize>,
    /// Largest relevance grade.
    #[arg(long)]
    n: Option<u8>,
    /// Write loss.csv and feedback.csv in the reference table layout here.
    #[arg(long = "dump-matrices")]
    dump_matrices: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct NoncontextualArgs {
    #[arg(long)]
    measure: Option<MeasureId>,
    #[arg(long)]
    m: Option<usize>,
    /// Time horizon.
    #[arg(long = "T")]
    horizon: Option<usize>,
    /// Feedback depth.
    #[arg(long)]
    k: Option<usize>,
    /// Block count; defaults to the planned value.
    #[arg(long = "K")]
    blocks: Option<usize>,
    /// Perturbation scale; defaults to the planned value.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Per-coordinate corruption probability of the relevance stream.
    #[arg(long = "flip-prob")]
    flip_prob: Option<f64>,
    /// Relevant items in the true relevance vector.
    #[arg(long)]
    ones: Option<usize>,
    /// Run the full-information baseline instead of the blocked learner.
    #[arg(long = "full-info", default_value_t = false)]
    full_info: bool,
    /// Output CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ContextualArgs {
    /// Surrogate: squared, ranksvm, kl or smoothdcg.
    #[arg(long)]
    surrogate: Option<SurrogateId>,
    /// Ranking data file (SVMlight style); omitted = synthesize.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long = "T")]
    horizon: Option<usize>,
    /// Weight-ball radius.
    #[arg(long = "U")]
    radius: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated baselines to run alongside: listnet,random.
    #[arg(long)]
    baselines: Option<String>,
    /// Documents per query (lists are truncated/padded to this).
    #[arg(long)]
    m: Option<usize>,
    /// Feature dimension (synthetic data).
    #[arg(long)]
    d: Option<usize>,
    /// Synthetic query count.
    #[arg(long)]
    queries: Option<usize>,
    /// Synthetic label noise.
    #[arg(long)]
    noise: Option<f64>,
    /// Synthetic data seed.
    #[arg(long = "data-seed")]
    data_seed: Option<u64>,
    /// Largest grade expected in loaded data.
    #[arg(long = "max-grade")]
    max_grade: Option<u8>,
    /// Exploration scale (gamma_t = gamma / t^(1/3)).
    #[arg(long)]
    gamma: Option<f64>,
    /// Learning-rate scale (eta_t = eta / t^(2/3)).
    #[arg(long)]
    eta: Option<f64>,
    /// Propensity rescale on mismatch rounds (1 disables).
    #[arg(long)]
    boost: Option<f64>,
    /// Smoothing width for smoothdcg.
    #[arg(long)]
    smoothing: Option<f64>,
    /// Output CSV path; baselines go to <stem>.<baseline>.csv.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// block-size, feedback, full-info or contextual.
    #[arg(long)]
    scenario: Option<Scenario>,
    /// Output directory.
    #[arg(long = "out-dir")]
    out_dir: Option<PathBuf>,
    /// Number of seeds (0, 1, ..., seeds-1 offset by base-seed).
    #[arg(long)]
    seeds: Option<usize>,
    #[arg(long = "base-seed")]
    base_seed: Option<u64>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long = "T")]
    horizon: Option<usize>,
    #[arg(long)]
    measure: Option<MeasureId>,
    #[arg(long)]
    ones: Option<usize>,
    #[arg(long = "flip-prob")]
    flip_prob: Option<f64>,
    /// Comma-separated block counts (block-size scenario).
    #[arg(long = "K-list")]
    block_counts: Option<String>,
    /// Comma-separated feedback depths (feedback scenario).
    #[arg(long = "k-list")]
    depths: Option<String>,
    /// Reference block count (feedback and full-info scenarios).
    #[arg(long = "K")]
    reference_blocks: Option<usize>,
    /// Comma-separated surrogates (contextual scenario).
    #[arg(long)]
    surrogates: Option<String>,
    #[arg(long)]
    queries: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long = "U")]
    radius: Option<f64>,
    #[arg(long = "data-seed")]
    data_seed: Option<u64>,
    /// Ranking data file for the contextual scenario.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Exploration scale for the contextual scenario.
    #[arg(long)]
    gamma: Option<f64>,
    /// Learning-rate scale for the contextual scenario.
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct AdversaryArgs {
    #[command(subcommand)]
    command: AdversaryCommand,
}

#[derive(Subcommand)]
enum AdversaryCommand {
    /// Print the indistinguishable distribution pair and its rankings.
    DemoImpossibility,
    /// Print a few rounds of the corrupted relevance stream.
    Stream(StreamArgs),
}

#[derive(Args)]
struct StreamArgs {
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    ones: Option<usize>,
    #[arg(long = "flip-prob")]
    flip_prob: Option<f64>,
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// Aggregated curve CSVs (as written by `experiment`).
    files: Vec<PathBuf>,
    /// Write the summary CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Observability(args) => cmd_observability(args),
        Command::Noncontextual(args) => cmd_noncontextual(args),
        Command::Contextual(args) => cmd_contextual(args),
        Command::Experiment(args) => cmd_experiment(args),
        Command::Adversary(args) => cmd_adversary(args),
        Command::Compare(args) => cmd_compare(args),
    }
}

fn cmd_observability(args: ObservabilityArgs) -> Result<ExitCode> {
    let overlay = Overlay::load(args.config.as_deref())?;
    let measure: MeasureId = overlay.require(args.measure, "measure")?;
    let m: usize = overlay.resolve(args.m, "m", 3)?;
    let n: u8 = overlay.resolve(args.n, "n", 1)?;

    let game = build_game(measure, m, n)?;
    println!(
        "game: measure={measure} m={m} n={n} ({} actions x {} outcomes)",
        game.num_actions(),
        game.num_outcomes()
    );
    let global = global_observability(&game);
    println!(
        "global observability: {} (worst relative residual {:.3e}{})",
        if global.holds { "holds" } else { "fails" },
        global.max_residual,
        global
            .worst_pair
            .map(|(i, j)| format!(" at action pair ({}, {})", i + 1, j + 1))
            .unwrap_or_default()
    );
    match neighbor_pairs(&game) {
        Ok(pairs) => {
            let mut worst = 0.0f64;
            let mut failing = 0usize;
            for &pair in &pairs {
                let out = local_observability(&game, pair, &[pair.0, pair.1])?;
                if !out.holds {
                    failing += 1;
                }
                worst = worst.max(out.max_residual);
            }
            println!(
                "local observability over {} adjacent-transposition pairs \
                 (neighborhood = the pair itself): {} failing, worst residual {:.3e}",
                pairs.len(),
                failing,
                worst
            );
        }
        Err(e) => println!("local observability: skipped ({e})"),
    }
    if let Some(dir) = overlay.optional(args.dump_matrices, "dump-matrices")? {
        dump_matrices_csv(&game, &dir)?;
        println!("matrices written to {}", dir.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_noncontextual(args: NoncontextualArgs) -> Result<ExitCode> {
    let overlay = Overlay::load(args.config.as_deref())?;
    let measure: MeasureId = overlay.resolve(args.measure, "measure", MeasureId::Dcg)?;
    let m: usize = overlay.resolve(args.m, "m", 20)?;
    let horizon: usize = overlay.resolve(args.horizon, "T", 10_000)?;
    let k: usize = overlay.resolve(args.k, "k", 1)?;
    let seed: u64 = overlay.resolve(args.seed, "seed", 0)?;
    let flip_prob: f64 = overlay.resolve(args.flip_prob, "flip-prob", 0.1)?;
    let ones: usize = overlay.resolve(args.ones, "ones", 5)?;
    let out: PathBuf = overlay.require(args.out, "out")?;
    let full_info = args.full_info || overlay.resolve(None, "full-info", false)?;

    let mut stream = simulated_stream(m, ones, flip_prob, horizon, seed)?;
    let mut rng = Rng::new(seed.wrapping_add(0x9E37_79B9_7F4A_7C15));
    let log = if full_info {
        let epsilon = overlay.optional(args.epsilon, "epsilon")?;
        run_full_information(horizon, m, 1, measure, epsilon, &mut stream, &mut rng)?
    } else {
        let planned = plan_blocks(horizon, m, k, 1, measure)?;
        let blocks: usize = overlay.resolve(args.blocks, "K", planned.num_blocks)?;
        let epsilon: f64 = overlay.resolve(args.epsilon, "epsilon", planned.epsilon)?;
        let cfg = BlockConfig::new(horizon, blocks, k, m, 1, epsilon, measure)?;
        run_noncontextual(&cfg, &mut stream, &mut rng)?
    };
    log.write_csv(&out)?;
    println!(
        "{} rounds under {measure}; final average regret {:.6}; log written to {}",
        horizon,
        log.final_avg_regret(),
        out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn parse_baselines(raw: &str) -> Result<(bool, bool)> {
    let mut listnet = false;
    let mut random = false;
    for tok in raw.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        match tok {
            "listnet" => listnet = true,
            "random" => random = true,
            other => {
                return Err(toprank::Error::Config(format!(
                    "unknown baseline '{other}' (expected listnet, random)"
                )))
            }
        }
    }
    Ok((listnet, random))
}

fn cmd_contextual(args: ContextualArgs) -> Result<ExitCode> {
    let overlay = Overlay::load(args.config.as_deref())?;
    let mut surrogate: SurrogateId = overlay.require(args.surrogate, "surrogate")?;
    if let SurrogateId::SmoothDcg { .. } = surrogate {
        let smoothing: f64 = overlay.resolve(args.smoothing, "smoothing", DEFAULT_SMOOTHING)?;
        surrogate = SurrogateId::SmoothDcg { smoothing };
    }
    let horizon: usize = overlay.resolve(args.horizon, "T", 20_000)?;
    let radius: f64 = overlay.resolve(args.radius, "U", 10.0)?;
    let seed: u64 = overlay.resolve(args.seed, "seed", 0)?;
    let m: usize = overlay.resolve(args.m, "m", 20)?;
    let dim_flag = overlay.optional(args.d, "d")?;
    let queries: usize = overlay.resolve(args.queries, "queries", 500)?;
    let noise: f64 = overlay.resolve(args.noise, "noise", 0.1)?;
    let data_seed: u64 = overlay.resolve(args.data_seed, "data-seed", 0)?;
    let max_grade: u8 = overlay.resolve(args.max_grade, "max-grade", 4)?;
    let gamma: f64 = overlay.resolve(args.gamma, "gamma", 0.1)?;
    let eta: f64 = overlay.resolve(args.eta, "eta", 0.01)?;
    let boost: f64 = overlay.resolve(args.boost, "boost", 10.0)?;
    let out: PathBuf = overlay.require(args.out, "out")?;
    let baselines: String = overlay.resolve(args.baselines, "baselines", String::new())?;
    let (run_listnet, run_random) = parse_baselines(&baselines)?;
    let data: Option<PathBuf> = overlay.optional(args.data, "data")?;

    let dataset = match &data {
        Some(path) => datasets::load_svmlight_ranking(path, max_grade)?,
        None => {
            datasets::synthesize_contextual(
                queries,
                m,
                dim_flag.unwrap_or(10),
                noise,
                data_seed,
            )?
            .0
        }
    };
    let dim = dataset.dim;
    println!(
        "data: {} queries, dimension {dim}, max feature row norm {:.4}",
        dataset.records.len(),
        dataset.feature_radius()
    );
    let records: Vec<_> = dataset
        .records
        .iter()
        .map(|r| datasets::truncate_or_pad(r, m))
        .collect::<Result<_>>()?;

    let cfg = ContextualConfig::with_schedules(surrogate, m, dim, radius, gamma, eta, boost)?;
    let mut rng = Rng::new(seed);
    let log = run_contextual(&cfg, &records, horizon, &mut rng)?;
    log.write_csv(&out)?;
    println!(
        "{surrogate}: final average truncated NDCG {:.4} ({} boosted rounds); log written to {}",
        log.final_avg_ndcg10(),
        log.boosted_rounds(),
        out.display()
    );

    let sibling = |tag: &str| -> PathBuf {
        let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned());
        let name = match (&stem, out.extension()) {
            (Some(stem), Some(ext)) => format!("{stem}.{tag}.{}", ext.to_string_lossy()),
            _ => format!("{tag}.csv"),
        };
        out.with_file_name(name)
    };
    if run_listnet {
        let mut rng = Rng::new(seed.wrapping_add(1));
        let log = run_listnet_baseline(&records, horizon, dim, radius, 0.01, &mut rng)?;
        let path = sibling("listnet");
        log.write_csv(&path)?;
        println!(
            "listnet baseline: final average truncated NDCG {:.4}; log written to {}",
            log.final_avg_ndcg10(),
            path.display()
        );
    }
    if run_random {
        let mut rng = Rng::new(seed.wrapping_add(2));
        let log = run_random_baseline(&records, horizon, surrogate, &mut rng)?;
        let path = sibling("random");
        log.write_csv(&path)?;
        println!(
            "random baseline: final average truncated NDCG {:.4}; log written to {}",
            log.final_avg_ndcg10(),
            path.display()
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_list<T: std::str::FromStr>(raw: &str, what: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    raw.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse()
                .map_err(|e| toprank::Error::Config(format!("bad {what} entry '{t}': {e}")))
        })
        .collect()
}

fn cmd_experiment(args: ExperimentArgs) -> Result<ExitCode> {
    let overlay = Overlay::load(args.config.as_deref())?;
    let scenario: Scenario = overlay.require(args.scenario, "scenario")?;
    let out_dir: PathBuf = overlay.require(args.out_dir, "out-dir")?;
    let num_seeds: usize = overlay.resolve(args.seeds, "seeds", 20)?;
    let base_seed: u64 = overlay.resolve(args.base_seed, "base-seed", 0)?;
    let seeds: Vec<u64> = (0..num_seeds as u64).map(|i| base_seed + i).collect();

    let mut spec = ExperimentSpec::new(scenario, out_dir.clone(), seeds);
    spec.items = overlay.resolve(args.m, "m", spec.items)?;
    spec.horizon = overlay.resolve(args.horizon, "T", spec.horizon)?;
    spec.measure = overlay.resolve(args.measure, "measure", spec.measure)?;
    spec.ones = overlay.resolve(args.ones, "ones", spec.ones)?;
    spec.flip_prob = overlay.resolve(args.flip_prob, "flip-prob", spec.flip_prob)?;
    spec.reference_blocks = overlay.resolve(args.reference_blocks, "K", spec.reference_blocks)?;
    if let Some(raw) = overlay.optional(args.block_counts, "K-list")? {
        spec.block_counts = parse_list(&raw, "block count")?;
    }
    if let Some(raw) = overlay.optional(args.depths, "k-list")? {
        spec.depths = parse_list(&raw, "feedback depth")?;
    }
    if let Some(raw) = overlay.optional(args.surrogates, "surrogates")? {
        spec.surrogates = parse_list(&raw, "surrogate")?;
    }
    spec.queries = overlay.resolve(args.queries, "queries", spec.queries)?;
    spec.dim = overlay.resolve(args.d, "d", spec.dim)?;
    spec.noise = overlay.resolve(args.noise, "noise", spec.noise)?;
    spec.radius = overlay.resolve(args.radius, "U", spec.radius)?;
    spec.data_seed = overlay.resolve(args.data_seed, "data-seed", spec.data_seed)?;
    spec.data_path = overlay.optional(args.data, "data")?;
    spec.gamma_scale = overlay.resolve(args.gamma, "gamma", spec.gamma_scale)?;
    spec.eta_scale = overlay.resolve(args.eta, "eta", spec.eta_scale)?;

    let report = run_experiment(&spec)?;
    for outcome in &report.outcomes {
        match &outcome.error {
            None => println!(
                "{}: final median {} = {:.6}",
                outcome.label,
                report.metric_name,
                outcome.final_median()
            ),
            Some(e) => println!("{}: FAILED ({e})", outcome.label),
        }
    }
    println!("artifacts in {}", out_dir.display());
    if report.all_succeeded() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::FAILURE)
    }
}

fn cmd_adversary(args: AdversaryArgs) -> Result<ExitCode> {
    match args.command {
        AdversaryCommand::DemoImpossibility => {
            println!("{}", indistinguishability_report());
            Ok(ExitCode::SUCCESS)
        }
        AdversaryCommand::Stream(s) => {
            let overlay = Overlay::load(s.config.as_deref())?;
            let m: usize = overlay.resolve(s.m, "m", 20)?;
            let ones: usize = overlay.resolve(s.ones, "ones", 5)?;
            let flip: f64 = overlay.resolve(s.flip_prob, "flip-prob", 0.1)?;
            let rounds: usize = overlay.resolve(s.rounds, "rounds", 10)?;
            let seed: u64 = overlay.resolve(s.seed, "seed", 0)?;
            let stream = simulated_stream(m, ones, flip, rounds, seed)?;
            for (t, rel) in stream.enumerate() {
                let bits: String = rel.grades().iter().map(|g| g.to_string()).collect();
                println!("{} {}", t + 1, bits);
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn cmd_compare(args: CompareArgs) -> Result<ExitCode> {
    if args.files.is_empty() {
        return Err(toprank::Error::Config(
            "compare needs at least one curve CSV".to_string(),
        ));
    }
    let summaries = compare_report(&args.files)?;
    let csv = summaries_to_csv(&summaries);
    match args.out {
        Some(path) => std::fs::write(path, csv)?,
        None => print!("{csv}"),
    }
    Ok(ExitCode::SUCCESS)
}
