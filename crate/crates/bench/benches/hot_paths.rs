//! Benchmarks for the per-round hot paths: sorting-based action selection,
//! measure evaluation, gradient estimation, and game construction.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use toprank_bench::{query_stream, random_features, random_relevance, random_scores};

use toprank::contextual::{act, update, ContextualConfig, RankerState};
use toprank::measures;
use toprank::noncontextual::ftpl_step;
use toprank::partial_monitoring::{build_game, global_observability};
use toprank::surrogates::{estimate_gradient, Propensities, SurrogateId};
use toprank::types::{argsort_desc, TopKFeedback};
use toprank::{MeasureId, Rng};

fn bench_sorting(c: &mut Criterion) {
    let mut rng = Rng::new(1);
    let scores = random_scores(20, &mut rng);
    c.bench_function("argsort_desc_m20", |b| {
        b.iter(|| argsort_desc(black_box(&scores), &mut rng))
    });

    let s_hat: Vec<f64> = (0..20).map(|i| i as f64 * 0.3).collect();
    c.bench_function("ftpl_step_m20", |b| {
        b.iter(|| ftpl_step(black_box(&s_hat), 0.05, &mut rng))
    });
}

fn bench_measures(c: &mut Criterion) {
    let mut rng = Rng::new(2);
    let rel = random_relevance(20, &mut rng);
    let perm = argsort_desc(&random_scores(20, &mut rng), &mut rng);
    c.bench_function("ndcg_m20", |b| {
        b.iter(|| measures::ndcg(black_box(&perm), black_box(&rel)))
    });
    c.bench_function("sum_loss_m20", |b| {
        b.iter(|| measures::sum_loss(black_box(&perm), black_box(&rel)))
    });
}

fn bench_estimators(c: &mut Criterion) {
    let mut rng = Rng::new(3);
    let m = 20;
    let d = 10;
    let features = random_features(m, d, &mut rng);
    let scores = random_scores(m, &mut rng);
    let rel = random_relevance(m, &mut rng);
    let sorted = argsort_desc(&scores, &mut rng);
    let pr = Propensities::new(0.1, m, sorted.item_at_rank(0), Some(sorted.item_at_rank(1)))
        .unwrap();
    for id in [
        SurrogateId::Squared,
        SurrogateId::Kl,
        SurrogateId::RankSvm,
        SurrogateId::SmoothDcg { smoothing: 0.01 },
    ] {
        let k = id.required_feedback().unwrap();
        let fb = TopKFeedback::observe(sorted.clone(), &rel, k).unwrap();
        c.bench_function(&format!("estimate_gradient_{id}_m20_d10"), |b| {
            b.iter(|| estimate_gradient(id, &scores, black_box(&fb), &pr, &features).unwrap())
        });
    }
}

fn bench_contextual_round(c: &mut Criterion) {
    let records = query_stream(10, 20, 10);
    let cfg = ContextualConfig::new(SurrogateId::Kl, 20, 10, 10.0).unwrap();
    let mut rng = Rng::new(4);
    c.bench_function("contextual_round_m20_d10", |b| {
        let mut state = RankerState::new(10);
        b.iter(|| {
            let record = &records[state.round % records.len()];
            let outcome = act(&state, &record.features, cfg.gamma_at(state.round), &mut rng)
                .unwrap();
            let fb =
                TopKFeedback::observe(outcome.shown_perm.clone(), &record.relevance, 1).unwrap();
            let step = update(&state, &record.features, &outcome, &fb, &cfg).unwrap();
            state = step.state;
        })
    });
}

fn bench_game_construction(c: &mut Criterion) {
    c.bench_function("build_game_sumloss_m4", |b| {
        b.iter(|| build_game(MeasureId::SumLoss, 4, 1).unwrap())
    });
    let game = build_game(MeasureId::SumLoss, 4, 1).unwrap();
    c.bench_function("global_observability_m4", |b| {
        b.iter(|| global_observability(black_box(&game)))
    });
}

criterion_group!(
    benches,
    bench_sorting,
    bench_measures,
    bench_estimators,
    bench_contextual_round,
    bench_game_construction
);
criterion_main!(benches);
