//! Compares the data-parallel entry points against their sequential
//! fallbacks on the two hot paths: building a vote matrix and summarizing a
//! sweep of posteriors. With `--no-default-features` the default entry
//! points compile to the sequential code and the two curves coincide.

use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cbound::margins::{posterior_sweep_summaries, posterior_sweep_summaries_sequential};
use cbound::voters::{build_stumps, vote_matrix, vote_matrix_sequential};
use cbound::{Dataset, Example, Posterior};

const ROWS: usize = 2000;
const FEATURES: usize = 16;
const STUMPS_PER_ATTRIBUTE: usize = 10;
const SWEEP_POSTERIORS: usize = 64;

fn synthetic_dataset() -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let examples = (0..ROWS)
        .map(|i| {
            let label: i8 = if i % 2 == 0 { 1 } else { -1 };
            let shift = 0.5 * f64::from(label);
            let features = (0..FEATURES)
                .map(|_| shift + rng.gen_range(-1.0..=1.0))
                .collect();
            Example::new(features, label).unwrap()
        })
        .collect();
    Dataset::new("bench", examples).unwrap()
}

fn random_posteriors(count: usize, voters: usize) -> Vec<Posterior> {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    (0..count)
        .map(|_| {
            let raw: Vec<f64> = (0..voters).map(|_| rng.gen_range(0.01..1.0)).collect();
            let total: f64 = raw.iter().sum();
            Posterior::new(raw.iter().map(|w| w / total).collect()).unwrap()
        })
        .collect()
}

fn bench_vote_matrix(c: &mut Criterion) {
    let data = synthetic_dataset();
    let voters = build_stumps(&data, STUMPS_PER_ATTRIBUTE).unwrap().voters;

    let mut group = c.benchmark_group("vote_matrix");
    group
        .warm_up_time(Duration::from_secs(1))
        .measurement_time(Duration::from_secs(3))
        .sample_size(20);
    group.bench_function("parallel", |b| {
        b.iter(|| vote_matrix(black_box(&voters), black_box(&data)).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| vote_matrix_sequential(black_box(&voters), black_box(&data)).unwrap())
    });
    group.finish();
}

fn bench_posterior_sweep(c: &mut Criterion) {
    let data = synthetic_dataset();
    let voters = build_stumps(&data, STUMPS_PER_ATTRIBUTE).unwrap().voters;
    let votes = vote_matrix(&voters, &data).unwrap();
    let posteriors = random_posteriors(SWEEP_POSTERIORS, 2 * voters.half_count());

    let mut group = c.benchmark_group("posterior_sweep");
    group
        .warm_up_time(Duration::from_secs(1))
        .measurement_time(Duration::from_secs(4))
        .sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| posterior_sweep_summaries(black_box(&votes), black_box(&posteriors)).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| {
            posterior_sweep_summaries_sequential(black_box(&votes), black_box(&posteriors)).unwrap()
        })
    });
    group.finish();
}

criterion_group!(benches, bench_vote_matrix, bench_posterior_sweep);
criterion_main!(benches);
