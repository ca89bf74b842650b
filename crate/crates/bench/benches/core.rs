use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

use mazegp::gp::EnvSpec;
use mazegp::gp::{evaluate_population, init_population};
use mazegp::liblearn::mine_abstractions;
use mazegp::liblearn::MinerLimits;
use mazegp::{evaluate, parse_program, Grammar};

const LISTING: &str = "(if_action (eq-obj? (get $1 1 0) goal-obj) left-action forward-action)";

fn bench_evaluate(c: &mut Criterion) {
    let g = Grammar::base();
    let p = parse_program(LISTING, &g).unwrap();
    let d = EnvSpec::default().pool().unwrap().episodes;
    let obs: Vec<_> = d[0].pairs.iter().map(|(o, _)| *o).take(256).collect();
    c.bench_function("evaluate_listing_256_obs", |b| {
        b.iter(|| {
            for o in &obs {
                black_box(evaluate(&g, &p, o));
            }
        })
    });
}

fn bench_fitness(c: &mut Criterion) {
    let g = Grammar::base();
    let env = EnvSpec::default();
    let pool = env.pool().unwrap();
    let d = mazegp::env::slice_dataset(&pool.episodes, 3, 50, 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let pop = init_population(&g, 1000, 6, &mut rng).unwrap();
    c.bench_function("fitness_population_1000_len3", |b| {
        b.iter_batched(
            || pop.clone(),
            |pop| black_box(evaluate_population(&g, pop, &d, 0.025, None)),
            BatchSize::LargeInput,
        )
    });
}

fn bench_mining(c: &mut Criterion) {
    let g = Grammar::base();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let corpus = init_population(&g, 200, 6, &mut rng).unwrap();
    let mut group = c.benchmark_group("mining");
    group.sample_size(10);
    group.bench_function("mine_200_random_programs", |b| {
        b.iter(|| black_box(mine_abstractions(&corpus, &g, MinerLimits::default())))
    });
    group.finish();
}

criterion_group!(benches, bench_evaluate, bench_fitness, bench_mining);
criterion_main!(benches);
