//! Parallel against sequential execution of independent games: random
//! playouts and short MCTS games, the two workloads a league is made of.

use std::hint::black_box;

use carcassonne_lab::controller::ControllerSpec;
use carcassonne_lab::par::{map_ordered, map_sequential};
use carcassonne_lab::tournament::play_game;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn games(c: &mut Criterion) {
    let random: ControllerSpec = "random".parse().unwrap();
    let mcts: ControllerSpec = "mcts:sims=20".parse().unwrap();
    let mut group = c.benchmark_group("games");
    group.sample_size(10);
    for (label, a, b, n) in [("random", &random, &random, 32u64), ("mcts20", &mcts, &random, 4)] {
        let seeds: Vec<u64> = (0..n).collect();
        group.bench_with_input(BenchmarkId::new("sequential", label), &seeds, |bench, seeds| {
            bench.iter(|| map_sequential(seeds.clone(), |s| black_box(play_game(a, b, s).unwrap().scores)))
        });
        group.bench_with_input(BenchmarkId::new("parallel", label), &seeds, |bench, seeds| {
            bench.iter(|| map_ordered(seeds.clone(), None, |s| black_box(play_game(a, b, s).unwrap().scores)))
        });
    }
    group.finish();
}

criterion_group!(benches, games);
criterion_main!(benches);
