use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use flg_core::classes::class_set;
use flg_core::client_eq::favoring_profile;
use flg_core::game::{Instance, Permutation, Placement};
use flg_core::instances::{random_instance, random_placement, RandomSpec};
use flg_core::spe::find_spe;

fn sample(n: usize, k: usize, seed: u64) -> (Instance, Placement) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = RandomSpec { n, k, density: 0.3, weighted: false, restricted: false };
    let inst = random_instance(&spec, &mut rng).unwrap();
    let s = random_placement(&inst, &mut rng);
    (inst, s)
}

fn classes(c: &mut Criterion) {
    let mut g = c.benchmark_group("class_set");
    for n in [10, 20, 40] {
        let (inst, s) = sample(n, 4, 1);
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| b.iter(|| class_set(black_box(&inst), &s)));
    }
    g.finish();
}

fn favoring(c: &mut Criterion) {
    let mut g = c.benchmark_group("favoring_profile");
    for n in [10, 20, 40] {
        let (inst, s) = sample(n, 4, 2);
        let pi = Permutation::identity(4);
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| favoring_profile(black_box(&inst), &s, &pi))
        });
    }
    g.finish();
}

fn dynamics(c: &mut Criterion) {
    let mut g = c.benchmark_group("find_spe");
    g.sample_size(20);
    for n in [6, 8, 10] {
        let (inst, _) = sample(n, 3, 3);
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| b.iter(|| find_spe(black_box(&inst))));
    }
    g.finish();
}

criterion_group!(benches, classes, favoring, dynamics);
criterion_main!(benches);
