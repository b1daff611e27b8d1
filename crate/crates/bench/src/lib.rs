//! Criterion benchmarks for the group arithmetic, the protocols and the
//! sweep harness. Run with `cargo bench -p privote-bench`.

use std::hint::black_box;

use criterion::{BenchmarkId, Criterion};
use privote_core::bsv::{self, Ballot, Registry};
use privote_core::experiments::{self, TrialConfig, TrialMode};
use privote_core::simnet::{self, ElectionConfig, Protocol};
use privote_core::{DlogTable, GroupParams, VoterId};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub fn benchmarks(c: &mut Criterion) {
    group_ops(c);
    elections(c);
    blind_signatures(c);
    trials(c);
}

fn group_ops(c: &mut Criterion) {
    let params = GroupParams::default_256();
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let x = params.random_exponent(&mut rng);
    let gen = params.generator();
    c.bench_function("modexp/256", |b| b.iter(|| params.exp(black_box(&gen), &x)));

    let mut g = c.benchmark_group("dlog");
    for bound in [100u64, 1000] {
        let target = params.exp_u64(&gen, bound);
        let table = DlogTable::new(&params, bound);
        g.bench_with_input(BenchmarkId::new("scan", bound), &target, |b, t| {
            b.iter(|| params.discrete_log_bounded(t, bound).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("table", bound), &target, |b, t| {
            b.iter(|| table.lookup(t).unwrap())
        });
    }
    g.finish();
}

fn elections(c: &mut Criterion) {
    let params = GroupParams::default_256();
    let mut g = c.benchmark_group("election");
    g.sample_size(20);
    for n in [10usize, 50] {
        let hev = ElectionConfig::new(Protocol::Hev, n, params.clone(), 7);
        g.bench_with_input(BenchmarkId::new("hev", n), &hev, |b, cfg| {
            b.iter(|| simnet::run_election(cfg).unwrap())
        });
        let mut hevs = ElectionConfig::new(Protocol::Hevs, n, params.clone(), 7);
        hevs.k = 6;
        g.bench_with_input(BenchmarkId::new("hevs-k6", n), &hevs, |b, cfg| {
            b.iter(|| simnet::run_election(cfg).unwrap())
        });
    }
    g.finish();
}

fn blind_signatures(c: &mut Criterion) {
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let keys = bsv::signer_keygen(&mut rng, 1024).unwrap();
    let public = keys.public().clone();
    c.bench_function("bsv/blind-sign-unblind/1024", |b| {
        b.iter(|| {
            let mut registry = Registry::new(VoterId::range(1));
            let mut ballot = Ballot::new("yes", &mut rng).unwrap();
            let state = bsv::blind(&ballot, &public, &mut rng);
            let signed = bsv::sign_blinded(&keys, &state.blinded, VoterId(1), &mut registry).unwrap();
            ballot.signature = Some(bsv::unblind(&signed, &state, &public));
            public.verify(&ballot)
        })
    });
}

fn trials(c: &mut Criterion) {
    let mut g = c.benchmark_group("trial");
    let mut symbolic = TrialConfig::new(200, 0.1, 16);
    symbolic.mode = TrialMode::Symbolic;
    g.bench_function("symbolic/n200-k16", |b| {
        let mut seed = 0;
        b.iter(|| {
            seed += 1;
            experiments::run_trial(&symbolic, seed)
        })
    });
    let mut full = TrialConfig::new(20, 0.1, 4);
    full.mode = TrialMode::Full;
    g.sample_size(20);
    g.bench_function("full/n20-k4", |b| {
        let mut seed = 0;
        b.iter(|| {
            seed += 1;
            experiments::run_trial(&full, seed)
        })
    });
    g.finish();
}
