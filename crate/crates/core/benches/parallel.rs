//! Sequential vs parallel timings for the three dominant inner loops:
//! exact enumeration over a hash family, Monte Carlo deviation sampling
//! over Haar unitaries, and an end-to-end bound sweep.
//!
//! Build with the default `parallel` feature to get both variants;
//! `--no-default-features` benches the sequential path only.

use criterion::{criterion_group, criterion_main, Criterion};

use padec_core::decouple::{deviation_trace_norm_sample, ChannelEnsemble};
use padec_core::exec;
use padec_core::hashfam::{random_cq_operator, CqDraw, CqState, HashFamily};
use padec_core::qops::{random_density, SeededRng};
use padec_core::verify::{lhs_term, verify_sweep_cq, SweepSettings};

fn bench_hash_enumeration(c: &mut Criterion) {
    let fam = HashFamily::affine(4, 2).unwrap();
    let mut rng = SeededRng::new(1);
    let eta = random_cq_operator(16, 2, CqDraw::State, &mut rng);

    let mut group = c.benchmark_group("hash_enumeration_256");
    group.bench_function("sequential", |b| {
        b.iter(|| {
            let terms: Vec<f64> = exec::map_indexed_seq(fam.len(), |h| {
                fam.weight(h) * eta.hash_deviation_two_norm(&fam, h).unwrap()
            });
            exec::compensated_sum(&terms)
        })
    });
    #[cfg(feature = "parallel")]
    group.bench_function("parallel", |b| {
        b.iter(|| {
            let terms: Vec<f64> = exec::map_indexed_par(fam.len(), |h| {
                fam.weight(h) * eta.hash_deviation_two_norm(&fam, h).unwrap()
            });
            exec::compensated_sum(&terms)
        })
    });
    group.finish();
}

fn bench_haar_sampling(c: &mut Criterion) {
    let ens = ChannelEnsemble::haar(2, 2).unwrap();
    let mut rng = SeededRng::new(2);
    let rho = random_density(8, 8, &mut rng).unwrap();
    let base = SeededRng::new(3);
    let samples = 256usize;

    let mut group = c.benchmark_group("haar_trace_norm_256");
    group.bench_function("sequential", |b| {
        b.iter(|| {
            let values: Vec<f64> = exec::map_indexed_seq(samples, |s| {
                let mut srng = base.fold_in(s as u64);
                deviation_trace_norm_sample(&ens, rho.mat(), 2, &mut srng).unwrap()
            });
            exec::mean_stderr(&values)
        })
    });
    #[cfg(feature = "parallel")]
    group.bench_function("parallel", |b| {
        b.iter(|| {
            let values: Vec<f64> = exec::map_indexed_par(samples, |s| {
                let mut srng = base.fold_in(s as u64);
                deviation_trace_norm_sample(&ens, rho.mat(), 2, &mut srng).unwrap()
            });
            exec::mean_stderr(&values)
        })
    });
    group.finish();
}

fn bench_full_sweep(c: &mut Criterion) {
    let mut rng = SeededRng::new(4);
    let state = CqState::random(16, 3, &mut rng);
    let fam = HashFamily::affine(4, 2).unwrap();
    let alphas: Vec<f64> = (1..=10).map(|k| 1.0 + 0.1 * k as f64).collect();
    let settings = SweepSettings::marginal(4, "bench-cq(16,3)");

    let mut group = c.benchmark_group("bound_sweep_cq");
    group.sample_size(20);
    group.bench_function("end_to_end", |b| {
        b.iter(|| verify_sweep_cq(&state, &fam, &alphas, &settings).unwrap())
    });
    group.bench_function("lhs_terms_sequential", |b| {
        b.iter(|| {
            let terms: Vec<f64> = exec::map_indexed_seq(fam.len(), |h| {
                fam.weight(h) * lhs_term(&fam, h, &state).unwrap()
            });
            exec::compensated_sum(&terms)
        })
    });
    #[cfg(feature = "parallel")]
    group.bench_function("lhs_terms_parallel", |b| {
        b.iter(|| {
            let terms: Vec<f64> = exec::map_indexed_par(fam.len(), |h| {
                fam.weight(h) * lhs_term(&fam, h, &state).unwrap()
            });
            exec::compensated_sum(&terms)
        })
    });
    group.finish();
}

criterion_group!(benches, bench_hash_enumeration, bench_haar_sampling, bench_full_sweep);
criterion_main!(benches);
