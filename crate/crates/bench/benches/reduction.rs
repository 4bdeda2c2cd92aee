//! Lattice-core benchmarks: exact LLL on embedding-style lattices, HNF,
//! and the recovery step they feed.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use num_bigint::BigUint;

use regevlab::lattice::{hnf, lll_reduce, lll_reduce_with, LllOptions, DEFAULT_DELTA};
use regevlab::numtheory::{gen_instance, InstanceKind, OracleBudget};
use regevlab::postprocess::{assemble_embedding_lattice, extract_relations, PostprocessParams};
use regevlab::simulate::{build_relation_lattice, run_batch, NoiseModel, SimParams};

fn embedding_fixture(
    bits: u64,
    d: usize,
    m: usize,
    c: f64,
    seed: u64,
) -> (
    regevlab::LatticeBasis,
    regevlab::EvalContext,
    PostprocessParams,
) {
    let budget = OracleBudget::default();
    let inst = gen_instance(InstanceKind::SyntheticCyclic, bits, d, seed, &budget).unwrap();
    let lat = build_relation_lattice(&inst, None).unwrap();
    let params = SimParams::new(bits, d, 0, c, NoiseModel::UniformBall);
    let batch = run_batch(&lat, &params, m, 0, 0, seed);
    let pp = PostprocessParams::for_grid(d, m, params.log2_grid);
    let embedding = assemble_embedding_lattice(&batch, d, &pp.scale()).unwrap();
    (embedding, lat.eval_context(), pp)
}

fn bench_lll(c: &mut Criterion) {
    let mut group = c.benchmark_group("lll");
    for (bits, d, m) in [(16u64, 4usize, 8usize), (36, 6, 10), (64, 8, 12)] {
        let (embedding, _, _) = embedding_fixture(bits, d, m, 4.0, 7);
        group.bench_function(format!("exact_dim{}", d + m), |b| {
            b.iter_batched(
                || embedding.clone(),
                |basis| lll_reduce(&basis, DEFAULT_DELTA).unwrap(),
                BatchSize::SmallInput,
            )
        });
        group.bench_function(format!("prepass_dim{}", d + m), |b| {
            b.iter_batched(
                || embedding.clone(),
                |basis| {
                    lll_reduce_with(
                        &basis,
                        &LllOptions {
                            delta: DEFAULT_DELTA,
                            float_prepass: true,
                        },
                    )
                    .unwrap()
                },
                BatchSize::SmallInput,
            )
        });
    }
    group.finish();
}

fn bench_recovery(c: &mut Criterion) {
    let (embedding, ctx, pp) = embedding_fixture(64, 8, 12, 4.0, 7);
    c.bench_function("extract_relations_dim20", |b| {
        b.iter(|| extract_relations(&embedding, &ctx, &pp).unwrap())
    });
}

fn bench_hnf(c: &mut Criterion) {
    let budget = OracleBudget::default();
    let inst = gen_instance(InstanceKind::SyntheticCyclic, 64, 10, 3, &budget).unwrap();
    let lat = build_relation_lattice(&inst, None).unwrap();
    let reduced = lll_reduce(&lat.basis, DEFAULT_DELTA).unwrap();
    c.bench_function("hnf_dim10_64bit", |b| {
        b.iter(|| hnf(reduced.matrix()).unwrap())
    });
    let _ = BigUint::from(1u32);
}

criterion_group!(benches, bench_lll, bench_recovery, bench_hnf);
criterion_main!(benches);
