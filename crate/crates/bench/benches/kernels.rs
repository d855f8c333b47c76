use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use loopeq::area::{area, underbar_area};
use loopeq::engine::{build_truncated, neumann_solve, BuildMode, Caps, NormParams, SolveMode, SolveSettings};
use loopeq::oracle::{exact_u1_phi, mc_wilson_expectation, sample_haar_unitary, McRun};
use loopeq::ops::loop_operations;
use loopeq::string::random_string;
use loopeq::texp::{check_lemma_bounds, exp_trunc_dd, regime_tuples, CheckMode, ParameterSet};
use loopeq::{EdgePos, Lattice, LatticeString, PlaquetteSet, PosCount, Triple};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

fn strings(lat: &Lattice, n: usize, seed: u64) -> Vec<LatticeString> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| random_string(lat, &mut rng, 12, 2)).collect()
}

fn string_ops(c: &mut Criterion) {
    let lat = Lattice::new(3, 3).unwrap();
    let ss = strings(&lat, 64, 1);
    c.bench_function("canonical_key_64_strings", |b| {
        b.iter(|| ss.iter().map(|s| s.key().len()).sum::<usize>())
    });
    let k = PosCount::constant(lat.n_plaquettes(), 2);
    let triples: Vec<Triple> = ss
        .iter()
        .filter(|s| !s.is_null())
        .map(|s| Triple { s: s.clone(), k: k.clone(), q: PlaquetteSet::new() })
        .collect();
    c.bench_function("loop_operations_first_edge", |b| {
        b.iter(|| {
            triples
                .iter()
                .map(|t| loop_operations(&lat, t, EdgePos { loop_idx: 0, offset: 0 }).unwrap().len())
                .sum::<usize>()
        })
    });
}

fn areas(c: &mut Criterion) {
    let lat = Lattice::new(3, 3).unwrap();
    let ss = strings(&lat, 32, 2);
    c.bench_function("area_3d_32_strings", |b| {
        b.iter(|| ss.iter().map(|s| area(&lat, s, 40).finite().unwrap_or(0)).sum::<u64>())
    });
    let plane = Lattice::new(3, 2).unwrap();
    let ps = strings(&plane, 32, 3);
    c.bench_function("underbar_area_2d_32_strings", |b| {
        b.iter(|| ps.iter().map(|s| underbar_area(&plane, s, 40).finite().unwrap_or(0)).sum::<u64>())
    });
}

fn engine(c: &mut Criterion) {
    let lat = Lattice::new(2, 2).unwrap();
    let l = lat.rectangular_loop(&[0, 0], (0, 1), 1, 1).unwrap();
    c.bench_function("build_truncated_b2", |b| {
        b.iter(|| build_truncated(&lat, &l, 2, &Caps::default(), BuildMode::Exact).unwrap().len())
    });
    let sp = build_truncated(&lat, &l, 2, &Caps::default(), BuildMode::Exact).unwrap();
    let bd = sp.boundary_from(|t| Ok(Complex64::new(exact_u1_phi(&lat, &t.s, &t.k, 0.1)?, 0.0))).unwrap();
    let cfg = SolveSettings {
        params: ParameterSet { d: 2, n: 1, beta: 0.1, b: 2 },
        norm: NormParams { lambda: 1.0, gamma: 1.0, rho: 1.0 },
        mode: SolveMode::Empirical,
        tol: 1e-14,
        max_iter: 100,
    };
    c.bench_function("neumann_solve_b2", |b| b.iter(|| neumann_solve(&sp, &bd, &cfg).unwrap().iterations));
    c.bench_function("exact_u1_phi_states_b2", |b| {
        b.iter(|| sp.tabulate(|t| Ok(Complex64::new(exact_u1_phi(&lat, &t.s, &t.k, 0.1)?, 0.0))).unwrap().len())
    });
}

fn monte_carlo(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    c.bench_function("haar_u3", |b| b.iter(|| black_box(sample_haar_unitary(3, &mut rng))));
    let lat = Lattice::new(1, 2).unwrap();
    let s = LatticeString::single(lat.rectangular_loop(&[0, 0], (0, 1), 1, 1).unwrap());
    let mut g = c.benchmark_group("mc");
    g.sample_size(10);
    g.bench_function("wilson_n2_10k_samples", |b| {
        b.iter_batched(
            || McRun { samples: 10_000, seed: 1 },
            |run| mc_wilson_expectation(&lat, &s, 2, 0.1, run).unwrap(),
            BatchSize::SmallInput,
        )
    });
    g.finish();
}

fn truncated_exp(c: &mut Criterion) {
    c.bench_function("exp_trunc_dd_k200", |b| b.iter(|| exp_trunc_dd(black_box(200), black_box(3.7))));
    let p = regime_tuples()[0];
    c.bench_function("regime_grid_100", |b| b.iter(|| check_lemma_bounds(&p, 100, CheckMode::Regime, 1).passed()));
}

criterion_group!(benches, string_ops, areas, engine, monte_carlo, truncated_exp);
criterion_main!(benches);
