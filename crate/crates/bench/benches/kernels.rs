//! Criterion benchmarks for the hot kernels: eigensolvers, Metropolis
//! sweeps, powder averaging and the Cole-Cole evaluation.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use spinclock_core::cluster::{build_cluster_hamiltonian, ClusterModel, ClusterTopology};
use spinclock_core::latticemc::IsingLattice;
use spinclock_core::linalg::{hermitian_eigen, symmetric_eigenvalues, CMatrix, RMatrix};
use spinclock_core::orientation::{averaged_observable, AveragedObservable, OrientationScheme};
use spinclock_core::relaxation::{cole_cole_eval, ColeColeParams};
use spinclock_core::spincore::{build_hamiltonian, FieldVector, SpinSystem};
use spinclock_core::thermo::TemperatureGrid;
use spinclock_core::units::cm1_to_kelvin;

fn random_hermitian(n: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h = CMatrix::zeros(n, n);
    for i in 0..n {
        h[(i, i)] = num_complex::Complex64::new(rng.gen_range(-2.0..2.0), 0.0);
        for j in (i + 1)..n {
            let z = num_complex::Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    h
}

fn bench_eigensolvers(c: &mut Criterion) {
    let mut group = c.benchmark_group("eigen");
    for &n in &[3usize, 8, 32] {
        let h = random_hermitian(n, n as u64);
        group.bench_with_input(BenchmarkId::new("hermitian_jacobi", n), &h, |b, h| {
            b.iter(|| hermitian_eigen(black_box(h)).unwrap())
        });
    }
    for &n in &[81usize, 243] {
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        let mut a = RMatrix::zeros(n, n);
        for i in 0..n {
            a[(i, i)] = rng.gen_range(-2.0..2.0);
            for j in (i + 1)..n {
                let x = rng.gen_range(-1.0..1.0);
                a[(i, j)] = x;
                a[(j, i)] = x;
            }
        }
        group.bench_with_input(BenchmarkId::new("symmetric_householder_ql", n), &a, |b, a| {
            b.iter(|| symmetric_eigenvalues(black_box(a.clone())).unwrap())
        });
    }
    group.finish();
}

fn bench_hamiltonians(c: &mut Criterion) {
    let sys = SpinSystem::new(1.0, cm1_to_kelvin(-2.96), cm1_to_kelvin(0.06), [2.16; 3]).unwrap();
    let field = FieldVector::new(0.3, 0.2, 0.7).unwrap();
    c.bench_function("build_hamiltonian_s1", |b| {
        b.iter(|| build_hamiltonian(black_box(&sys), black_box(&field)).unwrap())
    });

    let site = SpinSystem::new(1.0, cm1_to_kelvin(-100.0), cm1_to_kelvin(1.45), [2.2; 3]).unwrap();
    let model =
        ClusterModel::six_plus_one(site, -0.0504, ClusterTopology::StarRing, FieldVector::ZERO)
            .unwrap();
    c.bench_function("build_cluster_hamiltonian_2187", |b| {
        b.iter(|| build_cluster_hamiltonian(black_box(&model)).unwrap())
    });
}

fn bench_metropolis(c: &mut Criterion) {
    let mut lattice = IsingLattice::fcc12(10, cm1_to_kelvin(-0.035), 1.5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    c.bench_function("metropolis_sweep_fcc12_L10", |b| {
        b.iter(|| lattice.metropolis_sweep(black_box(0.25), &mut rng))
    });
}

fn bench_powder_average(c: &mut Criterion) {
    let sys = SpinSystem::new(1.0, cm1_to_kelvin(-2.96), cm1_to_kelvin(0.06), [2.16; 3]).unwrap();
    let grid = TemperatureGrid::log(0.3, 6.0, 50).unwrap();
    c.bench_function("powder_heatcap_350pts", |b| {
        b.iter(|| {
            averaged_observable(
                black_box(&sys),
                &OrientationScheme::Powder { n: 350 },
                AveragedObservable::SpecificHeat,
                &grid,
                &FieldVector::along_z(1.0),
            )
            .unwrap()
        })
    });
}

fn bench_cole_cole(c: &mut Criterion) {
    let p = ColeColeParams::new(1.0, 0.2, 1e-4, 0.97).unwrap();
    c.bench_function("cole_cole_eval", |b| {
        b.iter(|| cole_cole_eval(black_box(&p), black_box(6.2832e3)))
    });
}

criterion_group!(
    benches,
    bench_eigensolvers,
    bench_hamiltonians,
    bench_metropolis,
    bench_powder_average,
    bench_cole_cole
);
criterion_main!(benches);
