use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mflab::bbgky::{collision_apply, projector, tensor_power};
use mflab::effective::{gaussian_packet, lowest_orbitals, HartreeFock, WaveSolver};
use mflab::manybody::{propagate, HamiltonianSpec, ManyBodyState, PropagationOptions};
use mflab::numerics::to_modes;
use mflab::scattering::{solve_zero_energy, DEFAULT_MESH};
use mflab::semiclassics::{tf_minimize, TfOptions};
use mflab::{Grid, ModeModel, PotentialSpec};

fn scattering(c: &mut Criterion) {
    let v = PotentialSpec::gaussian(3.0, 0.5);
    c.bench_function("zero_energy_solve", |b| b.iter(|| solve_zero_energy(black_box(&v), 5.0, DEFAULT_MESH).unwrap()));
}

fn split_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("hartree_split_step");
    for points in [64, 256, 1024] {
        let g = Grid::new(1, 10.0, points).unwrap();
        let s = WaveSolver::hartree(&g, &PotentialSpec::harmonic(0.5), &PotentialSpec::gaussian(3.0, 1.0)).unwrap();
        let phi = gaussian_packet(&g, [0.5, 0.0, 0.0], 1.0, [1.0, 0.0, 0.0]);
        group.bench_with_input(BenchmarkId::from_parameter(points), &phi, |b, phi| {
            b.iter(|| {
                let mut psi = phi.clone();
                s.step(&mut psi, 1e-3).unwrap();
                psi
            })
        });
    }
    group.finish();
}

fn krylov_propagation(c: &mut Criterion) {
    let mut group = c.benchmark_group("exact_propagation");
    group.sample_size(10);
    let g = Grid::new(1, 8.0, 8).unwrap();
    let c0 = to_modes(&g, &gaussian_packet(&g, [0.5, 0.0, 0.0], 1.2, [0.8, 0.0, 0.0]));
    let norm = c0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let c0: Vec<_> = c0.iter().map(|z| z / norm).collect();
    let spec = HamiltonianSpec::mean_field(PotentialSpec::gaussian(5.0, 1.0));
    for n in [2, 4, 6] {
        let psi = ManyBodyState::product(&g, &c0, n).unwrap();
        let h = spec.assemble(&g, &psi.fock.basis).unwrap();
        let opts = PropagationOptions { dt: 0.05, ..Default::default() };
        group.bench_with_input(BenchmarkId::from_parameter(n), &psi, |b, psi| b.iter(|| propagate(psi, &h, 0.1, 1.0, opts).unwrap()));
    }
    group.finish();
}

fn hartree_fock_step(c: &mut Criterion) {
    let g = Grid::new(1, 8.0, 32).unwrap();
    let n = 4;
    let eps = (n as f64).powf(-1.0 / 3.0);
    let model = ModeModel::from_grid(&g, eps, &PotentialSpec::harmonic(1.0), &PotentialSpec::gaussian(2.0, 0.7)).unwrap();
    let orb = lowest_orbitals(&model.one_body, n).unwrap();
    let omega = &orb * orb.adjoint();
    let hf = HartreeFock::new(&model, n, eps).unwrap();
    c.bench_function("hartree_fock_step_32", |b| {
        b.iter(|| {
            let mut iters = 0;
            hf.step(black_box(&omega), 1e-2, &mut iters).unwrap()
        })
    });
}

fn thomas_fermi(c: &mut Criterion) {
    let g = Grid::new(1, 8.0, 128).unwrap();
    let (trap, v) = (PotentialSpec::harmonic(1.0), PotentialSpec::gaussian(1.0, 0.5));
    c.bench_function("tf_minimize_128", |b| b.iter(|| tf_minimize(&g, &trap, &v, &TfOptions::default()).unwrap()));
}

fn collision(c: &mut Criterion) {
    let g = Grid::new(1, 6.0, 6).unwrap();
    let model = ModeModel::from_grid(&g, 1.0, &PotentialSpec::zero(), &PotentialSpec::gaussian(2.0, 0.8)).unwrap();
    let phi = to_modes(&g, &gaussian_packet(&g, [0.0; 3], 1.0, [0.0; 3]));
    let mut group = c.benchmark_group("collision_apply");
    for k in [1, 2] {
        let gamma = tensor_power(&projector(&phi), k + 1);
        group.bench_with_input(BenchmarkId::from_parameter(k), &gamma, |b, gamma| b.iter(|| collision_apply(gamma, &model.pair, k).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, scattering, split_step, krylov_propagation, hartree_fock_step, thomas_fermi, collision);
criterion_main!(benches);
