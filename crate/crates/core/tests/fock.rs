use std::sync::Arc;

use mflab::fock::*;
use mflab::numerics::linalg::{op_norm, CMat};
use mflab::C64;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rand_vec(rng: &mut ChaCha8Rng, m: usize, scale: f64) -> Vec<C64> {
    (0..m).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale).collect()
}

fn inner(f: &[C64], g: &[C64]) -> C64 {
    f.iter().zip(g).map(|(a, b)| a.conj() * b).sum()
}

fn rand_state(rng: &mut ChaCha8Rng, b: &Arc<FockBasis>) -> FockVector {
    let mut v = rand_vec(rng, b.len(), 1.0);
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= n);
    FockVector::new(b.clone(), v).unwrap()
}

#[test]
fn vacuum_is_annihilated() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for b in [FockBasis::bosons(3, 4).unwrap(), FockBasis::fermions(4).unwrap()] {
        let b = Arc::new(b);
        let f = rand_vec(&mut rng, b.modes(), 1.0);
        let out = annihilate(&f, &FockVector::vacuum(&b).unwrap()).unwrap();
        assert_eq!(out.norm(), 0.0);
    }
}

#[test]
fn fermionic_double_creation_vanishes() {
    let b = Arc::new(FockBasis::fermions(4).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let psi = rand_state(&mut rng, &b);
    let e1 = [C64::new(1.0, 0.0), C64::default(), C64::default(), C64::default()];
    let twice = create(&e1, &create(&e1, &psi).unwrap()).unwrap();
    assert_eq!(twice.norm(), 0.0);
}

#[test]
fn ladder_operators_are_adjoint() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for b in [FockBasis::bosons(3, 5).unwrap(), FockBasis::fermions(4).unwrap()] {
        let b = Arc::new(b);
        let f = rand_vec(&mut rng, b.modes(), 1.0);
        let (phi, psi) = (rand_state(&mut rng, &b), rand_state(&mut rng, &b));
        let lhs = phi.inner(&create(&f, &psi).unwrap());
        let rhs = annihilate(&f, &phi).unwrap().inner(&psi);
        assert!((lhs - rhs).norm() < 1e-14);
    }
}

#[test]
fn canonical_relations() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let fb = FockBasis::fermions(4).unwrap();
    let bb = FockBasis::bosons(3, 6).unwrap();
    for _ in 0..5 {
        let (f, g) = (rand_vec(&mut rng, 4, 1.0), rand_vec(&mut rng, 4, 1.0));
        assert!(car_residual(&f, &g, &fb).unwrap() < 1e-12);
        let (f, g) = (rand_vec(&mut rng, 3, 1.0), rand_vec(&mut rng, 3, 1.0));
        assert!(ccr_residual(&f, &g, &bb).unwrap() < 1e-12);
    }
}

#[test]
fn ccr_defect_lives_on_the_truncation_shell() {
    let b = FockBasis::bosons(3, 6).unwrap();
    let f = [C64::new(1.0, 0.0), C64::new(0.5, 0.5), C64::new(0.0, -1.0)];
    let d = ccr_defect_full(&f, &f, &b).unwrap();
    assert!(op_norm(&d) > 1.0);
    for i in 0..b.len() {
        for j in 0..b.len() {
            if d[(i, j)].norm() > 1e-12 {
                assert!(b.is_boundary(i) && b.is_boundary(j));
            }
        }
    }
}

#[test]
fn coherent_state_is_poisson_and_an_eigenvector() {
    let b = Arc::new(FockBasis::bosons(2, 30).unwrap());
    let f = [C64::new(0.8, 0.6), C64::new(-0.7, 0.4)];
    let mean: f64 = f.iter().map(|z| z.norm_sqr()).sum();
    assert!(mean <= 2.0);
    let w = coherent_state(&b, &f).unwrap();
    assert!((w.norm() - 1.0).abs() < 1e-10);
    let p = w.number_distribution();
    let mut poisson = (-mean).exp();
    for (n, pn) in p.iter().enumerate() {
        if n > 0 {
            poisson *= mean / n as f64;
        }
        assert!((pn - poisson).abs() < 1e-10, "n = {n}");
    }
    assert!((w.number_moments().0 - mean).abs() < 1e-8);

    let g = [C64::new(0.3, -0.2), C64::new(1.1, 0.5)];
    let lhs = annihilate(&g, &w).unwrap();
    let ev = inner(&g, &f);
    let dev: f64 = lhs.amp.iter().zip(&w.amp).map(|(a, b)| (a - ev * b).norm_sqr()).sum::<f64>().sqrt();
    assert!(dev < 1e-8, "deviation {dev}");

    let back = weyl_apply(&f.map(|z| -z), &w).unwrap();
    let vac = FockVector::vacuum(&b).unwrap();
    assert!((back.inner(&vac).norm() - 1.0).abs() < 1e-10);
}

#[test]
fn weyl_of_zero_is_identity_and_unitary() {
    let b = Arc::new(FockBasis::bosons(2, 30).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut psi = FockVector::vacuum(&b).unwrap();
    for i in 0..b.len() {
        if b.total(i) <= 4 {
            psi.amp[i] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    let n = psi.norm();
    psi.amp.iter_mut().for_each(|z| *z /= n);
    let same = weyl_apply(&[C64::default(); 2], &psi).unwrap();
    assert_eq!(same.amp, psi.amp);
    let f = [C64::new(0.5, 0.1), C64::new(0.2, -0.6)];
    let there = weyl_apply(&f, &psi).unwrap();
    let back = weyl_apply(&f.map(|z| -z), &there).unwrap();
    let err: f64 = back.amp.iter().zip(&psi.amp).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    assert!(err < 1e-10);
}

#[test]
fn weyl_refuses_on_leakage() {
    let b = Arc::new(FockBasis::bosons(1, 6).unwrap());
    let r = coherent_state(&b, &[C64::new(2.0, 0.0)]);
    assert!(matches!(r, Err(mflab::Error::Truncation { .. })));
}

#[test]
fn bogoliubov_action_on_ladder_operators() {
    let b = FockBasis::bosons(2, 12).unwrap();
    let k = CMat::from_row_slice(2, 2, &[C64::new(0.1, 0.02), C64::new(0.05, -0.03), C64::new(0.05, -0.03), C64::new(-0.08, 0.04)])
        * C64::new(0.25, 0.0);
    let t = mflab::numerics::linalg::expm(&bogoliubov_generator(&b, &k).unwrap().to_dense());
    let (ch, sh) = cosh_sinh(&k);
    let f = [C64::new(0.7, -0.2), C64::new(0.3, 0.6)];
    let chf: Vec<C64> = (0..2).map(|i| (0..2).map(|j| ch[(i, j)] * f[j]).sum()).collect();
    let shf: Vec<C64> = (0..2).map(|i| (0..2).map(|j| sh[(i, j)] * f[j].conj()).sum()).collect();
    let lhs = t.adjoint() * annihilation_operator(&b, &f).unwrap().to_dense() * &t;
    let rhs = annihilation_operator(&b, &chf).unwrap().to_dense() + creation_operator(&b, &shf).unwrap().to_dense();
    // pair creation from these columns reaches the N_max = 12 shell only at order |k|^5
    let keep: Vec<usize> = (0..b.len()).filter(|&i| b.total(i) <= 2).collect();
    let mut worst: f64 = 0.0;
    for &j in &keep {
        for i in 0..b.len() {
            worst = worst.max((lhs[(i, j)] - rhs[(i, j)]).norm());
        }
    }
    assert!(worst < 1e-8, "worst deviation {worst}");
}

#[test]
fn squeezed_vacuum_number_is_sinh_norm() {
    let b = Arc::new(FockBasis::bosons(2, 40).unwrap());
    let k = CMat::from_row_slice(2, 2, &[C64::new(0.3, 0.0), C64::new(0.1, 0.1), C64::new(0.1, 0.1), C64::new(0.2, -0.1)]);
    let t = bogoliubov_apply(&k, &FockVector::vacuum(&b).unwrap()).unwrap();
    let (_, sh) = cosh_sinh(&k);
    assert!((t.number_moments().0 - sh.norm_squared()).abs() < 1e-9);
    let zero = bogoliubov_apply(&CMat::zeros(2, 2), &t).unwrap();
    assert_eq!(zero.amp, t.amp);
}

fn first_quantized_one_body(j: &CMat, b: &FockBasis) -> CMat {
    // symmetric two-particle sector via explicit symmetrized tensors
    let m = j.nrows();
    let one = CMat::identity(m, m);
    let big = mflab::numerics::linalg::kron(j, &one) + mflab::numerics::linalg::kron(&one, j);
    let vecs: Vec<nalgebra::DVector<C64>> = b
        .states()
        .iter()
        .map(|occ| {
            let modes: Vec<usize> = (0..m).flat_map(|i| std::iter::repeat_n(i, occ[i] as usize)).collect();
            let mut v = nalgebra::DVector::from_element(m * m, C64::default());
            v[modes[0] * m + modes[1]] += C64::new(1.0, 0.0);
            v[modes[1] * m + modes[0]] += C64::new(1.0, 0.0);
            let n = v.norm();
            v / C64::new(n, 0.0)
        })
        .collect();
    CMat::from_fn(b.len(), b.len(), |r, c| (vecs[r].adjoint() * &big * &vecs[c])[(0, 0)])
}

#[test]
fn second_quantized_one_body_matches_first_quantization() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let a = CMat::from_fn(3, 3, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let j = &a + a.adjoint();
    let b = FockBasis::bosons_sector(3, 2).unwrap();
    let dg = second_quantize(&b, &LadderKernel::OneBody(j.clone())).unwrap().to_dense();
    assert!((dg - first_quantized_one_body(&j, &b)).norm() < 1e-12);

    let full = FockBasis::bosons(3, 4).unwrap();
    let id = second_quantize(&full, &LadderKernel::OneBody(CMat::identity(3, 3))).unwrap();
    assert!((id.to_dense() - number_operator(&full).to_dense()).norm() < 1e-14);
    let vac = FockVector::vacuum(&Arc::new(full.clone())).unwrap();
    let dg = second_quantize(&full, &LadderKernel::OneBody(j)).unwrap();
    assert_eq!(vac.apply(&dg).norm(), 0.0);
}

#[test]
fn coherent_density_is_rank_one() {
    let b = Arc::new(FockBasis::bosons(2, 30).unwrap());
    let f = [C64::new(0.6, 0.3), C64::new(-0.2, 0.5)];
    let w = coherent_state(&b, &f).unwrap();
    let g = reduced_density_1(&w);
    for x in 0..2 {
        for y in 0..2 {
            assert!((g[(x, y)] - f[x] * f[y].conj()).norm() < 1e-9);
        }
    }
    assert_eq!(reduced_density_1(&FockVector::vacuum(&b).unwrap()).norm(), 0.0);
}

fn orthonormal_orbitals(rng: &mut ChaCha8Rng, m: usize, n: usize) -> CMat {
    let a = CMat::from_fn(m, m, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let q = a.qr().q();
    q.columns(0, n).into_owned()
}

#[test]
fn particle_hole_vacuum_is_slater_determinant() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let b = Arc::new(FockBasis::fermions(4).unwrap());
    let f = orthonormal_orbitals(&mut rng, 4, 2);
    let slater = particle_hole_apply(&f, &FockVector::vacuum(&b).unwrap()).unwrap();
    assert!((slater.norm() - 1.0).abs() < 1e-12);
    let g = reduced_density_1(&slater);
    assert!((g - &f * f.adjoint()).norm() < 1e-12);
    assert!(pairing_density(&slater).norm() < 1e-12);

    // in the orbital basis itself RΩ is the state with modes 1..N filled
    let e = CMat::identity(4, 4).columns(0, 2).into_owned();
    let r = particle_hole_apply(&e, &FockVector::vacuum(&b).unwrap()).unwrap();
    let filled = b.find(&[1, 1, 0, 0]).unwrap();
    assert!((r.amp[filled].norm() - 1.0).abs() < 1e-14);
}

#[test]
fn particle_hole_exchanges_ladders_and_squares_to_a_sign() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let b = FockBasis::fermions(4).unwrap();
    for n in 0..=3 {
        let f = orthonormal_orbitals(&mut rng, 4, n);
        let r = particle_hole_operator(&b, &f).unwrap().to_dense();
        let id = CMat::identity(b.len(), b.len());
        assert!((r.adjoint() * &r - &id).norm() < 1e-12);
        let r2 = &r * &r;
        let phase = r2[(0, 0)];
        assert!((phase.norm() - 1.0).abs() < 1e-12 && phase.im.abs() < 1e-12);
        assert!((&r2 - &id * phase).norm() < 1e-12, "R² is not a global sign for N = {n}");
        if n == 0 {
            assert!((&r - &id).norm() < 1e-14);
        }
        for i in 0..n {
            let fi: Vec<C64> = f.column(i).iter().copied().collect();
            let a = annihilation_operator(&b, &fi).unwrap().to_dense();
            let ad = creation_operator(&b, &fi).unwrap().to_dense();
            assert!((&r * a * r.adjoint() - ad).norm() < 1e-12);
        }
    }
    let bad = CMat::from_element(4, 2, C64::new(1.0, 0.0));
    assert!(particle_hole_operator(&b, &bad).is_err());
}

#[test]
fn fermionic_ladder_norm_equals_vector_norm() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let b = FockBasis::fermions(4).unwrap();
    let f = rand_vec(&mut rng, 4, 1.0);
    let nf = inner(&f, &f).re.sqrt();
    let a = annihilation_operator(&b, &f).unwrap().to_dense();
    assert!((op_norm(&a) - nf).abs() < 1e-12);
    assert!((op_norm(&a.adjoint()) - nf).abs() < 1e-12);
}

#[test]
fn pair_potential_is_diagonal_in_occupations() {
    let b = FockBasis::bosons_sector(2, 3).unwrap();
    let v = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 2.0]);
    let op = second_quantize(&b, &LadderKernel::PairPotential(v)).unwrap().to_dense();
    let i = b.find(&[2, 1]).unwrap();
    // ½[1·2·1 + 2·0.5·2·1] = 1 + 1
    assert!((op[(i, i)].re - 2.0).abs() < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ladder_bounds_on_safe_subspace(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = Arc::new(FockBasis::bosons(3, 6).unwrap());
        let f = rand_vec(&mut rng, 3, 1.0);
        let nf = inner(&f, &f).re.sqrt();
        let mut psi = rand_state(&mut rng, &b);
        for i in 0..b.len() {
            if b.total(i) > 4 { psi.amp[i] = C64::default(); }
        }
        let (n1, _) = psi.number_moments();
        let norm2 = psi.norm().powi(2);
        let a = annihilate(&f, &psi).unwrap().norm();
        let ad = create(&f, &psi).unwrap().norm();
        prop_assert!(a <= nf * n1.sqrt() + 1e-12);
        prop_assert!(ad <= nf * (n1 + norm2).sqrt() + 1e-12);
    }

    #[test]
    fn one_body_expectation_bounded_by_number(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = Arc::new(FockBasis::bosons(3, 4).unwrap());
        let a = CMat::from_fn(3, 3, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let j = &a + a.adjoint();
        let psi = rand_state(&mut rng, &b);
        let e = psi.expectation(&second_quantize(&b, &LadderKernel::OneBody(j.clone())).unwrap());
        prop_assert!(e.norm() <= op_norm(&j) * psi.number_moments().0 + 1e-12);
    }

    #[test]
    fn cosh_sinh_identity(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = CMat::from_fn(3, 3, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let k = &a + a.transpose();
        let (ch, sh) = cosh_sinh(&k);
        prop_assert!((&ch * &ch - &sh * sh.adjoint() - CMat::identity(3, 3)).norm() < 1e-10 * ch.norm().powi(2));
    }
}
