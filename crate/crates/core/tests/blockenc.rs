use cohest::blockenc::*;
use cohest::numerics::*;
use cohest::polynomials::{amplifying_poly_squared, ChebyshevSeries, Parity};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn r(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn pauli_x() -> CMatrix {
    CMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
}

fn random_hermitian(d: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let u = random_unitary(d, rng);
    let vals: Vec<f64> = (0..d).map(|i| ((i * 7919) % 13) as f64 / 13.0 - 0.5).collect();
    &(&u * &CMatrix::diag_real(&vals)) * &u.adjoint()
}

fn random_projector(d: usize, rank: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let u = random_unitary(d, rng);
    let diag: Vec<f64> = (0..d).map(|i| if i < rank { 1.0 } else { 0.0 }).collect();
    &(&u * &CMatrix::diag_real(&diag)) * &u.adjoint()
}

#[test]
fn trivial_encoding_is_the_unitary() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let u = random_unitary(4, &mut rng);
    let be = BlockEncoding::trivial(u.clone()).unwrap();
    assert_eq!(be.ancillas_m(), 0);
    assert!((&encoded_block(&be) - &u).max_abs() < 1e-15);
}

#[test]
fn dilation_examples() {
    let be = dilate(&CMatrix::zeros(2, 2)).unwrap();
    assert!(encoded_block(&be).max_abs() < 1e-15);
    assert!(be.unitary().is_unitary(1e-9));

    let half = CMatrix::identity(2).scale_real(0.5);
    assert!((&encoded_block(&dilate(&half).unwrap()) - &half).max_abs() < 1e-14);

    let m = CMatrix::diag_real(&[0.6, 0.8]);
    let be = dilate(&m).unwrap();
    assert!((&encoded_block(&be) - &m).max_abs() < 1e-12);

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let u = random_unitary(3, &mut rng);
    let be = dilate(&u).unwrap();
    assert!(be.unitary().block(0, 3, 3, 3).max_abs() < 1e-7);
    assert!(be.unitary().block(3, 0, 3, 3).max_abs() < 1e-7);

    assert!(dilate(&CMatrix::identity(2).scale_real(1.5)).is_err());
}

#[test]
fn lcu_of_unitary_and_identity() {
    let lam = 0.3;
    let u = CMatrix::diag(&[C64::from_polar(1.0, 2.0 * PI * lam), r(1.0)]);
    let terms = vec![
        (0.5, BlockEncoding::trivial(u).unwrap()),
        (0.5, BlockEncoding::trivial(CMatrix::identity(2)).unwrap()),
    ];
    let be = lcu_combine(&terms).unwrap();
    assert_eq!(be.ancillas_m(), 1);
    let b = encoded_block(&be);
    let want = C64::from_polar((PI * lam).cos(), PI * lam);
    assert!((b.get(0, 0) - want).norm() < 1e-12);
    assert!((b.get(1, 1) - r(1.0)).norm() < 1e-12);
    assert!((&b - &lcu_block(&terms).unwrap()).max_abs() < 1e-12);
}

#[test]
fn lcu_single_term_and_subnormalized_weights() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let u = random_unitary(2, &mut rng);
    let be = lcu_combine(&[(1.0, BlockEncoding::trivial(u.clone()).unwrap())]).unwrap();
    assert_eq!(be.ancillas_m(), 1);
    assert!((&encoded_block(&be) - &u).max_abs() < 1e-12);

    let terms = vec![
        (0.3, BlockEncoding::trivial(u.clone()).unwrap()),
        (0.2, dilate(&CMatrix::diag_real(&[0.5, -0.5])).unwrap()),
    ];
    let be = lcu_combine(&terms).unwrap();
    let want = &u.scale_real(0.3) + &CMatrix::diag_real(&[0.1, -0.1]);
    assert!((&encoded_block(&be) - &want).max_abs() < 1e-12);
    assert_eq!(be.ancillas_m(), lcu_ancillas(&terms).unwrap());

    let over = vec![
        (0.7, BlockEncoding::trivial(u.clone()).unwrap()),
        (0.7, BlockEncoding::trivial(u).unwrap()),
    ];
    assert!(lcu_combine(&over).is_err());
}

#[test]
fn product_multiplies_blocks() {
    let a = dilate(&CMatrix::diag_real(&[0.5, 0.9])).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let h = random_hermitian(2, &mut rng);
    let b = dilate(&h).unwrap();
    let p = product(&a, &b).unwrap();
    assert_eq!(p.ancillas_m(), 2);
    let want = &CMatrix::diag_real(&[0.5, 0.9]) * &h;
    assert!((&encoded_block(&p) - &want).max_abs() < 1e-12);
}

#[test]
fn svt_examples() {
    let be = dilate(&CMatrix::diag_real(&[0.5])).unwrap();
    let x2 = ChebyshevSeries::new(vec![0.5, 0.0, 0.5], Parity::Even).unwrap();
    let out = apply_svt(&be, &x2).unwrap();
    assert!((encoded_block(&out).get(0, 0) - r(0.25)).norm() < 1e-12);
    assert_eq!(out.query_cost(), 2);
    assert_eq!(out.ancillas_m(), 1);

    // Projector block: eigenvalues 0 and 1 map to the endpoints of A(x²).
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let pi = random_projector(4, 2, &mut rng);
    let (p, _) = amplifying_poly_squared(0.2, 1e-3).unwrap();
    let out = apply_svt(&dilate(&pi).unwrap(), &p).unwrap();
    let comp = &CMatrix::identity(4) - &pi;
    let blk = encoded_block(&out);
    let err = (&blk - &comp).max_abs();
    assert!(err <= 1e-3 + 1e-9, "svt err {err}");

    let big = ChebyshevSeries::new(vec![0.0, 0.0, 2.0], Parity::Even).unwrap();
    let unit = dilate(&CMatrix::diag_real(&[1.0])).unwrap();
    assert!(apply_svt(&unit, &big).is_err());
}

#[test]
fn svt_keeps_eigenbasis_of_normal_blocks() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let h = random_hermitian(4, &mut rng).scale_real(1.5);
    let (vals, vecs) = eig_hermitian(&h).unwrap();
    let (p, _) = amplifying_poly_squared(0.1, 1e-2).unwrap();
    let blk = encoded_block(&apply_svt(&dilate(&h).unwrap(), &p).unwrap());
    let d = &(&vecs.adjoint() * &blk) * &vecs;
    for i in 0..4 {
        for j in 0..4 {
            let want = if i == j { p.eval(vals[i].abs()) } else { 0.0 };
            assert!((d.get(i, j) - r(want)).norm() < 1e-10);
        }
    }
}

#[test]
fn block_measure_exact_projector() {
    let pi = CMatrix::diag_real(&[0.0, 1.0]);
    let ch = block_measure(&dilate(&pi).unwrap()).unwrap();
    let ideal = QuantumChannel::unitary(ideal_block_measurement(&pi)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    assert!(diamond_lower_bound(&ch, &ideal, 20, &mut rng).unwrap() < 1e-10);

    // V_Π block on the non-postselected qubit.
    let ua = dilate(&pi).unwrap();
    let ua_blk = encoded_block(&ua);
    assert!((&ua_blk - &pi).max_abs() < 1e-14);
    let want = &pauli_x().kron(&pi) + &CMatrix::identity(2).kron(&(&CMatrix::identity(2) - &pi));
    assert!((&ideal_block_measurement(&pi) - &want).max_abs() < 1e-15);
}

#[test]
fn block_measure_zero_projector_keeps_flag() {
    let ch = block_measure(&dilate(&CMatrix::zeros(3, 3)).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let u = random_unitary(3, &mut rng);
    let psi = CVector::basis(2, 0).kron(&u.column(0));
    let out = ch.apply_pure(&psi);
    let flag = partial_trace(&out, &[2, 3], &[0]).unwrap();
    assert!((flag.get(0, 0) - r(1.0)).norm() < 1e-12);
}

fn perturbed_projector(eps: f64, seed: u64) -> (CMatrix, CMatrix, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pi = random_projector(4, 2, &mut rng);
    let e = random_hermitian(4, &mut rng);
    let (a, actual) = perturb_projector(&pi, &e, eps).unwrap();
    (a, pi, actual)
}

#[test]
fn block_measure_error_bound() {
    for (i, &eps) in [1e-1, 1e-2, 1e-3].iter().enumerate() {
        let (a, pi, actual) = perturbed_projector(eps, 40 + i as u64);
        assert!(actual <= eps * (1.0 + 1e-9) && actual > 0.9 * eps);
        let be = dilate(&a).unwrap();
        let ch = block_measure(&be).unwrap();
        let ideal = QuantumChannel::unitary(ideal_block_measurement(&pi)).unwrap();
        let bound = 4.0 * 2f64.sqrt() * eps;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let lower = diamond_lower_bound(&ch, &ideal, 30, &mut rng).unwrap();
        assert!(lower <= bound, "eps={eps}: sampled {lower} > {bound}");
    }
}

#[test]
fn collapse_statistics_match_block_eigenvalue() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let u = random_unitary(2, &mut rng);
    let gammas = [0.3, 0.8];
    let a = &(&u * &CMatrix::diag_real(&gammas)) * &u.adjoint();
    let ch = block_measure(&dilate(&a).unwrap()).unwrap();
    for (j, &g) in gammas.iter().enumerate() {
        let psi = CVector::basis(2, 0).kron(&u.column(j));
        let out = ch.apply_pure(&psi);
        let flag = partial_trace(&out, &[2, 2], &[0]).unwrap();
        let p1 = g * g;
        assert!((flag.get(1, 1).re - p1).abs() < 1e-8);
        assert!((flag.get(0, 0).re - (1.0 - p1)).abs() < 1e-8);
        assert!(flag.get(0, 1).norm() < 1e-8);
    }
}

#[test]
fn channel_from_block_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let v = random_unitary(3, &mut rng);
    let (ch, bound) = channel_from_block(&BlockEncoding::trivial(v.clone()).unwrap(), &v).unwrap();
    assert!(bound < 1e-12);
    assert!(ch.as_unitary().is_some());

    let eps = 1e-3;
    let shrunk = v.scale_real(1.0 - eps);
    let (_, bound) = channel_from_block(&dilate(&shrunk).unwrap(), &v).unwrap();
    assert!((bound - 4.0 * eps).abs() < 1e-10);
}

#[test]
fn diamond_distance_examples() {
    let id = CMatrix::identity(2);
    assert!(diamond_distance_unitary(&id, &id).unwrap() < 1e-12);
    let z = CMatrix::diag_real(&[1.0, -1.0]);
    assert!((diamond_distance_unitary(&id, &z).unwrap() - 2.0).abs() < 1e-12);
    let ph = id.scale(C64::from_polar(1.0, 0.7));
    assert!(diamond_distance_unitary(&id, &ph).unwrap() < 1e-7);
    assert!(diamond_distance_unitary(&id, &CMatrix::diag_real(&[1.0, 0.5])).is_err());
}

#[test]
fn trace_distance_examples() {
    let p0 = CVector::basis(2, 0).projector();
    let p1 = CVector::basis(2, 1).projector();
    assert!(trace_distance(&p0, &p0).unwrap() < 1e-15);
    assert!((trace_distance(&p0, &p1).unwrap() - 1.0).abs() < 1e-12);
    let rho = CMatrix::diag_real(&[0.25, 0.75]);
    let out = apply_channel(&QuantumChannel::identity(2), &rho).unwrap();
    assert_eq!(out, rho);
    assert!(trace_distance(&CMatrix::diag_real(&[0.5, 0.6]), &p0).is_err());
}

#[test]
fn channels_reject_non_trace_preserving_kraus() {
    assert!(QuantumChannel::new(vec![CMatrix::identity(2).scale_real(0.9)]).is_err());
}

#[test]
fn canonical_form_preserves_action() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let pi = random_projector(2, 1, &mut rng);
    let ch = block_measure(&dilate(&pi.scale_real(0.9)).unwrap()).unwrap();
    let twice = ch.then(&ch).unwrap();
    let canon = twice.canonical().unwrap();
    assert!(canon.kraus_ops().len() <= 16);
    let lb = diamond_lower_bound(&twice, &canon, 10, &mut rng).unwrap();
    assert!(lb < 1e-9);
}
