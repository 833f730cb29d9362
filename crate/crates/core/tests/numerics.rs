use cohest::numerics::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

#[test]
fn svd_identity_and_diagonal() {
    let (_, s, _) = svd(&CMatrix::identity(4)).unwrap();
    assert!(s.iter().all(|&x| (x - 1.0).abs() < 1e-14));
    let (_, s, _) = svd(&CMatrix::diag_real(&[0.25, 0.5])).unwrap();
    assert!((s[0] - 0.5).abs() < 1e-14 && (s[1] - 0.25).abs() < 1e-14);
}

#[test]
fn svd_of_haar_unitary_is_flat() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let u = random_unitary(8, &mut rng);
    assert!(u.is_unitary(1e-12));
    let (_, s, _) = svd(&u).unwrap();
    assert!(s.iter().all(|&x| (x - 1.0).abs() < 1e-10));
}

#[test]
fn svd_rejects_nan() {
    let m = CMatrix::from_real(1, 1, &[f64::NAN]).unwrap();
    assert!(matches!(svd(&m), Err(cohest::Error::InvalidInput(_))));
}

#[test]
fn svd_reconstructs_rectangular() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let a = random_unitary(6, &mut rng).block(0, 0, 6, 3);
    let (u, s, v) = svd(&a).unwrap();
    let sd: Vec<C64> = s.iter().map(|&x| c(x)).collect();
    let back = &(&u * &CMatrix::diag(&sd)) * &v.adjoint();
    assert!((&back - &a).max_abs() < 1e-12);
    assert!(s.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn eig_unitary_examples() {
    let z = CMatrix::diag_real(&[1.0, -1.0]);
    let (mut p, _) = eig_unitary(&z).unwrap();
    p.sort_by(f64::total_cmp);
    assert!(p[0].abs() < 1e-12 && (p[1] - 0.5).abs() < 1e-12);

    let (p, _) = eig_unitary(&CMatrix::identity(3)).unwrap();
    assert!(p.iter().all(|&x| x.abs() < 1e-12 || (x - 1.0).abs() < 1e-12));

    let tau = 2.0 * std::f64::consts::PI;
    let d = CMatrix::diag(&[C64::from_polar(1.0, tau * 0.3), C64::from_polar(1.0, tau * 0.7)]);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let w = random_unitary(2, &mut rng);
    let u = &(&w * &d) * &w.adjoint();
    let (mut p, basis) = eig_unitary(&u).unwrap();
    assert!(basis.is_unitary(1e-10));
    p.sort_by(f64::total_cmp);
    assert!((p[0] - 0.3).abs() < 1e-10 && (p[1] - 0.7).abs() < 1e-10);
}

#[test]
fn eig_unitary_rejects_non_unitary() {
    let m = CMatrix::diag_real(&[1.0, 0.5]);
    assert!(eig_unitary(&m).is_err());
}

#[test]
fn spectral_norm_examples() {
    assert_eq!(spectral_norm(&CMatrix::zeros(3, 3)).unwrap(), 0.0);
    assert!((spectral_norm(&CMatrix::identity(3).scale_real(2.0)).unwrap() - 2.0).abs() < 1e-14);
    let j = CMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
    assert!((spectral_norm(&j).unwrap() - 1.0).abs() < 1e-14);
}

#[test]
fn special_function_examples() {
    assert_eq!(bessel_j(0, 0.0), 1.0);
    assert!((chebyshev_t(3, 0.5) + 1.0).abs() < 1e-15);
    assert_eq!(bessel_i(0, 0.0).unwrap(), 1.0);
}

#[test]
fn bessel_j_matches_reference_values() {
    // Values from mpmath at 40 digits (small orders) and scipy (large orders).
    let refs = [
        (0, 1.0, 0.76519768655796655145),
        (1, 2.5, 0.49709410246427403801),
        (5, 10.0, -0.23406152818679364044),
        (2, -3.7, 0.42832965620657586556),
        (40, 50.0, -0.13817628120116143097),
        (0, 1000.0, 0.024786686152420174561),
        (7, 1000.0, -0.0053217830764436153538),
        (100, 1000.0, 0.011676135007802554492),
        (0, 10000.0, -0.0070961603533888014773),
        (31, 10000.0, -0.0033027636806173514338),
        (2000, 10000.0, -0.005247203319016955),
        (9990, 10000.0, 0.028783415257179007),
        (10050, 10000.0, 0.00044194288988121794),
    ];
    for (k, t, want) in refs {
        let got = bessel_j(k, t);
        assert!((got - want).abs() < 1e-12, "J_{k}({t}) = {got}, want {want}");
    }
}

#[test]
fn scaled_bessel_i_matches_reference_values() {
    let refs = [
        (0, 0.5, 0.6450352704491501),
        (3, 2.0, 0.028791222639470884),
        (10, 25.0, 0.010711755425929165),
        (0, 700.0, 0.015081295651531358),
        (50, 700.0, 0.0025274852394556943),
        (0, 1e4, 0.0039894726746047314),
        (400, 1e4, 1.3392111824821141e-06),
        (0, 5e8, 1.7841241165988022e-05),
        (100000, 5e8, 8.099911147066303e-10),
        (300000, 5e8, 1.461917368945141e-44),
    ];
    for (k, z, want) in refs {
        let got = bessel_i_scaled(k, z);
        assert!(((got - want) / want).abs() < 1e-9, "ive_{k}({z}) = {got}, want {want}");
    }
}

#[test]
fn unscaled_bessel_i_overflows_with_range_error() {
    assert!(matches!(bessel_i(3, 1e4), Err(cohest::Error::Range(_))));
    let v = bessel_i(3, 2.0).unwrap();
    assert!((v - 0.028791222639470884 * 2f64.exp()).abs() < 1e-12);
}

#[test]
fn chebyshev_recurrence_on_grid() {
    for i in 0..=400 {
        let x = -1.0 + i as f64 / 200.0;
        for k in 1..60 {
            let lhs = chebyshev_t(k + 1, x);
            let rhs = 2.0 * x * chebyshev_t(k, x) - chebyshev_t(k - 1, x);
            assert!((lhs - rhs).abs() < 1e-12, "k={k} x={x}");
        }
    }
}
