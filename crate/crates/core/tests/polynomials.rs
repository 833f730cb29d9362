use cohest::polynomials::*;
use std::f64::consts::{E, PI};

fn bisect_r(tp: f64, ep: f64) -> f64 {
    let f = |r: f64| r * (tp / r).ln() - ep.ln();
    let (mut lo, mut hi) = (tp, 100.0 * tp + 100.0);
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid
        } else {
            hi = mid
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn solve_r_examples() {
    let r = solve_r(1.0, 0.1).unwrap();
    assert!((r - bisect_r(1.0, 0.1)).abs() < 1e-10);
    assert!((r - 2.506).abs() < 1e-2);
    for &(tp, ep) in &[(1.0, 0.1), (4.0 * PI * E / 2.0, 1e-6), (1e4, 1e-40), (0.01, 0.5)] {
        let r = solve_r(tp, ep).unwrap();
        assert!(r > tp);
        assert!(((tp / r).powf(r) - ep).abs() <= 1e-12 * ep, "t'={tp} e'={ep}");
    }
    assert!(solve_r(0.0, 0.1).is_err());
    assert!(solve_r(1.0, 1.0).is_err());
}

#[test]
fn jacobi_anger_cos_examples() {
    let p = jacobi_anger_cos(PI, 1e-3).unwrap();
    assert!((p.eval(1.0) + 1.0).abs() <= 1e-3);
    assert_eq!(p.parity(), Parity::Even);

    let t = 2.0 * PI * 4.0;
    let p = jacobi_anger_cos(t, 1e-6).unwrap();
    assert!(max_grid_error(&p, |x| (t * x).cos(), GRID_POINTS) <= 1e-6);

    let r = bisect_r(E * t / 2.0, 1.25e-6);
    assert_eq!(p.degree(), 2 * (r / 2.0).floor() as usize);

    assert!(jacobi_anger_cos(PI, 0.5).is_err());
    assert!(jacobi_anger_cos(-1.0, 1e-3).is_err());
}

#[test]
fn jacobi_anger_sin_meets_its_bound() {
    for &t in &[PI, 8.0 * PI, 20.0] {
        for &eps in &[1e-3, 1e-8] {
            let p = jacobi_anger_sin(t, eps).unwrap();
            assert_eq!(p.parity(), Parity::Odd);
            assert!(max_grid_error(&p, |x| (t * x).sin(), GRID_POINTS) <= eps);
        }
    }
}

#[test]
fn jacobi_anger_error_shrinks_with_eps() {
    let t = 16.0 * PI;
    let mut last_err = f64::INFINITY;
    let mut last_deg = 0;
    for e in 3..=9 {
        let eps = 10f64.powi(-e);
        let p = jacobi_anger_cos(t, eps).unwrap();
        let err = max_grid_error(&p, |x| (t * x).cos(), GRID_POINTS);
        assert!(err <= last_err + 1e-15);
        assert!(p.degree() >= last_deg);
        last_err = err;
        last_deg = p.degree();
    }
}

#[test]
fn amplifying_poly_examples() {
    let (a, b) = amplifying_poly(0.25, 0.01).unwrap();
    let k_expected = 2f64.sqrt() * (8.0 / (PI * 1e-4)).ln().sqrt();
    assert!((b.k_param - k_expected).abs() < 1e-12);
    assert!(a.eval(0.0) >= 0.99);
    assert!(a.eval(1.0) <= 0.01);
    assert!((a.eval(0.5) - 0.5).abs() < 1e-14);
    assert_eq!(a.degree(), b.degree_m);
    assert_eq!(b.degree_m % 2, 1);
    assert!(amplifying_poly(0.5, 0.1).is_err());
    assert!(amplifying_poly(0.1, 0.0).is_err());
}

#[test]
fn degree_is_certified_on_grid() {
    for &(eta, delta) in &[(0.25, 1e-2), (0.1, 1e-4), (0.05, 1e-8), (0.2, 0.3)] {
        let (a, b) = amplifying_poly(eta, delta).unwrap();
        assert!(amplifying_violation(&a, eta, delta, GRID_POINTS) <= GRID_SLACK);
        assert!(b.sign_error <= delta / 2.0);
    }
}

#[test]
fn degree_monotone_in_eta_and_delta() {
    for &delta in &[1e-2, 1e-6, 1e-12, 1e-30] {
        for i in 3..11 {
            let eta = 0.5f64.powi(i);
            assert!(degree_m(eta, delta).unwrap() >= degree_m(2.0 * eta, delta).unwrap());
        }
    }
    for i in 3..10 {
        let eta = 0.5f64.powi(i);
        let mut last = 0;
        for e in [30, 20, 10, 5, 2] {
            let m = degree_m(eta, 10f64.powi(-e)).unwrap();
            if last > 0 {
                assert!(m <= last);
            }
            last = m;
        }
    }
}

#[test]
fn degree_scales_like_log_over_eta() {
    let mut worst: f64 = 0.0;
    for i in 3..=10 {
        let eta = 0.5f64.powi(i);
        for e in [2, 5, 10, 20, 30] {
            let delta = 10f64.powi(-e);
            let m = degree_m(eta, delta).unwrap() as f64;
            worst = worst.max(m * eta / (1.0 / delta).ln());
        }
    }
    assert!(worst < 3.0, "M·η/ln(1/δ) reached {worst}");
}

#[test]
fn squared_series_is_even_and_consistent() {
    let (a, _) = amplifying_poly(0.15, 1e-3).unwrap();
    let sq = a.of_square().unwrap();
    assert_eq!(sq.parity(), Parity::Even);
    for i in 0..=200 {
        let x = -1.0 + i as f64 / 100.0;
        assert!((sq.eval(x) - a.eval(x * x)).abs() < 1e-12);
    }
}

#[test]
fn clenshaw_matches_direct_and_monomial() {
    let p = jacobi_anger_cos(6.0, 1e-9).unwrap();
    let mono = p.to_monomial();
    assert!(p.degree() <= 200);
    for i in 0..=100 {
        let x = -1.0 + i as f64 / 50.0;
        let direct = p.eval_direct(x);
        assert!((p.eval(x) - direct).abs() < 1e-10);
        let horner = mono.iter().rev().fold(0.0, |acc, &c| acc * x + c);
        assert!((p.eval(x) - horner).abs() < 1e-8);
    }
}

#[test]
fn parity_is_enforced_on_construction() {
    assert!(ChebyshevSeries::new(vec![1.0, 0.5], Parity::Even).is_err());
    assert!(ChebyshevSeries::new(vec![0.1, 0.5], Parity::Odd).is_err());
    assert!(ChebyshevSeries::new(vec![0.0, 0.5, 0.0, 0.2], Parity::Odd).is_ok());
}

#[test]
fn squared_composition_degree_and_values() {
    let (a, _) = amplifying_poly(0.2, 1e-3).unwrap();
    let p = jacobi_anger_cos(4.0 * PI, 1e-5).unwrap();
    let comp = SquaredComposition { outer: a.clone(), inner: p.clone() };
    assert_eq!(comp.degree(), a.degree() * 2 * p.degree());
    let v = comp.eval(0.3);
    let q = p.eval(0.3);
    assert!((v - a.eval(q * q)).abs() < 1e-15);
}
