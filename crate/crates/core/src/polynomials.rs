//! Chebyshev series for the amplifying polynomial `A_{η→δ}` and the
//! Jacobi-Anger cosine/sine approximations, with their degree calculators.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::numerics::{bessel_i_scaled_all, bessel_j_all, chebyshev_t, erfc};

/// Grid size used by every polynomial certification.
pub const GRID_POINTS: usize = 10_000;
/// Slack allowed on grid certifications.
pub const GRID_SLACK: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
    None,
}

/// Anything the matrix-level SVT can apply to singular values.
pub trait RealPolynomial: Send + Sync {
    fn eval(&self, x: f64) -> f64;
    fn degree(&self) -> usize;
    fn parity(&self) -> Parity;
}

/// `Σ c_k T_k(y)` with `y` the affine image of `x ∈ [lo, hi]` onto `[-1, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChebyshevSeries {
    coeffs: Vec<f64>,
    parity: Parity,
    domain: (f64, f64),
}

impl ChebyshevSeries {
    pub fn new(coeffs: Vec<f64>, parity: Parity) -> Result<Self> {
        Self::on_domain(coeffs, parity, (-1.0, 1.0))
    }

    pub fn on_domain(coeffs: Vec<f64>, parity: Parity, domain: (f64, f64)) -> Result<Self> {
        if coeffs.is_empty() {
            return invalid("Chebyshev series needs at least one coefficient");
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return invalid("non-finite Chebyshev coefficient");
        }
        if domain.0.partial_cmp(&domain.1) != Some(std::cmp::Ordering::Less) {
            return invalid("empty series domain");
        }
        let bad = match parity {
            Parity::Even => coeffs.iter().skip(1).step_by(2).any(|&c| c != 0.0),
            Parity::Odd => coeffs.iter().step_by(2).any(|&c| c != 0.0),
            Parity::None => false,
        };
        if bad {
            return invalid("coefficients violate the declared parity");
        }
        Ok(ChebyshevSeries { coeffs, parity, domain })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    fn to_unit(&self, x: f64) -> f64 {
        let (a, b) = self.domain;
        (2.0 * x - a - b) / (b - a)
    }

    /// Clenshaw evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        let y = self.to_unit(x);
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * y * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        y * b1 - b2 + self.coeffs[0]
    }

    /// Term-by-term `Σ c_k T_k`, kept for cross-checks.
    pub fn eval_direct(&self, x: f64) -> f64 {
        let y = self.to_unit(x);
        self.coeffs.iter().enumerate().map(|(k, &c)| c * chebyshev_t(k, y)).sum()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|&c| c != 0.0).unwrap_or(0)
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    /// Monomial coefficients in the unit variable (only sensible for modest
    /// degrees).
    pub fn to_monomial(&self) -> Vec<f64> {
        let n = self.coeffs.len();
        let mut out = vec![0.0; n];
        let mut t_prev = vec![0.0; n];
        let mut t_cur = vec![0.0; n];
        t_prev[0] = 1.0;
        if n > 1 {
            t_cur[1] = 1.0;
        }
        for (k, &c) in self.coeffs.iter().enumerate() {
            let tk = if k == 0 { &t_prev } else { &t_cur };
            for (o, &t) in out.iter_mut().zip(tk) {
                *o += c * t;
            }
            if k >= 1 && k + 1 < n {
                let mut next = vec![0.0; n];
                for i in 0..n - 1 {
                    next[i + 1] += 2.0 * t_cur[i];
                }
                for (x, &p) in next.iter_mut().zip(&t_prev) {
                    *x -= p;
                }
                t_prev = std::mem::replace(&mut t_cur, next);
            }
        }
        out
    }

    /// `A(x²)` for a series `A` on `[0, 1]`: since `T_j(2x² − 1) = T_{2j}(x)`
    /// this is an exact even series on `[-1, 1]`.
    pub fn of_square(&self) -> Result<Self> {
        if self.domain != (0.0, 1.0) {
            return invalid("of_square needs a series on [0, 1]");
        }
        let mut c = vec![0.0; 2 * self.coeffs.len() - 1];
        for (j, &a) in self.coeffs.iter().enumerate() {
            c[2 * j] = a;
        }
        ChebyshevSeries::new(c, Parity::Even)
    }
}

impl RealPolynomial for ChebyshevSeries {
    fn eval(&self, x: f64) -> f64 {
        ChebyshevSeries::eval(self, x)
    }
    fn degree(&self) -> usize {
        ChebyshevSeries::degree(self)
    }
    fn parity(&self) -> Parity {
        self.parity
    }
}

/// `A(p(x)²)`, evaluated pointwise and never expanded.
#[derive(Clone, Debug)]
pub struct SquaredComposition {
    pub outer: ChebyshevSeries,
    pub inner: ChebyshevSeries,
}

impl RealPolynomial for SquaredComposition {
    fn eval(&self, x: f64) -> f64 {
        let p = self.inner.eval(x);
        self.outer.eval(p * p)
    }
    fn degree(&self) -> usize {
        self.outer.degree() * 2 * self.inner.degree()
    }
    fn parity(&self) -> Parity {
        Parity::Even
    }
}

/// Parameters and degree of one amplifying polynomial.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DegreeBudget {
    pub eta: f64,
    pub delta: f64,
    pub degree_m: usize,
    pub k_param: f64,
    /// Certified bound on `|p_sgn − sign|` away from the gap.
    pub sign_error: f64,
}

/// Root `r > t'` of `(t'/r)^r = ε'`.
pub fn solve_r(t_prime: f64, eps_prime: f64) -> Result<f64> {
    if !(t_prime > 0.0 && t_prime.is_finite()) {
        return invalid(format!("solve_r: t' must be positive, got {t_prime}"));
    }
    if !(eps_prime > 0.0 && eps_prime < 1.0) {
        return invalid(format!("solve_r: eps' must lie in (0,1), got {eps_prime}"));
    }
    let target = eps_prime.ln();
    let g = |r: f64| r * (t_prime / r).ln() - target;
    let mut lo = t_prime;
    let mut hi = 2.0 * t_prime + 1.0;
    while g(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    let mut r = 0.5 * (lo + hi);
    for _ in 0..200 {
        let v = g(r);
        if v.abs() <= 1e-14 * target.abs().max(1.0) {
            break;
        }
        if v > 0.0 {
            lo = r;
        } else {
            hi = r;
        }
        let d = (t_prime / r).ln() - 1.0;
        let newton = r - v / d;
        r = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Ok(r)
}

fn check_jacobi_anger(t: f64, eps: f64) -> Result<usize> {
    if !(t > 0.0 && t.is_finite()) {
        return invalid(format!("Jacobi-Anger: t must be positive, got {t}"));
    }
    if !(eps > 0.0 && eps < (-1.0f64).exp()) {
        return invalid(format!("Jacobi-Anger: eps must lie in (0, 1/e), got {eps}"));
    }
    let r = solve_r(std::f64::consts::E * t / 2.0, 1.25 * eps)?;
    Ok((r / 2.0).floor() as usize)
}

/// Even approximation of `cos(t x)` of degree `2R`.
pub fn jacobi_anger_cos(t: f64, eps: f64) -> Result<ChebyshevSeries> {
    let r = check_jacobi_anger(t, eps)?;
    let j = bessel_j_all(2 * r, t);
    let mut c = vec![0.0; 2 * r + 1];
    c[0] = j[0];
    for k in 1..=r {
        let s = if k % 2 == 0 { 2.0 } else { -2.0 };
        c[2 * k] = s * j[2 * k];
    }
    ChebyshevSeries::new(c, Parity::Even)
}

/// Odd approximation of `sin(t x)` of degree `2R + 1`.
pub fn jacobi_anger_sin(t: f64, eps: f64) -> Result<ChebyshevSeries> {
    let r = check_jacobi_anger(t, eps)?;
    let j = bessel_j_all(2 * r + 1, t);
    let mut c = vec![0.0; 2 * r + 2];
    for k in 0..=r {
        let s = if k % 2 == 0 { 2.0 } else { -2.0 };
        c[2 * k + 1] = s * j[2 * k + 1];
    }
    ChebyshevSeries::new(c, Parity::Odd)
}

fn check_amp(eta: f64, delta: f64) -> Result<()> {
    if !(eta > 0.0 && eta < 0.5) {
        return invalid(format!("eta must lie in (0, 1/2), got {eta}"));
    }
    if !(delta > 0.0 && delta < 0.5) {
        return invalid(format!("delta must lie in (0, 1/2), got {delta}"));
    }
    Ok(())
}

/// Width parameter of the error-function step: `erfc(2ηk) ≤ δ/2` by
/// construction.
pub fn k_param(eta: f64, delta: f64) -> f64 {
    std::f64::consts::SQRT_2 / (4.0 * eta) * (8.0 / (PI * delta * delta)).ln().sqrt()
}

struct SignTail {
    k: f64,
    weights: Vec<f64>,
}

impl SignTail {
    fn new(eta: f64, delta: f64) -> Self {
        let k = k_param(eta, delta);
        let z = k * k / 2.0;
        let jmax = (1400.0 * z).sqrt().ceil() as usize + 40;
        let pref = 2.0 * k / PI.sqrt();
        let weights = bessel_i_scaled_all(jmax, z).into_iter().map(|v| pref * v).collect();
        SignTail { k, weights }
    }
}

/// Degree and certificate of `A_{η→δ}`.
///
/// `M = 2J + 1` is the smallest odd degree for which the truncation tail of
/// the error-function series, `Σ_{j>J} w_j (1/(2j+1) + 1/(2j−1))` with
/// `w_j = 2k e^{-k²/2} I_j(k²/2)/√π`, plus `erfc(2ηk)` stays below `δ/2`.
pub fn degree_budget(eta: f64, delta: f64) -> Result<DegreeBudget> {
    check_amp(eta, delta)?;
    let tail = SignTail::new(eta, delta);
    let erf_err = erfc(2.0 * eta * tail.k);
    let budget = 0.5 * delta - erf_err;
    if budget <= 0.0 {
        return Err(Error::Numerical(format!(
            "erf step error {erf_err:e} exceeds delta/2 at eta={eta}, delta={delta}"
        )));
    }
    let w = &tail.weights;
    let mut acc = 0.0;
    let mut j_found = 0;
    for j in (1..w.len()).rev() {
        let term = w[j] * (1.0 / (2 * j + 1) as f64 + 1.0 / (2 * j - 1) as f64);
        if acc + term > budget {
            j_found = j;
            break;
        }
        acc += term;
    }
    Ok(DegreeBudget {
        eta,
        delta,
        degree_m: 2 * j_found + 1,
        k_param: tail.k,
        sign_error: erf_err + acc,
    })
}

pub fn degree_m(eta: f64, delta: f64) -> Result<usize> {
    Ok(degree_budget(eta, delta)?.degree_m)
}

/// `A_{η→δ}(x) = 1/2 − p_sgn(2x − 1)/(2(1 + δ/2))` as a series on `[0, 1]`.
pub fn amplifying_poly(eta: f64, delta: f64) -> Result<(ChebyshevSeries, DegreeBudget)> {
    let budget = degree_budget(eta, delta)?;
    let tail = SignTail::new(eta, delta);
    let w = &tail.weights;
    let jmax = (budget.degree_m - 1) / 2;
    let mut psgn = vec![0.0; budget.degree_m + 1];
    for j in 0..=jmax {
        let next = if j < jmax { w[j + 1] } else { 0.0 };
        let s = if j % 2 == 0 { 1.0 } else { -1.0 };
        psgn[2 * j + 1] = s * (w[j] + next) / (2 * j + 1) as f64;
    }
    let scale = -0.5 / (1.0 + delta / 2.0);
    let mut a: Vec<f64> = psgn.iter().map(|&c| scale * c).collect();
    a[0] = 0.5;
    Ok((ChebyshevSeries::on_domain(a, Parity::None, (0.0, 1.0))?, budget))
}

/// `A_{η→δ}(x²)` as an even series on `[-1, 1]`.
pub fn amplifying_poly_squared(eta: f64, delta: f64) -> Result<(ChebyshevSeries, DegreeBudget)> {
    let (a, b) = amplifying_poly(eta, delta)?;
    Ok((a.of_square()?, b))
}

/// Largest violation of the three amplifying-polynomial constraints on a
/// uniform grid over each region; zero means certified.
pub fn amplifying_violation(a: &ChebyshevSeries, eta: f64, delta: f64, points: usize) -> f64 {
    let grid = |lo: f64, hi: f64| {
        (0..points).map(move |i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
    };
    let mut worst: f64 = 0.0;
    for x in grid(0.0, 1.0) {
        let v = a.eval(x);
        worst = worst.max(-v).max(v - 1.0);
    }
    for x in grid(0.0, 0.5 - eta) {
        worst = worst.max(1.0 - delta - a.eval(x));
    }
    for x in grid(0.5 + eta, 1.0) {
        worst = worst.max(a.eval(x) - delta);
    }
    worst.max(0.0)
}

/// Largest `|f(x) − p(x)|` on a uniform grid over `[-1, 1]`.
pub fn max_grid_error(p: &dyn RealPolynomial, f: impl Fn(f64) -> f64, points: usize) -> f64 {
    (0..points)
        .map(|i| -1.0 + 2.0 * i as f64 / (points - 1) as f64)
        .map(|x| (f(x) - p.eval(x)).abs())
        .fold(0.0, f64::max)
}
