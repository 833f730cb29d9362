use crate::error::{Error, Result};

/// Bessel functions of the first kind `J_0(t), …, J_kmax(t)` by Miller's
/// backward recurrence, normalized with `J_0 + 2 Σ J_{2k} = 1`.
pub fn bessel_j_all(kmax: usize, t: f64) -> Vec<f64> {
    let mut out = vec![0.0; kmax + 1];
    if t == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let x = t.abs();
    let m = (kmax as f64).max(x);
    let mut n_start = (m + 16.0 * m.cbrt() + 30.0).ceil() as usize;
    if n_start % 2 == 1 {
        n_start += 1;
    }
    let mut vals = vec![0.0; n_start + 2];
    vals[n_start] = 1e-300_f64.max(f64::MIN_POSITIVE) * 1e10;
    for n in (1..=n_start).rev() {
        let next = (2.0 * n as f64 / x) * vals[n] - vals[n + 1];
        vals[n - 1] = next;
        if next.abs() > 1e250 {
            for v in vals[n - 1..].iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    let mut sum = vals[0];
    let mut comp = 0.0;
    for k in (2..=n_start).step_by(2) {
        // Kahan summation keeps the normalization accurate for large t.
        let y = 2.0 * vals[k] - comp;
        let s = sum + y;
        comp = (s - sum) - y;
        sum = s;
    }
    for (k, o) in out.iter_mut().enumerate() {
        let v = vals[k] / sum;
        *o = if t < 0.0 && k % 2 == 1 { -v } else { v };
    }
    out
}

pub fn bessel_j(k: usize, t: f64) -> f64 {
    bessel_j_all(k, t)[k]
}

/// Exponentially scaled modified Bessel functions `e^{-|z|} I_j(z)` for
/// `j = 0..=jmax`.
pub fn bessel_i_scaled_all(jmax: usize, z: f64) -> Vec<f64> {
    let mut out = vec![0.0; jmax + 1];
    if z == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let x = z.abs();
    let reach = (1400.0 * x).sqrt().max(x.min(50.0));
    let n_start = (jmax as f64).max(reach).ceil() as usize + 40;
    let mut vals = vec![0.0; n_start + 2];
    vals[n_start] = 1e-280;
    for n in (1..=n_start).rev() {
        let next = (2.0 * n as f64 / x) * vals[n] + vals[n + 1];
        vals[n - 1] = next;
        if next > 1e250 {
            for v in vals[n - 1..].iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    let mut sum = 0.0;
    for &v in vals[1..=n_start].iter().rev() {
        sum += 2.0 * v;
    }
    sum += vals[0];
    for (j, o) in out.iter_mut().enumerate() {
        let v = vals[j] / sum;
        *o = if z < 0.0 && j % 2 == 1 { -v } else { v };
    }
    out
}

pub fn bessel_i_scaled(k: usize, z: f64) -> f64 {
    bessel_i_scaled_all(k, z)[k]
}

/// Modified Bessel function `I_k(t)`; fails when the unscaled value overflows.
pub fn bessel_i(k: usize, t: f64) -> Result<f64> {
    let s = bessel_i_scaled(k, t);
    let v = s * t.abs().exp();
    if v.is_finite() || s == 0.0 {
        Ok(if v.is_finite() { v } else { 0.0 })
    } else {
        Err(Error::Range(format!(
            "I_{k}({t}) overflows double precision; use the scaled variant"
        )))
    }
}

/// Chebyshev polynomial of the first kind.
pub fn chebyshev_t(k: usize, x: f64) -> f64 {
    if x.abs() <= 1.0 {
        if k <= 32 {
            let (mut a, mut b) = (1.0, x);
            if k == 0 {
                return 1.0;
            }
            for _ in 1..k {
                let c = 2.0 * x * b - a;
                a = b;
                b = c;
            }
            b
        } else {
            (k as f64 * x.acos()).cos()
        }
    } else {
        let v = (k as f64 * x.abs().acosh()).cosh();
        if x < 0.0 && k % 2 == 1 {
            -v
        } else {
            v
        }
    }
}

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}
