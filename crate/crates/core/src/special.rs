//! Special functions used by the assembly and exponential routines.
//!
//! Everything here is evaluated by short recurrences or series on the
//! argument ranges the solver actually needs; none of it is meant as a
//! general-purpose special-function library.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest argument accepted by [`bessel_j`].
pub const BESSEL_MAX_ARG: f64 = 3.0;

/// Generalized Laguerre polynomial `L_n^{(alpha)}(x)` by forward recurrence.
pub fn laguerre(n: usize, alpha: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - x) * cur - (kf + alpha) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// All values `L_0^{(alpha)}(x), ..., L_n^{(alpha)}(x)`.
pub fn laguerre_seq(n: usize, alpha: f64, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n == 0 {
        return out;
    }
    out.push(1.0 + alpha - x);
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - x) * out[k] - (kf + alpha) * out[k - 1]) / (kf + 1.0);
        out.push(next);
    }
    out
}

/// Rising factorials `(z)_0, ..., (z)_{n_max}` via `(z)_m = (z)_{m-1} (z + m - 1)`.
pub fn pochhammer_seq(z: f64, n_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut acc = 1.0;
    out.push(acc);
    for m in 1..=n_max {
        acc *= z + (m - 1) as f64;
        out.push(acc);
    }
    out
}

/// Bessel function of the first kind `J_k(x)` for `0 <= x <= 3`.
///
/// Ascending series; on this range the terms fall below `1e-17` relative
/// well within 30 terms for every order.
pub fn bessel_j(k: usize, x: f64) -> Result<f64> {
    if !(0.0..=BESSEL_MAX_ARG).contains(&x) {
        return Err(Error::OutOfRange { x, lo: 0.0, hi: BESSEL_MAX_ARG });
    }
    if x == 0.0 {
        return Ok(if k == 0 { 1.0 } else { 0.0 });
    }
    let half = 0.5 * x;
    // (x/2)^k / k!
    let mut term = 1.0;
    for j in 1..=k {
        term *= half / j as f64;
    }
    let q = half * half;
    let mut sum = term;
    for m in 1..40 {
        term *= -q / (m as f64 * (m + k) as f64);
        sum += term;
        if term.abs() <= 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    Ok(sum)
}

/// Terminating Gauss hypergeometric sum `2F1(-n, a; 1; z)`.
pub fn terminating_2f1(n: usize, a: f64, z: Complex64) -> Complex64 {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for m in 0..n {
        let mf = m as f64;
        // ratio of consecutive terms: (-n + m)(a + m) / ((1 + m)(m + 1)) * z
        let ratio = (mf - n as f64) * (a + mf) / ((mf + 1.0) * (mf + 1.0));
        term *= z * ratio;
        sum += term;
    }
    sum
}

/// Gamma function (thin wrapper so callers do not depend on statrs directly).
pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            dp = nf * (x * p - p0) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}
