//! Galerkin matrix of the fractional Laplacian in the MTF basis.
//!
//! With `F[phi_n] = (-i)^n Psi_n` (Laguerre functions on a half line), the
//! stiffness matrix `A_{jk} = (|xi|^alpha F[phi_k], F[phi_j])` splits into two
//! decoupled blocks. For `j, k >= 0`
//!
//! ```text
//! C_{jk} = i^{j-k} int_0^inf xi^alpha e^{-xi} L_k(xi) L_j(xi) dxi
//!        = Gamma(alpha+1) i^{j-k} sum_{l <= min(j,k)} beta_{l,j} beta_{l,k},
//! ```
//!
//! and the negative-index block is `A_{jk} = conj(C_{-j-1,-k-1})`, i.e. the
//! order-reversed conjugate of `C`. Scaling the basis by `nu` multiplies
//! everything by `nu^{-alpha}`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{gershgorin_bounds, i_pow, one_norm, CMatrix, ZERO};
use crate::special::{gamma, gauss_legendre, laguerre_seq, terminating_2f1};

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 2.0 {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

/// How the spectral enclosure `[zeta, eta]` of the scaled core is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundsRule {
    /// `zeta = 0` (the core is positive semidefinite), `eta` = Gershgorin / 1-norm.
    #[default]
    Gershgorin,
    /// `eta = -zeta = ||C||_1`.
    OneNorm,
}

/// `beta_{l,n} = (-alpha)_{n-l} / (n-l)! * sqrt((alpha+1)_l / l!)`.
pub fn beta_coeff(l: i64, n: i64, alpha: f64) -> Result<f64> {
    if l < 0 || l > n {
        return Err(Error::InvalidIndex { ell: l, n });
    }
    let mut left = 1.0;
    for m in 1..=(n - l) {
        left *= (-alpha + (m - 1) as f64) / m as f64;
    }
    let mut right = 1.0;
    for m in 1..=l {
        right *= (alpha + m as f64) / m as f64;
    }
    Ok(left * right.sqrt())
}

/// Lower-triangular `B[n, l] = beta_{l,n}`, `0 <= l <= n < N`, by running products.
pub fn beta_matrix(n_modes: usize, alpha: f64) -> DMatrix<f64> {
    // (-alpha)_m / m!
    let mut down = Vec::with_capacity(n_modes);
    // sqrt((alpha+1)_l / l!)
    let mut up = Vec::with_capacity(n_modes);
    let (mut d, mut u) = (1.0, 1.0);
    for m in 0..n_modes {
        if m > 0 {
            d *= (-alpha + (m - 1) as f64) / m as f64;
            u *= (alpha + m as f64) / m as f64;
        }
        down.push(d);
        up.push(u.sqrt());
    }
    DMatrix::from_fn(n_modes, n_modes, |n, l| if l <= n { down[n - l] * up[l] } else { 0.0 })
}

/// Core block `C` (indices `0..N-1`).
pub fn assemble_core(n_modes: usize, alpha: f64) -> Result<CMatrix> {
    check_alpha(alpha)?;
    if n_modes < 1 {
        return Err(Error::InvalidModes(n_modes));
    }
    let b = beta_matrix(n_modes, alpha);
    let g = gamma(alpha + 1.0);
    let mut c = CMatrix::zeros(n_modes, n_modes);
    for j in 0..n_modes {
        for k in 0..=j {
            let mut s = 0.0;
            for l in 0..=k {
                s += b[(j, l)] * b[(k, l)];
            }
            let v = i_pow(j as i64 - k as i64) * (g * s);
            c[(j, k)] = v;
            c[(k, j)] = v.conj();
        }
    }
    Ok(c)
}

/// Closed tridiagonal form of the core block at `alpha = 1`.
pub fn assemble_core_alpha1(n_modes: usize) -> Result<CMatrix> {
    if n_modes < 1 {
        return Err(Error::InvalidModes(n_modes));
    }
    let mut c = CMatrix::zeros(n_modes, n_modes);
    for j in 0..n_modes {
        c[(j, j)] = Complex64::new((2 * j + 1) as f64, 0.0);
        if j + 1 < n_modes {
            c[(j, j + 1)] = Complex64::new(0.0, (j + 1) as f64);
            c[(j + 1, j)] = Complex64::new(0.0, -((j + 1) as f64));
        }
    }
    Ok(c)
}

/// The full `2N x 2N` stiffness matrix in block form.
#[derive(Debug, Clone)]
pub struct FracLapOperator {
    alpha: f64,
    n_modes: usize,
    scaling: f64,
    core: CMatrix,
    bounds: (f64, f64),
}

/// Assemble `A` for the scaled basis, with the default bounds rule.
pub fn assemble_full(n_modes: usize, alpha: f64, nu: f64) -> Result<FracLapOperator> {
    FracLapOperator::new(n_modes, alpha, nu, BoundsRule::default())
}

impl FracLapOperator {
    pub fn new(n_modes: usize, alpha: f64, nu: f64, rule: BoundsRule) -> Result<Self> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::InvalidScaling(nu));
        }
        let core = if alpha == 1.0 { assemble_core_alpha1(n_modes)? } else { assemble_core(n_modes, alpha)? };
        let s = nu.powf(-alpha);
        let norm1 = one_norm(&core);
        let bounds = match rule {
            BoundsRule::Gershgorin => (0.0, s * gershgorin_bounds(&core).1.min(norm1)),
            BoundsRule::OneNorm => (-s * norm1, s * norm1),
        };
        Ok(Self { alpha, n_modes, scaling: nu, core, bounds })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn scaling(&self) -> f64 {
        self.scaling
    }

    /// `nu^{-alpha}`.
    pub fn scale_factor(&self) -> f64 {
        self.scaling.powf(-self.alpha)
    }

    /// Unscaled core `C`.
    pub fn core(&self) -> &CMatrix {
        &self.core
    }

    /// Enclosure of the spectrum of `nu^{-alpha} C` (and hence of `A`).
    pub fn bounds(&self) -> (f64, f64) {
        self.bounds
    }

    /// `nu^{-alpha} C`: the block acting on Laurent indices `0..N-1`.
    pub fn positive_block(&self) -> CMatrix {
        &self.core * Complex64::new(self.scale_factor(), 0.0)
    }

    /// `nu^{-alpha} P conj(C) P`: the block acting on Laurent indices `-N..-1`
    /// in slot order.
    pub fn negative_block(&self) -> CMatrix {
        let n = self.n_modes;
        let s = self.scale_factor();
        CMatrix::from_fn(n, n, |r, c| self.core[(n - 1 - r, n - 1 - c)].conj() * s)
    }

    pub fn to_dense(&self) -> CMatrix {
        let n = self.n_modes;
        let mut a = CMatrix::zeros(2 * n, 2 * n);
        a.view_mut((0, 0), (n, n)).copy_from(&self.negative_block());
        a.view_mut((n, n), (n, n)).copy_from(&self.positive_block());
        a
    }

    /// `A v` for a vector in slot order.
    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.n_modes;
        if v.len() != 2 * n {
            return Err(Error::DimensionMismatch { expected: 2 * n, got: v.len() });
        }
        let s = self.scale_factor();
        let mut out = vec![ZERO; 2 * n];
        for r in 0..n {
            let mut neg = ZERO;
            let mut pos = ZERO;
            for c in 0..n {
                neg += self.core[(n - 1 - r, n - 1 - c)].conj() * v[c];
                pos += self.core[(r, c)] * v[n + c];
            }
            out[r] = neg * s;
            out[n + r] = pos * s;
        }
        Ok(out)
    }
}

/// Pointwise `(-Delta)^{alpha/2} phi_n(x)` (unscaled basis) in closed form.
pub fn frac_laplacian_mtf(n: i64, alpha: f64, x: f64) -> Complex64 {
    let pref = gamma(alpha + 1.0) / (2.0 * PI).sqrt();
    let phase = i_pow(-n);
    if n >= 0 {
        let w = Complex64::new(0.5, -x);
        let f = terminating_2f1(n as usize, alpha + 1.0, w.inv());
        phase * pref * f / w.powf(alpha + 1.0)
    } else {
        let w = Complex64::new(0.5, x);
        let f = terminating_2f1((-n - 1) as usize, alpha + 1.0, w.inv());
        -phase * pref * f / w.powf(alpha + 1.0)
    }
}

/// Matrix of moments `int_0^inf xi^alpha e^{-xi} L_j(xi) L_k(xi) dxi`, `j, k <= nmax`,
/// by composite Gauss-Legendre quadrature: geometrically graded panels towards
/// the `xi^alpha` endpoint singularity, unit panels out to `4 nmax + 150`.
pub fn laguerre_moment_matrix(nmax: usize, alpha: f64) -> DMatrix<f64> {
    let (gx, gw) = gauss_legendre(16);
    let mut panels = Vec::new();
    let mut hi = 1.0;
    for _ in 0..80 {
        panels.push((0.5 * hi, hi));
        hi *= 0.5;
    }
    let end = (4 * nmax + 150) as f64;
    let mut a = 1.0;
    while a < end {
        panels.push((a, a + 1.0));
        a += 1.0;
    }
    let mut m = DMatrix::<f64>::zeros(nmax + 1, nmax + 1);
    for &(lo, hi) in &panels {
        let (c, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        for (xi, wi) in gx.iter().zip(&gw) {
            let x = c + h * xi;
            let w = h * wi * x.powf(alpha) * (-x).exp();
            let l = laguerre_seq(nmax, 0.0, x);
            for j in 0..=nmax {
                let wl = w * l[j];
                for k in 0..=j {
                    m[(j, k)] += wl * l[k];
                }
            }
        }
    }
    for j in 0..=nmax {
        for k in 0..j {
            m[(k, j)] = m[(j, k)];
        }
    }
    m
}

/// Single moment, see [`laguerre_moment_matrix`].
pub fn laguerre_moment(j: usize, k: usize, alpha: f64) -> f64 {
    laguerre_moment_matrix(j.max(k), alpha)[(j, k)]
}

/// Brute-force stiffness entry `A_{jk}` (unscaled basis) from the defining
/// Fourier-side integral. Entries coupling opposite-sign indices vanish.
pub fn oracle_entry(j: i64, k: i64, alpha: f64) -> Complex64 {
    match (j >= 0, k >= 0) {
        (true, true) => i_pow(j - k) * laguerre_moment(j as usize, k as usize, alpha),
        (false, false) => i_pow(j - k) * laguerre_moment((-k - 1) as usize, (-j - 1) as usize, alpha),
        _ => ZERO,
    }
}
