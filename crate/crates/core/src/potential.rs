//! Toeplitz Galerkin matrix of a multiplicative potential.
//!
//! `M_{jk} = mu_{j-k}` with `mu_k = (i^{-k} / 2pi) int V(nu tan(theta/2)/2) e^{-ik theta} dtheta`.
//! The coefficients come from one FFT of equispaced samples in `theta`; the
//! matrix is applied through a circulant embedding.

use std::sync::Arc;

use num_complex::Complex64;

use crate::basis::SampledFunction;
use crate::error::{Error, Result};
use crate::fft::FftPair;
use crate::linalg::{i_pow, CMatrix, ZERO};

/// Smallest power of two `>= 8N`, the sampling length for `mu_coeffs`.
pub fn potential_grid_len(n_modes: usize) -> usize {
    (8 * n_modes).next_power_of_two()
}

/// `mu_k` for `k = 1-2N ..= 2N-1`, stored at offset `k + 2N - 1`.
///
/// The `theta = -pi` sample uses `V`'s declared limit at infinity.
pub fn mu_coeffs(v: &SampledFunction, n_modes: usize, nu: f64) -> Result<Vec<Complex64>> {
    mu_coeffs_with_len(v, n_modes, nu, potential_grid_len(n_modes))
}

/// [`mu_coeffs`] with an explicit sampling length (at least `4N - 1`).
pub fn mu_coeffs_with_len(v: &SampledFunction, n_modes: usize, nu: f64, len: usize) -> Result<Vec<Complex64>> {
    if n_modes < 1 {
        return Err(Error::InvalidModes(n_modes));
    }
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::InvalidScaling(nu));
    }
    if len < 4 * n_modes - 1 {
        return Err(Error::TooFewPoints(len));
    }
    let lim = v.limit();
    if !(lim.re.is_finite() && lim.im.is_finite()) {
        return Err(Error::NonFiniteLimit);
    }
    let h = 2.0 * std::f64::consts::PI / len as f64;
    let mut buf: Vec<Complex64> = (0..len)
        .map(|l| {
            if l == 0 {
                lim
            } else {
                let th = -std::f64::consts::PI + h * l as f64;
                v.eval(0.5 * nu * (0.5 * th).tan())
            }
        })
        .collect();
    FftPair::new(len).forward(&mut buf);
    let two_n = 2 * n_modes as i64;
    let scale = 1.0 / len as f64;
    Ok((1 - two_n..two_n)
        .map(|k| {
            let bin = k.rem_euclid(len as i64) as usize;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            i_pow(-k) * buf[bin] * (sign * scale)
        })
        .collect())
}

/// Hermitian-or-not Toeplitz matrix stored by its first column and row.
#[derive(Debug, Clone)]
pub struct ToeplitzOperator {
    first_col: Vec<Complex64>,
    first_row: Vec<Complex64>,
    fft: FftPair,
    symbol: Arc<Vec<Complex64>>,
}

/// `M_{jk} = mu_{j-k}` from the `4N - 1` coefficients of [`mu_coeffs`].
pub fn assemble_m(mu: &[Complex64]) -> Result<ToeplitzOperator> {
    ToeplitzOperator::from_coeffs(mu)
}

impl ToeplitzOperator {
    /// From coefficients `mu_{1-n} ..= mu_{n-1}` (odd length `2n - 1`).
    pub fn from_coeffs(mu: &[Complex64]) -> Result<Self> {
        if mu.len().is_multiple_of(2) {
            return Err(Error::DimensionMismatch { expected: mu.len() + 1, got: mu.len() });
        }
        let n = mu.len().div_ceil(2);
        let mid = n - 1;
        let first_col = (0..n).map(|k| mu[mid + k]).collect();
        let first_row = (0..n).map(|k| mu[mid - k]).collect();
        Self::new(first_col, first_row)
    }

    pub fn new(first_col: Vec<Complex64>, first_row: Vec<Complex64>) -> Result<Self> {
        let fft = FftPair::new(2 * first_col.len().max(1));
        Self::with_fft(first_col, first_row, fft)
    }

    /// As [`ToeplitzOperator::new`], reusing an FFT plan of length `2n`.
    pub fn with_fft(first_col: Vec<Complex64>, first_row: Vec<Complex64>, fft: FftPair) -> Result<Self> {
        let n = first_col.len();
        if first_row.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: first_row.len() });
        }
        if n == 0 {
            return Err(Error::InvalidModes(0));
        }
        if fft.len() != 2 * n {
            return Err(Error::DimensionMismatch { expected: 2 * n, got: fft.len() });
        }
        let mut c = vec![ZERO; 2 * n];
        c[..n].copy_from_slice(&first_col);
        for k in 1..n {
            c[2 * n - k] = first_row[k];
        }
        fft.forward(&mut c);
        Ok(Self { first_col, first_row, fft, symbol: Arc::new(c) })
    }

    pub fn size(&self) -> usize {
        self.first_col.len()
    }

    pub fn first_col(&self) -> &[Complex64] {
        &self.first_col
    }

    pub fn first_row(&self) -> &[Complex64] {
        &self.first_row
    }

    /// Copy with every entry of modulus below `eps` set to zero.
    pub fn thresholded(&self, eps: f64) -> Self {
        let cut = |v: &[Complex64]| v.iter().map(|z| if z.norm() < eps { ZERO } else { *z }).collect();
        Self::new(cut(&self.first_col), cut(&self.first_row)).expect("same shape")
    }

    pub fn entry(&self, j: usize, k: usize) -> Complex64 {
        if j >= k {
            self.first_col[j - k]
        } else {
            self.first_row[k - j]
        }
    }

    pub fn to_dense(&self) -> CMatrix {
        let n = self.size();
        CMatrix::from_fn(n, n, |j, k| self.entry(j, k))
    }

    /// `M v` by circulant embedding.
    pub fn matvec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.size();
        if v.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: v.len() });
        }
        let mut buf = vec![ZERO; 2 * n];
        buf[..n].copy_from_slice(v);
        self.fft.forward(&mut buf);
        for (b, s) in buf.iter_mut().zip(self.symbol.iter()) {
            *b *= s;
        }
        self.fft.backward(&mut buf);
        let scale = 1.0 / (2 * n) as f64;
        buf.truncate(n);
        buf.iter_mut().for_each(|b| *b *= scale);
        Ok(buf)
    }
}

/// Potential matrix for `V` in the `N`-mode basis scaled by `nu`.
pub fn potential_operator(v: &SampledFunction, n_modes: usize, nu: f64) -> Result<ToeplitzOperator> {
    assemble_m(&mu_coeffs(v, n_modes, nu)?)
}
