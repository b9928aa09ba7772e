//! Galerkin action of the cubic term `|psi|^2 psi` in coefficient space.
//!
//! For `psi = sum zeta_j phi_j^S`, the projection of `|psi|^2 psi` onto
//! `phi_j^S` is `(B(U) U)_j` with the Hermitian Toeplitz matrix
//! `B_{jk} = rho_{j-k}`,
//!
//! ```text
//! rho_k = (i^{-k} / (pi^2 nu)) int cos^2(theta/2) |sum_j zeta_j i^j e^{ij theta}|^2 e^{-ik theta} dtheta.
//! ```
//!
//! The integrand is a trigonometric polynomial of degree at most `2N`, so the
//! trapezoidal rule on `L >= 8N` points is exact.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::basis::SpectralState;
use crate::error::Result;
use crate::fft::FftPair;
use crate::linalg::{i_pow, ZERO};
use crate::potential::ToeplitzOperator;

/// Coefficient sup-norm above which a run is declared blown up.
pub const BLOWUP_THRESHOLD: f64 = 1e8;

/// True once `||U||_inf > 1e8` or any coefficient is not finite.
pub fn blowup_detected(coeffs: &[Complex64]) -> bool {
    coeffs.iter().any(|z| !(z.re.is_finite() && z.im.is_finite()) || z.norm() > BLOWUP_THRESHOLD)
}

/// `B(U)` together with its generating sequence.
#[derive(Debug, Clone)]
pub struct NonlinearAction {
    rho: Vec<Complex64>,
    operator: ToeplitzOperator,
}

impl NonlinearAction {
    /// `rho_k`, `k = 1-2N ..= 2N-1`, stored at offset `k + 2N - 1`.
    pub fn rho(&self) -> &[Complex64] {
        &self.rho
    }

    pub fn operator(&self) -> &ToeplitzOperator {
        &self.operator
    }
}

/// FFT plans for a fixed `N`; evaluating the nonlinearity allocates nothing else.
#[derive(Debug, Clone)]
pub struct CubicNonlinearity {
    n_modes: usize,
    grid: FftPair,
    toeplitz: FftPair,
}

impl CubicNonlinearity {
    pub fn new(n_modes: usize) -> Self {
        Self::with_grid_len(n_modes, (8 * n_modes).next_power_of_two())
    }

    /// Explicit oversampled length (must exceed `4N`).
    pub fn with_grid_len(n_modes: usize, len: usize) -> Self {
        assert!(len > 4 * n_modes, "grid length {len} too short for N = {n_modes}");
        Self { n_modes, grid: FftPair::new(len), toeplitz: FftPair::new(4 * n_modes) }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn rho_coeffs(&self, u: &SpectralState) -> Vec<Complex64> {
        let n = self.n_modes as i64;
        assert_eq!(u.n_modes(), self.n_modes, "state size does not match");
        let len = self.grid.len();
        let mut buf = vec![ZERO; len];
        for (slot, a) in u.coeffs().iter().enumerate() {
            let k = slot as i64 - n;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            buf[k.rem_euclid(len as i64) as usize] = a * i_pow(k) * sign;
        }
        self.grid.backward(&mut buf);
        let h = 2.0 * PI / len as f64;
        for (l, b) in buf.iter_mut().enumerate() {
            let cos = (0.5 * (-PI + h * l as f64)).cos();
            *b = Complex64::new(cos * cos * b.norm_sqr(), 0.0);
        }
        self.grid.forward(&mut buf);
        let scale = 2.0 / (PI * len as f64 * u.scaling());
        (1 - 2 * n..2 * n)
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                i_pow(-k) * buf[k.rem_euclid(len as i64) as usize] * (sign * scale)
            })
            .collect()
    }

    pub fn action(&self, u: &SpectralState) -> NonlinearAction {
        let rho = self.rho_coeffs(u);
        let mid = 2 * self.n_modes - 1;
        let col = (0..2 * self.n_modes).map(|k| rho[mid + k]).collect();
        let row = (0..2 * self.n_modes).map(|k| rho[mid - k]).collect();
        let operator = ToeplitzOperator::with_fft(col, row, self.toeplitz.clone()).expect("sizes fixed by N");
        NonlinearAction { rho, operator }
    }

    /// `B(U) U`, the coefficients of the projection of `|psi|^2 psi`.
    pub fn apply(&self, u: &SpectralState) -> Vec<Complex64> {
        self.action(u).operator.matvec(u.coeffs()).expect("sizes fixed by N")
    }
}

/// `rho_k` for `U` (plans built on the fly).
pub fn rho_coeffs(u: &SpectralState) -> Vec<Complex64> {
    CubicNonlinearity::new(u.n_modes()).rho_coeffs(u)
}

/// `B(U) U`. The focusing equation uses `T psi = -|psi|^2 psi`, so the time
/// stepper works with the negative of this vector.
pub fn apply_nonlinear(u: &SpectralState, _t: f64) -> Result<Vec<Complex64>> {
    Ok(CubicNonlinearity::new(u.n_modes()).apply(u))
}
