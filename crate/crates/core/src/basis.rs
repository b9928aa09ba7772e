//! Malmquist-Takenaka functions on the real line and their FFT transforms.
//!
//! The scaled system is `phi_n^S(x) = nu^{-1/2} phi_n(x / nu)` with
//! `phi_n(x) = i^n sqrt(2/pi) (1 + 2ix)^n / (1 - 2ix)^{n+1}`, `n in Z`.
//! Under `x = nu tan(theta/2) / 2` it becomes a trigonometric monomial times
//! `(1 - 2ix/nu)^{-1}`, so analysis and synthesis on the equispaced grid
//! `theta_j = -pi + pi j / N`, `j = 0..2N-1`, are single FFTs of length `2N`.
//!
//! Index layout: slot `j` of a coefficient vector holds Laurent index
//! `k = j - N`. The DFT bin of index `k` is `k mod 2N`, and the phase
//! convention is fixed by `a_k = (-i)^k sqrt(pi/2) / (2N) sum_j g_j e^{-ik theta_j}`
//! with `g_j = nu^{1/2} f(x_j) (1 - i tan(theta_j/2))`.
//!
//! Mapped Chebyshev functions are included for approximation comparisons.

use std::f64::consts::{FRAC_2_PI, PI};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::FftPair;
use crate::linalg::{i_pow, CMatrix, I, ONE, ZERO};

/// A function on the real line together with its behaviour at infinity.
///
/// The trapezoidal rules used here sample the point at infinity, so the
/// caller declares the limits the evaluator cannot provide:
/// * `tail_pos` / `tail_neg`: `lim x f(x)` as `x -> +inf` / `x -> -inf`
///   (zero for anything decaying faster than `1/|x|`);
/// * `limit`: `lim f(x)` as `|x| -> inf`, used when the function is a
///   bounded potential rather than an `L^2` state.
#[derive(Clone)]
pub struct SampledFunction {
    eval: Arc<dyn Fn(f64) -> Complex64 + Send + Sync>,
    limit: Complex64,
    tail_pos: Complex64,
    tail_neg: Complex64,
}

impl SampledFunction {
    pub fn new(f: impl Fn(f64) -> Complex64 + Send + Sync + 'static) -> Self {
        Self { eval: Arc::new(f), limit: ZERO, tail_pos: ZERO, tail_neg: ZERO }
    }

    pub fn real(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(move |x| Complex64::new(f(x), 0.0))
    }

    /// Same `lim x f(x)` at both ends.
    pub fn with_tail(self, c: Complex64) -> Self {
        self.with_tails(c, c)
    }

    pub fn with_tails(mut self, pos: Complex64, neg: Complex64) -> Self {
        self.tail_pos = pos;
        self.tail_neg = neg;
        self
    }

    pub fn with_limit(mut self, limit: Complex64) -> Self {
        self.limit = limit;
        self
    }

    #[inline]
    pub fn eval(&self, x: f64) -> Complex64 {
        (self.eval)(x)
    }

    pub fn limit(&self) -> Complex64 {
        self.limit
    }

    pub fn tails(&self) -> (Complex64, Complex64) {
        (self.tail_pos, self.tail_neg)
    }

    /// Value of `f(x) (1 - 2ix)` at `theta = -pi`, in the unscaled (`nu = 1`)
    /// variable. A jump between the two ends is averaged, which is what the
    /// periodic trapezoidal rule converges to.
    pub fn value_at_infinity(&self) -> Complex64 {
        -I * (self.tail_pos + self.tail_neg)
    }

    fn check_finite(&self) -> Result<()> {
        let ok = [self.limit, self.tail_pos, self.tail_neg].iter().all(|z| z.re.is_finite() && z.im.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::NonFiniteLimit)
        }
    }
}

impl fmt::Debug for SampledFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SampledFunction")
            .field("limit", &self.limit)
            .field("tail_pos", &self.tail_pos)
            .field("tail_neg", &self.tail_neg)
            .finish_non_exhaustive()
    }
}

/// Coefficients `zeta_k`, `k = -N..N-1`, of an expansion in scaled MTFs.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState {
    coeffs: Vec<Complex64>,
    n_modes: usize,
    scaling: f64,
}

impl SpectralState {
    pub fn new(coeffs: Vec<Complex64>, scaling: f64) -> Result<Self> {
        check_scaling(scaling)?;
        if coeffs.is_empty() || !coeffs.len().is_multiple_of(2) {
            return Err(Error::InvalidModes(coeffs.len() / 2));
        }
        let n_modes = coeffs.len() / 2;
        Ok(Self { coeffs, n_modes, scaling })
    }

    pub fn zeros(n_modes: usize, scaling: f64) -> Result<Self> {
        check_modes(n_modes)?;
        Self::new(vec![ZERO; 2 * n_modes], scaling)
    }

    /// The expansion consisting of the single function `phi_k^S`.
    pub fn unit(n_modes: usize, scaling: f64, k: i64) -> Result<Self> {
        let mut s = Self::zeros(n_modes, scaling)?;
        let slot = s.slot(k).ok_or(Error::InvalidIndex { ell: k, n: n_modes as i64 })?;
        s.coeffs[slot] = ONE;
        Ok(s)
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn scaling(&self) -> f64 {
        self.scaling
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Replace the coefficients, keeping `N` and `nu`.
    pub fn with_coeffs(&self, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != self.coeffs.len() {
            return Err(Error::DimensionMismatch { expected: self.coeffs.len(), got: coeffs.len() });
        }
        Ok(Self { coeffs, n_modes: self.n_modes, scaling: self.scaling })
    }

    /// Laurent indices `-N..N-1` in slot order.
    pub fn indices(&self) -> impl Iterator<Item = i64> {
        let n = self.n_modes as i64;
        -n..n
    }

    pub fn slot(&self, k: i64) -> Option<usize> {
        let n = self.n_modes as i64;
        (-n..n).contains(&k).then(|| (k + n) as usize)
    }

    /// Coefficient of Laurent index `k`; zero outside the stored range.
    pub fn get(&self, k: i64) -> Complex64 {
        self.slot(k).map_or(ZERO, |s| self.coeffs[s])
    }

    pub fn norm(&self) -> f64 {
        crate::linalg::vec_norm(&self.coeffs)
    }

    /// Embed into a larger (or equal) basis size by zero padding in Laurent index.
    pub fn padded(&self, n_modes: usize) -> Result<Self> {
        if n_modes < self.n_modes {
            return Err(Error::DimensionMismatch { expected: self.n_modes, got: n_modes });
        }
        let mut out = Self::zeros(n_modes, self.scaling)?;
        let off = n_modes - self.n_modes;
        out.coeffs[off..off + 2 * self.n_modes].copy_from_slice(&self.coeffs);
        Ok(out)
    }
}

fn check_modes(n: usize) -> Result<()> {
    if n < 1 {
        Err(Error::InvalidModes(n))
    } else {
        Ok(())
    }
}

fn check_scaling(nu: f64) -> Result<()> {
    if nu > 0.0 && nu.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidScaling(nu))
    }
}

/// Equispaced `theta` grid and its image on the real line.
#[derive(Debug, Clone)]
pub struct ThetaGrid {
    nodes: Vec<f64>,
    mapped_nodes: Vec<f64>,
    scaling: f64,
}

impl ThetaGrid {
    pub fn new(n_modes: usize, scaling: f64) -> Result<Self> {
        check_modes(n_modes)?;
        check_scaling(scaling)?;
        let n = n_modes as f64;
        let nodes: Vec<f64> = (0..2 * n_modes).map(|j| -PI + PI * j as f64 / n).collect();
        let mapped_nodes = nodes
            .iter()
            .enumerate()
            .map(|(j, &t)| if j == 0 { f64::NEG_INFINITY } else { 0.5 * scaling * (0.5 * t).tan() })
            .collect();
        Ok(Self { nodes, mapped_nodes, scaling })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// `x_j = nu tan(theta_j / 2) / 2`; `x_0` is `-inf`.
    pub fn mapped_nodes(&self) -> &[f64] {
        &self.mapped_nodes
    }

    pub fn scaling(&self) -> f64 {
        self.scaling
    }

    /// Largest finite node, `nu tan((pi - pi/N)/2) / 2`.
    pub fn resolved_extent(&self) -> f64 {
        *self.mapped_nodes.last().unwrap()
    }
}

/// `phi_n^S(x) = nu^{-1/2} phi_n(x / nu)`.
pub fn eval_mtf(n: i64, x: f64, nu: f64) -> Complex64 {
    let u = x / nu;
    let den = Complex64::new(1.0, -2.0 * u);
    let z = Complex64::new(1.0, 2.0 * u) / den;
    i_pow(n) * (FRAC_2_PI.sqrt() / nu.sqrt()) * z.powi(n as i32) / den
}

/// Samples `g_j = nu^{1/2} f(x_j) (1 - i tan(theta_j/2))` on the `theta` grid.
fn theta_samples(f: &SampledFunction, n_modes: usize, nu: f64) -> Vec<Complex64> {
    let n = n_modes as f64;
    let sq = nu.sqrt();
    (0..2 * n_modes)
        .map(|j| {
            if j == 0 {
                f.value_at_infinity() / sq
            } else {
                let t = (0.5 * (-PI + PI * j as f64 / n)).tan();
                sq * f.eval(0.5 * nu * t) * Complex64::new(1.0, -t)
            }
        })
        .collect()
}

/// Coefficients from `theta`-grid samples `g_j` (the inverse of [`theta_values`]).
pub fn analyze_theta_samples(mut g: Vec<Complex64>, nu: f64) -> Result<SpectralState> {
    check_scaling(nu)?;
    let len = g.len();
    if len == 0 || !len.is_multiple_of(2) {
        return Err(Error::InvalidModes(len / 2));
    }
    let n = len / 2;
    FftPair::new(len).forward(&mut g);
    let pref = (PI / 2.0).sqrt() / len as f64;
    // e^{-ik theta_j} = (-1)^k e^{-2 pi i k j / 2N}; (-i)^k (-1)^k = i^k
    let coeffs = (0..len)
        .map(|slot| {
            let k = slot as i64 - n as i64;
            i_pow(k) * pref * g[k.rem_euclid(len as i64) as usize]
        })
        .collect();
    SpectralState::new(coeffs, nu)
}

/// Orthogonal projection coefficients by the `2N`-point trapezoidal rule.
pub fn analyze(f: &SampledFunction, n_modes: usize, nu: f64) -> Result<SpectralState> {
    check_modes(n_modes)?;
    check_scaling(nu)?;
    f.check_finite()?;
    analyze_theta_samples(theta_samples(f, n_modes, nu), nu)
}

/// `g_j = nu^{1/2} psi(x_j) (1 - i tan(theta_j/2)) = sqrt(2/pi) sum_k zeta_k i^k e^{ik theta_j}`.
pub fn theta_values(state: &SpectralState) -> Vec<Complex64> {
    let len = state.coeffs.len();
    let n = state.n_modes as i64;
    let mut buf = vec![ZERO; len];
    for (slot, c) in state.coeffs.iter().enumerate() {
        let k = slot as i64 - n;
        buf[k.rem_euclid(len as i64) as usize] = c * i_pow(-k);
    }
    FftPair::new(len).backward(&mut buf);
    let s = FRAC_2_PI.sqrt();
    buf.iter_mut().for_each(|z| *z *= s);
    buf
}

/// Values of the expansion at the mapped nodes (`x_0 = -inf` gives zero).
pub fn synthesize_nodes(state: &SpectralState) -> Vec<Complex64> {
    let n = state.n_modes as f64;
    let sq = state.scaling.sqrt();
    theta_values(state)
        .into_iter()
        .enumerate()
        .map(|(j, g)| {
            if j == 0 {
                ZERO
            } else {
                let t = (0.5 * (-PI + PI * j as f64 / n)).tan();
                g / (sq * Complex64::new(1.0, -t))
            }
        })
        .collect()
}

/// Pointwise evaluation of `sum_k zeta_k phi_k^S(x)`.
pub fn synthesize(state: &SpectralState, xs: &[f64]) -> Vec<Complex64> {
    let nu = state.scaling;
    let n = state.n_modes as i32;
    let pref = FRAC_2_PI.sqrt() / nu.sqrt();
    xs.iter()
        .map(|&x| {
            let u = x / nu;
            let den = Complex64::new(1.0, -2.0 * u);
            let w = I * Complex64::new(1.0, 2.0 * u) / den;
            // sum_k zeta_k w^k = w^{-N} sum_m zeta_{m-N} w^m
            let poly = state.coeffs.iter().rev().fold(ZERO, |acc, c| acc * w + c);
            pref * poly * w.powi(-n) / den
        })
        .collect()
}

/// Tridiagonal matrix of `d/dx` in the unscaled basis, rows/columns in slot order.
pub fn diff_matrix(n_modes: usize) -> Result<CMatrix> {
    check_modes(n_modes)?;
    let n = n_modes as i64;
    let len = 2 * n_modes;
    let mut d = CMatrix::zeros(len, len);
    for col in 0..len {
        let k = col as i64 - n;
        d[(col, col)] = Complex64::new(0.0, (2 * k + 1) as f64);
        if col > 0 {
            d[(col - 1, col)] = Complex64::new(-(k as f64), 0.0);
        }
        if col + 1 < len {
            d[(col + 1, col)] = Complex64::new((k + 1) as f64, 0.0);
        }
    }
    Ok(d)
}

/// Scaled mapped Chebyshev function `nu^{-1/2} T_k(x / nu)`.
pub fn eval_mcf(k: usize, x: f64, nu: f64) -> f64 {
    let u = x / nu;
    let r = (1.0 + u * u).sqrt();
    let ck = if k == 0 { 2.0 } else { 1.0 };
    let theta = (u / r).clamp(-1.0, 1.0).acos();
    (k as f64 * theta).cos() / (r * (ck * PI / 2.0).sqrt() * nu.sqrt())
}

/// Minimum number of trapezoidal panels on `(0, pi)` for [`mcf_analyze`].
pub const MCF_MIN_PANELS: usize = 1 << 16;

/// Mapped Chebyshev coefficients `a_k = int f(x) nu^{-1/2} T_k(x/nu) dx`,
/// `k = 0..n_terms-1`, by the trapezoidal rule in `theta` (`x = nu cot theta`).
///
/// For `f ~ |x|^{-p}` the mapped integrand has `sin^{p-1}` kinks at the ends,
/// which limits the rule to algebraic accuracy; the panel count is therefore
/// at least [`MCF_MIN_PANELS`] rather than `n_terms`.
pub fn mcf_analyze(f: &SampledFunction, n_terms: usize, nu: f64) -> Result<Vec<Complex64>> {
    check_modes(n_terms)?;
    check_scaling(nu)?;
    f.check_finite()?;
    let m = n_terms.max(MCF_MIN_PANELS).next_power_of_two();
    let sq = nu.sqrt();
    let (tp, tn) = f.tails();
    // Even extension of h(theta) = nu^{1/2} f(nu cot theta) / sin theta to length 2m.
    let mut buf = vec![ZERO; 2 * m];
    buf[0] = tp / sq;
    buf[m] = -tn / sq;
    for j in 1..m {
        let th = PI * j as f64 / m as f64;
        let h = sq * f.eval(nu / th.tan()) / th.sin();
        buf[j] = h;
        buf[2 * m - j] = h;
    }
    FftPair::new(2 * m).forward(&mut buf);
    Ok((0..n_terms)
        .map(|k| {
            let ck = if k == 0 { 2.0 } else { 1.0 };
            buf[k] * (PI / (2.0 * m as f64)) / (ck * PI / 2.0).sqrt()
        })
        .collect())
}

pub fn mcf_synthesize(coeffs: &[Complex64], xs: &[f64], nu: f64) -> Vec<Complex64> {
    xs.iter().map(|&x| coeffs.iter().enumerate().map(|(k, c)| c * eval_mcf(k, x, nu)).sum()).collect()
}
