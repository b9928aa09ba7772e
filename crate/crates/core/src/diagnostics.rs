//! Mass, error, decay-rate and convergence-order measurements.

use crate::basis::{synthesize, SpectralState, ThetaGrid};
use crate::error::{Error, Result};
use crate::fft::FftPair;
use crate::linalg::{i_pow, ZERO};

/// Errors at or below this level are treated as saturated in order fits.
pub const SATURATION_LEVEL: f64 = 1e-13;

/// Probe points are restricted to `|x| <= PROBE_EXTENT * nu`.
pub const PROBE_EXTENT: f64 = 50.0;

/// Least-squares slope of `ys` against `xs`.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    least_squares_fit(xs, ys).0
}

/// Slope and root-mean-square residual of the least-squares line.
pub fn least_squares_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let ss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - my - slope * (x - mx)).powi(2)).sum();
    (slope, (ss / n).sqrt())
}

/// Mass by Parseval and by trapezoidal quadrature in `theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mass {
    pub parseval: f64,
    pub quadrature: f64,
}

/// `int |psi_N|^2 dx`, both as `sum |zeta_k|^2` and as
/// `(1/2pi) int |sum zeta_k i^k e^{ik theta}|^2 dtheta` on `4N` points (exact).
pub fn mass(u: &SpectralState) -> Mass {
    let parseval = u.coeffs().iter().map(|z| z.norm_sqr()).sum();
    let n = u.n_modes() as i64;
    let len = 4 * u.n_modes();
    let mut buf = vec![ZERO; len];
    for (slot, z) in u.coeffs().iter().enumerate() {
        let k = slot as i64 - n;
        buf[k.rem_euclid(len as i64) as usize] = z * i_pow(-k);
    }
    FftPair::new(len).backward(&mut buf);
    let quadrature = buf.iter().map(|z| z.norm_sqr()).sum::<f64>() / len as f64;
    Mass { parseval, quadrature }
}

/// Mapped nodes of the finer of two states, without the point at infinity,
/// restricted to `|x| <= 50 nu`.
pub fn default_probe(u: &SpectralState, u_ref: &SpectralState) -> Result<Vec<f64>> {
    let n = u.n_modes().max(u_ref.n_modes());
    let nu = u.scaling();
    let grid = ThetaGrid::new(n, nu)?;
    Ok(grid.mapped_nodes()[1..].iter().copied().filter(|x| x.abs() <= PROBE_EXTENT * nu).collect())
}

/// `max_x |psi_N(x) - psi_ref(x)|` over the probe points.
pub fn max_error(u: &SpectralState, u_ref: &SpectralState, probe: &[f64]) -> Result<f64> {
    if u.scaling() != u_ref.scaling() {
        return Err(Error::ScalingMismatch(u.scaling(), u_ref.scaling()));
    }
    let n = u.n_modes().max(u_ref.n_modes());
    let a = synthesize(&u.padded(n)?, probe);
    let b = synthesize(&u_ref.padded(n)?, probe);
    Ok(a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max))
}

/// [`max_error`] on [`default_probe`].
pub fn max_error_default(u: &SpectralState, u_ref: &SpectralState) -> Result<f64> {
    max_error(u, u_ref, &default_probe(u, u_ref)?)
}

/// Slope of `log|psi_N(x)|` against `log x` on 64 log-spaced points of the
/// window `[lo, hi]` (positive `x`).
pub fn decay_slope(u: &SpectralState, window: (f64, f64)) -> Result<f64> {
    decay_slope_signed(u, window, 1.0)
}

/// As [`decay_slope`], on `[-hi, -lo]` when `side < 0`.
pub fn decay_slope_signed(u: &SpectralState, window: (f64, f64), side: f64) -> Result<f64> {
    let (lo, hi) = window;
    let limit = ThetaGrid::new(u.n_modes(), u.scaling())?.resolved_extent();
    if !(lo > 0.0 && hi > lo && hi <= limit) {
        return Err(Error::WindowUnresolved { lo, hi, limit });
    }
    let m = 64;
    let logs: Vec<f64> = (0..m).map(|i| lo.ln() + (hi / lo).ln() * i as f64 / (m - 1) as f64).collect();
    let xs: Vec<f64> = logs.iter().map(|l| side.signum() * l.exp()).collect();
    let vals: Vec<f64> = synthesize(u, &xs).iter().map(|z| z.norm().ln()).collect();
    Ok(least_squares_slope(&logs, &vals))
}

/// Slope and residual of `log err` against `log param`, ignoring saturated points.
pub fn fit_order(param: &[f64], err: &[f64]) -> Result<(f64, f64)> {
    if param.len() != err.len() {
        return Err(Error::DimensionMismatch { expected: param.len(), got: err.len() });
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = param
        .iter()
        .zip(err)
        .filter(|(p, e)| **e > SATURATION_LEVEL && e.is_finite() && **p > 0.0)
        .map(|(p, e)| (p.ln(), e.ln()))
        .unzip();
    if xs.len() < 3 {
        return Err(Error::TooFewPoints(xs.len()));
    }
    Ok(least_squares_fit(&xs, &ys))
}

/// Errors of a refinement study with the fitted algebraic order.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub params: Vec<f64>,
    pub errors: Vec<f64>,
    pub fitted_slope: f64,
    pub fit_residual: f64,
}

impl ConvergenceReport {
    pub fn new(params: Vec<f64>, errors: Vec<f64>) -> Result<Self> {
        let (fitted_slope, fit_residual) = fit_order(&params, &errors)?;
        Ok(Self { params, errors, fitted_slope, fit_residual })
    }

    /// `err_i / err_{i+1}` for consecutive entries.
    pub fn ratios(&self) -> Vec<f64> {
        self.errors.windows(2).map(|w| w[0] / w[1]).collect()
    }
}

/// `(k, |zeta_k|)` for `k >= 0`, the one-sided coefficient magnitudes.
pub fn coefficient_magnitudes(u: &SpectralState) -> Vec<(i64, f64)> {
    u.indices().filter(|k| *k >= 0).map(|k| (k, u.get(k).norm())).collect()
}

/// Geometric per-mode decay ratio `exp(slope)` of `log|zeta_k|` over `k in [k0, k1]`.
pub fn mode_ratio(u: &SpectralState, k0: i64, k1: i64) -> f64 {
    let (ks, ls): (Vec<f64>, Vec<f64>) = (k0..=k1).map(|k| (k as f64, u.get(k).norm().ln())).unzip();
    least_squares_slope(&ks, &ls).exp()
}

/// Per-mode decay rates of the monotone envelope `max_{j >= k} |zeta_j|`:
/// minus the least-squares slope of its logarithm on each window
/// `[edges[i], edges[i+1]]`.
///
/// Constant rates mean geometric decay; decreasing rates mean the log-envelope
/// is convex, i.e. subexponential decay. Wide windows average out the beating
/// seen in the coefficients of functions that are poorly matched to `nu`.
pub fn envelope_decay_rates(u: &SpectralState, edges: &[i64]) -> Result<Vec<f64>> {
    let top = u.n_modes() as i64 - 1;
    if edges.windows(2).any(|w| w[1] <= w[0]) || edges.first().is_some_and(|k| *k < 0) {
        return Err(Error::InvalidModeWindow);
    }
    if edges.last().is_some_and(|k| *k > top) {
        return Err(Error::InvalidModeWindow);
    }
    let mut env = vec![0.0; u.n_modes()];
    let mut run: f64 = 0.0;
    for k in (0..=top).rev() {
        run = run.max(u.get(k).norm());
        env[k as usize] = run;
    }
    Ok(edges
        .windows(2)
        .map(|w| {
            let (ks, ls): (Vec<f64>, Vec<f64>) = (w[0]..=w[1]).map(|k| (k as f64, env[k as usize].ln())).unzip();
            -least_squares_slope(&ks, &ls)
        })
        .collect())
}
