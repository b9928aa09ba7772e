//! `exp(-i lambda H)` for Hermitian `H` by Chebyshev-Bessel expansion.
//!
//! With the spectrum of `H` inside `[zeta, eta]` and `H^ = (2H - (zeta+eta)I)/(eta-zeta)`,
//!
//! ```text
//! exp(-i lambda H) = e^{-i lambda (eta+zeta)/2} [c_0 I + 2 sum_{k=1}^{m} c_k T_k(H^)],
//! c_k = (-i)^k J_k(lambda (eta-zeta)/2).
//! ```
//!
//! With `m = 18` the truncation is below double precision as long as
//! `|lambda| (eta-zeta)/2 <= 2.212`; larger arguments are halved `s` times and
//! the result squared back.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_defect, i_pow, matmul, matvec, CMatrix, ONE};
use crate::special::bessel_j;

pub const CHEB_DEGREE: usize = 18;
pub const CHEB_THRESHOLD: f64 = 2.212;
const HERMITIAN_TOL: f64 = 1e-12;

/// How the Chebyshev matrix polynomial is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChebEval {
    /// Blocked in `Y = T_4(H^)` and summed by Clenshaw in `Y` (7 products at m = 18).
    #[default]
    Grouped,
    /// Plain three-term recurrence (m - 1 products).
    Recurrence,
}

/// Dense unitary `exp(-i lambda H)`.
#[derive(Debug, Clone)]
pub struct HermitianPropagator {
    matrix: CMatrix,
    lambda: f64,
    bounds: (f64, f64),
    squarings: u32,
}

impl HermitianPropagator {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn bounds(&self) -> (f64, f64) {
        self.bounds
    }

    pub fn squarings(&self) -> u32 {
        self.squarings
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: v.len() });
        }
        Ok(matvec(&self.matrix, v))
    }
}

/// Number of halvings `s` making `|lambda|/2^s (eta-zeta)/2 <= 2.212`, and the
/// truncation bound `2 sum_{k>18} |J_k(2.212)|` of one unscaled evaluation.
pub fn propagator_error_budget(lambda: f64, zeta: f64, eta: f64) -> Result<(u32, f64)> {
    if !zeta.is_finite() || !eta.is_finite() || eta <= zeta {
        return Err(Error::InvalidBounds { zeta, eta });
    }
    let mut x = lambda.abs() * (eta - zeta) / 2.0;
    let mut s = 0;
    while x > CHEB_THRESHOLD {
        x /= 2.0;
        s += 1;
    }
    let mut tail = 0.0;
    for k in CHEB_DEGREE + 1..=CHEB_DEGREE + 30 {
        tail += bessel_j(k, CHEB_THRESHOLD)?.abs();
    }
    Ok((s, 2.0 * tail))
}

/// `exp(-i lambda H)` with the default degree and evaluation scheme.
pub fn cheb_expm(h: &CMatrix, lambda: f64, zeta: f64, eta: f64) -> Result<HermitianPropagator> {
    cheb_expm_with(h, lambda, zeta, eta, CHEB_DEGREE, ChebEval::Grouped)
}

/// `exp(-i lambda H)` with explicit Chebyshev degree `m` and evaluation scheme.
pub fn cheb_expm_with(
    h: &CMatrix,
    lambda: f64,
    zeta: f64,
    eta: f64,
    degree: usize,
    eval: ChebEval,
) -> Result<HermitianPropagator> {
    let (s, _) = propagator_error_budget(lambda, zeta, eta)?;
    let n = h.nrows();
    if h.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: h.ncols() });
    }
    let defect = hermitian_defect(h);
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    if lambda == 0.0 {
        return Ok(HermitianPropagator { matrix: CMatrix::identity(n, n), lambda, bounds: (zeta, eta), squarings: 0 });
    }

    let lam = lambda / f64::powi(2.0, s as i32);
    let half_width = (eta - zeta) / 2.0;
    let centre = (eta + zeta) / 2.0;
    let x = lam * half_width;
    let mut d = Vec::with_capacity(degree + 1);
    for k in 0..=degree {
        let j = bessel_j(k, x.abs())?;
        let j = if x < 0.0 && k % 2 == 1 { -j } else { j };
        let ck = i_pow(-(k as i64)) * j;
        d.push(if k == 0 { ck } else { ck * 2.0 });
    }

    let mut hs = h.clone();
    for i in 0..n {
        hs[(i, i)] -= centre;
    }
    hs /= Complex64::new(half_width, 0.0);

    let mut u = match eval {
        ChebEval::Grouped => cheb_grouped(&hs, &d),
        ChebEval::Recurrence => cheb_recurrence(&hs, &d),
    };
    u *= Complex64::from_polar(1.0, -lam * centre);
    for _ in 0..s {
        u = matmul(&u, &u);
    }
    Ok(HermitianPropagator { matrix: u, lambda, bounds: (zeta, eta), squarings: s })
}

fn add_scaled(acc: &mut CMatrix, m: &CMatrix, c: Complex64) {
    acc.zip_apply(m, |a, b| *a += b * c);
}

fn add_identity(acc: &mut CMatrix, c: Complex64) {
    for i in 0..acc.nrows() {
        acc[(i, i)] += c;
    }
}

/// `sum_k d_k T_k(X)` by the three-term recurrence.
fn cheb_recurrence(x: &CMatrix, d: &[Complex64]) -> CMatrix {
    let n = x.nrows();
    let mut acc = CMatrix::zeros(n, n);
    add_identity(&mut acc, d[0]);
    if d.len() == 1 {
        return acc;
    }
    add_scaled(&mut acc, x, d[1]);
    let mut prev = CMatrix::identity(n, n);
    let mut cur = x.clone();
    for dk in &d[2..] {
        let mut next = matmul(x, &cur) * Complex64::new(2.0, 0.0);
        next -= &prev;
        add_scaled(&mut acc, &next, *dk);
        prev = std::mem::replace(&mut cur, next);
    }
    acc
}

/// Re-expand `sum_k d_k T_k(X)` as `sum_j q_j(X) T_j(Y)`, `Y = T_B(X)`, where each
/// `q_j` has degree below `B`. Uses `T_{Bj+r} = 2 T_r T_{Bj} - T_{Bj-r}`.
fn regroup(d: &[Complex64], block: usize) -> Vec<Vec<Complex64>> {
    let mut d = d.to_vec();
    let blocks = (d.len() - 1) / block + 1;
    let mut e = vec![vec![Complex64::new(0.0, 0.0); block]; blocks];
    for k in (0..d.len()).rev() {
        let (j, r) = (k / block, k % block);
        if j == 0 || r == 0 {
            e[j][r] += d[k];
        } else {
            e[j][r] += d[k] * 2.0;
            let low = block * j - r;
            let dk = d[k];
            d[low] -= dk;
        }
    }
    e
}

const GROUP_BLOCK: usize = 4;

/// Chebyshev sum grouped in `Y = T_4(X)`.
fn cheb_grouped(x: &CMatrix, d: &[Complex64]) -> CMatrix {
    let n = x.nrows();
    if d.len() <= GROUP_BLOCK {
        return cheb_recurrence(x, d);
    }
    let two = Complex64::new(2.0, 0.0);
    let ident = CMatrix::identity(n, n);
    let mut t2 = matmul(x, x) * two;
    t2 -= &ident;
    let mut t3 = matmul(x, &t2) * two;
    t3 -= x;
    let mut y = matmul(&t2, &t2) * two;
    y -= &ident;
    let basis = [None, Some(x), Some(&t2), Some(&t3)];

    let e = regroup(d, GROUP_BLOCK);
    let q = |j: usize| {
        let mut m = CMatrix::zeros(n, n);
        add_identity(&mut m, e[j][0]);
        for (r, t) in basis.iter().enumerate().skip(1) {
            if e[j][r] != Complex64::new(0.0, 0.0) {
                add_scaled(&mut m, t.unwrap(), e[j][r]);
            }
        }
        m
    };
    // Clenshaw: b_j = q_j + 2 Y b_{j+1} - b_{j+2}; p = q_0 + Y b_1 - b_2.
    let top = e.len() - 1;
    let mut b1 = q(top);
    let mut b2 = CMatrix::zeros(n, n);
    for j in (1..top).rev() {
        let mut bj = matmul(&y, &b1) * two;
        bj -= &b2;
        bj += q(j);
        b2 = std::mem::replace(&mut b1, bj);
    }
    let mut p = matmul(&y, &b1);
    p -= &b2;
    p += q(0);
    p
}

/// `exp(-i lambda H)` from a Hermitian eigendecomposition; reference only.
pub fn eig_expm(h: &CMatrix, lambda: f64) -> CMatrix {
    let eig = h.clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let phases = CMatrix::from_diagonal(&eig.eigenvalues.map(|e| Complex64::from_polar(1.0, -lambda * e)));
    v * phases * v.adjoint()
}

/// `max |U U^H - I|`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.nrows();
    let p = matmul(u, &u.adjoint());
    let mut m: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let e = if i == j { ONE } else { Complex64::new(0.0, 0.0) };
            m = m.max((p[(i, j)] - e).norm());
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fraclap::assemble_core_alpha1;
    use crate::linalg::{gershgorin_bounds, max_abs_diff, vec_norm};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Deterministic pseudo-random Hermitian matrix.
    fn hermitian(n: usize, seed: u64) -> CMatrix {
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let mut h = CMatrix::zeros(n, n);
        for i in 0..n {
            h[(i, i)] = c(next(), 0.0);
            for j in 0..i {
                let z = c(next(), next());
                h[(i, j)] = z;
                h[(j, i)] = z.conj();
            }
        }
        h
    }

    #[test]
    fn budget_examples() {
        assert_eq!(propagator_error_budget(1.0, 0.0, 4.0).unwrap().0, 0);
        assert_eq!(propagator_error_budget(1.0, 0.0, 20.0).unwrap().0, 3);
        assert_eq!(propagator_error_budget(1.0, -1.106, 1.106).unwrap().0, 0);
        assert_eq!(propagator_error_budget(-1.0, 0.0, 20.0).unwrap().0, 3);
        let (_, bound) = propagator_error_budget(1.0, 0.0, 1.0).unwrap();
        assert!(bound <= f64::EPSILON / 2.0, "{bound}");
        assert!(propagator_error_budget(1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn zero_time_is_identity() {
        let h = hermitian(6, 1);
        let (lo, hi) = gershgorin_bounds(&h);
        let u = cheb_expm(&h, 0.0, lo, hi).unwrap();
        assert_eq!(u.matrix(), &CMatrix::identity(6, 6));
    }

    #[test]
    fn diagonal_example() {
        let h = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)]));
        let u = cheb_expm(&h, 1.0, 0.0, 2.0).unwrap();
        for (k, e) in [0.0f64, 1.0, 2.0].iter().enumerate() {
            assert!((u.matrix()[(k, k)] - Complex64::from_polar(1.0, -e)).norm() < 1e-15);
        }
        assert!(u.matrix()[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        let h = hermitian(4, 2);
        assert!(cheb_expm(&h, 1.0, 1.0, 0.0).is_err());
        let mut g = h.clone();
        g[(0, 1)] += c(1e-9, 0.0);
        assert!(matches!(cheb_expm(&g, 1.0, -5.0, 5.0), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn core_alpha1_matches_eigendecomposition() {
        let h = assemble_core_alpha1(64).unwrap();
        let (lo, hi) = gershgorin_bounds(&h);
        let u = cheb_expm(&h, 0.01, lo, hi).unwrap();
        assert!(max_abs_diff(u.matrix(), &eig_expm(&h, 0.01)) < 1e-13);
    }

    #[test]
    fn grouped_agrees_with_recurrence() {
        for (seed, lam) in [(3u64, 0.3), (4, 2.0), (5, -7.5), (6, 40.0)] {
            let h = hermitian(24, seed);
            let (lo, hi) = gershgorin_bounds(&h);
            let a = cheb_expm_with(&h, lam, lo, hi, CHEB_DEGREE, ChebEval::Grouped).unwrap();
            let b = cheb_expm_with(&h, lam, lo, hi, CHEB_DEGREE, ChebEval::Recurrence).unwrap();
            assert!(max_abs_diff(a.matrix(), b.matrix()) < 1e-13);
        }
    }

    #[test]
    fn regroup_reproduces_scalar_series() {
        let d: Vec<Complex64> = (0..19).map(|k| c(1.0 / (k + 1) as f64, (k as f64).sin())).collect();
        let e = regroup(&d, 4);
        for &x in &[-0.9f64, -0.2, 0.4, 1.0] {
            let t = |k: usize| (k as f64 * x.acos()).cos();
            let direct: Complex64 = d.iter().enumerate().map(|(k, dk)| dk * t(k)).sum();
            let y = t(4);
            let ty = |j: usize| (j as f64 * y.acos()).cos();
            let grouped: Complex64 = e
                .iter()
                .enumerate()
                .map(|(j, row)| row.iter().enumerate().map(|(r, v)| v * t(r)).sum::<Complex64>() * ty(j))
                .sum();
            assert!((direct - grouped).norm() < 1e-12);
        }
    }

    #[test]
    fn group_and_conjugation_properties() {
        let h = hermitian(20, 7);
        let (lo, hi) = gershgorin_bounds(&h);
        let u1 = cheb_expm(&h, 0.7, lo, hi).unwrap();
        let u2 = cheb_expm(&h, 1.9, lo, hi).unwrap();
        let u12 = cheb_expm(&h, 2.6, lo, hi).unwrap();
        assert!(max_abs_diff(&matmul(u1.matrix(), u2.matrix()), u12.matrix()) < 1e-11);
        let back = cheb_expm(&h, -0.7, lo, hi).unwrap();
        assert!(max_abs_diff(&u1.matrix().adjoint(), back.matrix()) < 1e-11);
        assert!(unitarity_defect(u12.matrix()) < 1e-11);
    }

    #[test]
    fn degree_sweep_is_saturated() {
        let h = hermitian(16, 8);
        let (lo, hi) = gershgorin_bounds(&h);
        let base = cheb_expm(&h, 1.3, lo, hi).unwrap();
        for m in [20, 24, 30] {
            let u = cheb_expm_with(&h, 1.3, lo, hi, m, ChebEval::Grouped).unwrap();
            assert!(max_abs_diff(u.matrix(), base.matrix()) <= 1e-14, "m={m}");
        }
    }

    #[test]
    fn spectral_mapping_on_diagonal() {
        let diag: Vec<f64> = (0..10).map(|k| (k as f64 * 0.37).sin() * 5.0).collect();
        let h = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(10, diag.iter().map(|&v| c(v, 0.0))));
        let u = cheb_expm(&h, 3.1, -5.0, 5.0).unwrap();
        assert!(u.squarings() > 0);
        for (k, v) in diag.iter().enumerate() {
            assert!((u.matrix()[(k, k)] - Complex64::from_polar(1.0, -3.1 * v)).norm() < 1e-14);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn apply_preserves_norm(seed in 0u64..1000, lam in -20.0f64..20.0, v in proptest::collection::vec(-1.0f64..1.0, 24)) {
            let h = hermitian(12, seed);
            let (lo, hi) = gershgorin_bounds(&h);
            let u = cheb_expm(&h, lam, lo, hi).unwrap();
            let x: Vec<Complex64> = v[..12].iter().zip(&v[12..]).map(|(a, b)| c(*a, *b)).collect();
            let y = u.apply(&x).unwrap();
            prop_assert!((vec_norm(&y) - vec_norm(&x)).abs() < 1e-12);
        }
    }
}
