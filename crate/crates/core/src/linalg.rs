//! Dense complex matrix helpers shared by the assembly and propagation code.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

pub(crate) const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
pub(crate) const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `i^p` for any integer `p`, exact.
pub fn i_pow(p: i64) -> Complex64 {
    match p.rem_euclid(4) {
        0 => ONE,
        1 => I,
        2 => -ONE,
        _ => -I,
    }
}

/// Complex matrix product, split into four real products so that the
/// optimized real GEMM kernel does the work.
pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.ncols(), b.nrows(), "matmul: inner dimensions differ");
    let ar = a.map(|z| z.re);
    let ai = a.map(|z| z.im);
    let br = b.map(|z| z.re);
    let bi = b.map(|z| z.im);
    let rr = &ar * &br;
    let ii = &ai * &bi;
    let ri = &ar * &bi;
    let ir = &ai * &br;
    CMatrix::from_fn(a.nrows(), b.ncols(), |r, c| Complex64::new(rr[(r, c)] - ii[(r, c)], ri[(r, c)] + ir[(r, c)]))
}

pub fn matvec(a: &CMatrix, v: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(a.ncols(), v.len());
    let mut out = vec![ZERO; a.nrows()];
    for (c, &vc) in v.iter().enumerate() {
        if vc == ZERO {
            continue;
        }
        let col = a.column(c);
        for (o, x) in out.iter_mut().zip(col.iter()) {
            *o += x * vc;
        }
    }
    out
}

/// Largest entry of `|H - H^H|`.
pub fn hermitian_defect(h: &CMatrix) -> f64 {
    let n = h.nrows();
    let mut worst: f64 = 0.0;
    for r in 0..n {
        for c in r..n {
            worst = worst.max((h[(r, c)] - h[(c, r)].conj()).norm());
        }
    }
    worst
}

/// Gershgorin enclosure `[zeta, eta]` of the (real) spectrum of a Hermitian matrix.
pub fn gershgorin_bounds(h: &CMatrix) -> (f64, f64) {
    let n = h.nrows();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for r in 0..n {
        let radius: f64 = (0..n).filter(|&c| c != r).map(|c| h[(r, c)].norm()).sum();
        let d = h[(r, r)].re;
        lo = lo.min(d - radius);
        hi = hi.max(d + radius);
    }
    (lo, hi)
}

/// Induced 1-norm (max column sum).
pub fn one_norm(h: &CMatrix) -> f64 {
    (0..h.ncols()).map(|c| h.column(c).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
