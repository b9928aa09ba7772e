//! Time integration of `U' = -i (gamma A + M) U` and of `U' = -L U - i N(U, t)`.
//!
//! Linear problems use the dense exact propagator or symmetric splittings of
//! `exp(-i tau (gamma A + M))`. Nonlinear problems use the Krogstad-P22
//! exponential integrator with (2,2)-Pade matrix functions, `L = i gamma A`.

use std::collections::HashMap;

use nalgebra::{DVector, LU};
use num_complex::Complex64;

use crate::basis::SpectralState;
use crate::error::{Error, Result};
use crate::expm::{cheb_expm, HermitianPropagator};
use crate::fraclap::FracLapOperator;
use crate::linalg::{gershgorin_bounds, matvec, CMatrix, ZERO};
use crate::potential::ToeplitzOperator;

const SM3_W1: f64 = -1.17767998417887;
const SM3_W2: f64 = 0.235573213359;
const SM3_W3: f64 = 0.784513610477;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeName {
    Sm1,
    Sm2,
    Sm3,
}

/// Coefficients of `S(tau) = prod_j exp(-i a_j gamma tau A) exp(-i b_j tau M)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplittingScheme {
    pub name: SchemeName,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub order: u32,
}

impl SplittingScheme {
    pub fn new(name: SchemeName) -> Self {
        match name {
            SchemeName::Sm1 => Self { name, a: vec![0.5, 0.5], b: vec![1.0, 0.0], order: 2 },
            SchemeName::Sm2 => {
                let cbrt2 = 2f64.cbrt();
                let k0 = -cbrt2 / (2.0 - cbrt2);
                let k1 = 1.0 / (2.0 - cbrt2);
                Self {
                    name,
                    a: vec![k1 / 2.0, (k0 + k1) / 2.0, (k0 + k1) / 2.0, k1 / 2.0],
                    b: vec![k1, k0, k1, 0.0],
                    order: 4,
                }
            }
            SchemeName::Sm3 => {
                let (w1, w2, w3) = (SM3_W1, SM3_W2, SM3_W3);
                let w0 = 1.0 - 2.0 * (w1 + w2 + w3);
                let a = vec![w3 / 2.0, (w2 + w3) / 2.0, (w1 + w2) / 2.0, (w0 + w1) / 2.0];
                let mut a_full = a.clone();
                a_full.extend(a.iter().rev());
                Self { name, a: a_full, b: vec![w3, w2, w1, w0, w1, w2, w3, 0.0], order: 6 }
            }
        }
    }

    pub fn sm1() -> Self {
        Self::new(SchemeName::Sm1)
    }

    pub fn sm2() -> Self {
        Self::new(SchemeName::Sm2)
    }

    pub fn sm3() -> Self {
        Self::new(SchemeName::Sm3)
    }

    pub fn stages(&self) -> usize {
        self.a.len()
    }
}

/// `exp(-i lambda A)` kept as its two diagonal blocks.
#[derive(Debug, Clone)]
pub struct BlockPropagator {
    neg: HermitianPropagator,
    pos: HermitianPropagator,
}

impl BlockPropagator {
    pub fn new(a: &FracLapOperator, lambda: f64) -> Result<Self> {
        let (lo, hi) = a.bounds();
        let hi = if hi > lo { hi } else { lo + 1.0 };
        let neg = cheb_expm(&a.negative_block(), lambda, lo, hi)?;
        let pos = cheb_expm(&a.positive_block(), lambda, lo, hi)?;
        Ok(Self { neg, pos })
    }

    pub fn dim(&self) -> usize {
        self.neg.dim() + self.pos.dim()
    }

    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.neg.dim();
        if v.len() != 2 * n {
            return Err(Error::DimensionMismatch { expected: 2 * n, got: v.len() });
        }
        let mut out = self.neg.apply(&v[..n])?;
        out.extend(self.pos.apply(&v[n..])?);
        Ok(out)
    }

    pub fn to_dense(&self) -> CMatrix {
        let n = self.neg.dim();
        let mut m = CMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(self.neg.matrix());
        m.view_mut((n, n), (n, n)).copy_from(self.pos.matrix());
        m
    }
}

/// Spectral enclosure for a dense Hermitian generator, padded when degenerate.
fn enclosure(h: &CMatrix) -> (f64, f64) {
    let (lo, hi) = gershgorin_bounds(h);
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

/// Dense `exp(-i t (gamma A + M))` (reference quality).
pub fn exact_propagator(a: &FracLapOperator, m: &ToeplitzOperator, gamma: f64, t: f64) -> Result<HermitianPropagator> {
    if m.size() != 2 * a.n_modes() {
        return Err(Error::DimensionMismatch { expected: 2 * a.n_modes(), got: m.size() });
    }
    let mut h = a.to_dense() * Complex64::new(gamma, 0.0);
    h += m.to_dense();
    let (lo, hi) = enclosure(&h);
    cheb_expm(&h, t, lo, hi)
}

/// `U(t) = exp(-i t (gamma A + M)) U(0)`.
pub fn exact_propagate(
    a: &FracLapOperator,
    m: &ToeplitzOperator,
    gamma: f64,
    t: f64,
    u0: &SpectralState,
) -> Result<SpectralState> {
    if u0.n_modes() != a.n_modes() {
        return Err(Error::DimensionMismatch { expected: a.n_modes(), got: u0.n_modes() });
    }
    if t == 0.0 {
        return Ok(u0.clone());
    }
    let p = exact_propagator(a, m, gamma, t)?;
    u0.with_coeffs(p.apply(u0.coeffs())?)
}

/// The exponentials one splitting step needs, built once per `(scheme, tau)`.
#[derive(Debug, Clone)]
pub struct SplittingPropagators {
    scheme: SplittingScheme,
    tau: f64,
    props_a: Vec<Option<BlockPropagator>>,
    props_m: Vec<Option<HermitianPropagator>>,
}

impl SplittingPropagators {
    pub fn new(
        scheme: &SplittingScheme,
        a: &FracLapOperator,
        m: &ToeplitzOperator,
        gamma: f64,
        tau: f64,
    ) -> Result<Self> {
        if m.size() != 2 * a.n_modes() {
            return Err(Error::DimensionMismatch { expected: 2 * a.n_modes(), got: m.size() });
        }
        let md = m.to_dense();
        let (lo, hi) = enclosure(&md);
        let mut cache_a: HashMap<u64, BlockPropagator> = HashMap::new();
        let mut cache_m: HashMap<u64, HermitianPropagator> = HashMap::new();
        let mut props_a = Vec::with_capacity(scheme.stages());
        let mut props_m = Vec::with_capacity(scheme.stages());
        for (&aj, &bj) in scheme.a.iter().zip(&scheme.b) {
            props_a.push(if aj == 0.0 {
                None
            } else {
                let p = match cache_a.get(&aj.to_bits()) {
                    Some(p) => p.clone(),
                    None => {
                        let p = BlockPropagator::new(a, aj * gamma * tau)?;
                        cache_a.insert(aj.to_bits(), p.clone());
                        p
                    }
                };
                Some(p)
            });
            props_m.push(if bj == 0.0 {
                None
            } else {
                let p = match cache_m.get(&bj.to_bits()) {
                    Some(p) => p.clone(),
                    None => {
                        let p = cheb_expm(&md, bj * tau, lo, hi)?;
                        cache_m.insert(bj.to_bits(), p.clone());
                        p
                    }
                };
                Some(p)
            });
        }
        Ok(Self { scheme: scheme.clone(), tau, props_a, props_m })
    }

    pub fn scheme(&self) -> &SplittingScheme {
        &self.scheme
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }
}

/// One step `U_n = S(tau) U_{n-1}`. The rightmost factor (`j = m`) acts first,
/// and within a factor the `M` exponential precedes the `A` exponential.
pub fn splitting_step(props: &SplittingPropagators, u: &SpectralState) -> Result<SpectralState> {
    let stages = props.scheme.stages();
    if props.props_a.len() != stages || props.props_m.len() != stages {
        return Err(Error::SchemeMismatch(format!(
            "{} coefficients but {} / {} propagators",
            stages,
            props.props_a.len(),
            props.props_m.len()
        )));
    }
    let mut v = u.coeffs().to_vec();
    for j in (0..stages).rev() {
        if let Some(pm) = &props.props_m[j] {
            v = pm.apply(&v)?;
        }
        if let Some(pa) = &props.props_a[j] {
            v = pa.apply(&v)?;
        }
    }
    u.with_coeffs(v)
}

/// One block of `tau L` with the two factored Pade denominators
/// `12 I + 6 tau L + (tau L)^2` and `48 I + 12 tau L + (tau L)^2`.
#[derive(Debug, Clone)]
struct PadeBlock {
    tl: CMatrix,
    d12: LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>,
    d48: LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl PadeBlock {
    fn new(l: &CMatrix, tau: f64) -> Result<Self> {
        let n = l.nrows();
        let tl = l * Complex64::new(tau, 0.0);
        let tl2 = &tl * &tl;
        let ident = CMatrix::identity(n, n);
        let d12 = (&ident * Complex64::new(12.0, 0.0)) + &tl * Complex64::new(6.0, 0.0) + &tl2;
        let d48 = (&ident * Complex64::new(48.0, 0.0)) + &tl * Complex64::new(12.0, 0.0) + &tl2;
        let d12 = d12.lu();
        let d48 = d48.lu();
        if !d12.is_invertible() || !d48.is_invertible() {
            return Err(Error::Singular);
        }
        Ok(Self { tl, d12, d48 })
    }
}

/// Cached Pade data for a fixed block-diagonal `tau L`.
#[derive(Debug, Clone)]
pub struct KrogstadTables {
    blocks: Vec<PadeBlock>,
    offsets: Vec<usize>,
    dim: usize,
    tau: f64,
}

/// Which denominator a rational matrix function uses.
#[derive(Clone, Copy)]
enum Denominator {
    D12,
    D48,
}

impl KrogstadTables {
    /// Tables for `L = blockdiag(blocks)`.
    pub fn new(blocks: &[CMatrix], tau: f64) -> Result<Self> {
        let mut offsets = Vec::with_capacity(blocks.len());
        let mut dim = 0;
        let mut pade = Vec::with_capacity(blocks.len());
        for b in blocks {
            if b.nrows() != b.ncols() {
                return Err(Error::DimensionMismatch { expected: b.nrows(), got: b.ncols() });
            }
            offsets.push(dim);
            dim += b.nrows();
            pade.push(PadeBlock::new(b, tau)?);
        }
        Ok(Self { blocks: pade, offsets, dim, tau })
    }

    /// Tables for `L = i gamma A`.
    pub fn for_operator(a: &FracLapOperator, gamma: f64, tau: f64) -> Result<Self> {
        let s = Complex64::new(0.0, gamma);
        Self::new(&[a.negative_block() * s, a.positive_block() * s], tau)
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `(c0 I + c1 tau L + c2 (tau L)^2) v` on each block.
    fn poly(&self, c: [f64; 3], v: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.dim];
        for (blk, &off) in self.blocks.iter().zip(&self.offsets) {
            let n = blk.tl.nrows();
            let x = &v[off..off + n];
            let lx = matvec(&blk.tl, x);
            let llx = if c[2] != 0.0 { matvec(&blk.tl, &lx) } else { vec![ZERO; n] };
            for i in 0..n {
                out[off + i] = x[i] * c[0] + lx[i] * c[1] + llx[i] * c[2];
            }
        }
        out
    }

    fn solve(&self, den: Denominator, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.dim];
        for (blk, &off) in self.blocks.iter().zip(&self.offsets) {
            let n = blk.tl.nrows();
            let rhs = DVector::from_column_slice(&v[off..off + n]);
            let lu = match den {
                Denominator::D12 => &blk.d12,
                Denominator::D48 => &blk.d48,
            };
            let x = lu.solve(&rhs).expect("denominator factored as invertible");
            out[off..off + n].copy_from_slice(x.as_slice());
        }
        out
    }

    /// `R22(tau L) v`.
    pub fn r22(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.solve(Denominator::D12, &self.poly([12.0, -6.0, 1.0], v))
    }

    /// Dense `R22(tau L)`, block by block.
    pub fn r22_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        let mut e = vec![ZERO; self.dim];
        for col in 0..self.dim {
            e[col] = Complex64::new(1.0, 0.0);
            let c = self.r22(&e);
            for (r, z) in c.into_iter().enumerate() {
                m[(r, col)] = z;
            }
            e[col] = ZERO;
        }
        m
    }
}

fn axpy(acc: &mut [Complex64], s: Complex64, x: &[Complex64]) {
    for (a, b) in acc.iter_mut().zip(x) {
        *a += b * s;
    }
}

fn combo(terms: &[(f64, &[Complex64])]) -> Vec<Complex64> {
    let mut out = vec![ZERO; terms[0].1.len()];
    for (s, x) in terms {
        axpy(&mut out, Complex64::new(*s, 0.0), x);
    }
    out
}

/// One Krogstad-P22 step for `U' = -L U - i N(U, t)`.
///
/// Every rational function is applied as "numerator polynomial, then one
/// solve with the cached factorization"; terms sharing a denominator are
/// summed before the solve.
pub fn krogstad_p22_step<F>(tables: &KrogstadTables, nonlin: F, u: &[Complex64], t: f64) -> Result<Vec<Complex64>>
where
    F: Fn(&[Complex64], f64) -> Vec<Complex64>,
{
    if u.len() != tables.dim {
        return Err(Error::DimensionMismatch { expected: tables.dim, got: u.len() });
    }
    let tau = tables.tau;
    let mi = Complex64::new(0.0, -1.0);
    let half = t + tau / 2.0;

    let nu = nonlin(u, t);

    // a = R~ U - i P~1 N_U
    let mut rhs = tables.poly([48.0, -12.0, 1.0], u);
    axpy(&mut rhs, mi * (24.0 * tau), &nu);
    let a = tables.solve(Denominator::D48, &rhs);
    let na = nonlin(&a, half);

    // b = a - i P~2 (N_a - N_U)
    let diff = combo(&[(1.0, &na), (-1.0, &nu)]);
    let corr = tables.solve(Denominator::D48, &tables.poly([24.0 * tau, 2.0 * tau, 0.0], &diff));
    let mut b = a.clone();
    axpy(&mut b, mi, &corr);
    let nb = nonlin(&b, half);

    // c = R U - i P1 N_U - 2i P2 (N_b - N_U)
    let base = tables.poly([12.0, -6.0, 1.0], u);
    let diff = combo(&[(1.0, &nb), (-1.0, &nu)]);
    let mut rhs = base.clone();
    axpy(&mut rhs, mi * (12.0 * tau), &nu);
    axpy(&mut rhs, mi * 2.0, &tables.poly([6.0 * tau, tau, 0.0], &diff));
    let c = tables.solve(Denominator::D12, &rhs);
    let nc = nonlin(&c, t + tau);

    // U+ = R U - i P1 N_U - i P2 [...] - i P3 [...]
    let g2 = combo(&[(-3.0, &nu), (2.0, &na), (2.0, &nb), (-1.0, &nc)]);
    let g3 = combo(&[(1.0, &nu), (-1.0, &na), (-1.0, &nb), (1.0, &nc)]);
    let mut rhs = base;
    axpy(&mut rhs, mi * (12.0 * tau), &nu);
    axpy(&mut rhs, mi, &tables.poly([6.0 * tau, tau, 0.0], &g2));
    axpy(&mut rhs, mi, &tables.poly([8.0 * tau, 2.0 * tau, 0.0], &g3));
    Ok(tables.solve(Denominator::D12, &rhs))
}

/// Coefficients `(c_0, .., c_4)` of the amplification polynomial in `x`.
pub fn amplification_coeffs(y: Complex64) -> Result<[Complex64; 5]> {
    let d1 = y * y - y * 6.0 + 12.0;
    let d2 = y * y - y * 12.0 + 48.0;
    if d1.norm() == 0.0 || d2.norm() == 0.0 {
        return Err(Error::Singular);
    }
    let poly = |c: &[f64]| c.iter().fold(Complex64::new(0.0, 0.0), |acc, &ck| acc * y + ck);
    let c0 = poly(&[1.0, 6.0, 12.0]) / d1;
    let c1 = poly(&[144.0, -432.0, -1728.0, 6912.0]) / (d1 * d1 * d2);
    let den = d1 * d1 * d2 * d2;
    let c2 = poly(&[36.0, -648.0, 4032.0, 3456.0, -82944.0, 165888.0]) / den;
    let c3 = poly(&[-48.0, 768.0, 576.0, -27648.0, 55296.0]) / den;
    let c4 = poly(&[-96.0, 1920.0, -10368.0, 13824.0]) / den;
    Ok([c0, c1, c2, c3, c4])
}

/// `r(x, y) = c_0 + c_1 x + .. + c_4 x^4`.
pub fn amplification_factor(x: Complex64, y: Complex64) -> Result<Complex64> {
    let c = amplification_coeffs(y)?;
    Ok(c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, ck| acc * x + ck))
}

/// Slack for `|r| <= 1`: on the imaginary axis `|c_0| = 1` holds only up to rounding.
pub const STABILITY_SLACK: f64 = 4.0 * f64::EPSILON;

/// `|r(x, y)| <= 1` for each grid point.
pub fn stability_region(y: Complex64, grid: &[Complex64]) -> Result<Vec<bool>> {
    let c = amplification_coeffs(y)?;
    Ok(grid
        .iter()
        .map(|&x| c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, ck| acc * x + ck).norm() <= 1.0 + STABILITY_SLACK)
        .collect())
}

/// Largest interval `[-lo, hi]` of `x = i s` around `s = 0` inside the
/// stability region, scanned with step `ds` up to `|s| = s_max`.
pub fn imaginary_axis_interval(y: Complex64, s_max: f64, ds: f64) -> Result<(f64, f64)> {
    let steps = (s_max / ds).ceil() as usize;
    let walk = |sign: f64| -> Result<f64> {
        let pts: Vec<Complex64> = (1..=steps).map(|k| Complex64::new(0.0, sign * ds * k as f64)).collect();
        let mask = stability_region(y, &pts)?;
        Ok(mask.iter().position(|&m| !m).unwrap_or(steps) as f64 * ds)
    };
    if !stability_region(y, &[ZERO])?[0] {
        return Ok((0.0, 0.0));
    }
    Ok((walk(-1.0)?, walk(1.0)?))
}
