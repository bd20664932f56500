//! Spectral primitives on the unit circle.
//!
//! Functions on bΔ are sampled at `N` equispaced nodes θ_j = 2πj/N, with node 0
//! pinned to ζ = 1. Fourier coefficients are normalized so that
//! f(θ) = Σ c_k e^{ikθ}; mode N/2 is the Nyquist mode and is treated as
//! unresolved by every operator here.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Imaginary parts below this (relative to max(1, ‖f‖∞)) count as zero.
pub const REAL_TOL: f64 = 1e-12;
/// Relative negative-mode ℓ² content above this means "not holomorphic".
pub const HOLOMORPHIC_TOL: f64 = 1e-8;
/// Maximum energy fraction allowed in the top quarter of the spectrum
/// before spectral differentiation is refused.
pub const ALIASING_TOL: f64 = 1e-8;
/// Tolerance for the normalization g(1) = 0.
pub const VANISHING_TOL: f64 = 1e-10;

const I: Complex64 = Complex64::new(0.0, 1.0);

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(size: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(size)
        } else {
            p.plan_fft_forward(size)
        }
    })
}

/// Equispaced grid on the unit circle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct CircleGrid {
    size: usize,
}

impl CircleGrid {
    pub const DEFAULT_SIZE: usize = 512;
    pub const MIN_SIZE: usize = 16;

    pub fn new(size: usize) -> Result<Self> {
        if !size.is_power_of_two() {
            return Err(Error::Config(format!(
                "grid size {size}: size must be a power of two"
            )));
        }
        if size < Self::MIN_SIZE {
            return Err(Error::Config(format!(
                "grid size {size}: size must be at least {}",
                Self::MIN_SIZE
            )));
        }
        Ok(CircleGrid { size })
    }

    pub fn size(self) -> usize {
        self.size
    }

    pub fn theta(self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.size as f64
    }

    /// e^{iθ_j}; node 0 is exactly 1.
    pub fn zeta(self, j: usize) -> Complex64 {
        Complex64::from_polar(1.0, self.theta(j))
    }

    pub fn nyquist(self) -> usize {
        self.size / 2
    }

    /// Frequency stored at FFT index `idx`; the Nyquist slot reports +N/2.
    pub fn mode(self, idx: usize) -> i64 {
        if idx <= self.size / 2 {
            idx as i64
        } else {
            idx as i64 - self.size as i64
        }
    }

    /// FFT index holding frequency `k`, for |k| ≤ N/2.
    pub fn index(self, k: i64) -> usize {
        k.rem_euclid(self.size as i64) as usize
    }

    /// Node nearest to θ (reduced mod 2π).
    pub fn nearest_node(self, theta: f64) -> usize {
        let t = theta.rem_euclid(2.0 * PI);
        ((t / (2.0 * PI) * self.size as f64).round() as usize) % self.size
    }
}

impl Default for CircleGrid {
    fn default() -> Self {
        CircleGrid {
            size: Self::DEFAULT_SIZE,
        }
    }
}

impl TryFrom<usize> for CircleGrid {
    type Error = String;
    fn try_from(size: usize) -> std::result::Result<Self, String> {
        CircleGrid::new(size).map_err(|e| match e {
            Error::Config(msg) => msg,
            other => other.to_string(),
        })
    }
}

impl From<CircleGrid> for usize {
    fn from(g: CircleGrid) -> usize {
        g.size
    }
}

impl fmt::Display for CircleGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.size)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValueKind {
    RealScalar,
    ComplexScalar,
}

/// Samples of a scalar function on bΔ.
#[derive(Clone, Debug, PartialEq)]
pub struct CircleFunction {
    grid: CircleGrid,
    values: Vec<Complex64>,
    kind: ValueKind,
}

fn check_len(grid: CircleGrid, len: usize) -> Result<()> {
    if len != grid.size() {
        return Err(Error::Domain(format!(
            "expected {} samples, got {len}",
            grid.size()
        )));
    }
    Ok(())
}

impl CircleFunction {
    pub fn from_complex(grid: CircleGrid, values: Vec<Complex64>) -> Result<Self> {
        check_len(grid, values.len())?;
        Ok(CircleFunction {
            grid,
            values,
            kind: ValueKind::ComplexScalar,
        })
    }

    pub fn from_real(grid: CircleGrid, values: &[f64]) -> Result<Self> {
        check_len(grid, values.len())?;
        Ok(CircleFunction {
            grid,
            values: values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            kind: ValueKind::RealScalar,
        })
    }

    /// Samples `f(θ_j)`.
    pub fn sample(grid: CircleGrid, f: impl Fn(f64) -> Complex64) -> Self {
        CircleFunction {
            grid,
            values: (0..grid.size()).map(|j| f(grid.theta(j))).collect(),
            kind: ValueKind::ComplexScalar,
        }
    }

    pub fn sample_real(grid: CircleGrid, f: impl Fn(f64) -> f64) -> Self {
        CircleFunction {
            grid,
            values: (0..grid.size())
                .map(|j| Complex64::new(f(grid.theta(j)), 0.0))
                .collect(),
            kind: ValueKind::RealScalar,
        }
    }

    /// Samples `f(ζ_j)` for a function of the boundary point.
    pub fn sample_zeta(grid: CircleGrid, f: impl Fn(Complex64) -> Complex64) -> Self {
        CircleFunction {
            grid,
            values: (0..grid.size()).map(|j| f(grid.zeta(j))).collect(),
            kind: ValueKind::ComplexScalar,
        }
    }

    pub fn constant(grid: CircleGrid, c: Complex64) -> Self {
        CircleFunction {
            grid,
            values: vec![c; grid.size()],
            kind: if c.im == 0.0 {
                ValueKind::RealScalar
            } else {
                ValueKind::ComplexScalar
            },
        }
    }

    pub fn zero(grid: CircleGrid) -> Self {
        Self::constant(grid, Complex64::new(0.0, 0.0))
    }

    /// Boundary values of the polynomial Σ a_k ζ^k.
    pub fn polynomial(grid: CircleGrid, coeffs: &[Complex64]) -> Self {
        Self::sample_zeta(grid, |z| {
            coeffs
                .iter()
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a)
        })
    }

    pub fn grid(&self) -> CircleGrid {
        self.grid
    }

    pub fn kind(&self) -> ValueKind {
        self.kind
    }

    pub fn is_real(&self) -> bool {
        self.kind == ValueKind::RealScalar
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn value(&self, j: usize) -> Complex64 {
        self.values[j]
    }

    /// Value at ζ = 1.
    pub fn at_one(&self) -> Complex64 {
        self.values[0]
    }

    pub fn real_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn imag_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.im).collect()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    /// Retags as real after checking the imaginary parts, which are then
    /// zeroed.
    pub fn into_real(mut self) -> Result<Self> {
        let max_imag = self.max_imag();
        if max_imag > REAL_TOL * self.sup_norm().max(1.0) {
            return Err(Error::NotReal { max_imag });
        }
        for v in &mut self.values {
            v.im = 0.0;
        }
        self.kind = ValueKind::RealScalar;
        Ok(self)
    }

    pub fn re(&self) -> Self {
        CircleFunction {
            grid: self.grid,
            values: self.values.iter().map(|v| Complex64::new(v.re, 0.0)).collect(),
            kind: ValueKind::RealScalar,
        }
    }

    pub fn im(&self) -> Self {
        CircleFunction {
            grid: self.grid,
            values: self.values.iter().map(|v| Complex64::new(v.im, 0.0)).collect(),
            kind: ValueKind::RealScalar,
        }
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        CircleFunction {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
            kind: ValueKind::ComplexScalar,
        }
    }

    fn zip(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        assert_eq!(self.grid, other.grid, "circle functions on different grids");
        CircleFunction {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            kind: if self.is_real() && other.is_real() {
                ValueKind::RealScalar
            } else {
                ValueKind::ComplexScalar
            },
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a * b)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = self.map(|v| v * s);
        if self.is_real() && s.im == 0.0 {
            out.kind = ValueKind::RealScalar;
        }
        out
    }

    pub fn fourier(&self) -> FourierCoefficients {
        fft(self)
    }

    /// Relative ℓ² weight of the negative modes (Nyquist excluded).
    pub fn negative_mode_content(&self) -> f64 {
        self.fourier().negative_mode_content()
    }

    /// Trigonometric interpolant evaluated at an arbitrary angle.
    pub fn eval_at(&self, theta: f64) -> Complex64 {
        self.fourier().evaluate(theta)
    }

    /// Spectral θ-derivative (Nyquist mode dropped).
    pub fn derivative_theta(&self) -> Self {
        let mut c = self.fourier();
        for idx in 0..self.grid.size() {
            let k = self.grid.mode(idx);
            c.coeffs[idx] *= if idx == self.grid.nyquist() {
                Complex64::new(0.0, 0.0)
            } else {
                I * k as f64
            };
        }
        let mut out = ifft(&c);
        if self.is_real() {
            for v in &mut out.values {
                v.im = 0.0;
            }
            out.kind = ValueKind::RealScalar;
        }
        out
    }

    /// (d/dθ) f at θ = 0, summed term by term.
    pub fn d_theta_at_one(&self) -> Complex64 {
        self.fourier().d_theta_at_zero()
    }

    /// Discrete C¹ norm, sup|f| + sup|f_θ|.
    pub fn c1_norm(&self) -> f64 {
        self.sup_norm() + self.derivative_theta().sup_norm()
    }

    /// Finite-difference Hölder quotient of f_θ at the finest resolved scale.
    /// Diagnostic only: on a grid every sample set is smooth.
    pub fn holder_quotient(&self, alpha: f64) -> f64 {
        let d = self.derivative_theta();
        let h = 2.0 * PI / self.grid.size() as f64;
        let n = self.grid.size();
        (0..n)
            .map(|j| (d.values[(j + 1) % n] - d.values[j]).norm() / h.powf(alpha))
            .fold(0.0, f64::max)
    }
}

/// Normalized discrete Fourier coefficients in FFT order.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierCoefficients {
    grid: CircleGrid,
    coeffs: Vec<Complex64>,
}

impl FourierCoefficients {
    pub fn from_raw(grid: CircleGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        check_len(grid, coeffs.len())?;
        Ok(FourierCoefficients { grid, coeffs })
    }

    pub fn grid(&self) -> CircleGrid {
        self.grid
    }

    /// Coefficients in FFT order (index j holds mode `grid.mode(j)`).
    pub fn raw(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn get(&self, k: i64) -> Complex64 {
        self.coeffs[self.grid.index(k)]
    }

    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// ℓ² norm of the modes k < 0; the Nyquist mode has no sign and is skipped.
    pub fn negative_mode_norm(&self) -> f64 {
        let n = self.grid.size();
        self.coeffs[n / 2 + 1..].iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn negative_mode_content(&self) -> f64 {
        let total = self.energy().sqrt();
        if total == 0.0 {
            0.0
        } else {
            self.negative_mode_norm() / total
        }
    }

    /// As [`Self::negative_mode_content`] over −3N/8 < k < 0 only; products
    /// of near-Nyquist data alias into the modes below −3N/8.
    pub fn resolved_negative_content(&self) -> f64 {
        let total = self.energy().sqrt();
        if total == 0.0 {
            return 0.0;
        }
        let cut = (3 * self.grid.size() / 8) as i64;
        let neg: f64 = (1..cut).map(|k| self.get(-k).norm_sqr()).sum();
        neg.sqrt() / total
    }

    /// Energy fraction carried by |k| ≥ 3N/8.
    pub fn top_quarter_fraction(&self) -> f64 {
        let total = self.energy();
        if total == 0.0 {
            return 0.0;
        }
        let cut = (3 * self.grid.size() / 8) as i64;
        let top: f64 = (0..self.grid.size())
            .filter(|&i| self.grid.mode(i).abs() >= cut)
            .map(|i| self.coeffs[i].norm_sqr())
            .sum();
        top / total
    }

    pub(crate) fn check_aliasing(&self) -> Result<()> {
        let frac = self.top_quarter_fraction();
        if frac > ALIASING_TOL {
            return Err(Error::Precondition(format!(
                "under-resolved input: top quarter of the spectrum carries {frac:.3e} of the energy"
            )));
        }
        Ok(())
    }

    /// Trigonometric interpolant; the Nyquist mode contributes its cosine.
    pub fn evaluate(&self, theta: f64) -> Complex64 {
        let n = self.grid.size();
        let mut acc = Complex64::new(0.0, 0.0);
        for idx in 0..n {
            let k = self.grid.mode(idx);
            if idx == n / 2 {
                acc += self.coeffs[idx] * (k as f64 * theta).cos();
            } else {
                acc += self.coeffs[idx] * Complex64::from_polar(1.0, k as f64 * theta);
            }
        }
        acc
    }

    /// Σ i k c_k, excluding Nyquist.
    pub fn d_theta_at_zero(&self) -> Complex64 {
        let n = self.grid.size();
        (0..n)
            .filter(|&i| i != n / 2)
            .map(|i| I * self.grid.mode(i) as f64 * self.coeffs[i])
            .sum()
    }
}

pub fn fft(f: &CircleFunction) -> FourierCoefficients {
    let n = f.grid.size();
    let mut buf = f.values.clone();
    plan(n, false).process(&mut buf);
    let s = 1.0 / n as f64;
    for c in &mut buf {
        *c *= s;
    }
    FourierCoefficients {
        grid: f.grid,
        coeffs: buf,
    }
}

pub fn ifft(c: &FourierCoefficients) -> CircleFunction {
    let mut buf = c.coeffs.clone();
    plan(c.grid.size(), true).process(&mut buf);
    CircleFunction {
        grid: c.grid,
        values: buf,
        kind: ValueKind::ComplexScalar,
    }
}

/// Conjugate-function operator on raw real samples, with the normalization
/// (T₁u)(1) = 0 applied exactly at node 0.
pub(crate) fn t1_real(grid: CircleGrid, u: &[f64]) -> Vec<f64> {
    let n = grid.size();
    let mut buf: Vec<Complex64> = u.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    plan(n, false).process(&mut buf);
    let s = 1.0 / n as f64;
    for (idx, c) in buf.iter_mut().enumerate() {
        let k = grid.mode(idx);
        *c *= if k == 0 || idx == n / 2 {
            Complex64::new(0.0, 0.0)
        } else {
            -I * (k.signum() as f64) * s
        };
    }
    plan(n, true).process(&mut buf);
    let at_one = buf[0].re;
    let mut out: Vec<f64> = buf.iter().map(|c| c.re - at_one).collect();
    out[0] = 0.0;
    out
}

/// The normalized Hilbert transform T₁u = Tu − (Tu)(1).
pub fn hilbert_t1(u: &CircleFunction) -> Result<CircleFunction> {
    let max_imag = u.max_imag();
    if max_imag > REAL_TOL * u.sup_norm().max(1.0) {
        return Err(Error::NotReal { max_imag });
    }
    let out = t1_real(u.grid, &u.real_values());
    CircleFunction::from_real(u.grid, &out)
}

/// Σ_{0 ≤ k < N/2} c_k ζ^k by Horner's rule, without any holomorphy check.
pub(crate) fn power_series_eval(c: &FourierCoefficients, zeta: Complex64) -> Complex64 {
    let half = c.grid.size() / 2;
    c.coeffs[..half]
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &a| acc * zeta + a)
}

/// Value at an interior point of the holomorphic extension of `f`.
pub fn interior_eval(f: &CircleFunction, zeta: Complex64) -> Result<Complex64> {
    if zeta.norm() >= 1.0 {
        return Err(Error::Domain(format!(
            "interior evaluation needs |ζ| < 1, got |ζ| = {}",
            zeta.norm()
        )));
    }
    let c = f.fourier();
    let content = c.negative_mode_content();
    if content > HOLOMORPHIC_TOL {
        return Err(Error::NotHolomorphic { content });
    }
    Ok(power_series_eval(&c, zeta))
}

fn check_vanishing_at_one(g: &CircleFunction) -> Result<()> {
    let g1 = g.at_one().norm();
    if g1 > VANISHING_TOL * g.sup_norm().max(1.0) {
        return Err(Error::Precondition(format!(
            "J needs g(1) = 0, got |g(1)| = {g1:.3e}"
        )));
    }
    Ok(())
}

/// The principal-value functional
/// J(g) = (1/π) PV∫ g(e^{iθ}) / |e^{iθ} − 1|² dθ for real g with g(1) = 0,
/// evaluated as −(d/dθ)(T₁g)(0) = −Σ |k| c_k.
pub fn j_functional(g: &CircleFunction) -> Result<f64> {
    let max_imag = g.max_imag();
    if max_imag > REAL_TOL * g.sup_norm().max(1.0) {
        return Err(Error::NotReal { max_imag });
    }
    check_vanishing_at_one(g)?;
    let c = g.fourier();
    c.check_aliasing()?;
    let n = g.grid.size();
    let s: f64 = (1..n / 2).map(|k| k as f64 * c.coeffs[k].re).sum();
    Ok(-2.0 * s)
}

/// J for holomorphic boundary values vanishing at 1: −g′(1).
pub fn j_functional_holo(g: &CircleFunction) -> Result<Complex64> {
    check_vanishing_at_one(g)?;
    let c = g.fourier();
    let content = c.negative_mode_content();
    if content > HOLOMORPHIC_TOL {
        return Err(Error::NotHolomorphic { content });
    }
    c.check_aliasing()?;
    let n = g.grid.size();
    let d: Complex64 = (1..n / 2).map(|k| k as f64 * c.coeffs[k]).sum();
    Ok(-d)
}

/// Matrix-valued function on bΔ stored entrywise, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CircleMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<CircleFunction>,
}

impl CircleMatrix {
    pub fn identity(grid: CircleGrid, n: usize) -> Self {
        let entries = (0..n * n)
            .map(|i| {
                let v = if i / n == i % n { 1.0 } else { 0.0 };
                CircleFunction::constant(grid, Complex64::new(v, 0.0))
            })
            .collect();
        CircleMatrix {
            rows: n,
            cols: n,
            entries,
        }
    }

    pub fn from_entries(rows: usize, cols: usize, entries: Vec<CircleFunction>) -> Result<Self> {
        if entries.len() != rows * cols || entries.is_empty() {
            return Err(Error::Domain(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        let grid = entries[0].grid();
        if entries.iter().any(|e| e.grid() != grid) {
            return Err(Error::Domain("matrix entries live on different grids".into()));
        }
        Ok(CircleMatrix {
            rows,
            cols,
            entries,
        })
    }

    /// Assembles a matrix function from its value at every node.
    pub fn from_nodes(grid: CircleGrid, nodes: &[DMatrix<Complex64>]) -> Result<Self> {
        check_len(grid, nodes.len())?;
        let (rows, cols) = nodes[0].shape();
        let entries = (0..rows * cols)
            .map(|e| {
                let vals = nodes.iter().map(|m| m[(e / cols, e % cols)]).collect();
                CircleFunction::from_complex(grid, vals)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CircleMatrix {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_real_nodes(grid: CircleGrid, nodes: &[DMatrix<f64>]) -> Result<Self> {
        check_len(grid, nodes.len())?;
        let (rows, cols) = nodes[0].shape();
        let entries = (0..rows * cols)
            .map(|e| {
                let vals: Vec<f64> = nodes.iter().map(|m| m[(e / cols, e % cols)]).collect();
                CircleFunction::from_real(grid, &vals)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CircleMatrix {
            rows,
            cols,
            entries,
        })
    }

    pub fn grid(&self) -> CircleGrid {
        self.entries[0].grid()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_real(&self) -> bool {
        self.entries.iter().all(|e| e.is_real())
    }

    pub fn entry(&self, r: usize, c: usize) -> &CircleFunction {
        &self.entries[r * self.cols + c]
    }

    pub fn entries(&self) -> &[CircleFunction] {
        &self.entries
    }

    pub fn at(&self, j: usize) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.rows, self.cols, |r, c| self.entry(r, c).value(j))
    }

    pub fn real_at(&self, j: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |r, c| self.entry(r, c).value(j).re)
    }

    /// Largest entrywise deviation from the identity over all nodes.
    pub fn distance_to_identity(&self) -> f64 {
        let mut d: f64 = 0.0;
        for r in 0..self.rows {
            for c in 0..self.cols {
                let id = if r == c { 1.0 } else { 0.0 };
                for v in self.entry(r, c).values() {
                    d = d.max((v - id).norm());
                }
            }
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid() -> CircleGrid {
        CircleGrid::default()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Random real trigonometric polynomial of the given degree.
    fn random_real(rng: &mut ChaCha8Rng, degree: usize) -> CircleFunction {
        let a: Vec<f64> = (0..=degree).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..=degree).map(|_| rng.gen_range(-1.0..1.0)).collect();
        CircleFunction::sample_real(grid(), |t| {
            (0..=degree)
                .map(|k| a[k] * (k as f64 * t).cos() + b[k] * (k as f64 * t).sin())
                .sum()
        })
    }

    #[test]
    fn grid_validation() {
        assert!(CircleGrid::new(512).is_ok());
        let err = CircleGrid::new(100).unwrap_err().to_string();
        assert!(err.contains("size must be a power of two"), "{err}");
        assert!(CircleGrid::new(8).is_err());
        assert_eq!(grid().zeta(0), c(1.0, 0.0));
        assert_eq!(grid().mode(511), -1);
        assert_eq!(grid().index(-1), 511);
    }

    #[test]
    fn fft_single_modes() {
        let one = CircleFunction::constant(grid(), c(1.0, 0.0));
        let f = one.fourier();
        assert!((f.get(0) - 1.0).norm() < 1e-15);
        assert!(f.raw().iter().skip(1).all(|c| c.norm() < 1e-15));

        let e1 = CircleFunction::sample(grid(), |t| Complex64::from_polar(1.0, t));
        let f = e1.fourier();
        for idx in 0..grid().size() {
            let want = if idx == 1 { 1.0 } else { 0.0 };
            assert!((f.raw()[idx] - want).norm() < 1e-14);
        }
    }

    #[test]
    fn fft_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = CircleFunction::from_complex(
            grid(),
            (0..512)
                .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect(),
        )
        .unwrap();
        let back = ifft(&fft(&f));
        let err = f.sub(&back).sup_norm() / f.sup_norm();
        assert!(err < 1e-13, "{err}");
    }

    /// Naive O(N²) DFT, independent of the FFT path.
    fn naive_dft(f: &CircleFunction, k: i64) -> Complex64 {
        let n = f.grid().size();
        (0..n)
            .map(|j| f.value(j) * Complex64::from_polar(1.0, -(k as f64) * f.grid().theta(j)))
            .sum::<Complex64>()
            / n as f64
    }

    #[test]
    fn fft_matches_naive_dft() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = random_real(&mut rng, 20);
        let c = f.fourier();
        for k in [-20, -3, 0, 1, 7, 20, 100] {
            assert!((c.get(k) - naive_dft(&f, k)).norm() < 1e-13);
        }
    }

    #[test]
    fn hilbert_of_cos_and_sin() {
        for k in [1usize, 2, 5, 17, 64] {
            let kf = k as f64;
            let u = CircleFunction::sample_real(grid(), |t| (kf * t).cos());
            let t1 = hilbert_t1(&u).unwrap();
            let want = CircleFunction::sample_real(grid(), |t| (kf * t).sin());
            assert!(t1.sub(&want).sup_norm() < 1e-12);

            let u = CircleFunction::sample_real(grid(), |t| (kf * t).sin());
            let t1 = hilbert_t1(&u).unwrap();
            let want = CircleFunction::sample_real(grid(), |t| 1.0 - (kf * t).cos());
            assert!(t1.sub(&want).sup_norm() < 1e-12);
            assert_eq!(t1.value(0), c(0.0, 0.0));
            // u + iT₁u is holomorphic
            let f = u.add(&t1.scale(I));
            assert!(f.fourier().negative_mode_norm() < 1e-12);
        }
    }

    #[test]
    fn hilbert_of_constant_and_rejects_complex() {
        let u = CircleFunction::constant(grid(), c(3.5, 0.0));
        assert!(hilbert_t1(&u).unwrap().sup_norm() == 0.0);
        let bad = CircleFunction::constant(grid(), c(1.0, 0.1));
        assert!(matches!(hilbert_t1(&bad), Err(Error::NotReal { .. })));
    }

    #[test]
    fn interior_eval_examples() {
        let id = CircleFunction::sample_zeta(grid(), |z| z);
        assert!((interior_eval(&id, c(0.5, 0.0)).unwrap() - 0.5).norm() < 1e-15);
        let k = CircleFunction::constant(grid(), c(2.0, -1.0));
        assert!((interior_eval(&k, c(0.1, 0.7)).unwrap() - c(2.0, -1.0)).norm() < 1e-15);
        let sq = CircleFunction::sample_zeta(grid(), |z| (1.0 - z) * (1.0 - z));
        let z0 = c(0.3, 0.1);
        let want = (c(1.0, 0.0) - z0) * (c(1.0, 0.0) - z0);
        assert!((interior_eval(&sq, z0).unwrap() - want).norm() < 1e-14);
    }

    #[test]
    fn interior_eval_errors() {
        let id = CircleFunction::sample_zeta(grid(), |z| z);
        assert!(matches!(interior_eval(&id, c(1.0, 0.0)), Err(Error::Domain(_))));
        let anti = CircleFunction::sample_zeta(grid(), |z| z.conj());
        assert!(matches!(
            interior_eval(&anti, c(0.1, 0.0)),
            Err(Error::NotHolomorphic { .. })
        ));
    }

    /// Principal value through symmetrization: the integrand
    /// [g(θ) + g(−θ)] / (4 sin²(θ/2)) on (0, π] is regular at 0.
    fn pv_oracle(g: &CircleFunction) -> f64 {
        let m = 4000;
        let h = PI / m as f64;
        // midpoint rule on the trigonometric interpolant
        (0..m)
            .map(|i| {
                let t = (i as f64 + 0.5) * h;
                let s = g.eval_at(t).re + g.eval_at(-t).re;
                s / (4.0 * (t / 2.0).sin().powi(2)) * h
            })
            .sum::<f64>()
            / PI
    }

    #[test]
    fn j_functional_examples() {
        let zero = CircleFunction::zero(grid());
        assert_eq!(j_functional(&zero).unwrap(), 0.0);
        let g = CircleFunction::sample_real(grid(), |t| 2.0 * t.sin() * (1.0 - t.cos()));
        assert!(j_functional(&g).unwrap().abs() < 1e-12);
        let g = CircleFunction::sample_real(grid(), |t| 1.0 - t.cos());
        assert!((j_functional(&g).unwrap() - 1.0).abs() < 1e-12);
        assert!((pv_oracle(&g) - 1.0).abs() < 1e-6);
        let h = CircleFunction::sample_zeta(grid(), |z| z - 1.0);
        assert!((j_functional_holo(&h).unwrap() - c(-1.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn j_functional_matches_pv_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let g = random_real(&mut rng, 6);
            let g = g.sub(&CircleFunction::constant(grid(), g.at_one()));
            let spectral = j_functional(&g).unwrap();
            let oracle = pv_oracle(&g);
            assert!((spectral - oracle).abs() < 1e-5, "{spectral} vs {oracle}");
        }
    }

    #[test]
    fn j_functional_preconditions() {
        let g = CircleFunction::constant(grid(), c(1.0, 0.0));
        assert!(matches!(j_functional(&g), Err(Error::Precondition(_))));
        // white noise is rejected by the aliasing guard
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut v: Vec<f64> = (0..512).map(|_| rng.gen_range(-1.0..1.0)).collect();
        v[0] = 0.0;
        let noise = CircleFunction::from_real(grid(), &v).unwrap();
        assert!(matches!(j_functional(&noise), Err(Error::Precondition(_))));
    }

    #[test]
    fn eval_at_and_derivatives() {
        let f = CircleFunction::sample_real(grid(), |t| (3.0 * t).sin() + 0.5 * t.cos());
        let t = 0.123;
        assert!((f.eval_at(t).re - ((3.0 * t).sin() + 0.5 * t.cos())).abs() < 1e-13);
        let d = f.derivative_theta();
        let want = CircleFunction::sample_real(grid(), |t| 3.0 * (3.0 * t).cos() - 0.5 * t.sin());
        assert!(d.sub(&want).sup_norm() < 1e-11);
        assert!((f.d_theta_at_one() - 3.0).norm() < 1e-12);
    }

    #[test]
    fn circle_matrix_nodes() {
        let g = grid();
        let nodes: Vec<DMatrix<f64>> = (0..g.size())
            .map(|j| DMatrix::from_row_slice(2, 2, &[1.0, g.theta(j), 0.0, 1.0]))
            .collect();
        let m = CircleMatrix::from_real_nodes(g, &nodes).unwrap();
        assert!(m.is_real());
        assert_eq!(m.real_at(3), nodes[3]);
        assert_eq!(CircleMatrix::identity(g, 3).distance_to_identity(), 0.0);
    }

    fn band_limited() -> impl Strategy<Value = CircleFunction> {
        (any::<u64>(), 1usize..100).prop_map(|(seed, degree)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            random_real(&mut rng, degree)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        #[test]
        fn t1_gives_holomorphic_and_vanishes_at_one(u in band_limited()) {
            let t1 = hilbert_t1(&u).unwrap();
            prop_assert_eq!(t1.value(0), c(0.0, 0.0));
            let f = u.add(&t1.scale(I));
            let neg = f.fourier().negative_mode_norm();
            prop_assert!(neg < 1e-10 * u.sup_norm());
        }

        #[test]
        fn t1_involution(u in band_limited()) {
            let tt = hilbert_t1(&hilbert_t1(&u).unwrap()).unwrap();
            let want = u.scale(c(-1.0, 0.0)).add(&CircleFunction::constant(grid(), u.at_one()));
            prop_assert!(tt.sub(&want).sup_norm() < 1e-10);
        }

        #[test]
        fn j_of_product_identity(s1 in any::<u64>(), s2 in any::<u64>(), d in 1usize..40) {
            // J(g g' − T₁g T₁g') = 0 for real g, g' vanishing at 1
            let mut r1 = ChaCha8Rng::seed_from_u64(s1);
            let mut r2 = ChaCha8Rng::seed_from_u64(s2);
            let g = random_real(&mut r1, d);
            let g = g.sub(&CircleFunction::constant(grid(), g.at_one()));
            let h = random_real(&mut r2, d);
            let h = h.sub(&CircleFunction::constant(grid(), h.at_one()));
            let tg = hilbert_t1(&g).unwrap();
            let th = hilbert_t1(&h).unwrap();
            let combo = g.mul(&h).sub(&tg.mul(&th));
            let scale = g.c1_norm() * h.c1_norm();
            prop_assert!(j_functional(&combo).unwrap().abs() < 1e-8 * scale.max(1.0));
        }

        #[test]
        fn j_holo_consistency(seed in any::<u64>(), d in 1usize..60) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut coeffs: Vec<Complex64> = (0..=d)
                .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) / (1.0 + d as f64))
                .collect();
            let s: Complex64 = coeffs.iter().sum();
            coeffs[0] -= s;
            let g = CircleFunction::polynomial(grid(), &coeffs);
            let j = j_functional_holo(&g).unwrap();
            let via_theta = I * g.d_theta_at_one();
            prop_assert!((j - via_theta).norm() < 1e-8);
            // splitting into real and imaginary parts goes through the real J
            let split = c(j_functional(&g.re()).unwrap(), j_functional(&g.im()).unwrap());
            prop_assert!((j - split).norm() < 1e-8);
        }
    }
}
