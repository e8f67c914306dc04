//! Positivity of `σ + Σ`: the Schrödinger–Robertson relation for one mode
//! and the Robertson determinant bound for `n` modes.
//!
//! For operators `Q_α = (q_1 - ⟨q_1⟩, .., p_n - ⟨p_n⟩)` the quadratic form
//! `⟨F† F⟩ ≥ 0` with `F = Σ C_α Q_α` is nonnegative for every complex vector
//! `C` exactly when the Hermitian matrix `σ + Σ` is positive semidefinite,
//! so the check below is a single Hermitian eigenvalue problem.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::Moments;
use crate::num::Real;

/// `σ` (symmetric dispersion) and `Σ = (i hbar / 2) J` (commutator matrix).
#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintyMatrix<T: Real> {
    n_modes: usize,
    sigma: DMatrix<T>,
    capital_sigma: DMatrix<Complex<T>>,
    hbar: T,
}

impl<T: Real> UncertaintyMatrix<T> {
    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn sigma(&self) -> &DMatrix<T> {
        &self.sigma
    }

    pub fn capital_sigma(&self) -> &DMatrix<Complex<T>> {
        &self.capital_sigma
    }

    pub fn hbar(&self) -> T {
        self.hbar
    }

    /// The Hermitian matrix `σ + Σ`.
    pub fn combined(&self) -> DMatrix<Complex<T>> {
        let dim = 2 * self.n_modes;
        DMatrix::from_fn(dim, dim, |i, j| {
            Complex::new(self.sigma[(i, j)], T::zero()) + self.capital_sigma[(i, j)]
        })
    }
}

/// Outcome of [`check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UncertaintyVerdict<T> {
    pub passes: bool,
    pub min_eigenvalue: T,
    /// `σ_qq σ_pp - σ_qp² - hbar²/4`; single-mode only.
    pub sr_margin: Option<T>,
    /// `det σ - (hbar/2)^(2n)`.
    pub robertson_margin: T,
    /// Position-momentum correlation `σ_qp / sqrt(σ_qq σ_pp)`; single-mode
    /// only and undefined when a variance vanishes.
    pub r: Option<T>,
}

/// Builds `σ + Σ` for the given moments.
pub fn build_matrix<T: Real>(m: &Moments<T>, hbar: T) -> UncertaintyMatrix<T> {
    let n = m.n_modes();
    let half = Complex::new(T::zero(), hbar / T::of(2.0));
    let mut capital_sigma = DMatrix::from_element(2 * n, 2 * n, Complex::new(T::zero(), T::zero()));
    for s in 0..n {
        capital_sigma[(s, s + n)] = half;
        capital_sigma[(s + n, s)] = -half;
    }
    UncertaintyMatrix { n_modes: n, sigma: m.sigma().clone(), capital_sigma, hbar }
}

/// Relative eigenvalue slack of the positivity test.
pub fn positivity_tol<T: Real>() -> T {
    T::of(1e-12).max(T::default_epsilon() * T::of(16.0))
}

/// Smallest eigenvalue of a Hermitian matrix.
pub(crate) fn min_hermitian_eigenvalue<T: Real>(h: DMatrix<Complex<T>>) -> T {
    let eig = SymmetricEigen::new(h);
    eig.eigenvalues.iter().copied().fold(T::max_value().unwrap_or(T::one()), |a, b| a.min(b))
}

/// Eigenvalue test of `σ + Σ ≥ 0` plus the scalar margins.
///
/// Passes when the smallest eigenvalue is at least `-1e-12 (1 + tr σ)`
/// (widened to a few ulps for `f32`). The determinant margin is necessary but
/// not sufficient and is reported only.
pub fn check<T: Real>(m: &Moments<T>, hbar: T) -> UncertaintyVerdict<T> {
    let mat = build_matrix(m, hbar);
    let min_eigenvalue = min_hermitian_eigenvalue(mat.combined());
    let tol = positivity_tol::<T>() * (T::one() + m.t().abs());
    let n = m.n_modes();
    let half = hbar / T::of(2.0);
    let robertson_margin = m.d() - half.powi(2 * n as i32);
    let (sr_margin, r) = if n == 1 {
        let (a, b, c) = (m.sigma_qq(), m.sigma_pp(), m.sigma_qp());
        let r = if a * b > T::zero() { Some(c / (a * b).sqrt()) } else { None };
        (Some(a * b - c * c - half * half), r)
    } else {
        (None, None)
    };
    UncertaintyVerdict { passes: min_eigenvalue >= -tol, min_eigenvalue, sr_margin, robertson_margin, r }
}

/// `σ_qq σ_pp - hbar² / (4 (1 - r²))`, the correlation form of the
/// single-mode relation. Has the sign of the determinant margin.
pub fn sr_bound<T: Real>(sigma_qq: T, sigma_pp: T, sigma_qp: T, hbar: T) -> Result<T> {
    let prod = sigma_qq * sigma_pp;
    if !(prod > T::zero()) {
        return Err(Error::Domain("sr_bound needs sigma_qq * sigma_pp > 0".into()));
    }
    let r = sigma_qp / prod.sqrt();
    if r.abs() >= T::one() {
        return Err(Error::Correlation { r: r.as_f64() });
    }
    Ok(prod - hbar * hbar / (T::of(4.0) * (T::one() - r * r)))
}
