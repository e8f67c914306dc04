//! Weyl correspondence between phase-space symbols and operators.
//!
//! Units are natural (`hbar = 1`). A symbol `W(q, p)` maps to the position
//! kernel `A(x, x') = (1/2π) ∫ W((x+x')/2, p) e^{ip(x-x')} dp`, and back by
//! `W(q, p) = ∫ A(q+u/2, q-u/2) e^{-ipu} du`, so `Tr A = (1/2π) ∫ W dq dp`.
//! A classical density `f` enters as the symbol `2π f`; a Wigner function
//! enters as is. Operators are stored as matrices in the basis of the
//! oscillator eigenfunctions [`hermite::hermite_functions`].

pub mod hermite;
mod star;

pub use star::{
    kernel_of_symbol, moyal_kernel, star_classical, star_classical_c9, star_classical_matrix,
    star_moyal, symbol_of_kernel, PositionKernel,
};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{ComplexGrid, GridKind, PhaseGrid, Window};
use crate::num::{modulus, trapezoid_weights, Real};
use hermite::{hermite_functions, hermite_table, laguerre, support_radius};

/// Relative deviation from `A = A†` tolerated by the Hermitian routines.
const HERMITIAN_TOL: f64 = 1e-10;

/// Settings of the symbol-to-matrix maps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeylConfig<T> {
    /// Window on which symbols are produced.
    pub window: Window<T>,
    /// Basis truncation `D`.
    pub dim: usize,
    /// Largest accepted `D`.
    pub max_dim: usize,
    /// Largest `|Tr A - (1/2π)∫W|` before a truncation warning.
    pub leak_tol: T,
    /// Also map the matrix back and compare with the input symbol.
    pub reassembly_check: bool,
    /// Relative L1 reassembly error before a truncation warning.
    pub reassembly_tol: T,
}

impl<T: Real> Default for WeylConfig<T> {
    fn default() -> Self {
        WeylConfig {
            window: Window::square(T::of(8.0), 256).expect("default window is valid"),
            dim: 64,
            max_dim: 128,
            leak_tol: T::of(1e-6),
            reassembly_check: false,
            reassembly_tol: T::of(1e-3),
        }
    }
}

impl<T: Real> WeylConfig<T> {
    pub fn with_dim(self, dim: usize) -> Self {
        WeylConfig { dim, max_dim: self.max_dim.max(dim), ..self }
    }

    pub fn with_window(self, window: Window<T>) -> Self {
        WeylConfig { window, ..self }
    }

    fn check_dim(&self) -> Result<()> {
        if self.dim == 0 || self.dim > self.max_dim {
            return Err(Error::Dimension(format!(
                "basis size {} outside 1..={}",
                self.dim, self.max_dim
            )));
        }
        Ok(())
    }
}

/// Operator as a `D × D` complex matrix in the oscillator basis.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix<T: Real> {
    entries: DMatrix<Complex<T>>,
    hermitian: bool,
}

impl<T: Real> OperatorMatrix<T> {
    pub fn new(entries: DMatrix<Complex<T>>) -> Result<Self> {
        if !entries.is_square() || entries.nrows() == 0 {
            return Err(Error::Dimension("operator matrix must be square and nonempty".into()));
        }
        if entries.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Domain("operator matrix entries must be finite".into()));
        }
        let hermitian = hermiticity_deviation(&entries) <= T::of(HERMITIAN_TOL) * (T::one() + max_abs(&entries));
        Ok(OperatorMatrix { entries, hermitian })
    }

    /// Builds from real entries.
    pub fn from_real(m: DMatrix<T>) -> Result<Self> {
        Self::new(m.map(|v| Complex::new(v, T::zero())))
    }

    /// Projector `|n⟩⟨n|` onto the `n`-th oscillator level.
    pub fn fock(n: usize, dim: usize) -> Result<Self> {
        if n >= dim {
            return Err(Error::Dimension(format!("level {n} outside basis of size {dim}")));
        }
        let mut m = DMatrix::from_element(dim, dim, Complex::new(T::zero(), T::zero()));
        m[(n, n)] = Complex::new(T::one(), T::zero());
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex<T>> {
        &self.entries
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn hermiticity_deviation(&self) -> T {
        hermiticity_deviation(&self.entries)
    }

    pub fn trace(&self) -> Complex<T> {
        self.entries.trace()
    }

    /// `(A + A†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let h = (&self.entries + self.entries.adjoint()) * Complex::new(T::of(0.5), T::zero());
        OperatorMatrix { entries: h, hermitian: true }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension("operator dimensions differ".into()));
        }
        Self::new(complex_gemm(&self.entries, &other.entries))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension("operator dimensions differ".into()));
        }
        Self::new(&self.entries - &other.entries)
    }

    /// `max |a_mn - b_mn|`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.entries.iter().zip(other.entries.iter()).fold(T::zero(), |a, (x, y)| a.max(modulus(*x - *y)))
    }

    /// Leading `k × k` block.
    pub fn leading_block(&self, k: usize) -> DMatrix<Complex<T>> {
        self.entries.view((0, 0), (k, k)).into_owned()
    }
}

fn max_abs<T: Real>(m: &DMatrix<Complex<T>>) -> T {
    m.iter().fold(T::zero(), |a, z| a.max(modulus(*z)))
}

fn hermiticity_deviation<T: Real>(m: &DMatrix<Complex<T>>) -> T {
    let n = m.nrows();
    let mut worst = T::zero();
    for i in 0..n {
        for j in i..n {
            worst = worst.max(modulus(m[(i, j)] - m[(j, i)].conj()));
        }
    }
    worst
}

fn split<T: Real>(m: &DMatrix<Complex<T>>) -> (DMatrix<T>, DMatrix<T>) {
    (m.map(|z| z.re), m.map(|z| z.im))
}

fn join<T: Real>(re: &DMatrix<T>, im: &DMatrix<T>) -> DMatrix<Complex<T>> {
    re.zip_map(im, |a, b| Complex::new(a, b))
}

/// Complex product through four real products (real GEMM is much faster).
pub(crate) fn complex_gemm<T: Real>(a: &DMatrix<Complex<T>>, b: &DMatrix<Complex<T>>) -> DMatrix<Complex<T>> {
    let (ar, ai) = split(a);
    let (br, bi) = split(b);
    join(&(&ar * &br - &ai * &bi), &(&ar * &bi + &ai * &br))
}

/// Eigen-decomposition of a Hermitian operator, eigenvalues sorted by
/// descending magnitude.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T: Real> {
    eigenvalues: Vec<T>,
    /// Column `k` is the eigenvector of `eigenvalues[k]`.
    eigenvectors: DMatrix<Complex<T>>,
}

impl<T: Real> Spectrum<T> {
    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<Complex<T>> {
        &self.eigenvectors
    }

    pub fn eigenvector(&self, k: usize) -> DVector<Complex<T>> {
        self.eigenvectors.column(k).into_owned()
    }

    pub fn min_eigenvalue(&self) -> T {
        self.eigenvalues.iter().copied().fold(T::max_value().unwrap_or(T::one()), |a, b| a.min(b))
    }

    /// Index of the smallest eigenvalue.
    pub fn argmin(&self) -> usize {
        let mut best = 0;
        for (k, v) in self.eigenvalues.iter().enumerate() {
            if *v < self.eigenvalues[best] {
                best = k;
            }
        }
        best
    }

    pub fn sum(&self) -> T {
        self.eigenvalues.iter().copied().fold(T::zero(), |a, b| a + b)
    }

    /// `Σ λ_k |v_k⟩⟨v_k|`.
    pub fn reassemble(&self) -> Result<OperatorMatrix<T>> {
        let v = &self.eigenvectors;
        let scaled = DMatrix::from_fn(v.nrows(), v.ncols(), |i, k| v[(i, k)] * self.eigenvalues[k]);
        OperatorMatrix::new(complex_gemm(&scaled, &v.adjoint()))
    }
}

/// Spectral decomposition `A = Σ λ_j |ψ_j⟩⟨ψ_j|`; negative `λ_j` are the
/// negative weights of a non-positive operator.
pub fn spectral_decompose<T: Real>(a: &OperatorMatrix<T>) -> Result<Spectrum<T>> {
    let dev = a.hermiticity_deviation();
    if dev > T::of(HERMITIAN_TOL) * (T::one() + max_abs(&a.entries)) {
        return Err(Error::NotHermitian { deviation: dev.as_f64() });
    }
    let eig = SymmetricEigen::new(a.entries.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .abs()
            .partial_cmp(&eig.eigenvalues[i].abs())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = DMatrix::from_fn(a.dim(), a.dim(), |i, k| eig.eigenvectors[(i, order[k])]);
    Ok(Spectrum { eigenvalues, eigenvectors })
}

/// Result of [`symbol_to_matrix`].
#[derive(Debug, Clone, PartialEq)]
pub struct Quantization<T: Real> {
    pub matrix: OperatorMatrix<T>,
    /// `(1/2π) ∫ W dq dp` by quadrature.
    pub symbol_trace: Complex<T>,
    /// `|Tr A - symbol_trace|`.
    pub leakage: T,
    /// Relative L1 error of the symbol rebuilt from the matrix, if requested.
    pub reassembly_l1: Option<T>,
    pub truncation_warning: bool,
}

/// Weyl quantization of a real symbol or density grid.
///
/// Density grids are multiplied by `2π`, so a normalized density gives a
/// unit-trace operator. The Hermitian part is returned.
pub fn symbol_to_matrix<T: Real>(g: &PhaseGrid<T>, cfg: &WeylConfig<T>) -> Result<Quantization<T>> {
    let factor = match g.kind() {
        GridKind::Density => T::two_pi(),
        GridKind::Symbol => T::one(),
    };
    let values: Vec<Complex<T>> = g.values().iter().map(|&v| Complex::new(v * factor, T::zero())).collect();
    let mut q = quantize(g.window(), &values, cfg)?;
    q.matrix = q.matrix.hermitian_part();
    Ok(q)
}

/// Weyl quantization of a complex symbol.
pub fn symbol_to_matrix_complex<T: Real>(g: &ComplexGrid<T>, cfg: &WeylConfig<T>) -> Result<Quantization<T>> {
    quantize(g.window(), g.values(), cfg)
}

/// `A_mn = ∫∫ ψ_m(q+u/2) G(q,u) ψ_n(q-u/2) dq du` with
/// `G(q,u) = (1/2π) ∫ W(q,p) e^{ipu} dp`.
fn quantize<T: Real>(w: &Window<T>, values: &[Complex<T>], cfg: &WeylConfig<T>) -> Result<Quantization<T>> {
    cfg.check_dim()?;
    let dim = cfg.dim;
    let radius: T = support_radius(dim);
    let h_u = w.hq();
    let u_cap = T::pi() / w.hp() * T::of(0.999);
    let qs = w.q_nodes();
    let ps = w.p_nodes();
    let wq = w.q_weights();
    let wp = w.p_weights();
    let j_of = |q: T| -> usize {
        let umax = (T::of(2.0) * (radius - q.abs())).min(u_cap);
        if umax <= T::zero() { 0 } else { (umax / h_u).floor().to_usize().unwrap_or(0) }
    };
    let j_max = qs.iter().map(|&q| j_of(q)).max().unwrap_or(0);
    let n_u = 2 * j_max + 1;
    let u = |j: usize| (T::of_usize(j) - T::of_usize(j_max)) * h_u;

    // G = (W diag(wp) / 2π) e^{ipu}, as real products
    let inv2pi = T::one() / T::two_pi();
    let wr = DMatrix::from_fn(w.n_q, w.n_p, |i, k| values[i * w.n_p + k].re * wp[k] * inv2pi);
    let wi = DMatrix::from_fn(w.n_q, w.n_p, |i, k| values[i * w.n_p + k].im * wp[k] * inv2pi);
    let c = DMatrix::from_fn(w.n_p, n_u, |k, j| (ps[k] * u(j)).cos());
    let s = DMatrix::from_fn(w.n_p, n_u, |k, j| (ps[k] * u(j)).sin());
    let gr = &wr * &c - &wi * &s;
    let gi = &wr * &s + &wi * &c;
    let g_max = gr.iter().zip(gi.iter()).fold(T::zero(), |a, (x, y)| a.max((*x * *x + *y * *y).sqrt()));
    let prune = g_max * T::of(1e-17);

    let mut ar = DMatrix::zeros(dim, dim);
    let mut ai = DMatrix::zeros(dim, dim);
    for i in 0..w.n_q {
        let q = qs[i];
        let ji = j_of(q);
        if q.abs() >= radius {
            continue;
        }
        let cols: Vec<usize> = (j_max - ji..=j_max + ji)
            .filter(|&j| (gr[(i, j)] * gr[(i, j)] + gi[(i, j)] * gi[(i, j)]).sqrt() > prune)
            .collect();
        if cols.is_empty() {
            continue;
        }
        let half = T::of(0.5);
        let xp: Vec<T> = cols.iter().map(|&j| q + u(j) * half).collect();
        let xm: Vec<T> = cols.iter().map(|&j| q - u(j) * half).collect();
        let phi_p = hermite_table(dim, &xp);
        let phi_m = hermite_table(dim, &xm);
        let weight = wq[i] * h_u;
        let mr = DMatrix::from_fn(dim, cols.len(), |n, c| phi_m[(n, c)] * gr[(i, cols[c])] * weight);
        let mi = DMatrix::from_fn(dim, cols.len(), |n, c| phi_m[(n, c)] * gi[(i, cols[c])] * weight);
        ar += &phi_p * mr.transpose();
        ai += &phi_p * mi.transpose();
    }
    let matrix = OperatorMatrix::new(join(&ar, &ai))?;

    let wq_full = trapezoid_weights(w.n_q, w.hq());
    let wp_full = trapezoid_weights(w.n_p, w.hp());
    let mut sum = Complex::new(T::zero(), T::zero());
    for i in 0..w.n_q {
        for k in 0..w.n_p {
            sum += values[i * w.n_p + k] * (wq_full[i] * wp_full[k]);
        }
    }
    let symbol_trace = sum * inv2pi;
    let leakage = modulus(matrix.trace() - symbol_trace);
    let mut warning = leakage > cfg.leak_tol;
    let reassembly_l1 = if cfg.reassembly_check {
        let back = dequantize(matrix.entries(), w)?;
        let (mut num, mut den) = (T::zero(), T::zero());
        for i in 0..w.n_q {
            for k in 0..w.n_p {
                let idx = i * w.n_p + k;
                let wt = wq_full[i] * wp_full[k];
                num += modulus(back[idx] - values[idx]) * wt;
                den += modulus(values[idx]) * wt;
            }
        }
        let l1 = if den > T::zero() { num / den } else { num };
        warning |= l1 > cfg.reassembly_tol;
        Some(l1)
    } else {
        None
    };
    Ok(Quantization { matrix, symbol_trace, leakage, reassembly_l1, truncation_warning: warning })
}

/// Weyl symbol of a Hermitian operator on `window`.
pub fn matrix_to_symbol<T: Real>(a: &OperatorMatrix<T>, window: &Window<T>) -> Result<PhaseGrid<T>> {
    if !a.is_hermitian() {
        return Err(Error::NotHermitian { deviation: a.hermiticity_deviation().as_f64() });
    }
    let v = dequantize(a.entries(), window)?;
    PhaseGrid::new(*window, GridKind::Symbol, v.into_iter().map(|z| z.re).collect())
}

/// Weyl symbol of an arbitrary operator on `window`.
pub fn matrix_to_complex_symbol<T: Real>(a: &OperatorMatrix<T>, window: &Window<T>) -> Result<ComplexGrid<T>> {
    ComplexGrid::new(*window, dequantize(a.entries(), window)?)
}

/// `W(q,p) = ∫ K(q,u) e^{-ipu} du` with `K(q,u) = Σ A_mn ψ_m(q+u/2) ψ_n(q-u/2)`.
fn dequantize<T: Real>(a: &DMatrix<Complex<T>>, w: &Window<T>) -> Result<Vec<Complex<T>>> {
    let dim = a.nrows();
    let radius: T = support_radius(dim);
    let p_abs = w.p_min.abs().max(w.p_max.abs());
    let h_u = w.hq().min(T::pi() / (T::of(2.0 * dim as f64 + 1.0).sqrt() + p_abs + T::one()));
    let j_of = |q: T| -> usize {
        let umax = T::of(2.0) * (radius - q.abs());
        if umax <= T::zero() { 0 } else { (umax / h_u).floor().to_usize().unwrap_or(0) }
    };
    let qs = w.q_nodes();
    let ps = w.p_nodes();
    let j_max = qs.iter().map(|&q| j_of(q)).max().unwrap_or(0);
    let n_u = 2 * j_max + 1;
    let u = |j: usize| (T::of_usize(j) - T::of_usize(j_max)) * h_u;
    let c = DMatrix::from_fn(n_u, w.n_p, |j, k| (ps[k] * u(j)).cos() * h_u);
    let s = DMatrix::from_fn(n_u, w.n_p, |j, k| (ps[k] * u(j)).sin() * h_u);
    let (ar, ai) = split(a);
    let mut out = vec![Complex::new(T::zero(), T::zero()); w.len()];
    for (i, &q) in qs.iter().enumerate() {
        if q.abs() >= radius {
            continue;
        }
        let ji = j_of(q);
        let lo = j_max - ji;
        let n = 2 * ji + 1;
        let half = T::of(0.5);
        let xp: Vec<T> = (lo..lo + n).map(|j| q + u(j) * half).collect();
        let xm: Vec<T> = (lo..lo + n).map(|j| q - u(j) * half).collect();
        let phi_p = hermite_table(dim, &xp);
        let phi_m = hermite_table(dim, &xm);
        let mr = &ar * &phi_m;
        let mi = &ai * &phi_m;
        let kr = DVector::from_fn(n, |c, _| phi_p.column(c).dot(&mr.column(c)));
        let ki = DVector::from_fn(n, |c, _| phi_p.column(c).dot(&mi.column(c)));
        let cs = c.rows(lo, n);
        let sn = s.rows(lo, n);
        // (kr + i ki)(cos - i sin)
        let re = cs.tr_mul(&kr) + sn.tr_mul(&ki);
        let im = cs.tr_mul(&ki) - sn.tr_mul(&kr);
        for k in 0..w.n_p {
            out[i * w.n_p + k] = Complex::new(re[k], im[k]);
        }
    }
    Ok(out)
}

/// Wigner function `W_n(q,p) = 2 (-1)^n L_n(2r²) e^{-r²}` of the `n`-th
/// oscillator level.
pub fn fock_wigner<T: Real>(n: usize, q: T, p: T) -> T {
    let r2 = q * q + p * p;
    let sign = if n % 2 == 0 { T::one() } else { -T::one() };
    T::of(2.0) * sign * laguerre(n, T::of(2.0) * r2) * (-r2).exp()
}

/// [`fock_wigner`] sampled on `window` as a symbol grid.
pub fn fock_wigner_grid<T: Real>(n: usize, window: Window<T>) -> Result<PhaseGrid<T>> {
    PhaseGrid::from_fn(window, GridKind::Symbol, |q, p| fock_wigner(n, q, p))
}

/// Re-expresses a grid given at Planck parameter `hbar` in natural units
/// `q' = q/√hbar`, `p' = p/√hbar`. Densities pick up a factor `hbar`; Wigner
/// symbols keep their values. Exact: only the window is relabelled.
pub fn to_natural_units<T: Real>(g: &PhaseGrid<T>, hbar: T) -> Result<PhaseGrid<T>> {
    if !(hbar > T::zero()) {
        return Err(Error::Domain("hbar must be positive".into()));
    }
    let r = T::one() / hbar.sqrt();
    let w = g.window();
    let window = Window::new(w.q_min * r, w.q_max * r, w.n_q, w.p_min * r, w.p_max * r, w.n_p)?;
    let scaled = match g.kind() {
        GridKind::Density => g.map_values(|v| v * hbar)?,
        GridKind::Symbol => g.clone(),
    };
    PhaseGrid::new(window, g.kind(), scaled.values().to_vec())
}

/// Samples of a wave function on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction<T> {
    x_min: T,
    x_max: T,
    values: Vec<Complex<T>>,
}

impl<T: Real> WaveFunction<T> {
    pub fn new(x_min: T, x_max: T, values: Vec<Complex<T>>) -> Result<Self> {
        if values.len() < 2 || !(x_max > x_min) {
            return Err(Error::InvalidGrid("wave function needs two or more samples on x_max > x_min".into()));
        }
        Ok(WaveFunction { x_min, x_max, values })
    }

    pub fn from_fn(x_min: T, x_max: T, n: usize, f: impl Fn(T) -> Complex<T>) -> Result<Self> {
        let h = (x_max - x_min) / T::of_usize(n.max(2) - 1);
        Self::new(x_min, x_max, (0..n).map(|k| f(x_min + h * T::of_usize(k))).collect())
    }

    /// `Σ c_n ψ_n` sampled on `n` points of `[x_min, x_max]`.
    pub fn from_coefficients(c: &DVector<Complex<T>>, x_min: T, x_max: T, n: usize) -> Result<Self> {
        Self::from_fn(x_min, x_max, n, |x| {
            hermite_functions(c.len(), x)
                .into_iter()
                .zip(c.iter())
                .fold(Complex::new(T::zero(), T::zero()), |a, (h, z)| a + *z * h)
        })
    }

    pub fn x(&self, k: usize) -> T {
        self.x_min + (self.x_max - self.x_min) * T::of_usize(k) / T::of_usize(self.values.len() - 1)
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    fn weights(&self) -> Vec<T> {
        trapezoid_weights(self.values.len(), (self.x_max - self.x_min) / T::of_usize(self.values.len() - 1))
    }

    pub fn norm_sqr(&self) -> T {
        self.weights().iter().zip(&self.values).fold(T::zero(), |a, (w, z)| a + *w * z.norm_sqr())
    }

    /// Coefficients `c_n = ∫ ψ_n ψ dx` for `n < dim`.
    pub fn coefficients(&self, dim: usize) -> DVector<Complex<T>> {
        let xs: Vec<T> = (0..self.values.len()).map(|k| self.x(k)).collect();
        let table = hermite_table(dim, &xs);
        let w = self.weights();
        DVector::from_fn(dim, |n, _| {
            (0..xs.len()).fold(Complex::new(T::zero(), T::zero()), |a, k| a + self.values[k] * (table[(n, k)] * w[k]))
        })
    }
}

/// Value of the positivity functional together with the part of `ψ` lost
/// to basis truncation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Positivity<T> {
    /// `∫ ψ*(x) W((x+x')/2, p) e^{ip(x-x')} ψ(x') dp dx dx'`.
    pub value: T,
    /// `1 - ‖P_D ψ‖² / ‖ψ‖²`.
    pub projection_residual: T,
}

/// The quadratic form `2π ⟨ψ|A|ψ⟩` of the operator with symbol `w`.
/// Nonnegative for every `ψ` exactly when `w` is the symbol of a
/// nonnegative operator.
pub fn positivity_functional<T: Real>(
    w: &PhaseGrid<T>,
    psi: &WaveFunction<T>,
    cfg: &WeylConfig<T>,
) -> Result<Positivity<T>> {
    let a = symbol_to_matrix(w, cfg)?.matrix;
    Ok(positivity_with_matrix(&a, psi))
}

/// [`positivity_functional`] for an already quantized symbol.
pub fn positivity_with_matrix<T: Real>(a: &OperatorMatrix<T>, psi: &WaveFunction<T>) -> Positivity<T> {
    let c = psi.coefficients(a.dim());
    let ac = a.entries() * &c;
    let form = c.iter().zip(ac.iter()).fold(Complex::new(T::zero(), T::zero()), |s, (x, y)| s + x.conj() * y);
    let norm = psi.norm_sqr();
    let kept = c.iter().fold(T::zero(), |s, z| s + z.norm_sqr());
    Positivity { value: T::two_pi() * form.re, projection_residual: (T::one() - kept / norm).max(T::zero()) }
}

/// Position kernel `ρ(x_a, x_b)` sampled on a uniform square grid.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelGrid<T> {
    x_min: T,
    x_max: T,
    n: usize,
    values: Vec<Complex<T>>,
}

impl<T: Real> KernelGrid<T> {
    pub fn new(x_min: T, x_max: T, n: usize, values: Vec<Complex<T>>) -> Result<Self> {
        if n < 2 || !(x_max > x_min) || values.len() != n * n {
            return Err(Error::InvalidGrid("kernel grid needs n >= 2, x_max > x_min and n² values".into()));
        }
        Ok(KernelGrid { x_min, x_max, n, values })
    }

    pub fn from_fn(x_min: T, x_max: T, n: usize, f: impl Fn(T, T) -> Complex<T>) -> Result<Self> {
        let h = (x_max - x_min) / T::of_usize(n.max(2) - 1);
        let x = |k: usize| x_min + h * T::of_usize(k);
        let values = (0..n * n).map(|idx| f(x(idx / n), x(idx % n))).collect();
        Self::new(x_min, x_max, n, values)
    }

    pub fn value(&self, a: usize, b: usize) -> Complex<T> {
        self.values[a * self.n + b]
    }

    pub fn h(&self) -> T {
        (self.x_max - self.x_min) / T::of_usize(self.n - 1)
    }

    /// `ρ(x', x)`.
    pub fn transpose(&self) -> Self {
        let values = (0..self.n * self.n).map(|idx| self.value(idx % self.n, idx / self.n)).collect();
        KernelGrid { values, ..self.clone() }
    }

    pub fn hermiticity_deviation(&self) -> T {
        let mut worst = T::zero();
        for a in 0..self.n {
            for b in a..self.n {
                worst = worst.max(modulus(self.value(a, b) - self.value(b, a).conj()));
            }
        }
        worst
    }
}

/// Wigner function of a sampled density kernel,
/// `W(q,p) = ∫ ρ(q+u/2, q-u/2) e^{-ipu} du`, at the kernel's `x` nodes and
/// `n_p` momenta on `[p_min, p_max]`.
pub fn wigner_of_density<T: Real>(rho: &KernelGrid<T>, p_min: T, p_max: T, n_p: usize) -> Result<PhaseGrid<T>> {
    let scale = rho.values.iter().fold(T::one(), |a, z| a.max(modulus(*z)));
    let dev = rho.hermiticity_deviation();
    if dev > T::of(HERMITIAN_TOL) * scale {
        return Err(Error::NotHermitian { deviation: dev.as_f64() });
    }
    let window = Window::new(rho.x_min, rho.x_max, rho.n, p_min, p_max, n_p)?;
    let h = rho.h();
    let two_h = h * T::of(2.0);
    let mut values = Vec::with_capacity(window.len());
    for i in 0..rho.n {
        let reach = i.min(rho.n - 1 - i);
        for jp in 0..n_p {
            let p = window.p(jp);
            let mut acc = Complex::new(T::zero(), T::zero());
            for k in 0..=reach {
                let u = two_h * T::of_usize(k);
                let plus = rho.value(i + k, i - k) * (-(p * u)).cis();
                acc += if k == 0 { plus } else { plus + rho.value(i - k, i + k) * (p * u).cis() };
            }
            values.push(acc.re * two_h);
        }
    }
    PhaseGrid::new(window, GridKind::Symbol, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg(dim: usize) -> WeylConfig<f64> {
        WeylConfig::default().with_window(Window::square(8.0, 128).unwrap()).with_dim(dim)
    }

    #[test]
    fn vacuum_symbol_is_ground_state_projector() {
        let cfg = small_cfg(16);
        let w = PhaseGrid::from_fn(cfg.window, GridKind::Symbol, |q, p| 2.0 * (-q * q - p * p).exp()).unwrap();
        let qz = symbol_to_matrix(&w, &cfg).unwrap();
        let target = OperatorMatrix::fock(0, 16).unwrap();
        assert!(qz.matrix.max_abs_diff(&target) < 1e-10);
        assert!(!qz.truncation_warning);
    }

    #[test]
    fn fock_one_symbol_at_origin() {
        let w = Window::new(-1.0_f64, 1.0, 3, -1.0, 1.0, 3).unwrap();
        let s = matrix_to_symbol(&OperatorMatrix::fock(1, 8).unwrap(), &w).unwrap();
        assert!((s.value(1, 1) + 2.0).abs() < 1e-10);
        let s = matrix_to_symbol(&OperatorMatrix::fock(0, 8).unwrap(), &w).unwrap();
        assert!((s.value(1, 1) - 2.0).abs() < 1e-10);
    }

    #[test]
    fn analytic_fock_wigner_matches_dequantization() {
        let w = Window::square(4.0_f64, 17).unwrap();
        for n in 0..5 {
            let s = matrix_to_symbol(&OperatorMatrix::fock(n, 8).unwrap(), &w).unwrap();
            for i in 0..17 {
                for j in 0..17 {
                    assert!((s.value(i, j) - fock_wigner(n, w.q(i), w.p(j))).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn spectrum_sorted_by_magnitude() {
        let m = DMatrix::from_row_slice(3, 3, &[0.2, 0.0, 0.0, 0.0, -0.9, 0.0, 0.0, 0.0, 0.5]);
        let s = spectral_decompose(&OperatorMatrix::from_real(m).unwrap()).unwrap();
        assert_eq!(s.eigenvalues(), &[-0.9, 0.5, 0.2]);
        assert_eq!(s.argmin(), 0);
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        let a = OperatorMatrix::from_real(m).unwrap();
        assert!(!a.is_hermitian());
        assert!(matches!(spectral_decompose(&a), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn too_large_basis_rejected() {
        let cfg = WeylConfig { dim: 500, ..small_cfg(8) };
        let g = fock_wigner_grid(0, cfg.window).unwrap();
        assert!(matches!(symbol_to_matrix(&g, &cfg), Err(Error::Dimension(_))));
    }

    #[test]
    fn natural_units_preserve_mass() {
        let g = crate::model::GaussianState::vacuum(0.1_f64).sample(Window::square(2.0, 101).unwrap()).unwrap();
        let n = to_natural_units(&g, 0.1).unwrap();
        assert!((n.mass() - g.mass()).abs() < 1e-14);
        assert!((n.window().q_max - 2.0 / 0.1f64.sqrt()).abs() < 1e-14);
    }
}
