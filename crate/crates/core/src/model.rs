//! States, reference frames, scaling parameters and the elementary
//! phase-space symmetries (time reversal, mirror reflection, shifts).

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{GridKind, PhaseGrid, Window};
use crate::num::Real;

/// Mass-loss tolerance for resampling a grid onto a fixed window.
pub const RESAMPLE_MASS_TOL: f64 = 1e-4;

/// Normalization tolerance for densities sampled from analytic states.
pub const ANALYTIC_NORM_TOL: f64 = 1e-6;

/// Normalization tolerance for grids loaded from files.
pub const LOADED_NORM_TOL: f64 = 1e-3;

/// Reference frame `X = mu q + nu p` of a tomographic measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Frame<T> {
    pub mu: T,
    pub nu: T,
}

impl<T: Real> Frame<T> {
    pub fn new(mu: T, nu: T) -> Result<Self> {
        if !(mu.is_finite() && nu.is_finite()) {
            return Err(Error::Domain("frame components must be finite".into()));
        }
        if mu == T::zero() && nu == T::zero() {
            return Err(Error::DegenerateFrame);
        }
        Ok(Frame { mu, nu })
    }

    /// Frame from a squeeze `lambda` and a rotation `theta`:
    /// `mu = e^lambda cos(theta)`, `nu = e^-lambda sin(theta)`.
    pub fn from_polar(lambda: T, theta: T) -> Self {
        // cos and sin never vanish together, so the frame is never (0, 0).
        Frame { mu: lambda.exp() * theta.cos(), nu: (-lambda).exp() * theta.sin() }
    }

    pub fn norm(&self) -> T {
        (self.mu * self.mu + self.nu * self.nu).sqrt()
    }

    pub fn scaled(&self, factor: T) -> Result<Self> {
        Frame::new(self.mu * factor, self.nu * factor)
    }

    /// If `other = lambda * self`, returns `lambda`.
    pub fn ratio_to(&self, other: &Self, tol: T) -> Option<T> {
        let cross = self.mu * other.nu - self.nu * other.mu;
        let scale = self.norm() * other.norm();
        if cross.abs() > tol * scale {
            return None;
        }
        let n2 = self.mu * self.mu + self.nu * self.nu;
        Some((self.mu * other.mu + self.nu * other.nu) / n2)
    }
}

/// Per-mode nonzero scaling factors `q_s -> lambda_q[s] q_s`,
/// `p_s -> lambda_p[s] p_s`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleParams<T> {
    lambda_q: Vec<T>,
    lambda_p: Vec<T>,
}

impl<T: Real> ScaleParams<T> {
    pub fn new(lambda_q: Vec<T>, lambda_p: Vec<T>) -> Result<Self> {
        if lambda_q.len() != lambda_p.len() || lambda_q.is_empty() {
            return Err(Error::Dimension(
                "lambda_q and lambda_p must have the same nonzero length".into(),
            ));
        }
        // index follows the stacked (q_1..q_n, p_1..p_n) ordering
        for (index, v) in lambda_q.iter().chain(&lambda_p).enumerate() {
            if *v == T::zero() || !v.is_finite() {
                return Err(Error::ZeroScale { index });
            }
        }
        Ok(ScaleParams { lambda_q, lambda_p })
    }

    /// Single-mode parameters.
    pub fn single(lambda_q: T, lambda_p: T) -> Result<Self> {
        Self::new(vec![lambda_q], vec![lambda_p])
    }

    pub fn identity(n_modes: usize) -> Self {
        ScaleParams { lambda_q: vec![T::one(); n_modes], lambda_p: vec![T::one(); n_modes] }
    }

    pub fn n_modes(&self) -> usize {
        self.lambda_q.len()
    }

    pub fn lambda_q(&self) -> &[T] {
        &self.lambda_q
    }

    pub fn lambda_p(&self) -> &[T] {
        &self.lambda_p
    }

    /// `|lambda_q lambda_p|` for each mode.
    pub fn products(&self) -> Vec<T> {
        self.lambda_q.iter().zip(&self.lambda_p).map(|(a, b)| (*a * *b).abs()).collect()
    }

    /// Factors in the `(q_1..q_n, p_1..p_n)` ordering.
    pub fn stacked(&self) -> Vec<T> {
        self.lambda_q.iter().chain(&self.lambda_p).copied().collect()
    }

    /// Componentwise product, i.e. applying `self` and then `other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.n_modes() != other.n_modes() {
            return Err(Error::Dimension("cannot compose parameters of different mode counts".into()));
        }
        let mul = |a: &[T], b: &[T]| a.iter().zip(b).map(|(x, y)| *x * *y).collect::<Vec<_>>();
        Self::new(mul(&self.lambda_q, &other.lambda_q), mul(&self.lambda_p, &other.lambda_p))
    }

    /// Group inverse; always exists for the classical scaling group.
    pub fn inverse(&self) -> Self {
        let inv = |a: &[T]| a.iter().map(|x| T::one() / *x).collect::<Vec<_>>();
        ScaleParams { lambda_q: inv(&self.lambda_q), lambda_p: inv(&self.lambda_p) }
    }
}

/// First and second moments of a state in the `(q_1..q_n, p_1..p_n)` ordering,
/// with the determinant and trace of the dispersion matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments<T: Real> {
    mean: DVector<T>,
    sigma: DMatrix<T>,
    d: T,
    t: T,
}

impl<T: Real> Moments<T> {
    pub fn new(mean: DVector<T>, sigma: DMatrix<T>) -> Result<Self> {
        let dim = sigma.nrows();
        if dim == 0 || dim % 2 != 0 || sigma.ncols() != dim || mean.len() != dim {
            return Err(Error::Dimension(format!(
                "moments need a 2n mean and a 2n x 2n dispersion matrix (got {} and {}x{})",
                mean.len(),
                sigma.nrows(),
                sigma.ncols()
            )));
        }
        if mean.iter().chain(sigma.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidState("moments must be finite".into()));
        }
        let scale = sigma.iter().fold(T::zero(), |a, v| a.max(v.abs()));
        let tol = T::of(1e-12) * (T::one() + scale);
        for i in 0..dim {
            for j in 0..i {
                if (sigma[(i, j)] - sigma[(j, i)]).abs() > tol {
                    return Err(Error::InvalidState("dispersion matrix is not symmetric".into()));
                }
            }
        }
        let d = sigma.determinant();
        let t = sigma.trace();
        Ok(Moments { mean, sigma, d, t })
    }

    /// Single-mode moments from `(sigma_qq, sigma_pp, sigma_qp)`, centered.
    pub fn single(sigma_qq: T, sigma_pp: T, sigma_qp: T) -> Result<Self> {
        Self::new(
            DVector::zeros(2),
            DMatrix::from_row_slice(2, 2, &[sigma_qq, sigma_qp, sigma_qp, sigma_pp]),
        )
    }

    pub fn n_modes(&self) -> usize {
        self.mean.len() / 2
    }

    pub fn mean(&self) -> &DVector<T> {
        &self.mean
    }

    pub fn sigma(&self) -> &DMatrix<T> {
        &self.sigma
    }

    /// Determinant of the dispersion matrix.
    pub fn d(&self) -> T {
        self.d
    }

    /// Trace of the dispersion matrix.
    pub fn t(&self) -> T {
        self.t
    }

    pub fn sigma_qq(&self) -> T {
        self.sigma[(0, 0)]
    }

    pub fn sigma_pp(&self) -> T {
        let n = self.n_modes();
        self.sigma[(n, n)]
    }

    pub fn sigma_qp(&self) -> T {
        self.sigma[(0, self.n_modes())]
    }

    /// 2x2 dispersion block of one mode.
    pub fn mode_block(&self, s: usize) -> [[T; 2]; 2] {
        let n = self.n_modes();
        [
            [self.sigma[(s, s)], self.sigma[(s, s + n)]],
            [self.sigma[(s + n, s)], self.sigma[(s + n, s + n)]],
        ]
    }

    /// Nonnegativity of diagonal entries, determinant and trace.
    pub fn is_classically_valid(&self, tol: T) -> bool {
        self.sigma.diagonal().iter().all(|v| *v >= -tol) && self.d >= -tol && self.t >= -tol
    }
}

/// Gaussian state: the exact analytic carrier for all transforms.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState<T: Real> {
    moments: Moments<T>,
}

impl<T: Real> GaussianState<T> {
    pub fn new(mean: DVector<T>, sigma: DMatrix<T>) -> Result<Self> {
        let moments = Moments::new(mean, sigma)?;
        let tol = T::of(1e-12) * (T::one() + moments.t.abs());
        if !moments.is_classically_valid(tol) {
            return Err(Error::InvalidState(
                "dispersion matrix must have nonnegative diagonal, determinant and trace".into(),
            ));
        }
        Ok(GaussianState { moments })
    }

    /// Single-mode Gaussian with the given means and dispersion entries.
    pub fn single(mean_q: T, mean_p: T, sigma_qq: T, sigma_pp: T, sigma_qp: T) -> Result<Self> {
        Self::new(
            DVector::from_vec(vec![mean_q, mean_p]),
            DMatrix::from_row_slice(2, 2, &[sigma_qq, sigma_qp, sigma_qp, sigma_pp]),
        )
    }

    /// Minimum-uncertainty vacuum at Planck parameter `hbar`.
    pub fn vacuum(hbar: T) -> Self {
        let h = hbar / T::of(2.0);
        Self::single(T::zero(), T::zero(), h, h, T::zero()).expect("vacuum is valid")
    }

    /// Isotropic centered Gaussian with `sigma = diag(s, s)`.
    pub fn isotropic(s: T) -> Result<Self> {
        Self::single(T::zero(), T::zero(), s, s, T::zero())
    }

    pub fn from_moments(moments: Moments<T>) -> Result<Self> {
        Self::new(moments.mean.clone(), moments.sigma.clone())
    }

    pub fn n_modes(&self) -> usize {
        self.moments.n_modes()
    }

    pub fn moments(&self) -> &Moments<T> {
        &self.moments
    }

    /// Single-mode phase-space density `f(q, p)`; requires a nonsingular
    /// dispersion matrix.
    pub fn density(&self, q: T, p: T) -> T {
        let m = &self.moments;
        let (a, b, c) = (m.sigma_qq(), m.sigma_pp(), m.sigma_qp());
        let det = a * b - c * c;
        let dq = q - m.mean[0];
        let dp = p - m.mean[1];
        let quad = (b * dq * dq - T::of(2.0) * c * dq * dp + a * dp * dp) / det;
        (-quad / T::of(2.0)).exp() / (T::two_pi() * det.sqrt())
    }

    /// Samples the single-mode density on `window`.
    pub fn sample(&self, window: Window<T>) -> Result<PhaseGrid<T>> {
        if self.n_modes() != 1 {
            return Err(Error::Dimension("phase grids hold single-mode states only".into()));
        }
        if self.moments.d() <= T::zero() {
            return Err(Error::InvalidState("cannot sample a singular Gaussian on a grid".into()));
        }
        PhaseGrid::from_fn(window, GridKind::Density, |q, p| self.density(q, p))
    }
}

/// How a window is treated by the symmetry transforms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowMode {
    /// Keep the window; samples are reflected in place or interpolated.
    Fixed,
    /// Move the window together with the data; exact, no interpolation.
    Follow,
}

/// Moments of a single-mode grid by trapezoidal quadrature.
pub fn moments_of_grid<T: Real>(g: &PhaseGrid<T>, tol: T) -> Result<Moments<T>> {
    let mass = g.mass();
    if (mass - T::one()).abs() > tol {
        return Err(Error::Normalization { integral: mass.as_f64(), tol: tol.as_f64() });
    }
    let f = g.to_density();
    let mq = f.weighted_sum(|q, _, v| q * v) / mass;
    let mp = f.weighted_sum(|_, p, v| p * v) / mass;
    let sqq = f.weighted_sum(|q, _, v| (q - mq) * (q - mq) * v) / mass;
    let spp = f.weighted_sum(|_, p, v| (p - mp) * (p - mp) * v) / mass;
    let sqp = f.weighted_sum(|q, p, v| (q - mq) * (p - mp) * v) / mass;
    Moments::new(
        DVector::from_vec(vec![mq, mp]),
        DMatrix::from_row_slice(2, 2, &[sqq, sqp, sqp, spp]),
    )
}

fn is_symmetric_range<T: Real>(lo: T, hi: T) -> bool {
    (lo + hi).abs() <= T::of(1e-12) * (hi - lo)
}

/// Time reversal `f(q, p) -> f(q, -p)`.
pub fn reflect_time<T: Real>(g: &PhaseGrid<T>, mode: WindowMode) -> Result<PhaseGrid<T>> {
    let w = *g.window();
    if mode == WindowMode::Fixed && !is_symmetric_range(w.p_min, w.p_max) {
        return Err(Error::Domain(
            "time reversal on a fixed window needs p_min = -p_max".into(),
        ));
    }
    let window = Window { p_min: -w.p_max, p_max: -w.p_min, ..w };
    let mut values = Vec::with_capacity(w.len());
    for i in 0..w.n_q {
        for j in (0..w.n_p).rev() {
            values.push(g.value(i, j));
        }
    }
    PhaseGrid::new(window, g.kind(), values)
}

/// Mirror reflection `f(q, p) -> f(-q, p)`.
pub fn reflect_parity<T: Real>(g: &PhaseGrid<T>, mode: WindowMode) -> Result<PhaseGrid<T>> {
    let w = *g.window();
    if mode == WindowMode::Fixed && !is_symmetric_range(w.q_min, w.q_max) {
        return Err(Error::Domain("parity on a fixed window needs q_min = -q_max".into()));
    }
    let window = Window { q_min: -w.q_max, q_max: -w.q_min, ..w };
    let mut values = Vec::with_capacity(w.len());
    for i in (0..w.n_q).rev() {
        for j in 0..w.n_p {
            values.push(g.value(i, j));
        }
    }
    PhaseGrid::new(window, g.kind(), values)
}

/// Origin shift `f(q, p) -> f(q + q0, p + p0)`.
///
/// With [`WindowMode::Follow`] the window moves by `(-q0, -p0)` and the
/// samples are reused verbatim. With [`WindowMode::Fixed`] the shifted
/// function is interpolated back onto the original window and the call fails
/// if more than [`RESAMPLE_MASS_TOL`] of the mass leaves it.
pub fn shift<T: Real>(g: &PhaseGrid<T>, q0: T, p0: T, mode: WindowMode) -> Result<PhaseGrid<T>> {
    match mode {
        WindowMode::Follow => Ok(g.with_window(g.window().translated(-q0, -p0))),
        WindowMode::Fixed => {
            let out = g.resample(*g.window(), T::one(), |q, p| (q + q0, p + p0))?;
            let before = g.integral();
            let lost = (before - out.integral()).abs();
            let tol = T::of(RESAMPLE_MASS_TOL) * before.abs().max(T::one());
            if lost > tol {
                return Err(Error::Truncation { lost: lost.as_f64(), tol: tol.as_f64() });
            }
            Ok(out)
        }
    }
}
