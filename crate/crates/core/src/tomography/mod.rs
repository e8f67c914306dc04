//! Symplectic tomograms `ω(X, μ, ν)`: the probability density of
//! `X = μ q + ν p` for each reference frame `(μ, ν)`.

mod inverse;

pub use inverse::{invert_tomogram, InversionOptions};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::PhaseGrid;
use crate::model::{Frame, GaussianState, Moments, ANALYTIC_NORM_TOL};
use crate::num::{trapezoid_weights, Real};

/// Tolerance used to match stored frames that differ by a scalar factor.
const FRAME_MATCH_TOL: f64 = 1e-12;

/// One sampled marginal `ω(X, μ, ν)` on a uniform `X` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginal<T> {
    frame: Frame<T>,
    x_min: T,
    x_max: T,
    values: Vec<T>,
}

impl<T: Real> Marginal<T> {
    pub fn new(frame: Frame<T>, x_min: T, x_max: T, values: Vec<T>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidGrid("a marginal needs at least two samples".into()));
        }
        if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::InvalidGrid("marginal range must satisfy x_max > x_min".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid("marginal values must be finite".into()));
        }
        Ok(Marginal { frame, x_min, x_max, values })
    }

    pub fn frame(&self) -> Frame<T> {
        self.frame
    }

    pub fn x_min(&self) -> T {
        self.x_min
    }

    pub fn x_max(&self) -> T {
        self.x_max
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn hx(&self) -> T {
        (self.x_max - self.x_min) / T::of_usize(self.values.len() - 1)
    }

    pub fn x(&self, k: usize) -> T {
        self.x_min + self.hx() * T::of_usize(k)
    }

    fn moment(&self, g: impl Fn(T) -> T) -> T {
        trapezoid_weights(self.values.len(), self.hx())
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (k, w)| acc + *w * g(self.x(k)) * self.values[k])
    }

    /// `∫ ω dX`.
    pub fn integral(&self) -> T {
        self.moment(|_| T::one())
    }

    /// Mean and variance of `X`, normalized by the marginal's own integral.
    pub fn mean_var(&self) -> (T, T) {
        let norm = self.integral();
        let mean = self.moment(|x| x) / norm;
        let var = self.moment(|x| (x - mean) * (x - mean)) / norm;
        (mean, var)
    }

    /// Linear interpolation; zero outside the sampled range.
    pub fn value_at(&self, x: T) -> T {
        let t = (x - self.x_min) / self.hx();
        let last = T::of_usize(self.values.len() - 1);
        if !(t >= T::zero() && t <= last) {
            return T::zero();
        }
        let k = t.floor().to_usize().unwrap_or(0).min(self.values.len() - 2);
        let f = t - T::of_usize(k);
        self.values[k] * (T::one() - f) + self.values[k + 1] * f
    }

    pub fn min_value(&self) -> T {
        self.values.iter().copied().fold(T::max_value().unwrap_or(T::one()), |a, b| a.min(b))
    }

    pub fn map_values(&self, f: impl Fn(T) -> T) -> Self {
        Marginal { values: self.values.iter().map(|&v| f(v)).collect(), ..self.clone() }
    }

    /// The same marginal re-expressed at the frame `λ (μ, ν)` using
    /// `ω(λX, λμ, λν) = ω(X, μ, ν) / |λ|`.
    pub fn rescaled(&self, lambda: T) -> Result<Self> {
        let frame = self.frame.scaled(lambda)?;
        let inv = T::one() / lambda.abs();
        let (x_min, x_max, values) = if lambda > T::zero() {
            (self.x_min * lambda, self.x_max * lambda, self.values.iter().map(|v| *v * inv).collect())
        } else {
            (self.x_max * lambda, self.x_min * lambda, self.values.iter().rev().map(|v| *v * inv).collect())
        };
        Marginal::new(frame, x_min, x_max, values)
    }
}

/// A tomogram, either in closed form for a Gaussian state or as sampled
/// marginals at a finite set of frames.
#[derive(Debug, Clone, PartialEq)]
pub enum Tomogram<T: Real> {
    /// Single-mode Gaussian: `ω` is a normal density in `X` with mean
    /// `μ⟨q⟩ + ν⟨p⟩` and variance `μ²σ_qq + 2μνσ_qp + ν²σ_pp`.
    Gaussian(GaussianState<T>),
    Sampled(Vec<Marginal<T>>),
}

impl<T: Real> Tomogram<T> {
    pub fn gaussian(state: GaussianState<T>) -> Result<Self> {
        if state.n_modes() != 1 {
            return Err(Error::Dimension("analytic tomograms are single-mode".into()));
        }
        Ok(Tomogram::Gaussian(state))
    }

    pub fn sampled(marginals: Vec<Marginal<T>>) -> Result<Self> {
        if marginals.is_empty() {
            return Err(Error::Domain("a sampled tomogram needs at least one frame".into()));
        }
        Ok(Tomogram::Sampled(marginals))
    }

    pub fn marginals(&self) -> &[Marginal<T>] {
        match self {
            Tomogram::Gaussian(_) => &[],
            Tomogram::Sampled(m) => m,
        }
    }

    /// Stored marginal whose frame is a scalar multiple of `frame`, with the
    /// factor `λ` such that `frame = λ * stored`.
    pub(crate) fn find(&self, frame: &Frame<T>) -> Option<(&Marginal<T>, T)> {
        let tol = T::of(FRAME_MATCH_TOL);
        self.marginals().iter().find_map(|m| m.frame.ratio_to(frame, tol).map(|l| (m, l)))
    }

    /// Mean and variance of `X` at `frame`.
    pub fn mean_var(&self, frame: &Frame<T>) -> Result<(T, T)> {
        match self {
            Tomogram::Gaussian(s) => Ok(tomogram_of_gaussian(s, frame)?),
            Tomogram::Sampled(_) => {
                let (m, l) = self
                    .find(frame)
                    .ok_or(Error::MissingFrame { mu: frame.mu.as_f64(), nu: frame.nu.as_f64() })?;
                let (mean, var) = m.mean_var();
                Ok((mean * l, var * l * l))
            }
        }
    }

    /// `ω(X, μ, ν)`. Sampled tomograms answer for any scalar multiple of a
    /// stored frame.
    pub fn density(&self, x: T, frame: &Frame<T>) -> Result<T> {
        match self {
            Tomogram::Gaussian(s) => {
                let (mean, var) = tomogram_of_gaussian(s, frame)?;
                if !(var > T::zero()) {
                    return Err(Error::Domain("degenerate (zero-variance) marginal".into()));
                }
                let z = x - mean;
                Ok((-(z * z) / (T::of(2.0) * var)).exp() / (T::two_pi() * var).sqrt())
            }
            Tomogram::Sampled(_) => {
                let (m, l) = self
                    .find(frame)
                    .ok_or(Error::MissingFrame { mu: frame.mu.as_f64(), nu: frame.nu.as_f64() })?;
                Ok(m.value_at(x / l) / l.abs())
            }
        }
    }

    /// Multiplies every sampled value by `factor` (analytic tomograms are
    /// returned unchanged). Useful for constructing defective inputs.
    pub fn scale_values(&self, factor: T) -> Self {
        match self {
            Tomogram::Gaussian(_) => self.clone(),
            Tomogram::Sampled(ms) => Tomogram::Sampled(ms.iter().map(|m| m.map_values(|v| v * factor)).collect()),
        }
    }
}

/// Settings of the forward transform of a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TomogramOptions<T> {
    /// `X` samples per frame, including one empty padding node at each end.
    pub n_x: usize,
    /// Allowed deviation of the input mass from one.
    pub tol: T,
}

impl<T: Real> Default for TomogramOptions<T> {
    fn default() -> Self {
        TomogramOptions { n_x: 256, tol: T::of(ANALYTIC_NORM_TOL) }
    }
}

/// Forward transform of a single-mode grid.
///
/// Each node's mass `w_i w_j f(q_i, p_j)` is deposited on the `X` grid of
/// every frame by linear (tent) splitting between the two nearest nodes, so
/// the total mass and the first moment are conserved exactly. The `X` range
/// of a frame is the image of the window corners plus one padding node on
/// each side; it scales with the frame, so marginals of frames that differ
/// by a factor are binned identically. Symbol grids are divided by `2π`.
pub fn tomogram_of_grid<T: Real>(
    g: &PhaseGrid<T>,
    frames: &[Frame<T>],
    opts: &TomogramOptions<T>,
) -> Result<Tomogram<T>> {
    if frames.is_empty() {
        return Err(Error::Domain("at least one frame is required".into()));
    }
    if opts.n_x < 4 {
        return Err(Error::Domain("n_x must be at least 4".into()));
    }
    let mass = g.mass();
    if (mass - T::one()).abs() > opts.tol {
        return Err(Error::Normalization { integral: mass.as_f64(), tol: opts.tol.as_f64() });
    }
    let w = g.window();
    let qs = w.q_nodes();
    let ps = w.p_nodes();
    let wq = w.q_weights();
    let wp = w.p_weights();
    let cell_mass: Vec<T> = (0..w.n_q)
        .flat_map(|i| (0..w.n_p).map(move |j| (i, j)))
        .map(|(i, j)| wq[i] * wp[j] * g.density(i, j))
        .collect();

    let mut out = Vec::with_capacity(frames.len());
    for frame in frames {
        let frame = Frame::new(frame.mu, frame.nu)?;
        let corners = [
            frame.mu * w.q_min + frame.nu * w.p_min,
            frame.mu * w.q_min + frame.nu * w.p_max,
            frame.mu * w.q_max + frame.nu * w.p_min,
            frame.mu * w.q_max + frame.nu * w.p_max,
        ];
        let lo = corners.iter().copied().fold(corners[0], |a, b| a.min(b));
        let hi = corners.iter().copied().fold(corners[0], |a, b| a.max(b));
        let hx = (hi - lo) / T::of_usize(opts.n_x - 3);
        let x_min = lo - hx;
        let mut bins = vec![T::zero(); opts.n_x];
        for (i, &q) in qs.iter().enumerate() {
            let row = &cell_mass[i * w.n_p..(i + 1) * w.n_p];
            for (&p, &m) in ps.iter().zip(row) {
                if m == T::zero() {
                    continue;
                }
                let t = (frame.mu * q + frame.nu * p - x_min) / hx;
                let k = t.floor().to_usize().unwrap_or(1).clamp(1, opts.n_x - 3);
                let f = t - T::of_usize(k);
                bins[k] += m * (T::one() - f);
                bins[k + 1] += m * f;
            }
        }
        let inv = T::one() / hx;
        let values = bins.into_iter().map(|b| b * inv).collect();
        out.push(Marginal::new(frame, x_min, hi + hx, values)?);
    }
    Ok(Tomogram::Sampled(out))
}

/// Closed-form `(mean, variance)` of `X` at `frame` for a single-mode
/// Gaussian state.
pub fn tomogram_of_gaussian<T: Real>(s: &GaussianState<T>, frame: &Frame<T>) -> Result<(T, T)> {
    if s.n_modes() != 1 {
        return Err(Error::Dimension("use tomogram_of_gaussian_modes for multimode states".into()));
    }
    let m = s.moments();
    let (mu, nu) = (frame.mu, frame.nu);
    let mean = mu * m.mean()[0] + nu * m.mean()[1];
    let var = mu * mu * m.sigma_qq() + T::of(2.0) * mu * nu * m.sigma_qp() + nu * nu * m.sigma_pp();
    Ok((mean, var))
}

/// Joint mean vector and covariance of `X_s = μ_s q_s + ν_s p_s` for an
/// `n`-mode Gaussian state with one frame per mode.
pub fn tomogram_of_gaussian_modes<T: Real>(
    s: &GaussianState<T>,
    frames: &[Frame<T>],
) -> Result<(DVector<T>, DMatrix<T>)> {
    let n = s.n_modes();
    if frames.len() != n {
        return Err(Error::Dimension(format!("{} frames given for {} modes", frames.len(), n)));
    }
    let mut a = DMatrix::zeros(n, 2 * n);
    for (k, f) in frames.iter().enumerate() {
        a[(k, k)] = f.mu;
        a[(k, k + n)] = f.nu;
    }
    let m = s.moments();
    Ok((&a * m.mean(), &a * m.sigma() * a.transpose()))
}

/// Moments recovered from the variances at frames `(1,0)`, `(0,1)`, `(1,1)`
/// through `σ_XX(μ,ν) = μ²σ_qq + 2μνσ_qp + ν²σ_pp`.
pub fn tomogram_moments<T: Real>(t: &Tomogram<T>) -> Result<Moments<T>> {
    let (zero, one) = (T::zero(), T::one());
    let (mq, sqq) = t.mean_var(&Frame { mu: one, nu: zero })?;
    let (mp, spp) = t.mean_var(&Frame { mu: zero, nu: one })?;
    let (_, s11) = t.mean_var(&Frame { mu: one, nu: one })?;
    let sqp = (s11 - sqq - spp) / T::of(2.0);
    Moments::new(
        DVector::from_vec(vec![mq, mp]),
        DMatrix::from_row_slice(2, 2, &[sqq, sqp, sqp, spp]),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameResidual<T> {
    pub frame: Frame<T>,
    pub residual: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomogeneityResidual<T> {
    pub frame: Frame<T>,
    pub lambda: T,
    pub residual: T,
}

/// Findings of [`check_tomogram`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TomogramReport<T> {
    /// `|∫ω dX - 1|` per frame.
    pub normalization: Vec<FrameResidual<T>>,
    /// `max_X | |λ| ω(λX, λμ, λν) - ω(X, μ, ν) |` per related pair.
    pub homogeneity: Vec<HomogeneityResidual<T>>,
    /// Frames whose marginal dips below zero, with the minimum value.
    pub negativity: Vec<FrameResidual<T>>,
}

impl<T: Real> TomogramReport<T> {
    pub fn max_normalization_residual(&self) -> T {
        self.normalization.iter().fold(T::zero(), |a, r| a.max(r.residual))
    }

    pub fn max_homogeneity_residual(&self) -> T {
        self.homogeneity.iter().fold(T::zero(), |a, r| a.max(r.residual))
    }

    pub fn is_valid(&self, tol: T) -> bool {
        self.max_normalization_residual() <= tol
            && self.max_homogeneity_residual() <= tol
            && self.negativity.iter().all(|r| r.residual >= -tol)
    }
}

/// Probes used when checking analytic tomograms, which have no stored frames.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOptions<T> {
    pub frames: Vec<Frame<T>>,
    pub lambdas: Vec<T>,
}

impl<T: Real> Default for CheckOptions<T> {
    fn default() -> Self {
        let frames = (0..8)
            .map(|k| {
                let th = T::pi() * T::of_usize(k) / T::of(8.0);
                Frame { mu: th.cos(), nu: th.sin() }
            })
            .collect();
        CheckOptions { frames, lambdas: vec![T::of(2.0), T::of(-2.0), T::of(0.5), T::of(-0.5)] }
    }
}

/// Normalization, homogeneity and nonnegativity residuals.
///
/// Sampled tomograms are checked at their stored frames, with homogeneity
/// evaluated for every pair of stored frames related by a scalar. Analytic
/// tomograms are integrated numerically at the probe frames of `opts` and
/// their homogeneity is probed for each of `opts.lambdas`.
pub fn check_tomogram<T: Real>(t: &Tomogram<T>, opts: &CheckOptions<T>) -> TomogramReport<T> {
    match t {
        Tomogram::Sampled(ms) => check_sampled(ms),
        Tomogram::Gaussian(s) => check_gaussian(t, s, opts),
    }
}

fn check_sampled<T: Real>(ms: &[Marginal<T>]) -> TomogramReport<T> {
    let tol = T::of(FRAME_MATCH_TOL);
    let mut normalization = Vec::new();
    let mut negativity = Vec::new();
    let mut homogeneity = Vec::new();
    for (a, ma) in ms.iter().enumerate() {
        normalization.push(FrameResidual { frame: ma.frame, residual: (ma.integral() - T::one()).abs() });
        let min = ma.min_value();
        if min < T::zero() {
            negativity.push(FrameResidual { frame: ma.frame, residual: min });
        }
        for mb in ms.iter().skip(a + 1) {
            let Some(lambda) = ma.frame.ratio_to(&mb.frame, tol) else { continue };
            let mut worst = T::zero();
            for k in 0..ma.len() {
                let x = ma.x(k);
                let lhs = lambda.abs() * mb.value_at(lambda * x);
                worst = worst.max((lhs - ma.values[k]).abs());
            }
            homogeneity.push(HomogeneityResidual { frame: ma.frame, lambda, residual: worst });
        }
    }
    TomogramReport { normalization, homogeneity, negativity }
}

fn check_gaussian<T: Real>(
    t: &Tomogram<T>,
    s: &GaussianState<T>,
    opts: &CheckOptions<T>,
) -> TomogramReport<T> {
    let mut normalization = Vec::new();
    let mut homogeneity = Vec::new();
    for frame in &opts.frames {
        let Ok((mean, var)) = tomogram_of_gaussian(s, frame) else { continue };
        if !(var > T::zero()) {
            // a point mass; normalized by construction
            normalization.push(FrameResidual { frame: *frame, residual: T::zero() });
            continue;
        }
        let sd = var.sqrt();
        let n = 2001;
        let lo = mean - sd * T::of(12.0);
        let h = sd * T::of(24.0) / T::of_usize(n - 1);
        let w = trapezoid_weights(n, h);
        let integral = (0..n).fold(T::zero(), |acc, k| {
            acc + w[k] * t.density(lo + h * T::of_usize(k), frame).unwrap_or(T::zero())
        });
        normalization.push(FrameResidual { frame: *frame, residual: (integral - T::one()).abs() });

        for &lambda in &opts.lambdas {
            let Ok(scaled) = frame.scaled(lambda) else { continue };
            let mut worst = T::zero();
            for k in 0..=100 {
                let x = mean + sd * (T::of(-6.0) + T::of(0.12) * T::of_usize(k));
                let lhs = lambda.abs() * t.density(lambda * x, &scaled).unwrap_or(T::zero());
                let rhs = t.density(x, frame).unwrap_or(T::zero());
                worst = worst.max((lhs - rhs).abs());
            }
            homogeneity.push(HomogeneityResidual { frame: *frame, lambda, residual: worst });
        }
    }
    TomogramReport { normalization, homogeneity, negativity: Vec::new() }
}
