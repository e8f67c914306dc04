//! Scaling transforms `q -> λ_q q`, `p -> λ_p p` of densities, moments and
//! tomograms, and their admissibility for classical and quantum states.
//!
//! Classically every pair of nonzero factors is allowed and the factors form
//! a group. For quantum states the scaled dispersion matrix must still obey
//! the uncertainty relation, which survives for every state only when
//! `|λ_q λ_p| ≤ 1` in each mode; those parameters are closed under
//! composition but not under inversion.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{PhaseGrid, Window};
use crate::model::{GaussianState, Moments, ScaleParams, RESAMPLE_MASS_TOL};
use crate::num::Real;
use crate::tomography::{Marginal, Tomogram};
use crate::uncertainty;

/// `f_s(q, p) = |λ_q λ_p| f(λ_q q, λ_p p)` resampled onto the source window.
pub fn scale_density<T: Real>(g: &PhaseGrid<T>, s: &ScaleParams<T>) -> Result<PhaseGrid<T>> {
    scale_density_onto(g, s, *g.window())
}

/// [`scale_density`] onto an arbitrary target window. Fails with a
/// truncation error when more than `1e-4` of the mass falls outside it.
pub fn scale_density_onto<T: Real>(g: &PhaseGrid<T>, s: &ScaleParams<T>, window: Window<T>) -> Result<PhaseGrid<T>> {
    if s.n_modes() != 1 {
        return Err(Error::Dimension("phase grids hold single-mode states only".into()));
    }
    let (lq, lp) = (s.lambda_q()[0], s.lambda_p()[0]);
    let out = g.resample(window, (lq * lp).abs(), |q, p| (lq * q, lp * p))?;
    let before = g.integral();
    let lost = (before - out.integral()).abs();
    let tol = T::of(RESAMPLE_MASS_TOL) * before.abs().max(T::one());
    if lost > tol {
        return Err(Error::Truncation { lost: lost.as_f64(), tol: tol.as_f64() });
    }
    Ok(out)
}

/// Moments of the scaled density: `⟨z_a⟩ / λ_a` and `σ_ab / (λ_a λ_b)`, so
/// `d^(s) = d / Π_s |λ_qs λ_ps|²`.
pub fn scale_moments<T: Real>(m: &Moments<T>, s: &ScaleParams<T>) -> Result<Moments<T>> {
    if s.n_modes() != m.n_modes() {
        return Err(Error::Dimension(format!(
            "{} scale modes for {} state modes",
            s.n_modes(),
            m.n_modes()
        )));
    }
    let inv: Vec<T> = s.stacked().iter().map(|l| T::one() / *l).collect();
    let dim = inv.len();
    let mean = m.mean().component_mul(&nalgebra::DVector::from_vec(inv.clone()));
    let sigma = DMatrix::from_fn(dim, dim, |a, b| m.sigma()[(a, b)] * inv[a] * inv[b]);
    Moments::new(mean, sigma)
}

/// `ω_s(X, μ, ν) = ω(X, μ/λ_q, ν/λ_p)`.
///
/// A marginal stored at frame `(μ, ν)` is relabelled to `(λ_q μ, λ_p ν)`
/// with its values untouched; a Gaussian tomogram carries the scaled moments.
pub fn scale_tomogram<T: Real>(t: &Tomogram<T>, s: &ScaleParams<T>) -> Result<Tomogram<T>> {
    if s.n_modes() != 1 {
        return Err(Error::Dimension("tomograms are single-mode".into()));
    }
    let (lq, lp) = (s.lambda_q()[0], s.lambda_p()[0]);
    match t {
        Tomogram::Gaussian(g) => {
            Tomogram::gaussian(GaussianState::from_moments(scale_moments(g.moments(), s)?)?)
        }
        Tomogram::Sampled(ms) => {
            let out = ms
                .iter()
                .map(|m| {
                    let f = crate::model::Frame::new(m.frame().mu * lq, m.frame().nu * lp)?;
                    Marginal::new(f, m.x_min(), m.x_max(), m.values().to_vec())
                })
                .collect::<Result<Vec<_>>>()?;
            Tomogram::sampled(out)
        }
    }
}

/// Outcome of [`classify_scaling`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingVerdict<T> {
    pub params: ScaleParams<T>,
    pub classical_admissible: bool,
    pub quantum_admissible_for_state: bool,
    pub universal_quantum_admissible: bool,
    /// `d_s^(s) - hbar²/4` for each mode block.
    pub margin: Vec<T>,
}

/// True when `|λ_q λ_p| ≤ 1` in every mode, i.e. every state obeying the
/// uncertainty relation still obeys it after scaling.
pub fn is_universal_quantum<T: Real>(s: &ScaleParams<T>) -> bool {
    s.products().iter().all(|p| *p <= T::one())
}

/// Classical and quantum admissibility of the scaling `s` applied to a state
/// with moments `m`.
pub fn classify_scaling<T: Real>(m: &Moments<T>, s: &ScaleParams<T>, hbar: T) -> Result<ScalingVerdict<T>> {
    let scaled = scale_moments(m, s)?;
    let verdict = uncertainty::check(&scaled, hbar);
    let bound = hbar * hbar / T::of(4.0);
    let margin = (0..scaled.n_modes())
        .map(|k| {
            let b = scaled.mode_block(k);
            b[0][0] * b[1][1] - b[0][1] * b[1][0] - bound
        })
        .collect();
    Ok(ScalingVerdict {
        params: s.clone(),
        classical_admissible: s.stacked().iter().all(|l| *l != T::zero()),
        quantum_admissible_for_state: verdict.passes,
        universal_quantum_admissible: is_universal_quantum(s),
        margin,
    })
}

/// Boundary of the quantum cross in the plane of frame scalings
/// `(κ_q, κ_p) = (1/λ_q, 1/λ_p)`.
///
/// Applied to the unit-action reference state `σ = diag(1/2, 1/2)`, a frame
/// scaling gives `d = (κ_q κ_p)² / 4`, which violates the uncertainty
/// relation at `hbar` exactly when `|κ_q κ_p| < hbar`. The forbidden set is a
/// cross around the axes bounded by four hyperbola branches
/// `|κ_q κ_p| = hbar`; as `hbar -> 0` it shrinks to the axes themselves.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossBoundary<T> {
    pub hbar: T,
    /// `|κ_q κ_p|` on the boundary; zero for the classical cross.
    pub constant: T,
    /// One branch per quadrant, ordered `(+,+), (-,+), (-,-), (+,-)`.
    pub branches: Vec<Vec<(T, T)>>,
}

impl<T: Real> CrossBoundary<T> {
    /// Whether frame scaling `(κ_q, κ_p)` lies strictly inside the cross.
    pub fn contains(&self, kappa_q: T, kappa_p: T) -> bool {
        (kappa_q * kappa_p).abs() < self.constant || kappa_q == T::zero() || kappa_p == T::zero()
    }
}

/// Samples the four branches of `|κ_q κ_p| = hbar`, each with `samples`
/// points log-spaced over two decades either side of `sqrt(hbar)`.
/// `hbar = 0` returns the classical cross: the four half-axes.
pub fn quantum_cross<T: Real>(hbar: T, samples: usize) -> Result<CrossBoundary<T>> {
    if samples < 2 {
        return Err(Error::Domain("the cross needs at least two samples per branch".into()));
    }
    if !(hbar >= T::zero()) || !hbar.is_finite() {
        return Err(Error::Domain("hbar must be finite and nonnegative".into()));
    }
    let signs = [(T::one(), T::one()), (-T::one(), T::one()), (-T::one(), -T::one()), (T::one(), -T::one())];
    let ln10 = T::of(10.0).ln();
    let ts: Vec<T> = (0..samples)
        .map(|k| -T::of(2.0) * ln10 + T::of(4.0) * ln10 * T::of_usize(k) / T::of_usize(samples - 1))
        .collect();
    let branches = if hbar == T::zero() {
        signs
            .iter()
            .enumerate()
            .map(|(b, &(sq, sp))| {
                ts.iter()
                    .map(|t| {
                        let r = t.exp();
                        if b % 2 == 0 { (sq * r, T::zero()) } else { (T::zero(), sp * r) }
                    })
                    .collect()
            })
            .collect()
    } else {
        let root = hbar.sqrt();
        signs
            .iter()
            .map(|&(sq, sp)| {
                ts.iter()
                    .map(|t| {
                        let kq = root * t.exp();
                        (sq * kq, sp * hbar / kq)
                    })
                    .collect()
            })
            .collect()
    };
    Ok(CrossBoundary { hbar, constant: hbar, branches })
}
