//! Classical versus quantum admissibility of phase-space states.
//!
//! A state is classically admissible when its phase-space function is a
//! probability density, and quantum admissible when the Weyl-quantized
//! operator is positive semidefinite with unit trace. Each test can pass or
//! fail independently, so every state lands in one of four quadrants. Both
//! the classical-only and the quantum-only quadrants are occupied at every
//! value of `hbar`, which is what [`nonlimit_demonstration`] exhibits.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{PhaseGrid, Window};
use crate::model::{moments_of_grid, Frame, GaussianState, Moments, ScaleParams};
use crate::num::{trapezoid_weights, Real};
use crate::scaling::{classify_scaling, is_universal_quantum, quantum_cross, ScalingVerdict};
use crate::tomography::{check_tomogram, tomogram_moments, tomogram_of_gaussian, CheckOptions, Tomogram};
use crate::uncertainty::{self, UncertaintyVerdict};
use crate::weyl::{fock_wigner_grid, spectral_decompose, symbol_to_matrix, to_natural_units, WeylConfig};

/// A single-mode state to classify, given at the Planck parameter passed
/// alongside it.
#[derive(Debug, Clone, PartialEq)]
pub enum State<T: Real> {
    /// Density or Wigner samples in physical units.
    Grid(PhaseGrid<T>),
    Gaussian(GaussianState<T>),
    /// The `n`-th oscillator level.
    Fock(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quadrant {
    Both,
    ClassicalOnly,
    QuantumOnly,
    Neither,
}

impl Quadrant {
    pub fn from_verdicts(classical: bool, quantum: bool) -> Self {
        match (classical, quantum) {
            (true, true) => Quadrant::Both,
            (true, false) => Quadrant::ClassicalOnly,
            (false, true) => Quadrant::QuantumOnly,
            (false, false) => Quadrant::Neither,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Quadrant::Both => "both",
            Quadrant::ClassicalOnly => "classical-only",
            Quadrant::QuantumOnly => "quantum-only",
            Quadrant::Neither => "neither",
        }
    }
}

/// Tolerances of [`classify_state`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions<T> {
    pub weyl: WeylConfig<T>,
    /// Allowed deviation of the mass (and operator trace) from one.
    pub norm_tol: T,
    /// Smallest eigenvalue still counted as nonnegative.
    pub eig_tol: T,
    /// Negative density values down to `-neg_floor * max f` count as zero.
    pub neg_floor: T,
}

impl<T: Real> Default for ClassifyOptions<T> {
    fn default() -> Self {
        ClassifyOptions {
            weyl: WeylConfig::default(),
            norm_tol: T::of(1e-6),
            eig_tol: T::of(1e-9),
            neg_floor: T::of(1e-9),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport<T> {
    pub hbar: T,
    pub quadrant: Quadrant,
    pub classical_admissible: bool,
    pub quantum_admissible: bool,
    /// Smallest value of the phase-space density `f = W / (2π hbar)`.
    pub min_symbol_value: T,
    pub mass: T,
    pub min_eigenvalue: T,
    pub trace: T,
    pub uncertainty: UncertaintyVerdict<T>,
    pub leakage: T,
    pub truncation_warning: bool,
}

/// Classifies a single-mode state at Planck parameter `hbar`.
///
/// The quantum test works in natural units (`q/√hbar`, `p/√hbar`), where
/// the operator basis is fixed; the classical test and the reported density
/// minimum are in the state's own units.
pub fn classify_state<T: Real>(state: &State<T>, hbar: T, opts: &ClassifyOptions<T>) -> Result<AdmissibilityReport<T>> {
    if !(hbar > T::zero()) || !hbar.is_finite() {
        return Err(Error::Domain("hbar must be positive".into()));
    }
    let cfg = &opts.weyl;
    let root = hbar.sqrt();
    let (min_f, max_f, mass, moments, natural) = match state {
        State::Grid(g) => {
            let f = g.to_density();
            let moments = moments_of_grid(g, T::max_value().unwrap_or(T::one()))?;
            let mut nat = to_natural_units(g, hbar)?;
            if hbar != T::one() {
                nat = nat.resample(cfg.window, T::one(), |q, p| (q, p))?;
            }
            (f.min_value(), f.max_value(), g.mass(), moments, nat)
        }
        State::Gaussian(s) => {
            if s.n_modes() != 1 {
                return Err(Error::Dimension("classification is single-mode".into()));
            }
            let m = s.moments();
            let nat = GaussianState::new(m.mean() / root, m.sigma() / hbar)?.sample(cfg.window)?;
            // a Gaussian density is positive and normalized by construction
            (T::zero(), nat.max_value(), T::one(), m.clone(), nat)
        }
        State::Fock(n) => {
            let w = fock_wigner_grid(*n, cfg.window)?;
            let scale = T::one() / (T::two_pi() * hbar);
            let var = (T::of_usize(*n) + T::of(0.5)) * hbar;
            let moments = Moments::new(DVector::zeros(2), DMatrix::from_diagonal_element(2, 2, var))?;
            (w.min_value() * scale, w.max_value() * scale, w.mass(), moments, w)
        }
    };
    let classical = (mass - T::one()).abs() <= opts.norm_tol && min_f >= -opts.neg_floor * max_f.abs();

    let quant = symbol_to_matrix(&natural, cfg)?;
    let spectrum = spectral_decompose(&quant.matrix)?;
    let min_eigenvalue = spectrum.min_eigenvalue();
    let trace = quant.matrix.trace().re;
    let quantum = min_eigenvalue >= -opts.eig_tol && (trace - T::one()).abs() <= opts.norm_tol;

    Ok(AdmissibilityReport {
        hbar,
        quadrant: Quadrant::from_verdicts(classical, quantum),
        classical_admissible: classical,
        quantum_admissible: quantum,
        min_symbol_value: min_f,
        mass,
        min_eigenvalue,
        trace,
        uncertainty: uncertainty::check(&moments, hbar),
        leakage: quant.leakage,
        truncation_warning: quant.truncation_warning,
    })
}

/// Product tomogram `ω_q(X1, μ1, ν1) ω_cl(X2, μ2, ν2)` of a quantum and a
/// classical subsystem.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridState<T: Real> {
    quantum: Tomogram<T>,
    classical: Tomogram<T>,
}

/// Quadrature nodes and weights over the support of `ω(·, frame)`.
fn x_quadrature<T: Real>(t: &Tomogram<T>, frame: &Frame<T>, n: usize) -> Result<(Vec<T>, Vec<T>)> {
    let (lo, hi) = match t {
        Tomogram::Gaussian(s) => {
            let (mean, var) = tomogram_of_gaussian(s, frame)?;
            let sd = var.sqrt();
            (mean - sd * T::of(12.0), mean + sd * T::of(12.0))
        }
        Tomogram::Sampled(_) => {
            let (m, l) = t
                .find(frame)
                .ok_or(Error::MissingFrame { mu: frame.mu.as_f64(), nu: frame.nu.as_f64() })?;
            let (a, b) = (m.x_min() * l, m.x_max() * l);
            (a.min(b), a.max(b))
        }
    };
    let h = (hi - lo) / T::of_usize(n - 1);
    Ok(((0..n).map(|k| lo + h * T::of_usize(k)).collect(), trapezoid_weights(n, h)))
}

impl<T: Real> HybridState<T> {
    pub fn quantum_part(&self) -> &Tomogram<T> {
        &self.quantum
    }

    pub fn classical_part(&self) -> &Tomogram<T> {
        &self.classical
    }

    /// `ω(X1, X2; frame1, frame2)`.
    pub fn density(&self, x1: T, f1: &Frame<T>, x2: T, f2: &Frame<T>) -> Result<T> {
        Ok(self.quantum.density(x1, f1)? * self.classical.density(x2, f2)?)
    }

    /// `∫∫ ω dX1 dX2` by a two-dimensional trapezoid rule with `n × n` nodes.
    pub fn normalization(&self, f1: &Frame<T>, f2: &Frame<T>, n: usize) -> Result<T> {
        let (x1, w1) = x_quadrature(&self.quantum, f1, n)?;
        let (x2, w2) = x_quadrature(&self.classical, f2, n)?;
        let mut total = T::zero();
        for (a, wa) in x1.iter().zip(&w1) {
            for (b, wb) in x2.iter().zip(&w2) {
                total += *wa * *wb * self.density(*a, f1, *b, f2)?;
            }
        }
        Ok(total)
    }

    /// `∫ ω(X1, X2) dX2` at `X1 = x1`.
    pub fn marginal_quantum(&self, x1: T, f1: &Frame<T>, f2: &Frame<T>, n: usize) -> Result<T> {
        let (x2, w2) = x_quadrature(&self.classical, f2, n)?;
        x2.iter().zip(&w2).try_fold(T::zero(), |acc, (b, w)| Ok(acc + *w * self.density(x1, f1, *b, f2)?))
    }

    /// The two-mode Gaussian `(q1, q2, p1, p2)` when both parts are Gaussian.
    pub fn as_gaussian(&self) -> Option<GaussianState<T>> {
        let (Tomogram::Gaussian(a), Tomogram::Gaussian(b)) = (&self.quantum, &self.classical) else {
            return None;
        };
        let (ma, mb) = (a.moments(), b.moments());
        let mean = DVector::from_vec(vec![ma.mean()[0], mb.mean()[0], ma.mean()[1], mb.mean()[1]]);
        let mut sigma = DMatrix::zeros(4, 4);
        for (s, m) in [(0, ma), (1, mb)] {
            let blk = m.mode_block(0);
            sigma[(s, s)] = blk[0][0];
            sigma[(s + 2, s + 2)] = blk[1][1];
            sigma[(s, s + 2)] = blk[0][1];
            sigma[(s + 2, s)] = blk[1][0];
        }
        GaussianState::new(mean, sigma).ok()
    }
}

/// Builds the factorized hybrid after checking that both tomograms are
/// normalized within `tol` and that the quantum part obeys the uncertainty
/// relation at `hbar`.
pub fn hybrid_factorized<T: Real>(
    q_tomo: &Tomogram<T>,
    cl_tomo: &Tomogram<T>,
    hbar: T,
    tol: T,
) -> Result<HybridState<T>> {
    for t in [q_tomo, cl_tomo] {
        let report = check_tomogram(t, &CheckOptions::default());
        let worst = report.max_normalization_residual();
        if worst > tol {
            return Err(Error::Normalization { integral: 1.0 + worst.as_f64(), tol: tol.as_f64() });
        }
        if let Some(neg) = report.negativity.iter().find(|r| r.residual < -tol) {
            return Err(Error::NotAdmissible(format!(
                "tomogram takes the negative value {} at frame ({}, {})",
                neg.residual.as_f64(),
                neg.frame.mu.as_f64(),
                neg.frame.nu.as_f64()
            )));
        }
    }
    let verdict = uncertainty::check(&tomogram_moments(q_tomo)?, hbar);
    if !verdict.passes {
        return Err(Error::NotAdmissible(format!(
            "quantum part violates the uncertainty relation (min eigenvalue {})",
            verdict.min_eigenvalue.as_f64()
        )));
    }
    Ok(HybridState { quantum: q_tomo.clone(), classical: cl_tomo.clone() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonlimitRow<T> {
    pub hbar: T,
    /// Isotropic Gaussian with `d = hbar²/8`.
    pub classical_witness: AdmissibilityReport<T>,
    /// First excited oscillator level.
    pub quantum_witness: AdmissibilityReport<T>,
    pub symmetric_difference_nonempty: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonlimitReport<T> {
    pub rows: Vec<NonlimitRow<T>>,
    pub all_rows_verified: bool,
}

/// For each `hbar`, exhibits a classical state that is not quantum and a
/// quantum state that is not classical.
pub fn nonlimit_demonstration<T: Real>(hbars: &[T], opts: &ClassifyOptions<T>) -> Result<NonlimitReport<T>> {
    if hbars.is_empty() {
        return Err(Error::Domain("at least one hbar is required".into()));
    }
    if hbars.iter().any(|h| !(*h > T::zero())) || hbars.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Domain("hbar values must be positive and strictly descending".into()));
    }
    let mut rows = Vec::with_capacity(hbars.len());
    for &hbar in hbars {
        let s = hbar / (T::of(8.0).sqrt());
        let classical = classify_state(&State::Gaussian(GaussianState::isotropic(s)?), hbar, opts)?;
        let quantum = classify_state(&State::Fock(1), hbar, opts)?;
        let ok = classical.quadrant == Quadrant::ClassicalOnly && quantum.quadrant == Quadrant::QuantumOnly;
        rows.push(NonlimitRow { hbar, classical_witness: classical, quantum_witness: quantum, symmetric_difference_nonempty: ok });
    }
    let all = rows.iter().all(|r| r.symmetric_difference_nonempty);
    Ok(NonlimitReport { rows, all_rows_verified: all })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SemigroupRow<T> {
    pub verdict: ScalingVerdict<T>,
    /// Some mode's frame scaling `(1/λ_q, 1/λ_p)` lies inside the quantum
    /// cross at `hbar`.
    pub inside_cross: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SemigroupReport<T> {
    pub hbar: T,
    pub rows: Vec<SemigroupRow<T>>,
    pub classical_admissible: usize,
    pub quantum_admissible: usize,
    pub inside_cross: usize,
    /// Pairs of universally admissible samples whose composition was checked.
    pub closure_pairs: usize,
    pub closure_holds: bool,
}

/// Classical and quantum verdicts for each sample scaling of a state, with a
/// closure check over all pairs of universally admissible samples.
pub fn group_vs_semigroup_report<T: Real>(
    m: &Moments<T>,
    hbar: T,
    sample_params: &[ScaleParams<T>],
) -> Result<SemigroupReport<T>> {
    let cross = quantum_cross(hbar, 2)?;
    let mut rows = Vec::with_capacity(sample_params.len());
    for s in sample_params {
        let verdict = classify_scaling(m, s, hbar)?;
        let inside = s
            .lambda_q()
            .iter()
            .zip(s.lambda_p())
            .any(|(lq, lp)| cross.contains(T::one() / *lq, T::one() / *lp));
        rows.push(SemigroupRow { verdict, inside_cross: inside });
    }
    let admissible: Vec<&ScaleParams<T>> = sample_params.iter().filter(|s| is_universal_quantum(*s)).collect();
    let mut pairs = 0;
    let mut holds = true;
    for a in &admissible {
        for b in &admissible {
            pairs += 1;
            holds &= is_universal_quantum(&a.compose(b)?);
        }
    }
    Ok(SemigroupReport {
        hbar,
        classical_admissible: rows.iter().filter(|r| r.verdict.classical_admissible).count(),
        quantum_admissible: rows.iter().filter(|r| r.verdict.quantum_admissible_for_state).count(),
        inside_cross: rows.iter().filter(|r| r.inside_cross).count(),
        rows,
        closure_pairs: pairs,
        closure_holds: holds,
    })
}

/// Grid of a Fock level's Wigner function as a density at `hbar = 1`.
pub fn fock_density_grid<T: Real>(n: usize, window: Window<T>) -> Result<PhaseGrid<T>> {
    Ok(fock_wigner_grid(n, window)?.to_density())
}
