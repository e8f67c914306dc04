//! Uniform phase-space sample grids.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::num::{linspace, modulus, trapezoid_weights, Real};

/// Rectangular sampling window `[q_min, q_max] x [p_min, p_max]` with
/// `n_q x n_p` nodes, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window<T> {
    pub q_min: T,
    pub q_max: T,
    pub n_q: usize,
    pub p_min: T,
    pub p_max: T,
    pub n_p: usize,
}

impl<T: Real> Window<T> {
    pub fn new(q_min: T, q_max: T, n_q: usize, p_min: T, p_max: T, n_p: usize) -> Result<Self> {
        let w = Window { q_min, q_max, n_q, p_min, p_max, n_p };
        w.validate()?;
        Ok(w)
    }

    /// Square window `[-half_width, half_width]^2` with `n` nodes per axis.
    pub fn square(half_width: T, n: usize) -> Result<Self> {
        Self::new(-half_width, half_width, n, -half_width, half_width, n)
    }

    fn validate(&self) -> Result<()> {
        let finite = [self.q_min, self.q_max, self.p_min, self.p_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidGrid("window bounds must be finite".into()));
        }
        if self.q_max <= self.q_min || self.p_max <= self.p_min {
            return Err(Error::InvalidGrid("window bounds must satisfy max > min".into()));
        }
        if self.n_q < 2 || self.n_p < 2 {
            return Err(Error::InvalidGrid("at least two nodes per axis are required".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n_q * self.n_p
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn hq(&self) -> T {
        (self.q_max - self.q_min) / T::of_usize(self.n_q - 1)
    }

    pub fn hp(&self) -> T {
        (self.p_max - self.p_min) / T::of_usize(self.n_p - 1)
    }

    pub fn q(&self, i: usize) -> T {
        self.q_min + self.hq() * T::of_usize(i)
    }

    pub fn p(&self, j: usize) -> T {
        self.p_min + self.hp() * T::of_usize(j)
    }

    pub fn q_nodes(&self) -> Vec<T> {
        linspace(self.q_min, self.q_max, self.n_q)
    }

    pub fn p_nodes(&self) -> Vec<T> {
        linspace(self.p_min, self.p_max, self.n_p)
    }

    pub fn q_weights(&self) -> Vec<T> {
        trapezoid_weights(self.n_q, self.hq())
    }

    pub fn p_weights(&self) -> Vec<T> {
        trapezoid_weights(self.n_p, self.hp())
    }

    /// Window translated by `(dq, dp)`; node count unchanged.
    pub fn translated(&self, dq: T, dp: T) -> Self {
        Window {
            q_min: self.q_min + dq,
            q_max: self.q_max + dq,
            p_min: self.p_min + dp,
            p_max: self.p_max + dp,
            ..*self
        }
    }

    /// Same node layout, compared with a relative tolerance on the bounds.
    pub fn matches(&self, other: &Self) -> bool {
        let tol = T::of(1e-12);
        let close = |a: T, b: T| (a - b).abs() <= tol * (T::one() + a.abs().max(b.abs()));
        self.n_q == other.n_q
            && self.n_p == other.n_p
            && close(self.q_min, other.q_min)
            && close(self.q_max, other.q_max)
            && close(self.p_min, other.p_min)
            && close(self.p_max, other.p_max)
    }

    /// Largest |q| and |p| reached by the window.
    pub fn extent(&self) -> (T, T) {
        (
            self.q_min.abs().max(self.q_max.abs()),
            self.p_min.abs().max(self.p_max.abs()),
        )
    }
}

/// What the samples of a [`PhaseGrid`] mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridKind {
    /// Phase-space probability density `f(q, p)`, normalized as `∫ f = 1`.
    Density,
    /// Weyl symbol `W(q, p)`; for a state, normalized as `∫ W / 2π = 1`.
    Symbol,
}

/// Real samples of a phase-space function, row-major with `q` as the slow
/// index.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseGrid<T> {
    window: Window<T>,
    kind: GridKind,
    values: Vec<T>,
}

impl<T: Real> PhaseGrid<T> {
    pub fn new(window: Window<T>, kind: GridKind, values: Vec<T>) -> Result<Self> {
        window.validate()?;
        if values.len() != window.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                window.len(),
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "non-finite value at q index {}, p index {}",
                k / window.n_p,
                k % window.n_p
            )));
        }
        Ok(PhaseGrid { window, kind, values })
    }

    pub fn from_fn(window: Window<T>, kind: GridKind, f: impl Fn(T, T) -> T) -> Result<Self> {
        let qs = window.q_nodes();
        let ps = window.p_nodes();
        let mut values = Vec::with_capacity(window.len());
        for &q in &qs {
            for &p in &ps {
                values.push(f(q, p));
            }
        }
        Self::new(window, kind, values)
    }

    pub fn window(&self) -> &Window<T> {
        &self.window
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn value(&self, i: usize, j: usize) -> T {
        self.values[i * self.window.n_p + j]
    }

    /// Factor turning stored values into a probability-density scale.
    fn density_factor(&self) -> T {
        match self.kind {
            GridKind::Density => T::one(),
            GridKind::Symbol => T::one() / T::two_pi(),
        }
    }

    /// Value at node `(i, j)` on the density scale (`W / 2π` for symbols).
    pub fn density(&self, i: usize, j: usize) -> T {
        self.value(i, j) * self.density_factor()
    }

    /// Trapezoidal integral of the raw values.
    pub fn integral(&self) -> T {
        self.weighted_sum(|_, _, v| v)
    }

    /// Total probability: `∫ f` for densities, `∫ W / 2π` for symbols.
    pub fn mass(&self) -> T {
        self.integral() * self.density_factor()
    }

    /// Trapezoidal `∫ g(q, p, value) dq dp`.
    pub(crate) fn weighted_sum(&self, g: impl Fn(T, T, T) -> T) -> T {
        let wq = self.window.q_weights();
        let wp = self.window.p_weights();
        let mut acc = T::zero();
        for i in 0..self.window.n_q {
            let q = self.window.q(i);
            let mut row = T::zero();
            for j in 0..self.window.n_p {
                row += wp[j] * g(q, self.window.p(j), self.value(i, j));
            }
            acc += wq[i] * row;
        }
        acc
    }

    pub fn min_value(&self) -> T {
        self.values.iter().copied().fold(T::max_value().unwrap_or(T::one()), |a, b| a.min(b))
    }

    pub fn max_value(&self) -> T {
        self.values.iter().copied().fold(T::min_value().unwrap_or(-T::one()), |a, b| a.max(b))
    }

    /// Re-expresses the grid on the density scale.
    pub fn to_density(&self) -> Self {
        let s = self.density_factor();
        PhaseGrid {
            window: self.window,
            kind: GridKind::Density,
            values: self.values.iter().map(|&v| v * s).collect(),
        }
    }

    /// Re-expresses the grid as a Weyl symbol (`W = 2π f` for densities).
    pub fn to_symbol(&self) -> Self {
        let s = match self.kind {
            GridKind::Density => T::two_pi(),
            GridKind::Symbol => T::one(),
        };
        PhaseGrid {
            window: self.window,
            kind: GridKind::Symbol,
            values: self.values.iter().map(|&v| v * s).collect(),
        }
    }

    pub fn map_values(&self, f: impl Fn(T) -> T) -> Result<Self> {
        Self::new(self.window, self.kind, self.values.iter().map(|&v| f(v)).collect())
    }

    pub(crate) fn with_window(&self, window: Window<T>) -> Self {
        PhaseGrid { window, kind: self.kind, values: self.values.clone() }
    }

    /// Bilinear interpolation; zero outside the window.
    pub fn interpolate(&self, q: T, p: T) -> T {
        let w = &self.window;
        let tq = (q - w.q_min) / w.hq();
        let tp = (p - w.p_min) / w.hp();
        let last_q = T::of_usize(w.n_q - 1);
        let last_p = T::of_usize(w.n_p - 1);
        if !(tq >= T::zero() && tq <= last_q && tp >= T::zero() && tp <= last_p) {
            return T::zero();
        }
        let i = tq.floor().to_usize().unwrap_or(0).min(w.n_q - 2);
        let j = tp.floor().to_usize().unwrap_or(0).min(w.n_p - 2);
        let fq = tq - T::of_usize(i);
        let fp = tp - T::of_usize(j);
        let one = T::one();
        self.value(i, j) * (one - fq) * (one - fp)
            + self.value(i + 1, j) * fq * (one - fp)
            + self.value(i, j + 1) * (one - fq) * fp
            + self.value(i + 1, j + 1) * fq * fp
    }

    /// Resamples `g(q, p) = source(map(q, p)) * scale` onto `window` by
    /// bilinear interpolation.
    pub(crate) fn resample(
        &self,
        window: Window<T>,
        scale: T,
        map: impl Fn(T, T) -> (T, T),
    ) -> Result<Self> {
        PhaseGrid::from_fn(window, self.kind, |q, p| {
            let (sq, sp) = map(q, p);
            scale * self.interpolate(sq, sp)
        })
    }

    /// Trapezoidal `∫ |a - b| dq dp`; both grids must share a window.
    pub fn l1_distance(&self, other: &Self) -> Result<T> {
        if !self.window.matches(&other.window) {
            return Err(Error::Domain("L1 distance requires identical windows".into()));
        }
        let wq = self.window.q_weights();
        let wp = self.window.p_weights();
        let mut acc = T::zero();
        for i in 0..self.window.n_q {
            for j in 0..self.window.n_p {
                acc += wq[i] * wp[j] * (self.value(i, j) - other.value(i, j)).abs();
            }
        }
        Ok(acc)
    }

    /// Checks the grid is a classical probability density: values nonnegative
    /// up to `neg_floor * max` and mass within `tol` of one.
    pub fn check_classical(&self, tol: T, neg_floor: T) -> Result<()> {
        let mass = self.mass();
        if (mass - T::one()).abs() > tol {
            return Err(Error::Normalization { integral: mass.as_f64(), tol: tol.as_f64() });
        }
        let floor = -neg_floor * self.max_value().abs();
        let min = self.min_value();
        if min < floor {
            return Err(Error::InvalidGrid(format!("negative density value {}", min.as_f64())));
        }
        Ok(())
    }
}

/// Complex samples of a phase-space function (symbols of non-Hermitian
/// operators, star products).
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexGrid<T> {
    window: Window<T>,
    values: Vec<Complex<T>>,
}

impl<T: Real> ComplexGrid<T> {
    pub fn new(window: Window<T>, values: Vec<Complex<T>>) -> Result<Self> {
        window.validate()?;
        if values.len() != window.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                window.len(),
                values.len()
            )));
        }
        Ok(ComplexGrid { window, values })
    }

    pub fn from_real(grid: &PhaseGrid<T>) -> Self {
        ComplexGrid {
            window: grid.window,
            values: grid.values.iter().map(|&v| Complex::new(v, T::zero())).collect(),
        }
    }

    pub fn window(&self) -> &Window<T> {
        &self.window
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn value(&self, i: usize, j: usize) -> Complex<T> {
        self.values[i * self.window.n_p + j]
    }

    pub fn max_imag(&self) -> T {
        self.values.iter().fold(T::zero(), |a, z| a.max(z.im.abs()))
    }

    /// Real part as a grid of the given kind.
    pub fn real_part(&self, kind: GridKind) -> Result<PhaseGrid<T>> {
        PhaseGrid::new(self.window, kind, self.values.iter().map(|z| z.re).collect())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if !self.window.matches(&other.window) {
            return Err(Error::Domain("grid windows differ".into()));
        }
        Ok(ComplexGrid {
            window: self.window,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        })
    }

    /// Largest `|value - target(q, p)|` over nodes with `|q| <= q_lim` and
    /// `|p| <= p_lim`.
    pub fn max_deviation_within(
        &self,
        q_lim: T,
        p_lim: T,
        target: impl Fn(T, T) -> Complex<T>,
    ) -> T {
        let mut worst = T::zero();
        for i in 0..self.window.n_q {
            let q = self.window.q(i);
            if q.abs() > q_lim {
                continue;
            }
            for j in 0..self.window.n_p {
                let p = self.window.p(j);
                if p.abs() > p_lim {
                    continue;
                }
                worst = worst.max(modulus(self.value(i, j) - target(q, p)));
            }
        }
        worst
    }
}
