use num_complex::Complex;
use rustfft::{FftNum, FftPlanner};

use super::{Marginal, Tomogram};
use crate::error::{Error, Result};
use crate::grid::{GridKind, PhaseGrid, Window};
use crate::num::{trapezoid_weights, Real};

/// Settings of [`invert_tomogram`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionOptions<T> {
    /// Output window; its spacing also fixes the Cartesian frequency grid.
    pub window: Window<T>,
    /// Largest tolerated gap between consecutive frame angles on `[0, π)`.
    pub max_gap: T,
}

impl<T: Real> InversionOptions<T> {
    pub fn new(window: Window<T>) -> Self {
        InversionOptions { window, max_gap: T::pi() / T::of(16.0) }
    }
}

impl<T: Real> Default for InversionOptions<T> {
    fn default() -> Self {
        Self::new(Window::square(T::of(8.0), 256).expect("default window is valid"))
    }
}

/// One ray of the characteristic function `χ(r cos θ, r sin θ)` sampled at
/// `r = 0, dr, 2dr, ...`.
struct Ray<T> {
    theta: T,
    chi: Vec<Complex<T>>,
}

/// `χ` along the direction of `m.frame()` (flipped when `flip`), from
/// `χ(k μ, k ν) = ∫ ω(X, μ, ν) e^{ikX} dX`.
fn ray_of<T: Real>(m: &Marginal<T>, flip: bool, dr: T, n_r: usize) -> Vec<Complex<T>> {
    let norm = m.frame().norm();
    let sign = if flip { -T::one() } else { T::one() };
    let w = trapezoid_weights(m.len(), m.hx());
    let terms: Vec<(T, T)> = (0..m.len())
        .filter(|&l| m.values()[l] != T::zero())
        .map(|l| (m.x(l), w[l] * m.values()[l]))
        .collect();
    (0..n_r)
        .map(|ir| {
            let k = sign * dr * T::of_usize(ir) / norm;
            terms.iter().fold(Complex::new(T::zero(), T::zero()), |acc, &(x, v)| acc + (k * x).cis() * v)
        })
        .collect()
}

/// Value of the ray at radius `r ≥ 0`, linear in `r`, zero beyond the last sample.
fn radial<T: Real>(chi: &[Complex<T>], r: T, dr: T) -> Complex<T> {
    let t = r / dr;
    let last = chi.len() - 1;
    if t >= T::of_usize(last) {
        return Complex::new(T::zero(), T::zero());
    }
    let i = t.floor().to_usize().unwrap_or(0).min(last - 1);
    let f = t - T::of_usize(i);
    chi[i] * (T::one() - f) + chi[i + 1] * f
}

/// Cubic Lagrange weights for a sample at fraction `t` between the second
/// and third of four (not necessarily uniform) nodes `x`.
fn cubic_weights<T: Real>(x: [T; 4], t: T) -> [T; 4] {
    let mut w = [T::zero(); 4];
    let xs = x[1] + (x[2] - x[1]) * t;
    for a in 0..4 {
        let mut l = T::one();
        for b in 0..4 {
            if a != b {
                l *= (xs - x[b]) / (x[a] - x[b]);
            }
        }
        w[a] = l;
    }
    w
}

/// Reconstructs the phase-space density from its tomogram.
///
/// Sampled tomograms use the Fourier-slice route: each marginal is Fourier
/// transformed along `X`, giving the characteristic function on a ray through
/// the origin; rays are interpolated onto a Cartesian frequency grid (linear
/// in radius, cubic in angle, continued past `π` with `χ(-k) = conj χ(k)`)
/// and a 2D FFT returns the density, normalized to unit mass. Frames may have
/// any norm and any angle; those differing by a scalar are deduplicated.
/// Gaussian tomograms are sampled exactly.
pub fn invert_tomogram<T: Real + FftNum>(t: &Tomogram<T>, opts: &InversionOptions<T>) -> Result<PhaseGrid<T>> {
    let w = opts.window;
    let marginals = match t {
        Tomogram::Gaussian(s) => return s.sample(w),
        Tomogram::Sampled(m) => m,
    };

    // Directions reduced to θ ∈ [0, π).
    let pi = T::pi();
    let mut dirs: Vec<(T, bool, &Marginal<T>)> = marginals
        .iter()
        .map(|m| {
            let f = m.frame();
            let th = f.nu.atan2(f.mu);
            if th < T::zero() {
                (th + pi, true, m)
            } else if th >= pi {
                (th - pi, true, m)
            } else {
                (th, false, m)
            }
        })
        .collect();
    dirs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let dup_tol = T::of(1e-9);
    dirs.dedup_by(|b, a| (b.0 - a.0).abs() <= dup_tol);
    let n_dir = dirs.len();
    let mut gap = dirs[0].0 + pi - dirs[n_dir - 1].0;
    for k in 1..n_dir {
        gap = gap.max(dirs[k].0 - dirs[k - 1].0);
    }
    if n_dir < 4 || gap > opts.max_gap {
        return Err(Error::Coverage { gap: gap.as_f64(), max_gap: opts.max_gap.as_f64() });
    }

    let (nq, np) = (w.n_q, w.n_p);
    let dkq = T::two_pi() / (T::of_usize(nq) * w.hq());
    let dkp = T::two_pi() / (T::of_usize(np) * w.hp());
    let (cq, cp) = (nq / 2, np / 2);
    let kq = |j: usize| (T::of_usize(j) - T::of_usize(cq)) * dkq;
    let kp = |j: usize| (T::of_usize(j) - T::of_usize(cp)) * dkp;
    let kq_max = T::of_usize(cq.max(nq - 1 - cq)) * dkq;
    let kp_max = T::of_usize(cp.max(np - 1 - cp)) * dkp;
    let r_max = (kq_max * kq_max + kp_max * kp_max).sqrt();
    let dr = dkq.min(dkp) / T::of(4.0);
    let n_r = (r_max / dr).ceil().to_usize().unwrap_or(0) + 3;

    let rays: Vec<Ray<T>> =
        dirs.iter().map(|&(theta, flip, m)| Ray { theta, chi: ray_of(m, flip, dr, n_r) }).collect();

    // ray index `i` extended periodically; crossing π conjugates
    let node = |i: isize| -> (T, &Ray<T>, bool) {
        let n = n_dir as isize;
        let wraps = i.div_euclid(n);
        let r = &rays[i.rem_euclid(n) as usize];
        (r.theta + pi * T::of(wraps as f64), r, wraps.rem_euclid(2) == 1)
    };

    let mut spec = vec![Complex::new(T::zero(), T::zero()); nq * np];
    for jq in 0..nq {
        for jp in 0..np {
            let (a, b) = (kq(jq), kp(jp));
            let r = (a * a + b * b).sqrt();
            let mut th = b.atan2(a);
            let mut conj = false;
            if th < T::zero() {
                th += pi;
                conj = true;
            }
            if th >= pi {
                th -= pi;
                conj = !conj;
            }
            if r == T::zero() {
                th = rays[0].theta;
            }
            // bracket th between nodes i and i+1
            let mut i = rays.partition_point(|ray| ray.theta <= th) as isize - 1;
            if i < 0 {
                i = -1;
            }
            let nodes = [node(i - 1), node(i), node(i + 1), node(i + 2)];
            let span = nodes[2].0 - nodes[1].0;
            let frac = (th - nodes[1].0) / span;
            let wts = cubic_weights([nodes[0].0, nodes[1].0, nodes[2].0, nodes[3].0], frac);
            let mut v = Complex::new(T::zero(), T::zero());
            for (k, (_, ray, c)) in nodes.iter().enumerate() {
                let s = radial(&ray.chi, r, dr);
                v += if *c { s.conj() } else { s } * wts[k];
            }
            if conj {
                v = v.conj();
            }
            // centering phase e^{-i k x_min}
            spec[jq * np + jp] = v * (-(a * w.q_min + b * w.p_min)).cis();
        }
    }

    fft_2d(&mut spec, nq, np);

    let scale = dkq * dkp / (T::two_pi() * T::two_pi());
    let two_pi = T::two_pi();
    let mut values = Vec::with_capacity(nq * np);
    for mq in 0..nq {
        let phq = two_pi * T::of_usize((cq * mq) % nq) / T::of_usize(nq);
        for mp in 0..np {
            let php = two_pi * T::of_usize((cp * mp) % np) / T::of_usize(np);
            values.push((spec[mq * np + mp] * (phq + php).cis()).re * scale);
        }
    }
    let g = PhaseGrid::new(w, GridKind::Density, values)?;
    let mass = g.mass();
    if !(mass > T::zero()) {
        return Err(Error::Domain("reconstruction has no mass inside the window".into()));
    }
    g.map_values(|v| v / mass)
}

/// In-place forward 2D DFT (sign `-`) of a row-major `nq × np` array.
fn fft_2d<T: Real + FftNum>(data: &mut [Complex<T>], nq: usize, np: usize) {
    let mut planner = FftPlanner::new();
    let row = planner.plan_fft_forward(np);
    for chunk in data.chunks_exact_mut(np) {
        row.process(chunk);
    }
    let col = planner.plan_fft_forward(nq);
    let mut buf = vec![Complex::new(T::zero(), T::zero()); nq];
    for j in 0..np {
        for i in 0..nq {
            buf[i] = data[i * np + j];
        }
        col.process(&mut buf);
        for i in 0..nq {
            data[i * np + j] = buf[i];
        }
    }
}
