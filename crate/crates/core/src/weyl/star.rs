//! Star products of Weyl symbols.
//!
//! The quantum (Moyal) product is the symbol of the operator product and is
//! noncommutative. The classical product is the pointwise product of
//! symbols; in the position representation it is a convolution in the
//! difference variable `u = x - x'` at fixed midpoint `q = (x + x')/2`.

use num_complex::Complex;

use super::{complex_gemm, matrix_to_complex_symbol, symbol_to_matrix_complex, OperatorMatrix, WeylConfig};
use crate::error::{Error, Result};
use crate::grid::{ComplexGrid, Window};
use crate::num::Real;

/// Moyal product computed through the operator matrices:
/// quantize both symbols, multiply, and return the symbol of the product on
/// the common window.
pub fn star_moyal<T: Real>(a: &ComplexGrid<T>, b: &ComplexGrid<T>, cfg: &WeylConfig<T>) -> Result<ComplexGrid<T>> {
    if !a.window().matches(b.window()) {
        return Err(Error::Domain("star product operands must share a window".into()));
    }
    let ma = symbol_to_matrix_complex(a, cfg)?.matrix;
    let mb = symbol_to_matrix_complex(b, cfg)?.matrix;
    let prod = OperatorMatrix::new(complex_gemm(ma.entries(), mb.entries()))?;
    matrix_to_complex_symbol(&prod, a.window())
}

/// Integral kernel of the Moyal product,
/// `(A ⋆ B)(z) = ∫∫ K(z1, z2, z) A(z1) B(z2) dz1 dz2` with
/// `K = π^{-2} exp{2i [q1(p2 - p) + q2(p - p1) + q(p1 - p2)]}`.
pub fn moyal_kernel<T: Real>(z1: (T, T), z2: (T, T), z: (T, T)) -> Complex<T> {
    let ((q1, p1), (q2, p2), (q, p)) = (z1, z2, z);
    let phase = T::of(2.0) * (q1 * (p2 - p) + q2 * (p - p1) + q * (p1 - p2));
    phase.cis() / (T::pi() * T::pi())
}

/// Operator in the midpoint/difference representation
/// `G(q, u) = A(q + u/2, q - u/2)`, sampled at the `q` nodes of a symbol
/// window and at the `u` grid dual to its `p` grid
/// (`u_j = (j - n_p/2) h_u`, `h_u h_p n_p = 2π`).
///
/// On this pair of grids the maps to and from symbols are discrete Fourier
/// transforms and exact inverses of each other.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionKernel<T> {
    window: Window<T>,
    values: Vec<Complex<T>>,
}

impl<T: Real> PositionKernel<T> {
    pub fn window(&self) -> &Window<T> {
        &self.window
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn h_u(&self) -> T {
        T::two_pi() / (T::of_usize(self.window.n_p) * self.window.hp())
    }

    pub fn u(&self, j: usize) -> T {
        (T::of_usize(j) - T::of_usize(self.window.n_p / 2)) * self.h_u()
    }

    pub fn value(&self, i: usize, j: usize) -> Complex<T> {
        self.values[i * self.window.n_p + j]
    }

    /// `max |a - b|` over all samples.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.values.iter().zip(&other.values).fold(T::zero(), |a, (x, y)| a.max((*x - *y).norm_sqr().sqrt()))
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |a, x| a.max(x.norm_sqr().sqrt()))
    }
}

/// `e^{-i p_k u_j}` for the window's `p` nodes and the dual `u` grid.
fn twiddles<T: Real>(w: &Window<T>) -> Vec<Complex<T>> {
    let n = w.n_p;
    let h_u = T::two_pi() / (T::of_usize(n) * w.hp());
    let c = T::of_usize(n / 2);
    (0..n * n)
        .map(|idx| {
            let (k, j) = (idx / n, idx % n);
            (-(w.p(k) * (T::of_usize(j) - c) * h_u)).cis()
        })
        .collect()
}

/// `G(q, u_j) = (h_p / 2π) Σ_k W(q, p_k) e^{i p_k u_j}`.
pub fn kernel_of_symbol<T: Real>(w: &ComplexGrid<T>) -> PositionKernel<T> {
    let win = *w.window();
    let n = win.n_p;
    let tw = twiddles(&win);
    let scale = win.hp() / T::two_pi();
    let mut values = Vec::with_capacity(win.len());
    for i in 0..win.n_q {
        for j in 0..n {
            let mut acc = Complex::new(T::zero(), T::zero());
            for k in 0..n {
                acc += w.value(i, k) * tw[k * n + j].conj();
            }
            values.push(acc * scale);
        }
    }
    PositionKernel { window: win, values }
}

/// `W(q, p_k) = h_u Σ_j G(q, u_j) e^{-i p_k u_j}`.
pub fn symbol_of_kernel<T: Real>(g: &PositionKernel<T>) -> Result<ComplexGrid<T>> {
    let win = g.window;
    let n = win.n_p;
    let tw = twiddles(&win);
    let h_u = g.h_u();
    let mut values = Vec::with_capacity(win.len());
    for i in 0..win.n_q {
        for k in 0..n {
            let mut acc = Complex::new(T::zero(), T::zero());
            for j in 0..n {
                acc += g.value(i, j) * tw[k * n + j];
            }
            values.push(acc * h_u);
        }
    }
    ComplexGrid::new(win, values)
}

fn same_window<T: Real>(a: &Window<T>, b: &Window<T>) -> Result<()> {
    if !a.matches(b) {
        return Err(Error::Domain("star product operands must share a window".into()));
    }
    Ok(())
}

/// Commutative product: symbols multiplied pointwise, then mapped back.
pub fn star_classical<T: Real>(a: &PositionKernel<T>, b: &PositionKernel<T>) -> Result<PositionKernel<T>> {
    same_window(&a.window, &b.window)?;
    let sa = symbol_of_kernel(a)?;
    let sb = symbol_of_kernel(b)?;
    let prod = sa.values().iter().zip(sb.values()).map(|(x, y)| *x * *y).collect();
    Ok(kernel_of_symbol(&ComplexGrid::new(a.window, prod)?))
}

/// Commutative product evaluated directly in the position representation,
/// `G_AB(q, u) = ∫ G_A(q, u') G_B(q, u - u') du'`.
///
/// The dual `u` grid is periodic; a difference `u - u'` that leaves the
/// period is folded back with the phase `e^{∓i p_min L}` (`L` the period)
/// that the discrete symbol map attaches to it.
pub fn star_classical_c9<T: Real>(a: &PositionKernel<T>, b: &PositionKernel<T>) -> Result<PositionKernel<T>> {
    same_window(&a.window, &b.window)?;
    let win = a.window;
    let n = win.n_p;
    let c = n / 2;
    let h_u = a.h_u();
    let period = h_u * T::of_usize(n);
    let fwd = (-(win.p_min * period)).cis();
    let back = (win.p_min * period).cis();
    let mut values = Vec::with_capacity(win.len());
    for i in 0..win.n_q {
        for j in 0..n {
            let mut acc = Complex::new(T::zero(), T::zero());
            for jp in 0..n {
                // u_j - u_jp = u_m with m = j - jp + c, folded into [0, n)
                let m = j as isize - jp as isize + c as isize;
                let (idx, phase) = if m < 0 {
                    ((m + n as isize) as usize, Some(fwd))
                } else if m >= n as isize {
                    ((m - n as isize) as usize, Some(back))
                } else {
                    (m as usize, None)
                };
                let term = a.value(i, jp) * b.value(i, idx);
                acc += match phase {
                    Some(ph) => term * ph,
                    None => term,
                };
            }
            values.push(acc * h_u);
        }
    }
    Ok(PositionKernel { window: win, values })
}

/// Commutative product of two oscillator-basis matrices: their symbols on
/// `cfg.window` are multiplied pointwise and quantized again.
pub fn star_classical_matrix<T: Real>(
    a: &OperatorMatrix<T>,
    b: &OperatorMatrix<T>,
    cfg: &WeylConfig<T>,
) -> Result<OperatorMatrix<T>> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension("operator dimensions differ".into()));
    }
    let sa = matrix_to_complex_symbol(a, &cfg.window)?;
    let sb = matrix_to_complex_symbol(b, &cfg.window)?;
    let prod = sa.values().iter().zip(sb.values()).map(|(x, y)| *x * *y).collect();
    let cfg = cfg.with_dim(a.dim());
    Ok(symbol_to_matrix_complex(&ComplexGrid::new(cfg.window, prod)?, &cfg)?.matrix)
}
