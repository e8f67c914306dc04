//! Oscillator eigenfunctions `ψ_n(x) = (2^n n! √π)^{-1/2} H_n(x) e^{-x²/2}`.

use nalgebra::DMatrix;

use crate::num::Real;

/// Rescaling threshold of the recurrence; keeps intermediate values inside
/// the `f32` exponent range.
const RESCALE_AT: f64 = 1e15;

/// `ψ_0(x), ..., ψ_{n-1}(x)` by the normalized three-term recurrence
/// `ψ_{k+1} = sqrt(2/(k+1)) x ψ_k - sqrt(k/(k+1)) ψ_{k-1}`.
///
/// The Gaussian factor is carried as a separate log-scale so that tails far
/// beyond `e^{-x²/2}` underflow do not zero out high-order functions.
pub fn hermite_functions<T: Real>(n: usize, x: T) -> Vec<T> {
    let mut out = vec![T::zero(); n];
    fill(x, &coefficients(n), &mut out);
    out
}

/// Table `t[(n, j)] = ψ_n(xs[j])`.
pub fn hermite_table<T: Real>(n: usize, xs: &[T]) -> DMatrix<T> {
    let coefs = coefficients(n);
    let mut t = DMatrix::zeros(n, xs.len());
    for (j, &x) in xs.iter().enumerate() {
        fill(x, &coefs, t.column_mut(j).as_mut_slice());
    }
    t
}

fn coefficients<T: Real>(n: usize) -> Vec<(T, T)> {
    (0..n)
        .map(|k| {
            let kf = T::of_usize(k);
            ((T::of(2.0) / (kf + T::one())).sqrt(), (kf / (kf + T::one())).sqrt())
        })
        .collect()
}

fn fill<T: Real>(x: T, coefs: &[(T, T)], out: &mut [T]) {
    let n = out.len();
    if n == 0 {
        return;
    }
    let big = T::of(RESCALE_AT);
    let mut log_scale = -x * x / T::of(2.0);
    let mut factor = log_scale.exp();
    let mut prev = T::zero();
    let mut cur = T::pi().powf(T::of(-0.25));
    out[0] = cur * factor;
    for k in 0..n - 1 {
        let (a, b) = coefs[k];
        let next = a * x * cur - b * prev;
        prev = cur;
        cur = next;
        if cur.abs() > big {
            prev /= big;
            cur /= big;
            log_scale += big.ln();
            factor = log_scale.exp();
        }
        out[k + 1] = cur * factor;
    }
}

/// Radius beyond which every `ψ_n`, `n < dim`, is below roughly `1e-20`.
pub fn support_radius<T: Real>(dim: usize) -> T {
    T::of((2.0 * dim as f64 + 1.0).sqrt() + 8.0)
}

/// Laguerre polynomial `L_n(x)`.
pub fn laguerre<T: Real>(n: usize, x: T) -> T {
    let (mut prev, mut cur) = (T::one(), T::one() - x);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let kf = T::of_usize(k);
        let next = ((T::of(2.0) * kf + T::one() - x) * cur - kf * prev) / (kf + T::one());
        prev = cur;
        cur = next;
    }
    cur
}
