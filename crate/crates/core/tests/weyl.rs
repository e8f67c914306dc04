use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tomokit::weyl::{
    fock_wigner, fock_wigner_grid, kernel_of_symbol, matrix_to_complex_symbol, matrix_to_symbol, moyal_kernel,
    positivity_functional, positivity_with_matrix, spectral_decompose, star_classical, star_classical_c9, star_moyal,
    symbol_to_matrix, symbol_to_matrix_complex, wigner_of_density, KernelGrid, WaveFunction,
};
use tomokit::{ComplexGrid, GaussianState, GridKind, OperatorMatrix, PhaseGrid, WeylConfig, Window};

fn c(re: f64, im: f64) -> Complex<f64> {
    Complex::new(re, im)
}

fn symbol(w: Window<f64>, f: impl Fn(f64, f64) -> f64) -> ComplexGrid<f64> {
    ComplexGrid::from_real(&PhaseGrid::from_fn(w, GridKind::Symbol, f).unwrap())
}

fn coherent(q0: f64, p0: f64) -> impl Fn(f64, f64) -> f64 {
    move |q, p| 2.0 * (-(q - q0).powi(2) - (p - p0).powi(2)).exp()
}

/// Wide enough that every basis function of the dimensions used here has
/// decayed to round-off at the edges.
fn wide() -> Window<f64> {
    Window::square(20.0, 401).unwrap()
}

/// `⟨m|Q|n⟩` and `⟨m|P|n⟩` from the ladder operators, truncated to `d`.
fn ladder(d: usize) -> (OperatorMatrix<f64>, OperatorMatrix<f64>) {
    let mut q = DMatrix::from_element(d, d, c(0.0, 0.0));
    let mut p = q.clone();
    for m in 0..d - 1 {
        let s = ((m + 1) as f64 / 2.0).sqrt();
        q[(m, m + 1)] = c(s, 0.0);
        q[(m + 1, m)] = c(s, 0.0);
        p[(m, m + 1)] = c(0.0, -s);
        p[(m + 1, m)] = c(0.0, s);
    }
    (OperatorMatrix::new(q).unwrap(), OperatorMatrix::new(p).unwrap())
}

fn max_entry_diff(a: &DMatrix<Complex<f64>>, b: &DMatrix<Complex<f64>>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn moyal_kernel_integral_matches_matrix_route() {
    let (a, b) = (coherent(0.0, 0.0), coherent(1.0, 0.5));
    let z = (0.3, -0.2);
    let n = 81;
    let h = 12.0 / (n - 1) as f64;
    let xs: Vec<f64> = (0..n).map(|k| -6.0 + h * k as f64).collect();
    let mut kernel = c(0.0, 0.0);
    for &q1 in &xs {
        for &p1 in &xs {
            let av = a(q1, p1);
            for &q2 in &xs {
                for &p2 in &xs {
                    kernel += moyal_kernel((q1, p1), (q2, p2), z) * (av * b(q2, p2));
                }
            }
        }
    }
    kernel *= h.powi(4);

    let w = Window::square(8.0, 161).unwrap();
    let cfg = WeylConfig::default().with_window(w).with_dim(64);
    let (i, j) = (83, 78);
    assert!((w.q(i) - z.0).abs() < 1e-12 && (w.p(j) - z.1).abs() < 1e-12);
    let ab = star_moyal(&symbol(w, &a), &symbol(w, &b), &cfg).unwrap().value(i, j);
    let ba = star_moyal(&symbol(w, &b), &symbol(w, &a), &cfg).unwrap().value(i, j);
    assert!((kernel - ab).norm() < 1e-8, "kernel {kernel} vs A⋆B {ab}");
    assert!((kernel - ba).norm() > 0.5, "the product must be noncommutative here");
    assert!((ab - ba.conj()).norm() < 1e-10);
}

#[test]
fn kernel_phase_at_sample_points() {
    let k = moyal_kernel((0.0, 0.0), (0.0, 0.0), (0.0, 0.0));
    assert!((k - c(1.0 / (PI * PI), 0.0)).norm() < 1e-15);
    let (z1, z2, z) = ((0.5, -1.0), (2.0, 0.25), (-0.75, 1.5));
    let phase = 2.0 * (0.5 * (0.25 - 1.5) + 2.0 * (1.5 + 1.0) - 0.75 * (-1.0 - 0.25));
    let k = moyal_kernel(z1, z2, z);
    assert!((k - Complex::from_polar(1.0 / (PI * PI), phase)).norm() < 1e-15);
}

#[test]
fn position_and_momentum_quantize_to_ladder_matrices() {
    let d = 32;
    let cfg = WeylConfig::default().with_window(wide()).with_dim(d);
    let q = symbol_to_matrix_complex(&symbol(wide(), |q, _| q), &cfg).unwrap().matrix;
    let p = symbol_to_matrix_complex(&symbol(wide(), |_, p| p), &cfg).unwrap().matrix;
    let (lq, lp) = ladder(d);
    assert!(q.max_abs_diff(&lq) < 1e-9, "Q off by {}", q.max_abs_diff(&lq));
    assert!(p.max_abs_diff(&lp) < 1e-9, "P off by {}", p.max_abs_diff(&lp));
}

#[test]
fn commutator_symbol_is_that_of_the_truncated_identity() {
    // [Q_D, P_D] = i (I - D |D-1⟩⟨D-1|) exactly, so the symbol is
    // i (Σ_{n<D} W_n - D W_{D-1}) rather than the constant i
    let d = 16;
    let cfg = WeylConfig::default().with_window(wide()).with_dim(d);
    let (sq, sp) = (symbol(wide(), |q, _| q), symbol(wide(), |_, p| p));
    let comm = star_moyal(&sq, &sp, &cfg).unwrap().sub(&star_moyal(&sp, &sq, &cfg).unwrap()).unwrap();
    let mut ident = DMatrix::from_diagonal_element(d, d, c(0.0, 1.0));
    ident[(d - 1, d - 1)] = c(0.0, 1.0 - d as f64);
    let expect = matrix_to_complex_symbol(&OperatorMatrix::new(ident).unwrap(), &wide()).unwrap();
    let diff = comm.sub(&expect).unwrap();
    assert!(diff.values().iter().all(|z| z.norm() < 1e-8));
    let origin = comm.value(200, 200);
    assert!((origin - c(0.0, 2.0 * d as f64)).norm() < 1e-8, "{origin}");
    let tail: f64 = (0..d).map(|n| fock_wigner(n, 2.0, 1.0)).sum::<f64>() - d as f64 * fock_wigner(d - 1, 2.0, 1.0);
    let at = comm.value(220, 210);
    assert!((at.im - tail).abs() < 1e-8 && at.re.abs() < 1e-8);
}

#[test]
fn weyl_order_correction_between_qp_and_operator_product() {
    // Weyl(qp) = (QP + PQ)/2 = QP - i/2; the truncated product only differs
    // in its last diagonal entry
    let d = 24;
    let cfg = WeylConfig::default().with_window(wide()).with_dim(d);
    let weyl_qp = symbol_to_matrix_complex(&symbol(wide(), |q, p| q * p), &cfg).unwrap().matrix;
    let (lq, lp) = ladder(d);
    let prod = lq.mul(&lp).unwrap();
    let diff = weyl_qp.sub(&prod).unwrap();
    let block = diff.leading_block(d - 1);
    let expect = DMatrix::from_diagonal_element(d - 1, d - 1, c(0.0, -0.5));
    assert!(max_entry_diff(&block, &expect) < 1e-9);

    // for q and q there is no ordering ambiguity: Weyl(q²) = Q², again up
    // to the truncated corner
    let weyl_qq = symbol_to_matrix_complex(&symbol(wide(), |q, _| q * q), &cfg).unwrap().matrix;
    let diff = weyl_qq.sub(&lq.mul(&lq).unwrap()).unwrap();
    assert!(max_entry_diff(&diff.leading_block(d - 1), &DMatrix::from_element(d - 1, d - 1, c(0.0, 0.0))) < 1e-9);
    let corner = diff.entries()[(d - 1, d - 1)];
    assert!((corner - c(d as f64 / 2.0, 0.0)).norm() < 1e-8, "{corner}");
}

#[test]
fn moyal_product_is_associative() {
    let w = Window::square(8.0, 161).unwrap();
    let cfg = WeylConfig::default().with_window(w).with_dim(64);
    let a = symbol(w, coherent(0.0, 0.0));
    let b = symbol(w, |q, p| q * coherent(1.0, 0.5)(q, p));
    let cc = symbol(w, |q, p| (p - 0.3) * coherent(-0.5, 0.3)(q, p));
    let left = star_moyal(&star_moyal(&a, &b, &cfg).unwrap(), &cc, &cfg).unwrap();
    let right = star_moyal(&a, &star_moyal(&b, &cc, &cfg).unwrap(), &cfg).unwrap();
    let scale = left.values().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let worst = left.sub(&right).unwrap().values().iter().map(|z| z.norm()).fold(0.0, f64::max);
    assert!(scale > 1e-3 && worst < 1e-9 * scale.max(1.0), "{worst}");
}

#[test]
fn classical_product_commutes_and_associates_exactly() {
    let w = Window::new(-3.0, 3.0, 9, -4.0, 4.0, 32).unwrap();
    let a = kernel_of_symbol(&symbol(w, |q, p| q + 0.5 * p * p));
    let b = kernel_of_symbol(&symbol(w, |q, p| (-(p - q) * (p - q)).exp()));
    let cc = kernel_of_symbol(&symbol(w, |q, p| (q * p).cos()));
    assert_eq!(star_classical(&a, &b).unwrap().values(), star_classical(&b, &a).unwrap().values());
    let l = star_classical(&star_classical(&a, &b).unwrap(), &cc).unwrap();
    let r = star_classical(&a, &star_classical(&b, &cc).unwrap()).unwrap();
    assert!(l.max_abs_diff(&r) < 1e-12 * l.max_abs().max(1.0));
    let conv = star_classical_c9(&a, &b).unwrap();
    assert!(conv.max_abs_diff(&star_classical(&a, &b).unwrap()) < 1e-10 * conv.max_abs().max(1.0));
}

#[test]
fn vacuum_wigner_and_classical_gaussian_share_the_projector() {
    let w = Window::square(8.0, 256).unwrap();
    let cfg = WeylConfig::default().with_window(w).with_dim(32);
    let from_wigner = symbol_to_matrix(&fock_wigner_grid(0, w).unwrap(), &cfg).unwrap();
    let from_density = symbol_to_matrix(&GaussianState::vacuum(1.0).sample(w).unwrap(), &cfg).unwrap();
    let proj = OperatorMatrix::fock(0, 32).unwrap();
    assert!(from_wigner.matrix.max_abs_diff(&proj) < 1e-8);
    assert!(from_density.matrix.max_abs_diff(&proj) < 1e-8);
    assert!(from_wigner.leakage < 1e-6 && !from_wigner.truncation_warning);
}

#[test]
fn fock_one_is_negative_at_the_origin() {
    assert_eq!(fock_wigner(1, 0.0_f64, 0.0), -2.0);
    assert_eq!(fock_wigner(0, 0.0_f64, 0.0), 2.0);
    let origin = Window::new(-1.0_f64, 1.0, 3, -1.0, 1.0, 3).unwrap();
    let w = matrix_to_symbol(&OperatorMatrix::fock(1, 16).unwrap(), &origin).unwrap();
    assert!((w.value(1, 1) + 2.0).abs() < 1e-12);
    // W_1 = 2 (2r² - 1) e^{-r²}
    let r2: f64 = 1.0 + 0.25;
    assert!((w.value(2, 1) - fock_wigner(1, 1.0, 0.0)).abs() < 1e-12);
    assert!((fock_wigner(1, 1.0, 0.5) - 2.0 * (2.0 * r2 - 1.0) * (-r2).exp()).abs() < 1e-14);
}

#[test]
fn random_hermitian_round_trip() {
    let d = 32;
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let mut m = DMatrix::from_element(d, d, c(0.0, 0.0));
    for i in 0..d {
        m[(i, i)] = c(rng.random_range(-1.0..1.0), 0.0);
        for j in i + 1..d {
            let z = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    let a = OperatorMatrix::new(m).unwrap();
    let w = Window::square(16.0, 257).unwrap();
    let sym = matrix_to_symbol(&a, &w).unwrap();
    let back = symbol_to_matrix(&sym, &WeylConfig::default().with_window(w).with_dim(d)).unwrap().matrix;
    let l1: f64 = a.entries().iter().zip(back.entries().iter()).map(|(x, y)| (x - y).norm()).sum();
    let norm: f64 = a.entries().iter().map(|x| x.norm()).sum();
    assert!(l1 / norm < 1e-3, "relative L1 {}", l1 / norm);
}

#[test]
fn wigner_of_coherent_kernel_and_its_transpose() {
    // ρ(x, x') = ψ(x) ψ*(x') for ψ = π^{-1/4} e^{-x²/2 + i p0 x}
    let p0 = 0.75;
    let rho = KernelGrid::from_fn(-8.0, 8.0, 161, |x: f64, y: f64| {
        Complex::from_polar((-(x * x + y * y) / 2.0).exp() / PI.sqrt(), p0 * (x - y))
    })
    .unwrap();
    let w = wigner_of_density(&rho, -5.0, 5.0, 101).unwrap();
    let wt = wigner_of_density(&rho.transpose(), -5.0, 5.0, 101).unwrap();
    let win = *w.window();
    let mut worst = 0f64;
    let mut worst_t = 0f64;
    for i in 40..121 {
        for j in 0..101 {
            let (q, p) = (win.q(i), win.p(j));
            worst = worst.max((w.value(i, j) - coherent(0.0, p0)(q, p)).abs());
            worst_t = worst_t.max((wt.value(i, j) - coherent(0.0, -p0)(q, p)).abs());
        }
    }
    assert!(worst < 1e-6 && worst_t < 1e-6, "{worst} {worst_t}");
}

#[test]
fn positivity_functional_signs() {
    let w = Window::square(8.0, 256).unwrap();
    let cfg = WeylConfig::default().with_window(w).with_dim(64);
    let vac = fock_wigner_grid(0, w).unwrap();
    let psi0 = WaveFunction::from_fn(-10.0, 10.0, 401, |x: f64| c((-x * x / 2.0).exp() / PI.powf(0.25), 0.0)).unwrap();
    let v = positivity_functional(&vac, &psi0, &cfg).unwrap();
    assert!((v.value - 2.0 * PI).abs() < 1e-6 && v.projection_residual < 1e-9);

    // a classical Gaussian with σ = 0.1 has a negative eigenvalue; its
    // eigenvector is the witness
    let g = GaussianState::isotropic(0.1).unwrap().sample(w).unwrap();
    let a = symbol_to_matrix(&g, &cfg).unwrap().matrix;
    let spec = spectral_decompose(&a).unwrap();
    let witness = WaveFunction::from_coefficients(&spec.eigenvector(spec.argmin()), -12.0, 12.0, 961).unwrap();
    let v = positivity_with_matrix(&a, &witness);
    let norm = witness.norm_sqr();
    assert!(v.value < 0.0);
    assert!((v.value / norm - 2.0 * PI * spec.min_eigenvalue()).abs() < 1e-4, "{} {}", v.value, spec.min_eigenvalue());
}

#[test]
fn thermal_spectrum_is_geometric_and_positive() {
    let s = 1.5_f64;
    let w = Window::square(12.0, 256).unwrap();
    let cfg = WeylConfig::default().with_window(w).with_dim(96);
    let g = GaussianState::isotropic(s).unwrap().sample(w).unwrap();
    let spec = spectral_decompose(&symbol_to_matrix(&g, &cfg).unwrap().matrix).unwrap();
    for n in 0..8 {
        let expect = 2.0 / (2.0 * s + 1.0) * ((2.0 * s - 1.0) / (2.0 * s + 1.0)).powi(n);
        assert!((spec.eigenvalues()[n as usize] - expect).abs() < 1e-6);
    }
    assert!(spec.min_eigenvalue() > -1e-9);
    let back = spec.reassemble().unwrap();
    let orig = symbol_to_matrix(&g, &cfg).unwrap().matrix;
    assert!(back.max_abs_diff(&orig) < 1e-10);
    let v = DVector::from_fn(96, |k, _| c(spec.eigenvalues()[k], 0.0));
    assert!((v.sum().re - orig.trace().re).abs() < 1e-10);
}
