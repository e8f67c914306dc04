use std::f64::consts::PI;

use tomokit::model::{moments_of_grid, reflect_time, LOADED_NORM_TOL};
use tomokit::tomography::{
    check_tomogram, invert_tomogram, tomogram_moments, tomogram_of_gaussian, tomogram_of_grid, CheckOptions,
    InversionOptions, TomogramOptions,
};
use tomokit::{Error, Frame, GaussianState, GridKind, PhaseGrid, Tomogram, Window, WindowMode};

fn normal_pdf(x: f64, mean: f64, var: f64) -> f64 {
    (-(x - mean).powi(2) / (2.0 * var)).exp() / (2.0 * PI * var).sqrt()
}

fn frames(n: usize) -> Vec<Frame<f64>> {
    (0..n).map(|k| Frame::from_polar(0.0, PI * k as f64 / n as f64)).collect()
}

fn opts(n_x: usize) -> TomogramOptions<f64> {
    TomogramOptions { n_x, tol: LOADED_NORM_TOL }
}

#[test]
fn axis_variances_are_the_dispersions() {
    let vac = GaussianState::vacuum(1.0_f64);
    for f in [Frame::new(1.0, 0.0).unwrap(), Frame::new(0.0, 1.0).unwrap()] {
        let (m, v) = tomogram_of_gaussian(&vac, &f).unwrap();
        assert_eq!((m, v), (0.0, 0.5));
    }
    let s = GaussianState::single(0.4_f64, -0.1, 1.0, 1.0, 0.3).unwrap();
    let (m, v) = tomogram_of_gaussian(&s, &Frame::new(1.0, 1.0).unwrap()).unwrap();
    assert!((v - 2.6).abs() < 1e-15 && (m - 0.3).abs() < 1e-15);
    let (_, v1) = tomogram_of_gaussian(&s, &Frame::new(1.0, 0.0).unwrap()).unwrap();
    let (_, v2) = tomogram_of_gaussian(&s, &Frame::new(2.0, 0.0).unwrap()).unwrap();
    assert_eq!(v2, 4.0 * v1);
}

#[test]
fn analytic_marginal_is_a_normal_density() {
    let s = GaussianState::single(0.4, -0.1, 0.8, 0.6, -0.2).unwrap();
    let t = Tomogram::gaussian(s).unwrap();
    let f = Frame::new(0.6, -1.3).unwrap();
    let mean = 0.6 * 0.4 + 1.3 * 0.1;
    let var = 0.36 * 0.8 + 1.69 * 0.6 + 2.0 * 0.6 * -1.3 * -0.2;
    for k in 0..41 {
        let x = -4.0 + 0.2 * k as f64;
        assert!((t.density(x, &f).unwrap() - normal_pdf(x, mean, var)).abs() < 1e-14);
    }
    let lam = -2.5;
    let g = f.scaled(lam).unwrap();
    for x in [-1.0, 0.1, 2.0] {
        let hom = lam.abs() * t.density(lam * x, &g).unwrap();
        assert!((hom - t.density(x, &f).unwrap()).abs() < 1e-14);
    }
}

#[test]
fn grid_marginals_match_closed_form() {
    let w = Window::square(8.0, 256).unwrap();
    let s = GaussianState::single(0.3, -0.5, 0.7, 0.4, 0.15).unwrap();
    let fs = frames(12);
    let t = tomogram_of_grid(&s.sample(w).unwrap(), &fs, &opts(256)).unwrap();
    let mut worst = 0f64;
    for m in t.marginals() {
        let (mean, var) = tomogram_of_gaussian(&s, &m.frame()).unwrap();
        for k in 0..m.len() {
            worst = worst.max((m.values()[k] - normal_pdf(m.x(k), mean, var)).abs());
        }
    }
    assert!(worst < 2e-3, "{worst}");
}

#[test]
fn sampled_moments_match_the_source() {
    let w = Window::square(8.0, 512).unwrap();
    let s = GaussianState::single(0.2, 0.1, 1.0, 1.0, 0.3).unwrap();
    let g = s.sample(w).unwrap();
    let t = tomogram_of_grid(&g, &frames(8), &opts(1024)).unwrap();
    let (_, v) = t.mean_var(&Frame::new(1.0, 1.0).unwrap()).unwrap();
    assert!((v - 2.6).abs() < 1e-3, "{v}");
    let from_tomo = tomogram_moments(&t).unwrap();
    let direct = moments_of_grid(&g, 1e-6).unwrap();
    for (a, b) in from_tomo.sigma().iter().zip(direct.sigma().iter()) {
        assert!((a - b).abs() < 1e-3);
    }
    let analytic = tomogram_moments(&Tomogram::gaussian(s.clone()).unwrap()).unwrap();
    assert!((analytic.sigma_qp() - 0.3).abs() < 1e-12 && (analytic.mean()[1] - 0.1).abs() < 1e-12);
}

#[test]
fn sampled_homogeneity_and_normalization() {
    let w = Window::square(8.0, 256).unwrap();
    let g = GaussianState::vacuum(1.0).sample(w).unwrap();
    let f = Frame::new(1.0, 0.0).unwrap();
    let t = tomogram_of_grid(&g, &[f, f.scaled(2.0).unwrap(), f.scaled(-0.5).unwrap()], &opts(256)).unwrap();
    let r = check_tomogram(&t, &CheckOptions::default());
    assert_eq!(r.homogeneity.len(), 3);
    assert!(r.max_homogeneity_residual() < 1e-6 && r.max_normalization_residual() < 1e-6);
    let bad = t.scale_values(1.1);
    let r = check_tomogram(&bad, &CheckOptions::default());
    assert!((r.max_normalization_residual() - 0.1).abs() < 1e-6);
    assert!(!r.is_valid(1e-3));
}

#[test]
fn momentum_reversal_flips_the_frame() {
    let w = Window::square(8.0, 128).unwrap();
    let g = GaussianState::single(0.5, 1.0, 0.6, 0.5, 0.2).unwrap().sample(w).unwrap();
    let rev = reflect_time(&g, WindowMode::Fixed).unwrap();
    let f = Frame::new(0.8, 0.6).unwrap();
    let flipped = Frame::new(0.8, -0.6).unwrap();
    let a = tomogram_of_grid(&rev, &[f], &opts(256)).unwrap();
    let b = tomogram_of_grid(&g, &[flipped], &opts(256)).unwrap();
    let (ma, mb) = (&a.marginals()[0], &b.marginals()[0]);
    assert!((ma.x_min() - mb.x_min()).abs() < 1e-12);
    for (x, y) in ma.values().iter().zip(mb.values()) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn mixture_round_trip() {
    let w = Window::square(8.0, 256).unwrap();
    let a = GaussianState::single(-2.0, 0.0, 0.5, 0.5, 0.0).unwrap().sample(w).unwrap();
    let b = GaussianState::single(2.0, 0.0, 0.5, 0.5, 0.0).unwrap().sample(w).unwrap();
    let mix =
        PhaseGrid::new(w, GridKind::Density, a.values().iter().zip(b.values()).map(|(x, y)| 0.5 * (x + y)).collect())
            .unwrap();
    let t = tomogram_of_grid(&mix, &frames(64), &opts(512)).unwrap();
    let back = invert_tomogram(&t, &InversionOptions::new(w)).unwrap();
    let l1 = back.l1_distance(&mix).unwrap();
    assert!(l1 < 2e-2, "{l1}");
    assert!((back.integral() - 1.0).abs() < 1e-9);
}

#[test]
fn analytic_inversion_is_exact() {
    let w = Window::square(8.0, 128).unwrap();
    let s = GaussianState::single(0.1, 0.2, 0.9, 0.4, 0.1).unwrap();
    let back = invert_tomogram(&Tomogram::gaussian(s.clone()).unwrap(), &InversionOptions::new(w)).unwrap();
    assert_eq!(back, s.sample(w).unwrap());
}

#[test]
fn sparse_angles_are_a_coverage_error() {
    let w = Window::square(8.0, 64).unwrap();
    let g = GaussianState::vacuum(1.0).sample(w).unwrap();
    let t = tomogram_of_grid(&g, &frames(6), &opts(128)).unwrap();
    let r = invert_tomogram(&t, &InversionOptions::new(w));
    assert!(matches!(r, Err(Error::Coverage { .. })));
}

#[test]
fn unnormalized_input_is_rejected() {
    let w = Window::square(8.0, 64).unwrap();
    let g = GaussianState::vacuum(1.0).sample(w).unwrap().map_values(|v| 1.5 * v).unwrap();
    let r = tomogram_of_grid(&g, &frames(4), &opts(128));
    assert!(matches!(r, Err(Error::Normalization { .. })));
}
