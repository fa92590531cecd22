use std::f64::consts::{FRAC_PI_2, PI};

use creutz_core::linalg::eigen;
use creutz_core::model::{build_bloch, build_realspace, derive, Boundary, ModelParams};
use creutz_core::spectral::{
    bloch_spectrum, classify, default_tol_abs, eig, enclosed_area, ladder_spectrum, ladder_spectrum_with,
    multiset_distance, obc_bulk_dispersion, pbc_dispersion, spectral_density_m, Detail, SpectralLabel,
};
use creutz_core::{Complex64 as C64, Matrix};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn params(tbar: f64, t0: f64, gbar: f64, g0: f64, cells: usize, boundary: Boundary) -> ModelParams<f64> {
    ModelParams::balanced(tbar, t0, gbar, g0, cells, boundary)
}

fn pair_distance(got: (C64, C64), want: (C64, C64)) -> f64 {
    multiset_distance(&[got.0, got.1], &[want.0, want.1]).unwrap()
}

fn amp() -> impl Strategy<Value = f64> {
    -1.5..1.5f64
}

#[test]
fn dispersion_examples() {
    let flat = params(1.0, 1.0, 0.0, 0.0, 4, Boundary::Periodic);
    for m in 0..32 {
        let k = 2.0 * PI * m as f64 / 32.0;
        assert!(pair_distance(pbc_dispersion(&flat, k), (c(2.0, 0.0), c(-2.0, 0.0))) <= 1e-12);
    }
    let line = params(1.0, 0.8, 0.4, 0.5, 4, Boundary::Periodic);
    let e = 2.0 * 0.75f64.sqrt() * 0.8;
    assert!((e - 1.385641).abs() < 1e-6);
    assert!(pair_distance(pbc_dispersion(&line, 0.0), (c(e, 0.0), c(-e, 0.0))) <= 1e-12);
    let b = eigen(&build_bloch(&line, 0.0), false).unwrap().values;
    assert!(pair_distance((b[0], b[1]), (c(e, 0.0), c(-e, 0.0))) <= 1e-12);
    let e = 2.0 * 0.75f64.sqrt();
    assert!((e - 1.732051).abs() < 1e-6);
    let p = params(1.0, 0.0, 0.0, 0.5, 4, Boundary::Periodic);
    assert!(pair_distance(pbc_dispersion(&p, FRAC_PI_2), (c(e, 0.0), c(-e, 0.0))) <= 1e-12);
}

#[test]
fn open_bulk_examples() {
    let ssh = params(1.0, 0.5, 0.0, 0.0, 4, Boundary::Open);
    assert!(pair_distance(obc_bulk_dispersion(&ssh, 0.0).unwrap(), (c(2.0, 0.0), c(-2.0, 0.0))) <= 1e-12);
    assert!(pair_distance(obc_bulk_dispersion(&ssh, PI).unwrap(), (c(1.0, 0.0), c(-1.0, 0.0))) <= 1e-12);
    let imag = params(0.2, 0.0, 1.0, 0.0, 4, Boundary::Open);
    let e = 2.0 * 0.96f64.sqrt();
    assert!((e - 1.959592).abs() < 1e-6);
    assert!(pair_distance(obc_bulk_dispersion(&imag, 0.0).unwrap(), (c(0.0, e), c(0.0, -e))) <= 1e-12);
    let elu = params(1.0, 0.3, 0.8, 0.5, 4, Boundary::Open);
    let v = derive(&elu).v;
    for m in 0..16 {
        let q = 2.0 * PI * m as f64 / 16.0;
        assert!(pair_distance(obc_bulk_dispersion(&elu, q).unwrap(), (v, -v)) <= 1e-7);
    }
    let imbalanced = ModelParams::from_averages(1.0, 0.1, 0.5, 0.2, 0.0, 0.3, 4, Boundary::Open);
    assert!(obc_bulk_dispersion(&imbalanced, 0.0).is_err());
}

#[test]
fn density_examples() {
    assert_eq!(spectral_density_m(&[c(1.0, 0.0), c(-3.0, 0.0), c(2.5, 0.0)], 1e-12).unwrap(), 1.0);
    assert_eq!(spectral_density_m(&[c(0.0, 1.0), c(0.0, -2.0)], 1e-12).unwrap(), -1.0);
    assert_eq!(spectral_density_m(&[c(1.0, 0.0), c(0.0, 1.0)], 1e-12).unwrap(), 0.0);
    // sub-threshold values count as real
    assert_eq!(spectral_density_m(&[c(1e-15, 1e-15), c(0.0, 1.0)], 1e-12).unwrap(), 0.0);
    assert!(spectral_density_m(&[], 1e-12).is_err());
}

#[test]
fn classify_examples() {
    let line = ladder_spectrum(&params(1.0, 0.8, 0.4, 0.5, 50, Boundary::Periodic), false).unwrap();
    let h = build_realspace(&params(1.0, 0.8, 0.4, 0.5, 50, Boundary::Periodic)).unwrap();
    assert_eq!(classify(&line.eigenvalues, 1e-9, default_tol_abs(&h)).unwrap().label, SpectralLabel::Real);

    let efb = params(1.0, 0.7, 0.7, 1.0, 20, Boundary::Open);
    let h = build_realspace(&efb).unwrap();
    let s = ladder_spectrum(&efb, false).unwrap();
    assert_eq!(classify(&s.eigenvalues, 1e-9, default_tol_abs(&h)).unwrap().label, SpectralLabel::Collapsed);

    let imag = params(0.2, 0.0, 1.0, 0.0, 20, Boundary::Open);
    let h = build_realspace(&imag).unwrap();
    let s = ladder_spectrum(&imag, false).unwrap();
    let class = classify(&s.eigenvalues, 1e-9, default_tol_abs(&h)).unwrap();
    assert_eq!(class.label, SpectralLabel::Imaginary);
    assert!((class.m + 1.0).abs() <= 1e-9);
}

#[test]
fn enclosed_area_examples() {
    assert!(enclosed_area(&params(1.0, 0.8, 0.4, 0.5, 4, Boundary::Periodic), 256).unwrap() <= 1e-10);
    assert!(enclosed_area(&params(1.0, 1.0, 0.5, 0.5, 4, Boundary::Periodic), 256).unwrap() <= 1e-8);
    assert!(enclosed_area(&params(1.0, 0.5, 0.0, 1.0, 4, Boundary::Periodic), 256).unwrap() > 0.1);
    assert!(enclosed_area(&params(1.0, 0.5, 0.0, 1.0, 4, Boundary::Periodic), 63).is_err());
}

#[test]
fn eig_examples() {
    let mut d = Matrix::zeros(3);
    d[(0, 0)] = c(1.0, 0.0);
    d[(1, 1)] = c(0.0, 1.0);
    d[(2, 2)] = c(-2.0, 0.0);
    let s = eig(&d, true).unwrap();
    assert!(multiset_distance(&s.eigenvalues, &[c(1.0, 0.0), c(0.0, 1.0), c(-2.0, 0.0)]).unwrap() == 0.0);
    assert_eq!(s.residual_max, 0.0);

    let mut j = Matrix::zeros(2);
    j[(0, 1)] = c(1.0, 0.0);
    let s = eig(&j, true).unwrap();
    assert!(s.eigenvalues.iter().all(|z| z.norm() == 0.0));
    assert!(s.evec_condition > 1e8, "condition {}", s.evec_condition);
}

/// Open chains whose near-zero edge pair sits where skin growth outruns
/// the topological decay.
#[test]
fn edge_pair_vectors_are_eigenvectors_under_strong_skew() {
    for (t0, gbar, g0) in [(-0.337, 0.596, -0.053), (0.055, 0.776, 1.401), (0.664, 0.486, 0.303), (-0.035, -0.512, -1.424)] {
        let s = ladder_spectrum_with(&params(1.0, t0, gbar, g0, 50, Boundary::Open), Detail::Vectors).unwrap();
        assert!(s.residual_max <= 1e-8 * s.max_abs().max(1.0), "{t0} {gbar} {g0}: {}", s.residual_max);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn dispersion_matches_bloch_eigenvalues(tbar in amp(), t0 in amp(), gbar in amp(), g0 in amp(), k in 0.0..2.0 * PI) {
        let p = params(tbar, t0, gbar, g0, 4, Boundary::Periodic);
        let b = eigen(&build_bloch(&p, k), false).unwrap().values;
        let scale = b.iter().map(|z| z.norm()).fold(1.0, f64::max);
        prop_assert!(pair_distance(pbc_dispersion(&p, k), (b[0], b[1])) <= 1e-9 * scale);
    }

    #[test]
    fn fine_tuned_line_has_the_flat_form(tbar in 0.2..1.5f64, t0 in amp(), frac in -0.95..0.95f64, sign in prop::bool::ANY) {
        let tbar = if sign { tbar } else { -tbar };
        let g0 = frac * tbar.abs();
        let p = params(tbar, t0, t0 * g0 / tbar, g0, 4, Boundary::Periodic);
        let eta = t0 / tbar;
        for m in 0..64 {
            let k = 2.0 * PI * m as f64 / 64.0;
            let e = 2.0 * (tbar * tbar - g0 * g0).sqrt() * (eta * eta * k.cos().powi(2) + k.sin().powi(2)).sqrt();
            prop_assert!(pair_distance(pbc_dispersion(&p, k), (c(e, 0.0), c(-e, 0.0))) <= 1e-12 * (1.0 + e));
        }
    }

    #[test]
    fn fine_tuned_line_is_real(t0 in amp(), g0 in -0.95..0.95f64, cells in 4usize..40) {
        let p = params(1.0, t0, t0 * g0, g0, cells, Boundary::Periodic);
        let e = bloch_spectrum(&p).unwrap();
        let h = build_realspace(&p).unwrap();
        let class = classify(&e, 1e-9, default_tol_abs(&h)).unwrap();
        prop_assert!(matches!(class.label, SpectralLabel::Real | SpectralLabel::Collapsed), "{:?}", class);
        if class.label == SpectralLabel::Real {
            prop_assert!((class.m - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn density_is_bounded_and_scale_free(
        pts in prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64), 1..40),
        s in prop_oneof![-100.0..-0.01f64, 0.01..100.0f64],
    ) {
        let e: Vec<C64> = pts.iter().map(|&(a, b)| c(a, b)).collect();
        let m = spectral_density_m(&e, 0.0).unwrap();
        prop_assert!((-1.0..=1.0).contains(&m));
        let scaled: Vec<C64> = e.iter().map(|z| z * s).collect();
        prop_assert!((spectral_density_m(&scaled, 0.0).unwrap() - m).abs() <= 1e-12);
    }

    #[test]
    fn labels_fix_density(pts in prop::collection::vec(-5.0..5.0f64, 1..20), imaginary: bool) {
        let e: Vec<C64> = pts.iter().map(|&a| if imaginary { c(0.0, a) } else { c(a, 0.0) }).collect();
        let class = classify(&e, 1e-9, 1e-12).unwrap();
        match class.label {
            SpectralLabel::Real => prop_assert!((class.m - 1.0).abs() <= 1e-9),
            SpectralLabel::Imaginary => prop_assert!((class.m + 1.0).abs() <= 1e-9),
            SpectralLabel::Collapsed => prop_assert!(e.iter().all(|z| z.norm() <= 1e-12)),
            SpectralLabel::Complex => prop_assert!(false, "pure spectrum labelled Complex"),
        }
    }

    /// Numerically diagonalizable ladders, both boundaries, either route.
    #[test]
    fn eigenpairs_have_small_residuals(
        tbar in amp(), t0 in amp(), gbar in amp(), g0 in amp(), dt in -0.3..0.3f64, half in 2usize..12,
        periodic: bool, imbalanced: bool,
    ) {
        let boundary = if periodic { Boundary::Periodic } else { Boundary::Open };
        let p = if imbalanced {
            ModelParams::from_averages(tbar, dt, t0, gbar, -dt, g0, 2 * half, boundary)
        } else {
            params(tbar, t0, gbar, g0, 2 * half, boundary)
        };
        let s = ladder_spectrum(&p, true).unwrap();
        prop_assert_eq!(s.len(), p.dim());
        prop_assert_eq!(s.eigenvectors.as_ref().unwrap().len(), p.dim());
        prop_assume!(s.evec_condition <= 1e8);
        prop_assert!(s.residual_max <= 1e-8 * s.max_abs().max(1.0), "residual {} condition {}", s.residual_max, s.evec_condition);
    }
}
