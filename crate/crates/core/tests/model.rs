use creutz_core::linalg::eigen;
use creutz_core::model::{build_bloch, build_nhssh, build_realspace, derive, Boundary, ModelParams};
use creutz_core::spectral::multiset_distance;
use creutz_core::{Complex64 as C64, Matrix};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Ladder matrix from the per-bond coefficients, written out independently:
/// forward (`j -> j+1`) and backward amplitudes on each of the four links.
fn ladder_oracle(p: &ModelParams<f64>) -> Matrix {
    let n = p.cells;
    let mut h = Matrix::zeros(2 * n);
    let a = |j: usize| 2 * j;
    let b = |j: usize| 2 * j + 1;
    let bonds = match p.boundary {
        Boundary::Open => n - 1,
        Boundary::Periodic => n,
    };
    for j in 0..bonds {
        let k = (j + 1) % n;
        h[(a(k), a(j))] += c(0.0, -(p.t1 + p.g1));
        h[(a(j), a(k))] += c(0.0, p.t1 - p.g1);
        h[(b(k), b(j))] += c(0.0, p.t2 + p.g2);
        h[(b(j), b(k))] += c(0.0, -p.t2 + p.g2);
        h[(a(k), b(j))] += c(-p.t0 - p.g0, 0.0);
        h[(a(j), b(k))] += c(-p.t0 + p.g0, 0.0);
        h[(b(k), a(j))] += c(-p.t0 - p.g0, 0.0);
        h[(b(j), a(k))] += c(-p.t0 + p.g0, 0.0);
    }
    h
}

/// Closed-form chain: superdiagonal `-i(x + y)`, subdiagonal `-i(x - y)`
/// with `(x, y)` alternating between `(f', g')` and `(f, g)`.
fn chain_oracle(cells: usize, first: (f64, f64), second: (f64, f64)) -> Matrix {
    let mut h = Matrix::zeros(cells);
    for i in 0..cells - 1 {
        let (x, y) = if i % 2 == 0 { first } else { second };
        h[(i, i + 1)] = c(0.0, -(x + y));
        h[(i + 1, i)] = c(0.0, -(x - y));
    }
    h
}

fn max_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.sub(b).max_abs()
}

fn eigvals(h: &Matrix) -> Vec<C64> {
    eigen(h, false).unwrap().values
}

/// Roots of the 2x2 characteristic polynomial.
fn quadratic_roots(m: &Matrix) -> [C64; 2] {
    let tr = m[(0, 0)] + m[(1, 1)];
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let s = (tr * tr * 0.25 - det).sqrt();
    [tr * 0.5 + s, tr * 0.5 - s]
}

fn amp() -> impl Strategy<Value = f64> {
    -1.5..1.5f64
}

#[test]
fn two_cell_open_ladder_matches_literal_entries() {
    let h = build_realspace(&ModelParams::balanced(1.0, 1.0, 0.0, 0.0, 2, Boundary::Open)).unwrap();
    let (a1, b1, a2, b2) = (0, 1, 2, 3);
    assert_eq!(h[(a2, a1)], c(0.0, -1.0));
    assert_eq!(h[(a1, a2)], c(0.0, 1.0));
    assert_eq!(h[(a2, b1)], c(-1.0, 0.0));
    assert_eq!(h[(b2, a1)], c(-1.0, 0.0));
    assert_eq!(h[(a1, b2)], c(-1.0, 0.0));
    assert_eq!(h[(b1, a2)], c(-1.0, 0.0));
    assert_eq!(h[(b2, b1)], c(0.0, 1.0));
    assert_eq!(h[(b1, b2)], c(0.0, -1.0));
}

#[test]
fn hermitian_ssh_chain_example() {
    let (h1, _) = build_nhssh(&ModelParams::balanced(1.0, 0.5, 0.0, 0.0, 4, Boundary::Open)).unwrap();
    let want = chain_oracle(4, (0.0, 0.5), (0.0, 1.5));
    assert!(max_diff(&h1, &want) <= 1e-15);
}

#[test]
fn imbalanced_chains_rejected() {
    let p = ModelParams::from_averages(1.0, 0.1, 0.5, 0.2, 0.0, 0.3, 4, Boundary::Open);
    assert!(matches!(build_nhssh(&p), Err(creutz_core::Error::ImbalancedParameters { .. })));
}

#[test]
fn derived_examples() {
    let d = derive(&ModelParams::<f64>::balanced(1.0, 0.3, 0.8, 0.5, 4, Boundary::Open));
    assert!((d.g - 1.3).abs() < 1e-15 && (d.f - 1.3).abs() < 1e-15);
    assert!(d.u.norm() < 1e-7);
    assert!((d.v - c(0.4f64.sqrt(), 0.0)).norm() < 1e-12);
    let d = derive(&ModelParams::balanced(0.2, 0.0, 1.0, 0.0, 4, Boundary::Open));
    assert!((d.u - c(0.0, 0.96f64.sqrt())).norm() < 1e-12);
    assert_eq!(d.u, d.v);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn realspace_matches_bond_oracle(
        t0 in amp(), t1 in amp(), t2 in amp(), g0 in amp(), g1 in amp(), g2 in amp(),
        cells in 3usize..9, periodic: bool,
    ) {
        let boundary = if periodic { Boundary::Periodic } else { Boundary::Open };
        let p = ModelParams { t0, t1, t2, g0, g1, g2, cells, boundary };
        prop_assert!(max_diff(&build_realspace(&p).unwrap(), &ladder_oracle(&p)) <= 1e-15);
    }

    #[test]
    fn chains_match_closed_form(tbar in amp(), t0 in amp(), gbar in amp(), g0 in amp(), half in 1usize..6) {
        let cells = 2 * half;
        let p = ModelParams::balanced(tbar, t0, gbar, g0, cells, Boundary::Open);
        let d = derive(&p);
        let (h1, h2) = build_nhssh(&p).unwrap();
        prop_assert!(max_diff(&h1, &chain_oracle(cells, (d.fp, d.gp), (d.f, d.g))) <= 1e-14);
        prop_assert!(max_diff(&h2, &chain_oracle(cells, (d.f, d.g), (d.fp, d.gp))) <= 1e-14);
    }

    #[test]
    fn periodic_ladder_is_union_of_bloch_blocks(
        t0 in amp(), t1 in amp(), t2 in amp(), g0 in amp(), g1 in amp(), g2 in amp(), cells in 3usize..12,
    ) {
        let p = ModelParams { t0, t1, t2, g0, g1, g2, cells, boundary: Boundary::Periodic };
        let mut bloch = Vec::new();
        for m in 0..cells {
            let k = 2.0 * std::f64::consts::PI * m as f64 / cells as f64;
            bloch.extend(quadratic_roots(&build_bloch(&p, k)));
        }
        let real = eigvals(&build_realspace(&p).unwrap());
        let scale = bloch.iter().map(|z| z.norm()).fold(1.0, f64::max);
        // defective Bloch blocks split as sqrt(eps)
        let d = multiset_distance(&real, &bloch).unwrap();
        prop_assert!(d <= 1e-9 * scale || d <= 1e-6 * scale && bloch_near_defective(&p), "distance {d}");
    }

    #[test]
    fn balanced_ladder_spectrum_is_union_of_chains(
        tbar in amp(), t0 in amp(), gbar in amp(), g0 in amp(), half in 1usize..6, periodic: bool,
    ) {
        let boundary = if periodic { Boundary::Periodic } else { Boundary::Open };
        let p = ModelParams::balanced(tbar, t0, gbar, g0, 2 * half, boundary);
        let (h1, h2) = build_nhssh(&p).unwrap();
        let mut chains = eigvals(&h1);
        chains.extend(eigvals(&h2));
        let ladder = eigvals(&build_realspace(&p).unwrap());
        let scale = chains.iter().map(|z| z.norm()).fold(1.0, f64::max);
        // the two spectra are the same roots computed from similar matrices;
        // exceptional points cap the agreement at sqrt(eps)
        prop_assert!(multiset_distance(&ladder, &chains).unwrap() <= 1e-6 * scale);
    }

    #[test]
    fn reciprocal_limit_is_hermitian(t0 in amp(), t1 in amp(), t2 in amp(), cells in 2usize..10, periodic: bool) {
        let boundary = if periodic { Boundary::Periodic } else { Boundary::Open };
        let h = build_realspace(&ModelParams { t0, t1, t2, g0: 0.0, g1: 0.0, g2: 0.0, cells, boundary }).unwrap();
        prop_assert_eq!(h.hermiticity_defect(), 0.0);
    }

    #[test]
    fn derived_round_trip_is_exact(t1 in amp(), t2 in amp(), g1 in amp(), g2 in amp(), t0 in amp(), g0 in amp()) {
        let p = ModelParams { t0, t1, t2, g0, g1, g2, cells: 4, boundary: Boundary::Open };
        let d = derive(&p);
        prop_assert_eq!(d.legs(), (t1, t2, g1, g2));
        let ulp = 4.0 * f64::EPSILON * 1.5;
        for (x, y) in [(d.tbar + d.dt, t1), (d.tbar - d.dt, t2), (d.gbar + d.dg, g1), (d.gbar - d.dg, g2)] {
            prop_assert!((x - y).abs() <= ulp);
        }
        prop_assert!((d.u * d.u - c(d.u_sq(), 0.0)).norm() <= 1e-13 * (1.0 + d.u_sq().abs()));
        prop_assert!((d.v * d.v - c(d.v_sq(), 0.0)).norm() <= 1e-13 * (1.0 + d.v_sq().abs()));
        prop_assert!(d.u.re >= 0.0 && d.v.re >= 0.0);
    }
}

/// Some Bloch block sits within `1e-6` of an exceptional point.
fn bloch_near_defective(p: &ModelParams<f64>) -> bool {
    (0..p.cells).any(|m| {
        let k = 2.0 * std::f64::consts::PI * m as f64 / p.cells as f64;
        let [x, y] = quadratic_roots(&build_bloch(p, k));
        (x - y).norm() <= 1e-3
    })
}
