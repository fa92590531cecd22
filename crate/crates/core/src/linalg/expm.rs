//! Matrix exponential by scaling and squaring with a [13/13] Padé approximant.

use num_traits::{One, Zero};

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};
use crate::scalar::{abs1, real, Real, C};

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371920351148152;

/// Solve `A X = B` by LU with partial pivoting.
pub fn solve<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    let n = a.dim();
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidParameters("linear system has non-finite entries".into()));
    }
    let mut lu = a.clone();
    let mut x = b.clone();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| abs1(lu[(i, k)]).partial_cmp(&abs1(lu[(j, k)])).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap_or(k);
        if lu[(p, k)].is_zero() {
            return Err(Error::Singular);
        }
        if p != k {
            for c in 0..n {
                let t = lu[(k, c)];
                lu[(k, c)] = lu[(p, c)];
                lu[(p, c)] = t;
                let t = x[(k, c)];
                x[(k, c)] = x[(p, c)];
                x[(p, c)] = t;
            }
        }
        let inv = C::<T>::one() / lu[(k, k)];
        for r in k + 1..n {
            let f = lu[(r, k)] * inv;
            if f.is_zero() {
                continue;
            }
            lu[(r, k)] = f;
            for c in k + 1..n {
                let v = lu[(k, c)];
                lu[(r, c)] -= f * v;
            }
            for c in 0..n {
                let v = x[(k, c)];
                x[(r, c)] -= f * v;
            }
        }
    }
    for k in (0..n).rev() {
        let inv = C::<T>::one() / lu[(k, k)];
        for c in 0..n {
            let mut s = x[(k, c)];
            for j in k + 1..n {
                s -= lu[(k, j)] * x[(j, c)];
            }
            x[(k, c)] = s * inv;
        }
    }
    Ok(x)
}

fn lincomb<T: Real>(terms: &[(T, &ComplexMatrix<T>)], identity: T) -> ComplexMatrix<T> {
    let n = terms[0].1.dim();
    let mut out = ComplexMatrix::zeros(n);
    for &(c, m) in terms {
        let s = real(c);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += m[(i, j)] * s;
            }
        }
    }
    for i in 0..n {
        out[(i, i)] += real(identity);
    }
    out
}

/// `exp(A)`.
pub fn expm<T: Real>(a: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    let n = a.dim();
    if n == 0 {
        return Ok(ComplexMatrix::zeros(0));
    }
    if !a.is_finite() {
        return Err(Error::InvalidParameters("matrix has non-finite entries".into()));
    }
    let norm = a.one_norm();
    let theta = T::lit(THETA13);
    let s: i32 = if norm > theta {
        (norm / theta).log2().ceil().to_i32().unwrap_or(0).max(0)
    } else {
        0
    };
    let scale = T::lit(2.0).powi(-s);
    let a = a.scale(real(scale));
    let b: Vec<T> = PADE13.iter().map(|&x| T::lit(x)).collect();
    let a2 = a.matmul(&a);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);

    let inner_u = lincomb(&[(b[13], &a6), (b[11], &a4), (b[9], &a2)], T::zero());
    let u_poly = a6
        .matmul(&inner_u)
        .add(&lincomb(&[(b[7], &a6), (b[5], &a4), (b[3], &a2)], b[1]));
    let u = a.matmul(&u_poly);
    let inner_v = lincomb(&[(b[12], &a6), (b[10], &a4), (b[8], &a2)], T::zero());
    let v = a6
        .matmul(&inner_v)
        .add(&lincomb(&[(b[6], &a6), (b[4], &a4), (b[2], &a2)], b[0]));

    let mut r = solve(&v.sub(&u), &v.add(&u))?;
    for _ in 0..s {
        r = r.matmul(&r);
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    #[test]
    fn exp_of_diagonal() {
        let a = ComplexMatrix::from_diag(&[cplx(1.0, 0.0), cplx(0.0, 2.0), cplx(-30.0, 0.0)]);
        let e = expm(&a).unwrap();
        let want = [cplx(1f64, 0.0).exp(), cplx(0.0, 2.0f64).exp(), cplx(-30.0f64, 0.0).exp()];
        for i in 0..3 {
            assert!((e[(i, i)] - want[i]).norm() <= 1e-13 * want[i].norm());
        }
        assert!(e[(0, 1)].norm() < 1e-300);
    }

    #[test]
    fn exp_of_nilpotent_is_two_terms() {
        let a = ComplexMatrix::from_rows(&[
            vec![cplx(0.0, 0.0), cplx(0.0, -7.0)],
            vec![cplx(0.0, 0.0), cplx(0.0, 0.0)],
        ]);
        let e = expm(&a).unwrap();
        assert!((e[(0, 0)] - cplx(1.0, 0.0)).norm() < 1e-14);
        assert!((e[(0, 1)] - cplx(0.0, -7.0)).norm() < 1e-13);
        assert!(e[(1, 0)].norm() < 1e-14);
    }

    #[test]
    fn exp_of_rotation_generator() {
        // exp([[0,-t],[t,0]]) = [[cos t, -sin t],[sin t, cos t]]
        let t = 12.3f64;
        let a = ComplexMatrix::from_rows(&[
            vec![cplx(0.0, 0.0), cplx(-t, 0.0)],
            vec![cplx(t, 0.0), cplx(0.0, 0.0)],
        ]);
        let e = expm(&a).unwrap();
        assert!((e[(0, 0)].re - t.cos()).abs() < 1e-13);
        assert!((e[(1, 0)].re - t.sin()).abs() < 1e-13);
    }

    #[test]
    fn solve_recovers_identity() {
        let a = ComplexMatrix::from_rows(&[
            vec![cplx(0.0, 1.0), cplx(2.0, 0.0)],
            vec![cplx(3.0, 0.0), cplx(1.0, -1.0)],
        ]);
        let x = solve(&a, &a).unwrap();
        assert!(x.sub(&ComplexMatrix::identity(2)).max_abs() < 1e-15);
        let z = ComplexMatrix::<f64>::zeros(2);
        assert_eq!(solve(&z, &a), Err(Error::Singular));
    }
}
