//! Singular values by one-sided (Hestenes) Jacobi rotations.
//!
//! Jacobi keeps small singular values to high relative accuracy, which the
//! rank sequences in the degeneracy module depend on.

use super::matrix::{inner, ComplexMatrix};
use crate::scalar::Real;

const MAX_SWEEPS: usize = 80;

/// Singular values in descending order.
pub fn singular_values<T: Real>(a: &ComplexMatrix<T>) -> Vec<T> {
    let n = a.dim();
    let mut cols: Vec<Vec<_>> = (0..n).map(|j| a.column(j)).collect();
    let tol = T::epsilon() * T::from_usize_lossy(n.max(1));
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: T = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: T = cols[q].iter().map(|z| z.norm_sqr()).sum();
                if alpha.is_zero() || beta.is_zero() {
                    continue;
                }
                let gamma = inner(&cols[p], &cols[q]);
                let g = gamma.norm();
                if g <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (g + g);
                let sign = if zeta >= T::zero() { T::one() } else { -T::one() };
                let t = sign / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                let phase = (gamma / g).conj();
                let (left, right) = cols.split_at_mut(q);
                for (xp, xq) in left[p].iter_mut().zip(right[0].iter_mut()) {
                    let yq = *xq * phase;
                    let np = *xp * c - yq * s;
                    let nq = *xp * s + yq * c;
                    *xp = np;
                    *xq = nq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<T> = cols
        .iter()
        .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt())
        .collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
    sv
}

/// Spectral norm.
pub fn norm2<T: Real>(a: &ComplexMatrix<T>) -> T {
    singular_values(a).first().copied().unwrap_or_else(T::zero)
}

/// 2-norm condition number `sigma_max / sigma_min` (infinite when singular).
pub fn condition<T: Real>(a: &ComplexMatrix<T>) -> T {
    let sv = singular_values(a);
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if lo > T::zero() => hi / lo,
        (Some(_), Some(_)) => T::infinity(),
        _ => T::one(),
    }
}

/// Numerical rank with an absolute threshold; also returns the gap ratio
/// `sigma_above / sigma_below` at the cut (infinite when one side is empty).
pub fn rank_with_gap<T: Real>(sv: &[T], threshold: T) -> (usize, T) {
    let rank = sv.iter().filter(|&&s| s > threshold).count();
    let gap = match (rank.checked_sub(1).map(|i| sv[i]), sv.get(rank)) {
        (Some(above), Some(&below)) if below > T::zero() => above / below,
        _ => T::infinity(),
    };
    (rank, gap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    #[test]
    fn diagonal_singular_values() {
        let a = ComplexMatrix::from_diag(&[cplx(3.0, 0.0), cplx(0.0, -4.0), cplx(0.5, 0.0)]);
        let sv = singular_values(&a);
        assert!((sv[0] - 4.0f64).abs() < 1e-15);
        assert!((sv[1] - 3.0f64).abs() < 1e-15);
        assert!((sv[2] - 0.5f64).abs() < 1e-15);
    }

    #[test]
    fn rank_of_outer_product() {
        let u = [cplx(1.0, 1.0), cplx(2.0, 0.0), cplx(0.0, -1.0)];
        let v = [cplx(0.5, 0.0), cplx(-1.0, 2.0), cplx(3.0, 0.0)];
        let a = ComplexMatrix::from_fn(3, |i, j| u[i] * v[j].conj());
        let sv = singular_values(&a);
        let (r, gap) = rank_with_gap(&sv, 1e-12 * sv[0]);
        assert_eq!(r, 1);
        assert!(gap > 1e10);
    }

    #[test]
    fn unitary_is_perfectly_conditioned() {
        let s = 1.0 / 2f64.sqrt();
        let a = ComplexMatrix::from_rows(&[
            vec![cplx(s, 0.0), cplx(0.0, s)],
            vec![cplx(s, 0.0), cplx(0.0, -s)],
        ]);
        assert!((condition(&a) - 1.0).abs() < 1e-14);
    }
}
