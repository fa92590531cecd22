//! Dense eigensolver for general complex matrices.
//!
//! Pipeline: permute-and-scale balancing, Householder reduction to upper
//! Hessenberg form, implicit single-shift QR down to complex Schur form and,
//! when requested, right eigenvectors by back-substitution on the triangular
//! factor followed by back-transformation.

use num_traits::{One, Zero};

use super::matrix::{normalize, vec_norm, ComplexMatrix};
use crate::error::{Error, Result};
use crate::scalar::{abs1, cdiv, real, Real, C};

/// Raw eigendecomposition.
#[derive(Debug, Clone)]
pub struct Eigen<T: Real> {
    pub values: Vec<C<T>>,
    /// Unit-norm right eigenvectors, `vectors[j]` pairs with `values[j]`.
    pub vectors: Option<Vec<Vec<C<T>>>>,
}

/// Result of balancing: `B = D^-1 P A P^T D` with the isolated
/// eigenvalues outside `ilo..=ihi`.
struct Balanced<T: Real> {
    ilo: usize,
    ihi: usize,
    scale: Vec<T>,
    swaps: Vec<(usize, usize)>,
}

fn swap_rc<T: Real>(a: &mut ComplexMatrix<T>, i: usize, j: usize) {
    if i == j {
        return;
    }
    let n = a.dim();
    for c in 0..n {
        let t = a[(i, c)];
        a[(i, c)] = a[(j, c)];
        a[(j, c)] = t;
    }
    for r in 0..n {
        let t = a[(r, i)];
        a[(r, i)] = a[(r, j)];
        a[(r, j)] = t;
    }
}

fn balance<T: Real>(a: &mut ComplexMatrix<T>) -> Balanced<T> {
    let n = a.dim();
    let mut swaps = Vec::new();
    let mut scale = vec![T::one(); n];
    if n == 0 {
        return Balanced { ilo: 0, ihi: 0, scale, swaps };
    }
    let mut lo = 0usize;
    let mut hi = n - 1;

    // rows with an isolated diagonal go to the bottom
    'rows: loop {
        for j in (0..=hi).rev() {
            let isolated = (0..=hi).all(|i| i == j || a[(j, i)].is_zero());
            if isolated {
                swap_rc(a, j, hi);
                swaps.push((j, hi));
                if hi == 0 {
                    return Balanced { ilo: 0, ihi: 0, scale, swaps };
                }
                hi -= 1;
                continue 'rows;
            }
        }
        break;
    }
    // columns with an isolated diagonal go to the top
    'cols: loop {
        for j in lo..=hi {
            let isolated = (lo..=hi).all(|i| i == j || a[(i, j)].is_zero());
            if isolated {
                swap_rc(a, j, lo);
                swaps.push((j, lo));
                lo += 1;
                continue 'cols;
            }
        }
        break;
    }

    let radix = T::lit(2.0);
    let sfmin1 = T::min_positive_value() / T::epsilon();
    let sfmax1 = T::one() / sfmin1;
    let sfmin2 = sfmin1 * radix;
    let sfmax2 = T::one() / sfmin2;
    let mut noconv = true;
    while noconv {
        noconv = false;
        for i in lo..=hi {
            let mut c = (lo..=hi).map(|r| a[(r, i)].norm_sqr()).sum::<T>().sqrt();
            let mut r = (lo..=hi).map(|k| a[(i, k)].norm_sqr()).sum::<T>().sqrt();
            let mut ca = (0..=hi).map(|k| a[(k, i)].norm()).fold(T::zero(), T::max);
            let mut ra = (lo..n).map(|k| a[(i, k)].norm()).fold(T::zero(), T::max);
            if c.is_zero() || r.is_zero() {
                continue;
            }
            let mut g = r / radix;
            let mut f = T::one();
            let s = c + r;
            while c < g && f.max(c).max(ca) < sfmax2 && r.min(g).min(ra) > sfmin2 {
                f *= radix;
                c *= radix;
                ca *= radix;
                r /= radix;
                g /= radix;
                ra /= radix;
            }
            g = c / radix;
            while g >= r && r.max(ra) < sfmax2 && f.min(c).min(g).min(ca) > sfmin2 {
                f /= radix;
                c /= radix;
                g /= radix;
                ca /= radix;
                r *= radix;
                ra *= radix;
            }
            if c + r >= T::lit(0.95) * s {
                continue;
            }
            if f < T::one() && scale[i] < T::one() && f * scale[i] <= sfmin1 {
                continue;
            }
            if f > T::one() && scale[i] > T::one() && scale[i] >= sfmax1 / f {
                continue;
            }
            let g = T::one() / f;
            scale[i] *= f;
            noconv = true;
            for k in lo..n {
                a[(i, k)] = a[(i, k)] * g;
            }
            for k in 0..=hi {
                a[(k, i)] = a[(k, i)] * f;
            }
        }
    }
    Balanced { ilo: lo, ihi: hi, scale, swaps }
}

/// Householder reflector `G = I - tau w w^H` with `w = (1, v)` such that
/// `G^H (alpha, x) = (beta, 0)`. Returns `(beta, tau)` and scales `x` into `v`.
fn householder<T: Real>(alpha: C<T>, x: &mut [C<T>]) -> (C<T>, C<T>) {
    let xnorm = vec_norm(x);
    if xnorm.is_zero() && alpha.im.is_zero() {
        return (alpha, C::zero());
    }
    let mag = alpha.norm().hypot(xnorm);
    let beta = if alpha.re >= T::zero() { -mag } else { mag };
    let tau = C::new((beta - alpha.re) / beta, -alpha.im / beta);
    let scal = C::<T>::one() / (alpha - real(beta));
    for z in x.iter_mut() {
        *z = *z * scal;
    }
    (real(beta), tau)
}

fn hessenberg<T: Real>(
    a: &mut ComplexMatrix<T>,
    q: Option<&mut ComplexMatrix<T>>,
    ilo: usize,
    ihi: usize,
) {
    let n = a.dim();
    let mut q = q;
    if ihi < ilo + 2 {
        return;
    }
    let mut v: Vec<C<T>> = Vec::with_capacity(n);
    for k in ilo..ihi - 1 {
        v.clear();
        v.extend((k + 2..=ihi).map(|r| a[(r, k)]));
        let (beta, tau) = householder(a[(k + 1, k)], &mut v);
        a[(k + 1, k)] = beta;
        for r in k + 2..=ihi {
            a[(r, k)] = C::zero();
        }
        if tau.is_zero() {
            continue;
        }
        // w = (1, v) on indices k+1..=ihi
        // right: A <- A G for rows 0..=ihi
        for r in 0..=ihi {
            let mut s = a[(r, k + 1)];
            for (t, &vi) in v.iter().enumerate() {
                s += a[(r, k + 2 + t)] * vi;
            }
            let s = s * tau;
            a[(r, k + 1)] -= s;
            for (t, &vi) in v.iter().enumerate() {
                a[(r, k + 2 + t)] -= s * vi.conj();
            }
        }
        // left: A <- G^H A for columns k+1..n
        let ctau = tau.conj();
        for c in k + 1..n {
            let mut s = a[(k + 1, c)];
            for (t, &vi) in v.iter().enumerate() {
                s += vi.conj() * a[(k + 2 + t, c)];
            }
            let s = s * ctau;
            a[(k + 1, c)] -= s;
            for (t, &vi) in v.iter().enumerate() {
                a[(k + 2 + t, c)] -= s * vi;
            }
        }
        if let Some(q) = q.as_deref_mut() {
            for r in 0..n {
                let mut s = q[(r, k + 1)];
                for (t, &vi) in v.iter().enumerate() {
                    s += q[(r, k + 2 + t)] * vi;
                }
                let s = s * tau;
                q[(r, k + 1)] -= s;
                for (t, &vi) in v.iter().enumerate() {
                    q[(r, k + 2 + t)] -= s * vi.conj();
                }
            }
        }
    }
}

const EXCEPTIONAL_EVERY: usize = 10;

/// Implicit single-shift QR on the Hessenberg block `ilo..=ihi`.
fn schur<T: Real>(
    h: &mut ComplexMatrix<T>,
    mut z: Option<&mut ComplexMatrix<T>>,
    ilo: usize,
    ihi: usize,
    wantt: bool,
) -> Result<()> {
    let n = h.dim();
    if n == 0 || ilo >= ihi {
        return Ok(());
    }
    for j in ilo..=ihi {
        for i in j + 2..=ihi {
            h[(i, j)] = C::zero();
        }
    }
    let nh = ihi - ilo + 1;
    let ulp = T::epsilon();
    let smlnum = T::min_positive_value() * (T::from_usize_lossy(nh) / ulp);
    let itmax = 30 * nh.max(10);
    let half = T::lit(0.5);
    let dat1 = T::lit(0.75);

    let mut kdefl = 0usize;
    let mut i = ihi as isize;
    while i >= ilo as isize {
        let iu = i as usize;
        let mut l = ilo;
        let mut converged = false;
        for _its in 0..=itmax {
            // small subdiagonal search
            let mut k = iu;
            while k > l {
                let sub = abs1(h[(k, k - 1)]);
                if sub <= smlnum {
                    break;
                }
                let mut tst = abs1(h[(k - 1, k - 1)]) + abs1(h[(k, k)]);
                if tst.is_zero() {
                    if k >= ilo + 2 {
                        tst += abs1(h[(k - 1, k - 2)]);
                    }
                    if k < ihi {
                        tst += abs1(h[(k + 1, k)]);
                    }
                }
                if sub <= ulp * tst {
                    let x = abs1(h[(k - 1, k)]);
                    let ab = sub.max(x);
                    let ba = sub.min(x);
                    let y = abs1(h[(k, k)]);
                    let w = abs1(h[(k - 1, k - 1)] - h[(k, k)]);
                    let aa = y.max(w);
                    let bb = y.min(w);
                    let s = aa + ab;
                    if ba * (ab / s) <= smlnum.max(ulp * (bb * (aa / s))) {
                        break;
                    }
                }
                k -= 1;
            }
            l = k;
            if l > ilo {
                h[(l, l - 1)] = C::zero();
            }
            if l >= iu {
                converged = true;
                break;
            }
            kdefl += 1;
            let (i1, i2) = if wantt { (0, n - 1) } else { (l, iu) };

            let t = if kdefl % (2 * EXCEPTIONAL_EVERY) == 0 {
                h[(iu, iu)] + real(dat1 * abs1(h[(iu, iu - 1)]))
            } else if kdefl % EXCEPTIONAL_EVERY == 0 {
                h[(l, l)] + real(dat1 * abs1(h[(l + 1, l)]))
            } else {
                let mut t = h[(iu, iu)];
                let u = h[(iu - 1, iu)].sqrt() * h[(iu, iu - 1)].sqrt();
                let mut s = abs1(u);
                if !s.is_zero() {
                    let x = (h[(iu - 1, iu - 1)] - t) * half;
                    let sx = abs1(x);
                    s = s.max(sx);
                    let xs = x / s;
                    let us = u / s;
                    let mut y = (xs * xs + us * us).sqrt() * s;
                    if sx > T::zero() {
                        let xn = x / sx;
                        if xn.re * y.re + xn.im * y.im < T::zero() {
                            y = -y;
                        }
                    }
                    let den = x + y;
                    if !den.is_zero() {
                        t -= u * cdiv(u, den);
                    }
                }
                t
            };

            // two consecutive small subdiagonals
            let mut m = iu - 1;
            let mut v0;
            let mut v1;
            loop {
                let h11 = h[(m, m)];
                let h22 = h[(m + 1, m + 1)];
                let mut h11s = h11 - t;
                let mut h21 = h[(m + 1, m)];
                let s = abs1(h11s) + abs1(h21);
                if !s.is_zero() {
                    h11s = h11s / s;
                    h21 = h21 / s;
                }
                v0 = h11s;
                v1 = h21;
                if m == l {
                    break;
                }
                let h10 = h[(m, m - 1)];
                if abs1(h10) * abs1(h21) <= ulp * (abs1(h11s) * (abs1(h11) + abs1(h22))) {
                    break;
                }
                m -= 1;
            }

            for k in m..iu {
                if k > m {
                    v0 = h[(k, k - 1)];
                    v1 = h[(k + 1, k - 1)];
                }
                let mut xv = [v1];
                let (beta, tau) = householder(v0, &mut xv);
                let v2 = xv[0];
                if k > m {
                    h[(k, k - 1)] = beta;
                    h[(k + 1, k - 1)] = C::zero();
                }
                if tau.is_zero() {
                    continue;
                }
                let ctau = tau.conj();
                let cv2 = v2.conj();
                if k == m && m > l {
                    // the reflector also touches the small entry left of the bulge;
                    // only its fill-in below is negligible
                    h[(k, k - 1)] *= C::<T>::one() - ctau;
                }
                for j in k..=i2 {
                    let s = ctau * (h[(k, j)] + cv2 * h[(k + 1, j)]);
                    h[(k, j)] -= s;
                    h[(k + 1, j)] -= s * v2;
                }
                let jmax = (k + 2).min(iu);
                for j in i1..=jmax {
                    let s = tau * (h[(j, k)] + v2 * h[(j, k + 1)]);
                    h[(j, k)] -= s;
                    h[(j, k + 1)] -= s * cv2;
                }
                if let Some(z) = z.as_deref_mut() {
                    for j in 0..n {
                        let s = tau * (z[(j, k)] + v2 * z[(j, k + 1)]);
                        z[(j, k)] -= s;
                        z[(j, k + 1)] -= s * cv2;
                    }
                }
            }
        }
        if !converged {
            return Err(Error::ConvergenceFailure { iterations: itmax });
        }
        kdefl = 0;
        i = l as isize - 1;
    }
    Ok(())
}

/// Right eigenvectors of an upper triangular matrix, back-transformed by `q`.
fn triangular_vectors<T: Real>(t: &ComplexMatrix<T>, q: &ComplexMatrix<T>) -> Vec<Vec<C<T>>> {
    let n = t.dim();
    let ulp = T::epsilon();
    let smlnum = T::min_positive_value() * (T::from_usize_lossy(n) / ulp);
    let bignum = T::max_value().sqrt() * ulp;
    let mut out = Vec::with_capacity(n);
    let mut work = vec![C::zero(); n];
    for ki in 0..n {
        let lambda = t[(ki, ki)];
        let smin = (ulp * abs1(lambda)).max(smlnum);
        for r in 0..ki {
            work[r] = -t[(r, ki)];
        }
        work[ki] = C::one();
        for k in (0..ki).rev() {
            let mut d = t[(k, k)] - lambda;
            if abs1(d) < smin {
                d = real(smin);
            }
            work[k] = cdiv(work[k], d);
            let mag = abs1(work[k]);
            if mag > bignum {
                let s = T::one() / mag;
                for w in work[..=ki].iter_mut() {
                    *w = *w * s;
                }
            }
            let wk = work[k];
            if wk.is_zero() {
                continue;
            }
            for r in 0..k {
                work[r] -= wk * t[(r, k)];
            }
        }
        let mut v = vec![C::zero(); n];
        for (r, vr) in v.iter_mut().enumerate() {
            let row = q.row(r);
            let mut s = C::zero();
            for c in 0..=ki {
                s += row[c] * work[c];
            }
            *vr = s;
        }
        out.push(v);
    }
    out
}

/// Eigenvalues (and optionally unit right eigenvectors) of a general complex matrix.
pub fn eigen<T: Real>(a: &ComplexMatrix<T>, want_vectors: bool) -> Result<Eigen<T>> {
    if !a.is_finite() {
        return Err(Error::InvalidParameters("matrix has non-finite entries".into()));
    }
    let n = a.dim();
    let mut h = a.clone();
    let bal = balance(&mut h);
    let mut q = if want_vectors {
        Some(ComplexMatrix::identity(n))
    } else {
        None
    };
    hessenberg(&mut h, q.as_mut(), bal.ilo, bal.ihi);
    schur(&mut h, q.as_mut(), bal.ilo, bal.ihi, want_vectors)?;
    let values = h.diagonal();
    let vectors = q.map(|q| {
        let mut vs = triangular_vectors(&h, &q);
        for v in vs.iter_mut() {
            for (x, &d) in v.iter_mut().zip(&bal.scale) {
                *x = *x * d;
            }
            for &(i, j) in bal.swaps.iter().rev() {
                v.swap(i, j);
            }
            normalize(v);
        }
        vs
    });
    Ok(Eigen { values, vectors })
}
