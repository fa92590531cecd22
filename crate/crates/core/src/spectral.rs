//! Spectra of the ladder: closed-form dispersions, numerical diagonalization,
//! reality classification and loop areas in the complex energy plane.

use std::io::Write;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{condition, eigen, inner, normalize, singular_values, vec_norm, ComplexMatrix};
use crate::gauge::igt_log_diagonal;
use crate::model::{
    build_bloch, build_realspace, chain_hoppings, decoupling, derive, lift_chain_vector, to_w_basis, Boundary,
    Chain, ChainHoppings, ModelParams,
};
use crate::scalar::{cdiv, cplx, real, Real, C};

pub const DEFAULT_TOL_REL: f64 = 1e-9;
/// Relative to `||H||_inf`.
pub const DEFAULT_TOL_ABS_FACTOR: f64 = 1e-9;

/// Chain eigenvalues below this fraction of the parameter scale are treated
/// as a zero-energy edge pair.
const EDGE_PAIR_FACTOR: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct SpectrumResult<T: Real> {
    pub eigenvalues: Vec<C<T>>,
    /// Unit-norm right eigenvectors paired with `eigenvalues`.
    pub eigenvectors: Option<Vec<Vec<C<T>>>>,
    /// `max ||H v - E v|| / ||v||`; zero when no vectors were requested.
    pub residual_max: T,
    /// 2-norm condition number of the eigenvector matrix; infinite when not computed.
    pub evec_condition: T,
}

impl<T: Real> SpectrumResult<T> {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn max_abs(&self) -> T {
        self.eigenvalues.iter().map(|z| z.norm()).fold(T::zero(), T::max)
    }

    fn finish(
        h: &ComplexMatrix<T>,
        eigenvalues: Vec<C<T>>,
        vectors: Option<Vec<Vec<C<T>>>>,
        with_condition: bool,
    ) -> Self {
        let (residual_max, evec_condition) = match &vectors {
            Some(vs) if with_condition => (
                residual(h, &eigenvalues, vs),
                condition(&ComplexMatrix::from_columns(vs)),
            ),
            Some(vs) => (residual(h, &eigenvalues, vs), T::infinity()),
            None => (T::zero(), T::infinity()),
        };
        Self {
            eigenvalues,
            eigenvectors: vectors,
            residual_max,
            evec_condition,
        }
    }
}

fn residual<T: Real>(h: &ComplexMatrix<T>, values: &[C<T>], vectors: &[Vec<C<T>>]) -> T {
    values
        .iter()
        .zip(vectors)
        .map(|(&e, v)| {
            let hv = h.matvec(v);
            let r: Vec<C<T>> = hv.iter().zip(v).map(|(&a, &b)| a - e * b).collect();
            let nv = vec_norm(v);
            if nv.is_zero() {
                T::infinity()
            } else {
                vec_norm(&r) / nv
            }
        })
        .fold(T::zero(), T::max)
}

/// Dense eigendecomposition with diagnostics.
pub fn eig<T: Real>(h: &ComplexMatrix<T>, want_vectors: bool) -> Result<SpectrumResult<T>> {
    let e = eigen(h, want_vectors)?;
    Ok(SpectrumResult::finish(h, e.values, e.vectors, true))
}

/// How much of a ladder diagonalization to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Detail {
    Values,
    /// Eigenvectors and residuals, no condition estimate.
    Vectors,
    /// Everything, including the eigenvector condition number.
    Full,
}

/// Spectrum of the real-space ladder with full diagnostics.
pub fn ladder_spectrum<T: Real>(p: &ModelParams<T>, want_vectors: bool) -> Result<SpectrumResult<T>> {
    ladder_spectrum_with(p, if want_vectors { Detail::Full } else { Detail::Values })
}

/// Spectrum of the real-space ladder.
///
/// Balanced legs with an even number of cells are diagonalized chain by
/// chain, which keeps the two chains' eigenvectors from mixing where their
/// spectra coincide and lets balancing undo the exponential edge
/// accumulation; eigenvectors are lifted back to `(a, b)` amplitudes and
/// residuals are taken against the full ladder.
pub fn ladder_spectrum_with<T: Real>(p: &ModelParams<T>, detail: Detail) -> Result<SpectrumResult<T>> {
    let h = build_realspace(p)?;
    let want_vectors = detail != Detail::Values;
    if !(p.is_balanced() && p.cells % 2 == 0) {
        let e = eigen(&h, want_vectors)?;
        let mut s = SpectrumResult::finish(&h, e.values, e.vectors, false);
        if detail == Detail::Full {
            if let Some(vs) = &s.eigenvectors {
                s.evec_condition = condition(&ComplexMatrix::from_columns(vs));
            }
        }
        return Ok(s);
    }
    let dec = decoupling(p.cells, p.boundary)?;
    let hw = to_w_basis(&h);
    let zero_cut = T::lit(EDGE_PAIR_FACTOR) * p.scale();
    let mut values = Vec::with_capacity(h.dim());
    let mut vectors = want_vectors.then(|| Vec::with_capacity(h.dim()));
    let (mut s_hi, mut s_lo) = (T::zero(), T::infinity());
    for which in [Chain::One, Chain::Two] {
        let sub = hw.submatrix(dec.chain(which));
        // an open chain is first made symmetric by the imaginary gauge, which
        // removes the exponential non-normality of strong skin effect
        let gauge = match p.boundary {
            Boundary::Open => igt_log_diagonal(p, which).ok(),
            Boundary::Periodic => None,
        };
        let mut e = match &gauge {
            Some(logs) => {
                let sym = ComplexMatrix::from_fn(sub.dim(), |i, j| {
                    let x = sub[(i, j)];
                    if x.is_zero() {
                        x
                    } else {
                        x * (logs[i] - logs[j]).exp()
                    }
                });
                let mut e = eigen(&sym, want_vectors)?;
                if let Some(vs) = e.vectors.as_mut() {
                    symmetric_edge_pair(&e.values, vs, zero_cut, &sym);
                    for v in vs.iter_mut() {
                        ungauge(v, logs);
                    }
                }
                e
            }
            None => eigen(&sub, want_vectors)?,
        };
        if let Some(vs) = e.vectors.as_mut() {
            match (p.boundary, &gauge) {
                (Boundary::Open, Some(_)) => {}
                (Boundary::Open, None) => {
                    open_edge_pair(&e.values, vs, zero_cut, &chain_hoppings(&derive(p), which))
                }
                (Boundary::Periodic, _) => polarize_edge_pair(&e.values, vs, zero_cut),
            }
            if detail == Detail::Full {
                // the lift is unitary, so the ladder condition number follows
                // from the extreme singular values of the two blocks
                let sv = singular_values(&ComplexMatrix::from_columns(vs));
                s_hi = s_hi.max(sv[0]);
                s_lo = s_lo.min(sv[sv.len() - 1]);
            }
        }
        values.extend_from_slice(&e.values);
        if let (Some(out), Some(vs)) = (vectors.as_mut(), e.vectors) {
            out.extend(vs.iter().map(|v| lift_chain_vector(&dec, which, v)));
        }
    }
    let mut s = SpectrumResult::finish(&h, values, vectors, false);
    if detail == Detail::Full {
        s.evec_condition = if s_lo > T::zero() { s_hi / s_lo } else { T::infinity() };
    }
    Ok(s)
}

/// `v_i / exp(logs_i)`, normalized, with the scaling taken out before
/// exponentiating.
fn ungauge<T: Real>(v: &mut [C<T>], logs: &[C<T>]) {
    let shift = v
        .iter()
        .zip(logs)
        .filter(|(z, _)| !z.is_zero())
        .map(|(z, l)| z.norm().ln() - l.re)
        .fold(T::neg_infinity(), T::max);
    if !shift.is_finite() {
        return;
    }
    for (z, l) in v.iter_mut().zip(logs) {
        if !z.is_zero() {
            let m = (z.norm().ln() - l.re - shift).exp();
            *z = C::from_polar(m, z.arg() - l.im);
        }
    }
    normalize(v);
}

/// Normalized `[1, rho, rho^2, ...]`, built in log space so that strongly
/// growing or decaying ratios neither overflow nor lose their tails.
fn geometric<T: Real>(len: usize, rho: C<T>) -> Vec<C<T>> {
    let mut out = vec![C::zero(); len];
    if len == 0 {
        return out;
    }
    let r = rho.norm();
    if r.is_zero() {
        out[0] = C::new(T::one(), T::zero());
        return out;
    }
    if !r.is_finite() {
        out[len - 1] = C::new(T::one(), T::zero());
        return out;
    }
    let (lr, arg) = (r.ln(), rho.arg());
    let top = if r > T::one() { len - 1 } else { 0 };
    for (k, z) in out.iter_mut().enumerate() {
        let e = T::from_usize_lossy(k) - T::from_usize_lossy(top);
        *z = C::from_polar((e * lr).exp(), T::from_usize_lossy(k) * arg);
    }
    normalize(&mut out);
    out
}

/// Near-zero pair of a gauge-symmetrized open chain. The chain is mirror
/// symmetric, so with `l` the left edge mode and `r` its mirror image the
/// eigenvectors are `l + r` and `l - r` with energies `+m` and `-m`, where
/// `m` is read off the single boundary row that `l` fails.
fn symmetric_edge_pair<T: Real>(values: &[C<T>], vectors: &mut [Vec<C<T>>], cut: T, sym: &ComplexMatrix<T>) {
    let idx: Vec<usize> = (0..values.len()).filter(|&i| values[i].norm() <= cut).collect();
    let n = sym.dim();
    if idx.len() != 2 || n % 2 != 0 || n < 2 {
        return;
    }
    let even = if n >= 4 {
        geometric(n / 2, -cdiv(sym[(1, 0)], sym[(1, 2)]))
    } else {
        geometric(1, C::zero())
    };
    let mut l = vec![C::zero(); n];
    let mut r = vec![C::zero(); n];
    for (k, &z) in even.iter().enumerate() {
        l[2 * k] = z;
        r[n - 1 - 2 * k] = z;
    }
    let m = cdiv(sym[(n - 1, n - 2)] * l[n - 2], r[n - 1]);
    let mut plus: Vec<C<T>> = l.iter().zip(&r).map(|(&a, &b)| a + b).collect();
    let mut minus: Vec<C<T>> = l.iter().zip(&r).map(|(&a, &b)| a - b).collect();
    normalize(&mut plus);
    normalize(&mut minus);
    if plus.iter().chain(&minus).any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return;
    }
    let (e0, e1) = (values[idx[0]], values[idx[1]]);
    if (e0 - m).norm() + (e1 + m).norm() <= (e0 + m).norm() + (e1 - m).norm() {
        vectors[idx[0]] = plus;
        vectors[idx[1]] = minus;
    } else {
        vectors[idx[0]] = minus;
        vectors[idx[1]] = plus;
    }
}

/// Open-chain version of [`polarize_edge_pair`]: the two polarized zero
/// modes follow in closed form from the zero-energy recursion on either
/// sublattice, which avoids undoing the gauge on nearly degenerate vectors.
fn open_edge_pair<T: Real>(values: &[C<T>], vectors: &mut [Vec<C<T>>], cut: T, hop: &ChainHoppings<T>) {
    let idx: Vec<usize> = (0..values.len()).filter(|&i| values[i].norm() <= cut).collect();
    let n = vectors.first().map_or(0, Vec::len);
    if idx.len() != 2 || n % 2 != 0 || n < 2 {
        return;
    }
    // even sites: x[2k+2] = -lower[0] / upper[1] x[2k], from the left end;
    // odd sites: x[2k-1] = -upper[0] / lower[1] x[2k+1], from the right end
    let even = geometric(n / 2, -cdiv(hop.lower[0], hop.upper[1]));
    let odd = geometric(n / 2, -cdiv(hop.upper[0], hop.lower[1]));
    if even.iter().chain(&odd).any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return polarize_edge_pair(values, vectors, cut);
    }
    let mut a = vec![C::zero(); n];
    let mut b = vec![C::zero(); n];
    for k in 0..n / 2 {
        a[2 * k] = even[k];
        b[n - 1 - 2 * k] = odd[k];
    }
    vectors[idx[0]] = a;
    vectors[idx[1]] = b;
}

/// Replace the eigenvectors of an isolated near-zero pair by the two
/// combinations living on alternating chain sites.
fn polarize_edge_pair<T: Real>(values: &[C<T>], vectors: &mut [Vec<C<T>>], cut: T) {
    let idx: Vec<usize> = (0..values.len()).filter(|&i| values[i].norm() <= cut).collect();
    if idx.len() != 2 {
        return;
    }
    let (v1, v2) = (vectors[idx[0]].clone(), vectors[idx[1]].clone());
    let parity = |v: &[C<T>], keep: usize| -> Vec<C<T>> {
        v.iter()
            .enumerate()
            .map(|(m, &z)| if m % 2 == keep { z } else { C::zero() })
            .collect()
    };
    let mut polarized = Vec::with_capacity(2);
    for keep in [0usize, 1] {
        // minimize the weight on the other parity over span(v1, v2)
        let (o1, o2) = (parity(&v1, 1 - keep), parity(&v2, 1 - keep));
        let g = [[inner(&v1, &v1), inner(&v1, &v2)], [inner(&v2, &v1), inner(&v2, &v2)]];
        let go = [[inner(&o1, &o1), inner(&o1, &o2)], [inner(&o2, &o1), inner(&o2, &o2)]];
        let Some(c) = smallest_generalized(&go, &g) else {
            return;
        };
        let mut x: Vec<C<T>> = v1.iter().zip(&v2).map(|(&a, &b)| a * c[0] + b * c[1]).collect();
        if normalize(&mut x).is_zero() {
            return;
        }
        polarized.push(x);
    }
    vectors[idx[0]] = polarized.remove(0);
    vectors[idx[1]] = polarized.remove(0);
}

/// Minimizer of `c^H A c / c^H B c` for Hermitian 2x2 `A`, positive definite `B`.
fn smallest_generalized<T: Real>(a: &[[C<T>; 2]; 2], b: &[[C<T>; 2]; 2]) -> Option<[C<T>; 2]> {
    let m = ComplexMatrix::from_rows(&[vec![b[0][0], b[0][1]], vec![b[1][0], b[1][1]]]);
    let rhs = ComplexMatrix::from_rows(&[vec![a[0][0], a[0][1]], vec![a[1][0], a[1][1]]]);
    let k = crate::linalg::solve(&m, &rhs).ok()?;
    let e = eigen(&k, true).ok()?;
    let j = if e.values[0].re <= e.values[1].re { 0 } else { 1 };
    let v = &e.vectors?[j];
    // fix the phase so the result does not depend on solver conventions
    let lead = if v[0].norm() >= v[1].norm() { v[0] } else { v[1] };
    let phase = lead.conj() / lead.norm();
    Some([v[0] * phase, v[1] * phase])
}

/// Eigenvalues of the periodic ladder assembled from its Bloch blocks at
/// `k_m = 2 pi m / L`.
pub fn bloch_spectrum<T: Real>(p: &ModelParams<T>) -> Result<Vec<C<T>>> {
    p.validate()?;
    let mut out = Vec::with_capacity(2 * p.cells);
    for m in 0..p.cells {
        let k = T::TAU() * T::from_usize_lossy(m) / T::from_usize_lossy(p.cells);
        out.extend(eigen(&build_bloch(p, k), false)?.values);
    }
    Ok(out)
}

/// `E+(k), E-(k)` of the periodic ladder, principal square root.
pub fn pbc_dispersion<T: Real>(p: &ModelParams<T>, k: T) -> (C<T>, C<T>) {
    let d = derive(p);
    let two = T::lit(2.0);
    let (s, c) = k.sin_cos();
    let shift = cplx(two * d.dt * s, -two * d.dg * c);
    let disc = cplx(
        (p.t0 * p.t0 - d.gbar * d.gbar) * c * c + (d.tbar * d.tbar - p.g0 * p.g0) * s * s,
        (p.t0 * p.g0 - d.tbar * d.gbar) * (two * k).sin(),
    );
    let root = disc.sqrt() * two;
    (shift + root, shift - root)
}

/// Bulk branch `+-sqrt(u^2 + v^2 + 2uv cos q)` of the open chain.
pub fn obc_bulk_dispersion<T: Real>(p: &ModelParams<T>, q: T) -> Result<(C<T>, C<T>)> {
    p.require_balanced()?;
    let d = derive(p);
    let e = (d.u * d.u + d.v * d.v + d.u * d.v * real(T::lit(2.0) * q.cos())).sqrt();
    Ok((e, -e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpectralLabel {
    Real,
    Imaginary,
    Complex,
    Collapsed,
}

impl SpectralLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            SpectralLabel::Real => "Real",
            SpectralLabel::Imaginary => "Imaginary",
            SpectralLabel::Complex => "Complex",
            SpectralLabel::Collapsed => "Collapsed",
        }
    }
}

impl std::fmt::Display for SpectralLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralClass<T> {
    pub label: SpectralLabel,
    #[serde(rename = "M")]
    pub m: T,
}

/// Mean of `|cos theta| - |sin theta|` over the eigenvalue phases; values with
/// modulus at most `tol_abs` count as real.
pub fn spectral_density_m<T: Real>(eigs: &[C<T>], tol_abs: T) -> Result<T> {
    if eigs.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    let sum: T = eigs
        .iter()
        .map(|z| {
            let r = z.norm();
            if r <= tol_abs || r.is_zero() {
                T::one()
            } else {
                (z.re.abs() - z.im.abs()) / r
            }
        })
        .sum();
    Ok(sum / T::from_usize_lossy(eigs.len()))
}

pub fn classify<T: Real>(eigs: &[C<T>], tol_rel: T, tol_abs: T) -> Result<SpectralClass<T>> {
    let m = spectral_density_m(eigs, tol_abs)?;
    let top = eigs.iter().map(|z| z.norm()).fold(T::zero(), T::max);
    let label = if top <= tol_abs {
        SpectralLabel::Collapsed
    } else if eigs.iter().all(|z| z.im.abs() <= tol_rel * top) {
        SpectralLabel::Real
    } else if eigs.iter().all(|z| z.re.abs() <= tol_rel * top) {
        SpectralLabel::Imaginary
    } else {
        SpectralLabel::Complex
    };
    Ok(SpectralClass { label, m })
}

/// `tol_abs` default for a given matrix.
pub fn default_tol_abs<T: Real>(h: &ComplexMatrix<T>) -> T {
    T::lit(DEFAULT_TOL_ABS_FACTOR) * h.inf_norm()
}

/// Total area enclosed by the periodic band loops, from `n_k` samples of the
/// closed-form dispersion.
///
/// Bands are followed continuously in `k`; when the two branches swap over
/// one period they form a single loop traversed twice the length.
pub fn enclosed_area<T: Real>(p: &ModelParams<T>, n_k: usize) -> Result<T> {
    if n_k < 64 {
        return Err(Error::InvalidParameters(format!("need at least 64 k-points, got {n_k}")));
    }
    let mut bands: [Vec<C<T>>; 2] = [Vec::with_capacity(n_k), Vec::with_capacity(n_k)];
    for m in 0..n_k {
        let k = T::TAU() * T::from_usize_lossy(m) / T::from_usize_lossy(n_k);
        let (ep, em) = pbc_dispersion(p, k);
        if m == 0 {
            bands[0].push(ep);
            bands[1].push(em);
            continue;
        }
        let (a, b) = (bands[0][m - 1], bands[1][m - 1]);
        if (ep - a).norm() + (em - b).norm() <= (ep - b).norm() + (em - a).norm() {
            bands[0].push(ep);
            bands[1].push(em);
        } else {
            bands[0].push(em);
            bands[1].push(ep);
        }
    }
    let (s0, s1) = (bands[0][0], bands[1][0]);
    let (e0, e1) = (bands[0][n_k - 1], bands[1][n_k - 1]);
    let swapped = (e0 - s1).norm() + (e1 - s0).norm() < (e0 - s0).norm() + (e1 - s1).norm();
    let area = if swapped {
        let mut joined = bands[0].clone();
        joined.extend_from_slice(&bands[1]);
        shoelace(&joined).abs()
    } else {
        shoelace(&bands[0]).abs() + shoelace(&bands[1]).abs()
    };
    Ok(area)
}

fn shoelace<T: Real>(pts: &[C<T>]) -> T {
    let n = pts.len();
    let mut acc = T::zero();
    for i in 0..n {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        acc += a.re * b.im - b.re * a.im;
    }
    acc * T::lit(0.5)
}

/// Greedy minimal-distance pairing of two equally sized multisets; returns
/// the largest paired distance.
pub fn multiset_distance<T: Real>(a: &[C<T>], b: &[C<T>]) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    let mut pairs: Vec<(T, usize, usize)> = Vec::with_capacity(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            pairs.push(((x - y).norm(), i, j));
        }
    }
    pairs.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap_or(std::cmp::Ordering::Equal));
    let (mut used_a, mut used_b) = (vec![false; a.len()], vec![false; b.len()]);
    let mut worst = T::zero();
    let mut left = a.len();
    for (d, i, j) in pairs {
        if left == 0 {
            break;
        }
        if used_a[i] || used_b[j] {
            continue;
        }
        used_a[i] = true;
        used_b[j] = true;
        worst = worst.max(d);
        left -= 1;
    }
    Ok(worst)
}

/// Hausdorff distance between two finite point sets.
pub fn hausdorff<T: Real>(a: &[C<T>], b: &[C<T>]) -> T {
    let directed = |x: &[C<T>], y: &[C<T>]| {
        x.iter()
            .map(|p| y.iter().map(|q| (p - q).norm()).fold(T::infinity(), T::min))
            .fold(T::zero(), T::max)
    };
    directed(a, b).max(directed(b, a))
}

/// `index,re_E,im_E`
pub fn write_spectrum_csv<T: Real, W: Write>(out: W, eigs: &[C<T>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(format!("csv: {e}"));
    w.write_record(["index", "re_E", "im_E"]).map_err(io)?;
    for (i, z) in eigs.iter().enumerate() {
        w.write_record([i.to_string(), fmt_real(z.re), fmt_real(z.im)])
            .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))?;
    Ok(())
}

/// Shortest round-trip decimal form.
pub(crate) fn fmt_real<T: Real>(x: T) -> String {
    format!("{:?}", x.to_f64_lossy())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Boundary;

    fn c(re: f64, im: f64) -> C<f64> {
        cplx(re, im)
    }

    #[test]
    fn diagonal_spectrum_residual_zero() {
        let h = ComplexMatrix::from_diag(&[c(1.0, 0.0), c(0.0, 1.0), c(-2.0, 0.0)]);
        let s = eig(&h, true).unwrap();
        assert_eq!(s.residual_max, 0.0);
        assert!((s.evec_condition - 1.0).abs() < 1e-14);
        assert!(eig(&h, false).unwrap().evec_condition.is_infinite());
    }

    #[test]
    fn jordan_block_vectors_are_ill_conditioned() {
        let h = ComplexMatrix::from_rows(&[vec![c(0., 0.), c(1., 0.)], vec![c(0., 0.), c(0., 0.)]]);
        let s = eig(&h, true).unwrap();
        assert!(s.eigenvalues.iter().all(|z| z.norm() == 0.0));
        assert!(s.evec_condition > 1e12);
    }

    #[test]
    fn m_examples() {
        assert_eq!(spectral_density_m(&[c(1., 0.), c(-3., 0.), c(2.5, 0.)], 0.0).unwrap(), 1.0);
        assert_eq!(spectral_density_m(&[c(0., 1.), c(0., -2.)], 0.0).unwrap(), -1.0);
        assert_eq!(spectral_density_m(&[c(1., 0.), c(0., 1.)], 0.0).unwrap(), 0.0);
        assert_eq!(spectral_density_m::<f64>(&[], 0.0), Err(Error::EmptySpectrum));
        assert_eq!(spectral_density_m(&[c(0., 0.)], 1e-9).unwrap(), 1.0);
    }

    #[test]
    fn classify_labels() {
        let l = |e: &[C<f64>]| classify(e, 1e-9, 1e-9).unwrap().label;
        assert_eq!(l(&[c(1., 0.), c(-1., 1e-12)]), SpectralLabel::Real);
        assert_eq!(l(&[c(0., 1.), c(1e-12, -1.)]), SpectralLabel::Imaginary);
        assert_eq!(l(&[c(1., 0.), c(0., 1.)]), SpectralLabel::Complex);
        assert_eq!(l(&[c(1e-12, 0.), c(0., -1e-11)]), SpectralLabel::Collapsed);
    }

    #[test]
    fn dispersion_examples() {
        let p = ModelParams::balanced(1.0, 1.0, 0.0, 0.0, 4, Boundary::Periodic);
        for k in [0.0, 0.3, 2.0] {
            let (a, b) = pbc_dispersion(&p, k);
            assert!((a - c(2.0, 0.0)).norm() < 1e-14 && (b + c(2.0, 0.0)).norm() < 1e-14);
        }
        let p = ModelParams::balanced(1.0, 0.0, 0.0, 0.5, 4, Boundary::Periodic);
        let (a, _) = pbc_dispersion(&p, std::f64::consts::FRAC_PI_2);
        assert!((a.re - 2.0 * 0.75f64.sqrt()).abs() < 1e-14);

        let p = ModelParams::balanced(1.0, 0.5, 0.0, 0.0, 4, Boundary::Open);
        let (e0, _) = obc_bulk_dispersion(&p, 0.0).unwrap();
        let (ep, _) = obc_bulk_dispersion(&p, std::f64::consts::PI).unwrap();
        assert!((e0 - c(2.0, 0.0)).norm() < 1e-14 && (ep - c(1.0, 0.0)).norm() < 1e-14);
        let p = ModelParams::balanced(0.2, 0.0, 1.0, 0.0, 4, Boundary::Open);
        let (e, _) = obc_bulk_dispersion(&p, 0.0).unwrap();
        assert!((e - c(0.0, 2.0 * 0.96f64.sqrt())).norm() < 1e-14);
    }

    #[test]
    fn multiset_and_hausdorff() {
        let a = [c(0., 0.), c(1., 0.), c(1., 0.)];
        let b = [c(1., 0.), c(0., 1e-3), c(1., 0.)];
        assert!((multiset_distance(&a, &b).unwrap() - 1e-3).abs() < 1e-15);
        assert!(multiset_distance(&a, &b[..2]).is_err());
        assert!((hausdorff(&a, &[c(0., 0.)]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn area_of_generic_loop_positive() {
        let p = ModelParams::balanced(1.0, 0.5, 0.0, 1.0, 4, Boundary::Periodic);
        assert!(enclosed_area(&p, 512).unwrap() > 0.1);
        assert!(enclosed_area(&p, 10).is_err());
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_spectrum_csv(&mut buf, &[c(1.0, -0.5)]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "index,re_E,im_E\n0,1.0,-0.5\n");
    }
}
