//! Imaginary gauge transformation of the chains and the skin-effect length
//! scale it exposes.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::model::{derive, Chain, DerivedParams, ModelParams};
use crate::scalar::{real, Real, C};

/// Sign linking the gauge decay rate to the directional IPR:
/// `sign(mean dIPR) = SKIN_SIDE_SIGN * sign(xi_inv)`.
///
/// Positive `xi_inv` means the forward hoppings dominate, which piles the
/// open-chain eigenstates onto the right half where dIPR is negative. Pinned
/// by the `skin_side_sign_calibration` test.
pub const SKIN_SIDE_SIGN: f64 = -1.0;

/// Relative `|u|`, `|v|` below which the transformation is flagged as
/// near-exceptional.
pub const NEAR_EXCEPTIONAL: f64 = 1e-8;

/// Diagonal of the similarity matrix, entries `j1, l1, j2, l2, ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix<T: Real> {
    pub diagonal: Vec<C<T>>,
    pub chain: Chain,
}

/// Factors `(f+g, f'+g', f-g, f'-g')` as seen from the given chain: the
/// second chain swaps primed and unprimed quantities.
fn factors<T: Real>(d: &DerivedParams<T>, chain: Chain) -> [T; 4] {
    let (g, gp, f, fp) = match chain {
        Chain::One => (d.g, d.gp, d.f, d.fp),
        Chain::Two => (d.gp, d.g, d.fp, d.f),
    };
    [f + g, fp + gp, f - g, fp - gp]
}

pub fn igt_matrix<T: Real>(p: &ModelParams<T>, chain: Chain) -> Result<SimilarityMatrix<T>> {
    let logs = igt_log_diagonal(p, chain)?;
    let diagonal: Vec<C<T>> = logs.iter().map(|z| z.exp()).collect();
    if diagonal.iter().any(|z| !(z.re.is_finite() && z.im.is_finite()) || z.is_zero()) {
        let d = derive(p);
        return Err(Error::SingularGauge {
            u_abs: d.u.norm().to_f64_lossy(),
            v_abs: d.v.norm().to_f64_lossy(),
        });
    }
    Ok(SimilarityMatrix { diagonal, chain })
}

/// Complex logarithm of the similarity diagonal; finite for any chain
/// length, unlike the diagonal itself.
pub(crate) fn igt_log_diagonal<T: Real>(p: &ModelParams<T>, chain: Chain) -> Result<Vec<C<T>>> {
    p.validate()?;
    p.require_balanced()?;
    p.require_even()?;
    let d = derive(p);
    let [sp, spp, dm, dmp] = factors(&d, chain);
    let cut = T::lit(crate::degeneracy::DEFAULT_CLASS_TOL) * p.scale();
    if [sp, spp, dm, dmp].iter().any(|x| x.abs() <= cut) {
        return Err(Error::SingularGauge {
            u_abs: d.u.norm().to_f64_lossy(),
            v_abs: d.v.norm().to_f64_lossy(),
        });
    }
    // odd bonds use the primed ratio, even bonds the unprimed one
    let ln_odd = real(spp / dmp).sqrt().ln();
    let ln_even = real(sp / dm).sqrt().ln();
    let mut out = Vec::with_capacity(p.cells);
    let mut x = C::zero();
    for m in 0..p.cells {
        out.push(x);
        x = x + if m % 2 == 0 { ln_odd } else { ln_even };
    }
    Ok(out)
}

/// `S H S^-1`.
pub fn hermitianize<T: Real>(h: &ComplexMatrix<T>, s: &SimilarityMatrix<T>) -> Result<ComplexMatrix<T>> {
    let n = h.dim();
    if s.diagonal.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: s.diagonal.len(),
        });
    }
    Ok(ComplexMatrix::from_fn(n, |i, j| {
        let x = h[(i, j)];
        if x.is_zero() {
            x
        } else {
            x * (s.diagonal[i] / s.diagonal[j])
        }
    }))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaugeReport<T: Real> {
    /// Per-cell amplification of chain eigenstates.
    pub growth_factor: C<T>,
    /// Inverse localization length, `ln |growth_factor|`.
    pub xi_inv: T,
    pub bbc_line: bool,
    pub bbc_hyperbola: bool,
    pub near_exceptional: bool,
}

#[derive(Serialize, Deserialize)]
struct GaugeReportJson {
    growth_factor_re: f64,
    growth_factor_im: f64,
    xi_inv: f64,
    bbc_line: bool,
    bbc_hyperbola: bool,
    near_exceptional: bool,
}

impl<T: Real> GaugeReport<T> {
    pub fn to_json(&self) -> serde_json::Value {
        let j = GaugeReportJson {
            growth_factor_re: self.growth_factor.re.to_f64_lossy(),
            growth_factor_im: self.growth_factor.im.to_f64_lossy(),
            xi_inv: self.xi_inv.to_f64_lossy(),
            bbc_line: self.bbc_line,
            bbc_hyperbola: self.bbc_hyperbola,
            near_exceptional: self.near_exceptional,
        };
        serde_json::to_value(j).unwrap_or(serde_json::Value::Null)
    }
}

fn rel_equal<T: Real>(a: T, b: T, tol: T) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

/// Log-modulus difference `ln|a| - ln|b|`, cancelling a shared zero.
fn log_ratio<T: Real>(a: T, b: T) -> T {
    match (a.is_zero(), b.is_zero()) {
        (true, true) => T::zero(),
        (true, false) => T::neg_infinity(),
        (false, true) => T::infinity(),
        (false, false) => a.abs().ln() - b.abs().ln(),
    }
}

pub fn gauge_report<T: Real>(p: &ModelParams<T>, tol: T) -> Result<GaugeReport<T>> {
    p.validate()?;
    p.require_balanced()?;
    let d = derive(p);
    let [sp, spp, dm, dmp] = factors(&d, Chain::One);
    // a bond whose two hoppings both vanish cuts the chain and carries no
    // amplification, as in `log_ratio`
    let pair = |a: T, b: T| if a.is_zero() && b.is_zero() { (T::one(), T::one()) } else { (a, b) };
    let ((n1, d1), (n2, d2)) = (pair(sp, dm), pair(spp, dmp));
    let num = n1 * n2;
    let den = d1 * d2;
    let growth_factor = if den.is_zero() {
        real(if num.is_zero() { T::nan() } else { T::infinity() })
    } else {
        real(num / den).sqrt()
    };
    let xi_inv = (log_ratio(sp, dm) + log_ratio(spp, dmp)) * T::lit(0.5);
    let bbc_line = rel_equal(p.t0 * p.g0, d.tbar * d.gbar, tol);
    let bbc_hyperbola = rel_equal(
        p.t0 * p.t0 + p.g0 * p.g0,
        d.tbar * d.tbar + d.gbar * d.gbar,
        tol,
    );
    let cut = T::lit(NEAR_EXCEPTIONAL) * p.scale();
    let near_exceptional = d.u.norm() < cut || d.v.norm() < cut;
    Ok(GaugeReport {
        growth_factor,
        xi_inv,
        bbc_line,
        bbc_hyperbola,
        near_exceptional,
    })
}
