//! Directional inverse participation ratios of ladder eigenstates.

use std::io::Write;

use crate::error::{Error, Result};
use crate::scalar::{Real, C};
use crate::spectral::{fmt_real, SpectrumResult};

/// Ladder amplitudes in the interleaved `(a_1, b_1, a_2, b_2, ...)` order.
pub type StateVector<T> = Vec<C<T>>;

fn check_shape<T: Real>(state: &[C<T>], cells: usize) -> Result<()> {
    if cells % 2 != 0 {
        return Err(Error::OddSize(cells));
    }
    if state.len() != 2 * cells {
        return Err(Error::DimensionMismatch {
            expected: 2 * cells,
            got: state.len(),
        });
    }
    Ok(())
}

/// `(lipr, ripr, dipr)`: quartic weight in the left and right halves of the
/// ladder and their difference.
pub fn dipr<T: Real>(state: &[C<T>], cells: usize) -> Result<(T, T, T)> {
    check_shape(state, cells)?;
    let norm2: T = state.iter().map(|z| z.norm_sqr()).sum();
    if !(norm2 > T::zero()) {
        return Err(Error::ZeroState);
    }
    let half = cells; // first `cells` sites = cells 1..=L/2
    let quartic = |s: &[C<T>]| -> T { s.iter().map(|z| z.norm_sqr() * z.norm_sqr()).sum() };
    let scale = norm2 * norm2;
    let lipr = quartic(&state[..half]) / scale;
    let ripr = quartic(&state[half..]) / scale;
    Ok((lipr, ripr, lipr - ripr))
}

/// Average dIPR over every returned eigenvector.
pub fn mean_dipr<T: Real>(spec: &SpectrumResult<T>, cells: usize) -> Result<T> {
    let vs = spec.eigenvectors.as_ref().ok_or(Error::MissingEigenvectors)?;
    if vs.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    let mut acc = T::zero();
    for v in vs {
        acc += dipr(v, cells)?.2;
    }
    Ok(acc / T::from_usize_lossy(vs.len()))
}

/// `n,re_E,im_E,lipr,ripr,dipr`
pub fn write_localization_csv<T: Real, W: Write>(out: W, spec: &SpectrumResult<T>, cells: usize) -> Result<()> {
    let vs = spec.eigenvectors.as_ref().ok_or(Error::MissingEigenvectors)?;
    let io = |e: csv::Error| Error::Io(format!("csv: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "re_E", "im_E", "lipr", "ripr", "dipr"]).map_err(io)?;
    for (n, (e, v)) in spec.eigenvalues.iter().zip(vs).enumerate() {
        let (l, r, d) = dipr(v, cells)?;
        w.write_record([
            n.to_string(),
            fmt_real(e.re),
            fmt_real(e.im),
            fmt_real(l),
            fmt_real(r),
            fmt_real(d),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))?;
    Ok(())
}
