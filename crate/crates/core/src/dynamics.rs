//! Non-unitary wave-packet evolution under a fixed ladder Hamiltonian.

use std::io::Write;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::{expm, solve, vec_norm, ComplexMatrix};
use crate::localization::StateVector;
use crate::scalar::{real, Real, C};
use crate::spectral::{eig, fmt_real};

/// Eigen-expansion is trusted below this eigenvector condition number.
pub const EIGEN_PATH_MAX_CONDITION: f64 = 1e6;
pub const DEFAULT_SUPPORT_FRACTION: f64 = 1e-6;
/// `ln(1e300)`: raw norms beyond this are reported as overflow when asked to.
pub const OVERFLOW_LOG_NORM: f64 = 690.775_527_898_213_7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Eigen-expansion when well conditioned, otherwise exponential stepping.
    #[default]
    Auto,
    Expm,
    Eigen,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OverflowPolicy {
    /// Carry a unit state and accumulate the log-norm.
    #[default]
    Renormalize,
    /// Fail once the raw norm passes `1e300`.
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagateOptions<T> {
    pub method: Method,
    pub overflow: OverflowPolicy,
    pub support_fraction: T,
}

impl<T: Real> Default for PropagateOptions<T> {
    fn default() -> Self {
        Self {
            method: Method::Auto,
            overflow: OverflowPolicy::Renormalize,
            support_fraction: T::lit(DEFAULT_SUPPORT_FRACTION),
        }
    }
}

/// Sampled evolution. `states` hold unit vectors; the raw amplitude at
/// sample `m` is `norms[m] * states[m]`, with `log_norms` kept so that
/// amplifying spectra stay representable.
#[derive(Debug, Clone, PartialEq)]
pub struct WavepacketTrace<T: Real> {
    pub times: Vec<T>,
    pub states: Vec<StateVector<T>>,
    pub log_norms: Vec<T>,
    pub norms: Vec<T>,
    pub mipr_series: Vec<T>,
    pub support_series: Vec<usize>,
    /// Whether the eigen-expansion path was taken.
    pub used_eigen: bool,
}

impl<T: Real> WavepacketTrace<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn raw_state(&self, m: usize) -> StateVector<T> {
        let s = real(self.norms[m]);
        self.states[m].iter().map(|&z| z * s).collect()
    }

    pub fn cells(&self) -> usize {
        self.states.first().map_or(0, |s| s.len() / 2)
    }
}

/// Unit state on one cell (1-based) with sublattice weights `(w_a, w_b)`.
pub fn initial_state<T: Real>(cells: usize, cell: usize, weights: (C<T>, C<T>)) -> Result<StateVector<T>> {
    if cell == 0 || cell > cells {
        return Err(Error::OutOfRange(format!("cell {cell} outside 1..={cells}")));
    }
    let norm = (weights.0.norm_sqr() + weights.1.norm_sqr()).sqrt();
    if !(norm > T::zero()) {
        return Err(Error::ZeroState);
    }
    let mut v = vec![C::zero(); 2 * cells];
    v[2 * (cell - 1)] = weights.0 / real(norm);
    v[2 * (cell - 1) + 1] = weights.1 / real(norm);
    Ok(v)
}

/// Centre cell `ceil(L/2)`, sublattice a.
pub fn default_initial_state<T: Real>(cells: usize) -> Result<StateVector<T>> {
    initial_state(cells, cells.div_ceil(2), (C::new(T::one(), T::zero()), C::zero()))
}

/// Per-cell `(|a|^2, |b|^2)` of the normalised state.
pub fn cell_intensities<T: Real>(state: &[C<T>]) -> Result<Vec<(T, T)>> {
    let n2: T = state.iter().map(|z| z.norm_sqr()).sum();
    if !(n2 > T::zero()) {
        return Err(Error::ZeroState);
    }
    Ok(state
        .chunks(2)
        .map(|c| (c[0].norm_sqr() / n2, c.get(1).map_or(T::zero(), |z| z.norm_sqr()) / n2))
        .collect())
}

/// Left-right asymmetry of the quartic weight, position weights
/// `(L/2 - j)/(L/2)` for cells `j = 1..L`.
pub fn mipr<T: Real>(state: &[C<T>], cells: usize) -> Result<T> {
    if state.len() != 2 * cells {
        return Err(Error::DimensionMismatch {
            expected: 2 * cells,
            got: state.len(),
        });
    }
    let half = T::from_usize_lossy(cells) * T::lit(0.5);
    let mut acc = T::zero();
    for (j, (a, b)) in cell_intensities(state)?.into_iter().enumerate() {
        let w = (half - T::from_usize_lossy(j + 1)) / half;
        acc += w * (a * a + b * b);
    }
    Ok(acc)
}

/// Cells whose intensity exceeds `fraction` of the brightest cell.
pub fn compacton_support<T: Real>(state: &[C<T>], fraction: T) -> Result<usize> {
    if !(fraction > T::zero() && fraction < T::one()) {
        return Err(Error::InvalidParameters(format!(
            "support fraction must lie in (0, 1), got {}",
            fraction.to_f64_lossy()
        )));
    }
    let cells: Vec<T> = cell_intensities(state)?.into_iter().map(|(a, b)| a + b).collect();
    let peak = cells.iter().copied().fold(T::zero(), T::max);
    Ok(cells.iter().filter(|&&x| x > fraction * peak).count())
}

/// Normalised intensity outside cells `centre - radius ..= centre + radius`
/// (1-based).
pub fn leakage<T: Real>(state: &[C<T>], centre: usize, radius: usize) -> Result<T> {
    let lo = centre.saturating_sub(radius);
    let hi = centre + radius;
    Ok(cell_intensities(state)?
        .into_iter()
        .enumerate()
        .filter(|(j, _)| !(lo..=hi).contains(&(j + 1)))
        .map(|(_, (a, b))| a + b)
        .sum())
}

fn unit<T: Real>(mut v: Vec<C<T>>) -> Result<(Vec<C<T>>, T)> {
    let n = vec_norm(&v);
    if !(n > T::zero() && n.is_finite()) {
        return Err(Error::ZeroState);
    }
    let s = real(T::one() / n);
    v.iter_mut().for_each(|z| *z = *z * s);
    Ok((v, n))
}

/// Evolve `psi0` under `exp(-i H t)` on `n_steps` equal steps up to `t_max`.
pub fn propagate<T: Real>(
    h: &ComplexMatrix<T>,
    psi0: &[C<T>],
    t_max: T,
    n_steps: usize,
    opts: &PropagateOptions<T>,
) -> Result<WavepacketTrace<T>> {
    let n = h.dim();
    if psi0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: psi0.len() });
    }
    if !(t_max > T::zero() && t_max.is_finite()) || n_steps == 0 {
        return Err(Error::InvalidParameters("need t_max > 0 and n_steps >= 1".into()));
    }
    if !h.is_finite() {
        return Err(Error::InvalidParameters("Hamiltonian has non-finite entries".into()));
    }
    let (psi, _) = unit(psi0.to_vec())?;
    let dt = t_max / T::from_usize_lossy(n_steps);
    let times: Vec<T> = (0..=n_steps).map(|m| dt * T::from_usize_lossy(m)).collect();

    let expansion = match opts.method {
        Method::Expm => None,
        Method::Eigen => Some(EigenExpansion::new(h, &psi)?),
        Method::Auto => EigenExpansion::new(h, &psi).ok().filter(|e| e.condition < T::lit(EIGEN_PATH_MAX_CONDITION)),
    };
    let used_eigen = expansion.is_some();

    let mut states = Vec::with_capacity(times.len());
    let mut log_norms = Vec::with_capacity(times.len());
    match expansion {
        Some(e) => {
            for &t in &times {
                let (v, log) = e.at(t)?;
                check_overflow(log, t, opts.overflow)?;
                states.push(v);
                log_norms.push(log);
            }
        }
        None => {
            let step = expm(&h.scale(C::new(T::zero(), -dt)))?;
            let mut cur = psi;
            let mut log = T::zero();
            states.push(cur.clone());
            log_norms.push(log);
            for &t in &times[1..] {
                let (next, nrm) = unit(step.matvec(&cur))?;
                log += nrm.ln();
                check_overflow(log, t, opts.overflow)?;
                cur = next;
                states.push(cur.clone());
                log_norms.push(log);
            }
        }
    }

    let cells = n / 2;
    let mut mipr_series = Vec::with_capacity(states.len());
    let mut support_series = Vec::with_capacity(states.len());
    for s in &states {
        mipr_series.push(mipr(s, cells)?);
        support_series.push(compacton_support(s, opts.support_fraction)?);
    }
    Ok(WavepacketTrace {
        times,
        norms: log_norms.iter().map(|l| l.exp()).collect(),
        states,
        log_norms,
        mipr_series,
        support_series,
        used_eigen,
    })
}

fn check_overflow<T: Real>(log_norm: T, t: T, policy: OverflowPolicy) -> Result<()> {
    if policy == OverflowPolicy::Error && !(log_norm <= T::lit(OVERFLOW_LOG_NORM)) {
        return Err(Error::Overflow { time: t.to_f64_lossy() });
    }
    Ok(())
}

struct EigenExpansion<T: Real> {
    values: Vec<C<T>>,
    vectors: Vec<Vec<C<T>>>,
    coeffs: Vec<C<T>>,
    condition: T,
}

impl<T: Real> EigenExpansion<T> {
    fn new(h: &ComplexMatrix<T>, psi: &[C<T>]) -> Result<Self> {
        let spec = eig(h, true)?;
        let vectors = spec.eigenvectors.ok_or(Error::MissingEigenvectors)?;
        if !spec.evec_condition.is_finite() {
            return Err(Error::Singular);
        }
        let n = h.dim();
        let v = ComplexMatrix::from_columns(&vectors);
        let rhs = ComplexMatrix::from_fn(n, |i, j| if j == 0 { psi[i] } else { C::zero() });
        let sol = solve(&v, &rhs)?;
        Ok(Self {
            values: spec.eigenvalues,
            vectors,
            coeffs: (0..n).map(|i| sol[(i, 0)]).collect(),
            condition: spec.evec_condition,
        })
    }

    /// Unit state and log-norm at time `t`.
    fn at(&self, t: T) -> Result<(Vec<C<T>>, T)> {
        // factor out the fastest growth so the sum stays finite
        let shift = self
            .values
            .iter()
            .zip(&self.coeffs)
            .filter(|(_, c)| !c.is_zero())
            .map(|(e, _)| e.im * t)
            .fold(T::neg_infinity(), T::max);
        let shift = if shift.is_finite() { shift } else { T::zero() };
        let n = self.vectors.len();
        let mut out = vec![C::zero(); n];
        for ((e, c), v) in self.values.iter().zip(&self.coeffs).zip(&self.vectors) {
            let phase = (C::new(T::zero(), -t) * e - real(shift)).exp() * c;
            for (o, x) in out.iter_mut().zip(v) {
                *o += *x * phase;
            }
        }
        let (u, nrm) = unit(out)?;
        Ok((u, shift + nrm.ln()))
    }
}

/// Long-format trace: `t,cell,intensity_a,intensity_b,norm,mipr`.
pub fn write_trace_csv<T: Real, W: Write>(out: W, trace: &WavepacketTrace<T>) -> Result<()> {
    let io = |e: csv::Error| Error::Io(format!("csv: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "cell", "intensity_a", "intensity_b", "norm", "mipr"])
        .map_err(io)?;
    for m in 0..trace.len() {
        let t = fmt_real(trace.times[m]);
        let norm = fmt_real(trace.norms[m]);
        let mi = fmt_real(trace.mipr_series[m]);
        for (j, (a, b)) in cell_intensities(&trace.states[m])?.into_iter().enumerate() {
            w.write_record([
                t.clone(),
                (j + 1).to_string(),
                fmt_real(a),
                fmt_real(b),
                norm.clone(),
                mi.clone(),
            ])
            .map_err(io)?;
        }
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))?;
    Ok(())
}
