//! Matrix representations of the two-leg ladder.
//!
//! Sites are interleaved per cell, `(a_1, b_1, a_2, b_2, ...)`, so every
//! inter-cell coupling is a 2x2 block. The `w` basis rotates each cell by
//! `w = (a + i b)/sqrt2`, `wbar = (a - i b)/sqrt2`; with balanced legs the
//! rotated matrix falls apart into two dimerized chains.

use std::collections::{HashMap, VecDeque};
use std::sync::{Mutex, OnceLock};

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::scalar::{cplx, imag_unit, real, sqrt_real, Real, C};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[serde(rename = "obc")]
    Open,
    #[serde(rename = "pbc")]
    Periodic,
}

impl Boundary {
    pub fn as_str(self) -> &'static str {
        match self {
            Boundary::Open => "obc",
            Boundary::Periodic => "pbc",
        }
    }
}

impl std::fmt::Display for Boundary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Boundary {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "obc" | "open" => Ok(Boundary::Open),
            "pbc" | "periodic" => Ok(Boundary::Periodic),
            other => Err(Error::InvalidParameters(format!("unknown boundary `{other}`"))),
        }
    }
}

/// Raw hopping amplitudes of the ladder plus size and boundary.
///
/// `t1`/`t2` are the reciprocal leg hoppings, `t0` the cross-link;
/// `g0`, `g1`, `g2` are their non-reciprocal partners.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams<T> {
    pub t0: T,
    pub t1: T,
    pub t2: T,
    pub g0: T,
    pub g1: T,
    pub g2: T,
    pub cells: usize,
    pub boundary: Boundary,
}

impl<T: Real> ModelParams<T> {
    /// Equal legs: `t1 = t2 = tbar`, `g1 = g2 = gbar`.
    pub fn balanced(tbar: T, t0: T, gbar: T, g0: T, cells: usize, boundary: Boundary) -> Self {
        Self {
            t0,
            t1: tbar,
            t2: tbar,
            g0,
            g1: gbar,
            g2: gbar,
            cells,
            boundary,
        }
    }

    /// Build from leg averages and half-differences.
    #[allow(clippy::too_many_arguments)]
    pub fn from_averages(
        tbar: T,
        dt: T,
        t0: T,
        gbar: T,
        dg: T,
        g0: T,
        cells: usize,
        boundary: Boundary,
    ) -> Self {
        Self {
            t0,
            t1: tbar + dt,
            t2: tbar - dt,
            g0,
            g1: gbar + dg,
            g2: gbar - dg,
            cells,
            boundary,
        }
    }

    pub fn with_boundary(self, boundary: Boundary) -> Self {
        Self { boundary, ..self }
    }

    pub fn with_cells(self, cells: usize) -> Self {
        Self { cells, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.cells < 2 {
            return Err(Error::InvalidParameters(format!(
                "need at least 2 cells, got {}",
                self.cells
            )));
        }
        let all = [self.t0, self.t1, self.t2, self.g0, self.g1, self.g2];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameters("hopping amplitudes must be finite".into()));
        }
        Ok(())
    }

    /// Legs carry identical amplitudes (exact comparison).
    pub fn is_balanced(&self) -> bool {
        self.t1 == self.t2 && self.g1 == self.g2
    }

    pub fn require_balanced(&self) -> Result<()> {
        if self.is_balanced() {
            Ok(())
        } else {
            let d = derive(self);
            Err(Error::ImbalancedParameters {
                dt: d.dt.to_f64_lossy(),
                dg: d.dg.to_f64_lossy(),
            })
        }
    }

    pub fn require_even(&self) -> Result<()> {
        if self.cells % 2 == 0 {
            Ok(())
        } else {
            Err(Error::OddSize(self.cells))
        }
    }

    /// Largest parameter magnitude; the natural energy scale for tolerances.
    pub fn scale(&self) -> T {
        [self.t0, self.t1, self.t2, self.g0, self.g1, self.g2]
            .iter()
            .fold(T::zero(), |m, x| m.max(x.abs()))
    }

    pub fn dim(&self) -> usize {
        2 * self.cells
    }
}

/// Averaged, dressed and effective parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams<T: Real> {
    pub tbar: T,
    pub gbar: T,
    pub dt: T,
    pub dg: T,
    /// `tbar + t0`
    pub g: T,
    /// `tbar - t0`
    pub gp: T,
    /// `gbar + g0`
    pub f: T,
    /// `gbar - g0`
    pub fp: T,
    /// `sqrt(g^2 - f^2)`, principal branch
    pub u: C<T>,
    /// `sqrt(g'^2 - f'^2)`, principal branch
    pub v: C<T>,
    /// `t0 / tbar`, absent when `tbar = 0`
    pub eta: Option<T>,
    /// The leg amplitudes `(t1, t2, g1, g2)` the averages came from.
    legs: (T, T, T, T),
}

impl<T: Real> DerivedParams<T> {
    /// `g^2 - f^2` evaluated as `(g - f)(g + f)`.
    pub fn u_sq(&self) -> T {
        (self.g - self.f) * (self.g + self.f)
    }

    pub fn v_sq(&self) -> T {
        (self.gp - self.fp) * (self.gp + self.fp)
    }

    /// Leg amplitudes `(t1, t2, g1, g2)`, bit-exact. `tbar +- dt` agrees
    /// with them only up to rounding.
    pub fn legs(&self) -> (T, T, T, T) {
        self.legs
    }
}

pub fn derive<T: Real>(p: &ModelParams<T>) -> DerivedParams<T> {
    let half = T::lit(0.5);
    let tbar = (p.t1 + p.t2) * half;
    let gbar = (p.g1 + p.g2) * half;
    let dt = (p.t1 - p.t2) * half;
    let dg = (p.g1 - p.g2) * half;
    let g = tbar + p.t0;
    let gp = tbar - p.t0;
    let f = gbar + p.g0;
    let fp = gbar - p.g0;
    let u = sqrt_real((g - f) * (g + f));
    let v = sqrt_real((gp - fp) * (gp + fp));
    let eta = if tbar.is_zero() { None } else { Some(p.t0 / tbar) };
    DerivedParams {
        tbar,
        gbar,
        dt,
        dg,
        g,
        gp,
        f,
        fp,
        u,
        v,
        eta,
        legs: (p.t1, p.t2, p.g1, p.g2),
    }
}

/// Inter-cell blocks `(forward, backward)` indexed `[target][source]` over
/// `(a, b)`: forward couples cell `j` into `j+1`, backward `j+1` into `j`.
fn hop_blocks<T: Real>(p: &ModelParams<T>) -> ([[C<T>; 2]; 2], [[C<T>; 2]; 2]) {
    let i = imag_unit::<T>();
    let fwd = [
        [-i * (p.t1 + p.g1), real(-(p.t0 + p.g0))],
        [real(-(p.t0 + p.g0)), i * (p.t2 + p.g2)],
    ];
    let bwd = [
        [i * (p.t1 - p.g1), real(-(p.t0 - p.g0))],
        [real(-(p.t0 - p.g0)), -i * (p.t2 - p.g2)],
    ];
    (fwd, bwd)
}

fn place<T: Real>(h: &mut ComplexMatrix<T>, tgt: usize, src: usize, block: &[[C<T>; 2]; 2]) {
    for s in 0..2 {
        for r in 0..2 {
            h[(2 * tgt + s, 2 * src + r)] += block[s][r];
        }
    }
}

/// Real-space ladder Hamiltonian (`2L x 2L`).
pub fn build_realspace<T: Real>(p: &ModelParams<T>) -> Result<ComplexMatrix<T>> {
    p.validate()?;
    let n = p.cells;
    let (fwd, bwd) = hop_blocks(p);
    let mut h = ComplexMatrix::zeros(2 * n);
    let bonds = match p.boundary {
        Boundary::Open => n - 1,
        Boundary::Periodic => n,
    };
    for j in 0..bonds {
        let k = (j + 1) % n;
        place(&mut h, k, j, &fwd);
        place(&mut h, j, k, &bwd);
    }
    Ok(h)
}

/// Bloch matrix at momentum `k`.
pub fn build_bloch<T: Real>(p: &ModelParams<T>, k: T) -> ComplexMatrix<T> {
    let two = T::lit(2.0);
    let (s, c) = k.sin_cos();
    let off = cplx(-two * p.t0 * c, -two * p.g0 * s);
    ComplexMatrix::from_rows(&[
        vec![cplx(two * p.t1 * s, -two * p.g1 * c), off],
        vec![off, cplx(-two * p.t2 * s, two * p.g2 * c)],
    ])
}

/// Block-diagonal unitary taking `(a, b)` amplitudes to `(w, wbar)` per cell.
pub fn w_basis<T: Real>(cells: usize) -> ComplexMatrix<T> {
    let s = T::one() / T::lit(2.0).sqrt();
    let mut u = ComplexMatrix::zeros(2 * cells);
    for j in 0..cells {
        u[(2 * j, 2 * j)] = real(s);
        u[(2 * j, 2 * j + 1)] = cplx(T::zero(), s);
        u[(2 * j + 1, 2 * j)] = real(s);
        u[(2 * j + 1, 2 * j + 1)] = cplx(T::zero(), -s);
    }
    u
}

/// `U H U^H` for the cell-wise rotation, evaluated block by block in closed
/// form so that cancellations between legs come out as exact zeros.
pub fn to_w_basis<T: Real>(h: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    let n = h.dim();
    assert_eq!(n % 2, 0, "ladder matrices have even dimension");
    let i = imag_unit::<T>();
    let half = T::lit(0.5);
    let mut out = ComplexMatrix::zeros(n);
    for bj in 0..n / 2 {
        for bk in 0..n / 2 {
            let (r, c) = (2 * bj, 2 * bk);
            let (maa, mab, mba, mbb) = (h[(r, c)], h[(r, c + 1)], h[(r + 1, c)], h[(r + 1, c + 1)]);
            if maa.is_zero() && mab.is_zero() && mba.is_zero() && mbb.is_zero() {
                continue;
            }
            let (sum, dif) = (maa + mbb, maa - mbb);
            let (anti, sym) = (mba - mab, mab + mba);
            out[(r, c)] = (sum + i * anti) * half;
            out[(r, c + 1)] = (dif + i * sym) * half;
            out[(r + 1, c)] = (dif - i * sym) * half;
            out[(r + 1, c + 1)] = (sum - i * anti) * half;
        }
    }
    out
}

/// Map a vector of `(w, wbar)` amplitudes back to `(a, b)` amplitudes.
pub fn from_w_vector<T: Real>(x: &[C<T>]) -> Vec<C<T>> {
    let s = T::one() / T::lit(2.0).sqrt();
    let i = imag_unit::<T>();
    let mut out = vec![C::zero(); x.len()];
    for j in 0..x.len() / 2 {
        let (w, wb) = (x[2 * j], x[2 * j + 1]);
        out[2 * j] = (w + wb) * s;
        out[2 * j + 1] = -i * (w - wb) * s;
    }
    out
}

/// Site lists (indices into the `w`-basis) of the two decoupled chains, in
/// chain order: `chain_one[m]` is row/column `m` of the first chain matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoupling {
    pub chain_one: Vec<usize>,
    pub chain_two: Vec<usize>,
}

impl Decoupling {
    pub fn chain(&self, which: Chain) -> &[usize] {
        match which {
            Chain::One => &self.chain_one,
            Chain::Two => &self.chain_two,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Chain {
    One,
    Two,
}

/// Alternating hoppings of a dimerized chain: `upper[m % 2]` sits at
/// `(m, m+1)` and `lower[m % 2]` at `(m+1, m)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainHoppings<T: Real> {
    pub upper: [C<T>; 2],
    pub lower: [C<T>; 2],
}

/// Closed-form hoppings of either chain.
pub fn chain_hoppings<T: Real>(d: &DerivedParams<T>, which: Chain) -> ChainHoppings<T> {
    let mi = -imag_unit::<T>();
    let (g, gp, f, fp) = match which {
        Chain::One => (d.g, d.gp, d.f, d.fp),
        Chain::Two => (d.gp, d.g, d.fp, d.f),
    };
    ChainHoppings {
        upper: [mi * (fp + gp), mi * (f + g)],
        lower: [mi * (fp - gp), mi * (f - g)],
    }
}

impl<T: Real> ChainHoppings<T> {
    /// `len x len` tridiagonal, with the wrap-around bond when periodic.
    pub fn matrix(&self, len: usize, boundary: Boundary) -> ComplexMatrix<T> {
        let mut h = ComplexMatrix::zeros(len);
        for m in 0..len.saturating_sub(1) {
            h[(m, m + 1)] = self.upper[m % 2];
            h[(m + 1, m)] = self.lower[m % 2];
        }
        if boundary == Boundary::Periodic && len >= 2 {
            let m = len - 1;
            h[(m, 0)] += self.upper[m % 2];
            h[(0, m)] += self.lower[m % 2];
        }
        h
    }
}

// Generic amplitudes with no accidental zeros or coincidences; only used to
// read off the coupling graph and fix orientation.
fn reference_params<T: Real>(cells: usize, boundary: Boundary) -> ModelParams<T> {
    ModelParams::balanced(
        T::lit(1.13),
        T::lit(0.37),
        T::lit(0.59),
        T::lit(0.21),
        cells,
        boundary,
    )
}

/// Find the two chains inside the `w`-basis ladder.
///
/// Connected components of the coupling graph at generic parameters are
/// traced as paths (or rings when periodic); each candidate ordering is then
/// matched against the closed-form chain matrices.
pub fn decoupling(cells: usize, boundary: Boundary) -> Result<Decoupling> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, Boundary), Decoupling>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(d) = cache.lock().ok().and_then(|m| m.get(&(cells, boundary)).cloned()) {
        return Ok(d);
    }
    let d = find_decoupling(cells, boundary)?;
    if let Ok(mut m) = cache.lock() {
        m.insert((cells, boundary), d.clone());
    }
    Ok(d)
}

fn find_decoupling(cells: usize, boundary: Boundary) -> Result<Decoupling> {
    if cells < 2 {
        return Err(Error::InvalidParameters(format!("need at least 2 cells, got {cells}")));
    }
    if cells % 2 != 0 {
        return Err(Error::OddSize(cells));
    }
    let p = reference_params::<f64>(cells, boundary);
    let hw = to_w_basis(&build_realspace(&p)?);
    let n = hw.dim();
    let tol = 1e-12;
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|r| {
            (0..n)
                .filter(|&c| c != r && (hw[(r, c)].norm() > tol || hw[(c, r)].norm() > tol))
                .collect()
        })
        .collect();

    let mut seen = vec![false; n];
    let mut components = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut comp = Vec::new();
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(x) = queue.pop_front() {
            comp.push(x);
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        components.push(comp);
    }
    if components.len() != 2 || components.iter().any(|c| c.len() != cells) {
        return Err(Error::InvalidParameters(format!(
            "coupling graph has {} components, expected two chains of {cells}",
            components.len()
        )));
    }

    let d = derive(&p);
    let targets = [
        chain_hoppings(&d, Chain::One).matrix(cells, boundary),
        chain_hoppings(&d, Chain::Two).matrix(cells, boundary),
    ];
    let mut found: [Option<Vec<usize>>; 2] = [None, None];
    for comp in &components {
        let walk = trace_walk(comp, &adj, boundary)?;
        let mut matched = false;
        'search: for cand in orderings(&walk, boundary) {
            for (slot, target) in targets.iter().enumerate() {
                if found[slot].is_none() && banded_mismatch(&hw, &cand, target) <= 1e-12 {
                    found[slot] = Some(cand);
                    matched = true;
                    break 'search;
                }
            }
        }
        if !matched {
            return Err(Error::InvalidParameters(
                "no ordering of a coupling component matches a chain matrix".into(),
            ));
        }
    }
    let [Some(chain_one), Some(chain_two)] = found else {
        return Err(Error::InvalidParameters("chains not identified".into()));
    };
    Ok(Decoupling { chain_one, chain_two })
}

// Components are paths or rings, so only the diagonal, the neighbours along
// the walk and the two corners can be nonzero.
fn banded_mismatch(hw: &ComplexMatrix<f64>, cand: &[usize], target: &ComplexMatrix<f64>) -> f64 {
    let n = cand.len();
    let mut worst = 0.0f64;
    let mut check = |i: usize, j: usize| {
        worst = worst.max((hw[(cand[i], cand[j])] - target[(i, j)]).norm());
    };
    for m in 0..n {
        check(m, m);
        if m + 1 < n {
            check(m, m + 1);
            check(m + 1, m);
        }
    }
    if n > 2 {
        check(0, n - 1);
        check(n - 1, 0);
    }
    worst
}

fn trace_walk(comp: &[usize], adj: &[Vec<usize>], boundary: Boundary) -> Result<Vec<usize>> {
    let start = match boundary {
        Boundary::Open => *comp
            .iter()
            .find(|&&x| adj[x].len() == 1)
            .ok_or_else(|| Error::InvalidParameters("open chain without an end".into()))?,
        Boundary::Periodic => comp[0],
    };
    let mut walk = vec![start];
    let mut prev = usize::MAX;
    let mut cur = start;
    while walk.len() < comp.len() {
        let next = adj[cur]
            .iter()
            .copied()
            .find(|&y| y != prev && !walk.contains(&y))
            .ok_or_else(|| Error::InvalidParameters("coupling component is not a chain".into()))?;
        prev = cur;
        cur = next;
        walk.push(cur);
    }
    Ok(walk)
}

fn orderings(walk: &[usize], boundary: Boundary) -> Vec<Vec<usize>> {
    let rev: Vec<usize> = walk.iter().rev().copied().collect();
    match boundary {
        Boundary::Open => vec![walk.to_vec(), rev],
        Boundary::Periodic => {
            let n = walk.len();
            let mut out = Vec::with_capacity(2 * n);
            for base in [walk, rev.as_slice()] {
                for s in 0..n {
                    out.push((0..n).map(|m| base[(s + m) % n]).collect());
                }
            }
            out
        }
    }
}

/// The two chain matrices, read off the rotated ladder through [`decoupling`].
pub fn build_nhssh<T: Real>(p: &ModelParams<T>) -> Result<(ComplexMatrix<T>, ComplexMatrix<T>)> {
    p.validate()?;
    p.require_balanced()?;
    p.require_even()?;
    let dec = decoupling(p.cells, p.boundary)?;
    let hw = to_w_basis(&build_realspace(p)?);
    Ok((hw.submatrix(&dec.chain_one), hw.submatrix(&dec.chain_two)))
}

/// Lift a chain eigenvector to a ladder vector in the `(a, b)` basis.
pub fn lift_chain_vector<T: Real>(dec: &Decoupling, which: Chain, x: &[C<T>]) -> Vec<C<T>> {
    let sites = dec.chain(which);
    let mut w = vec![C::zero(); 2 * sites.len()];
    for (&site, &val) in sites.iter().zip(x) {
        w[site] = val;
    }
    from_w_vector(&w)
}
