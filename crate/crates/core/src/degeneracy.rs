//! Degeneracy classification of parameter points and numerical Jordan
//! structure.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::svd::{norm2, rank_with_gap, singular_values};
use crate::linalg::ComplexMatrix;
use crate::model::{build_realspace, derive, ModelParams};
use crate::scalar::{real, Real, C};
use crate::spectral::{eig, multiset_distance};

/// Relative tolerance on exact parameter relations.
pub const DEFAULT_CLASS_TOL: f64 = 1e-12;
/// Per-dimension factor of the rank threshold, relative to the largest
/// singular value.
pub const DEFAULT_TOL_RANK: f64 = 1e-12;
/// Minimum singular-value ratio across the rank cut.
pub const MIN_RANK_GAP: f64 = 10.0;
/// Union-find radius relative to the spectral radius.
pub const CLUSTER_RADIUS: f64 = 1e-6;
/// Largest matrix for which rank sequences are trusted.
pub const MAX_JORDAN_DIM: usize = 64;
pub const DEFAULT_NILPOTENCY_TOL: f64 = 1e-10;
pub const DEFAULT_DEFECT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DegeneracyLabel {
    Generic,
    #[serde(rename = "ELu")]
    ElU,
    #[serde(rename = "ELv")]
    ElV,
    TriplePoint,
    DiabolicalFlatBand,
    #[serde(rename = "EFBLine")]
    EfbLine,
    #[serde(rename = "EFBIntersection")]
    EfbIntersection,
    #[serde(rename = "DFB_PBC")]
    DfbPbc,
}

impl DegeneracyLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Generic => "Generic",
            Self::ElU => "ELu",
            Self::ElV => "ELv",
            Self::TriplePoint => "TriplePoint",
            Self::DiabolicalFlatBand => "DiabolicalFlatBand",
            Self::EfbLine => "EFBLine",
            Self::EfbIntersection => "EFBIntersection",
            Self::DfbPbc => "DFB_PBC",
        }
    }

    /// Labels whose open-boundary Hamiltonian has a Jordan block.
    pub fn is_exceptional(self) -> bool {
        matches!(
            self,
            Self::ElU | Self::ElV | Self::TriplePoint | Self::EfbLine | Self::EfbIntersection
        )
    }
}

impl std::fmt::Display for DegeneracyLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JordanBlocks<T: Real> {
    pub eigenvalue: C<T>,
    /// Ascending block sizes.
    pub sizes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegeneracyReport<T: Real> {
    pub label: DegeneracyLabel,
    pub lambda: C<T>,
    /// Empty unless certified numerically.
    pub jordan: Vec<JordanBlocks<T>>,
    pub defective: bool,
}

#[derive(Serialize, Deserialize)]
struct BlocksJson {
    eig_re: f64,
    eig_im: f64,
    sizes: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct ReportJson {
    label: DegeneracyLabel,
    lambda_re: f64,
    lambda_im: f64,
    blocks: Vec<BlocksJson>,
    defective: bool,
}

impl<T: Real> DegeneracyReport<T> {
    pub fn to_json(&self) -> serde_json::Value {
        let j = ReportJson {
            label: self.label,
            lambda_re: self.lambda.re.to_f64_lossy(),
            lambda_im: self.lambda.im.to_f64_lossy(),
            blocks: self
                .jordan
                .iter()
                .map(|b| BlocksJson {
                    eig_re: b.eigenvalue.re.to_f64_lossy(),
                    eig_im: b.eigenvalue.im.to_f64_lossy(),
                    sizes: b.sizes.clone(),
                })
                .collect(),
            defective: self.defective,
        };
        serde_json::to_value(j).unwrap_or(serde_json::Value::Null)
    }

    pub fn total_size(&self) -> usize {
        self.jordan.iter().flat_map(|b| b.sizes.iter()).sum()
    }
}

fn near<T: Real>(a: T, b: T, cut: T) -> bool {
    (a - b).abs() <= cut
}

/// Label and Jordan eigenvalue from the exact parameter relations.
pub fn classify_point<T: Real>(p: &ModelParams<T>, tol: T) -> Result<DegeneracyReport<T>> {
    p.validate()?;
    p.require_balanced()?;
    let d = derive(p);
    let cut = tol * p.scale();
    // vanishing chain hoppings: (f+g, f-g) on one sublattice bond, primed on the other
    let sum = (d.f + d.g).abs() <= cut;
    let diff = (d.f - d.g).abs() <= cut;
    let sum_p = (d.fp + d.gp).abs() <= cut;
    let diff_p = (d.fp - d.gp).abs() <= cut;

    let u_zero = sum || diff;
    let v_zero = sum_p || diff_p;
    let efb = (diff && sum_p) || (sum && diff_p);
    let triple = (diff && diff_p) || (sum && sum_p);
    let dfb = (sum && diff) || (sum_p && diff_p);
    let on_fine_line = near(p.t0 * p.g0, d.tbar * d.gbar, cut * p.scale());
    let flat_pbc = !d.tbar.is_zero() && near(p.t0.abs(), d.tbar.abs(), cut) && on_fine_line;

    let zero = C::<T>::zero();
    let (label, lambda) = if efb && dfb {
        (DegeneracyLabel::EfbIntersection, zero)
    } else if efb {
        (DegeneracyLabel::EfbLine, zero)
    } else if triple {
        (DegeneracyLabel::TriplePoint, zero)
    } else if dfb {
        let lam = if u_zero { d.v } else { d.u };
        (DegeneracyLabel::DiabolicalFlatBand, lam)
    } else if u_zero {
        (DegeneracyLabel::ElU, d.v)
    } else if v_zero {
        (DegeneracyLabel::ElV, d.u)
    } else if flat_pbc {
        (DegeneracyLabel::DfbPbc, d.u)
    } else {
        (DegeneracyLabel::Generic, zero)
    };
    Ok(DegeneracyReport {
        label,
        lambda,
        jordan: Vec::new(),
        defective: label.is_exceptional(),
    })
}

/// Jordan block sizes of `h` at `lambda` from the rank sequence of powers of
/// `h - lambda`. Empty when `lambda` is not an eigenvalue.
pub fn jordan_structure<T: Real>(h: &ComplexMatrix<T>, lambda: C<T>, tol_rank: T) -> Result<Vec<usize>> {
    let n = h.dim();
    if n > MAX_JORDAN_DIM {
        return Err(Error::InvalidParameters(format!(
            "rank sequences are only certified up to dimension {MAX_JORDAN_DIM}, got {n}"
        )));
    }
    let a = h.shifted(lambda);
    let s = norm2(&a);
    if s.is_zero() {
        return Ok(vec![1; n]);
    }
    // powers of the normalised shift keep the threshold fixed
    let a = a.scale(real(T::one() / s));
    let threshold = T::from_usize_lossy(n) * tol_rank;
    let mut ranks = vec![n];
    let mut power = ComplexMatrix::identity(n);
    for _ in 0..n {
        power = power.matmul(&a);
        let (rank, gap) = rank_with_gap(&singular_values(&power), threshold);
        if gap < T::lit(MIN_RANK_GAP) {
            return Err(Error::IllConditioned { gap: gap.to_f64_lossy() });
        }
        let last = *ranks.last().unwrap_or(&n);
        ranks.push(rank);
        if rank == last {
            break;
        }
    }
    // at_least[k] = number of blocks of size >= k
    let at_least: Vec<usize> = ranks.windows(2).map(|w| w[0] - w[1]).collect();
    let mut sizes = Vec::new();
    for (k, &cnt) in at_least.iter().enumerate() {
        let longer = at_least.get(k + 1).copied().unwrap_or(0);
        sizes.extend(std::iter::repeat(k + 1).take(cnt.saturating_sub(longer)));
    }
    sizes.sort_unstable();
    Ok(sizes)
}

/// Union-find clusters of eigenvalues closer than `radius`.
pub fn eigen_clusters<T: Real>(eigs: &[C<T>], radius: T) -> Vec<Vec<usize>> {
    let n = eigs.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (eigs[i] - eigs[j]).norm() <= radius {
                let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = root(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

fn centroid<T: Real>(eigs: &[C<T>], idx: &[usize]) -> C<T> {
    let s: C<T> = idx.iter().map(|&i| eigs[i]).sum();
    s / real(T::from_usize_lossy(idx.len()))
}

/// Number of independent eigenvectors for `lambda`.
fn nullity<T: Real>(h: &ComplexMatrix<T>, lambda: C<T>, h_norm: T) -> usize {
    let n = h.dim();
    let sv = singular_values(&h.shifted(lambda));
    let threshold = T::from_usize_lossy(n) * T::lit(DEFAULT_TOL_RANK) * h_norm;
    n - rank_with_gap(&sv, threshold).0
}

/// Missing eigenvectors within some eigenvalue cluster, or an eigenvector
/// matrix conditioned worse than `1/tol`.
pub fn is_defective<T: Real>(h: &ComplexMatrix<T>, tol: T) -> Result<bool> {
    let spec = eig(h, true)?;
    if !(spec.evec_condition <= T::one() / tol) {
        return Ok(true);
    }
    let radius = T::lit(CLUSTER_RADIUS) * spec.max_abs();
    let h_norm = norm2(h);
    for group in eigen_clusters(&spec.eigenvalues, radius) {
        if group.len() > 1 && nullity(h, centroid(&spec.eigenvalues, &group), h_norm) < group.len() {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Smallest `m` with `||H^m||_2 <= tol ||H||_2^m`.
pub fn nilpotency_order<T: Real>(h: &ComplexMatrix<T>, tol: T) -> Option<usize> {
    let n = h.dim();
    let s = norm2(h);
    if s.is_zero() {
        return Some(1);
    }
    let a = h.scale(real(T::one() / s));
    let dim_sqrt = T::from_usize_lossy(n).sqrt();
    let mut power = a.clone();
    for m in 1..=n {
        if m > 1 {
            power = power.matmul(&a);
        }
        let fro = power.frobenius_norm();
        if fro <= tol {
            return Some(m);
        }
        if fro > tol * dim_sqrt {
            // a nonzero trace of a power rules out nilpotency for good
            let tr: C<T> = power.diagonal().into_iter().sum();
            if tr.norm() > tol.sqrt() {
                return None;
            }
            continue;
        }
        if norm2(&power) <= tol {
            return Some(m);
        }
    }
    None
}

/// Open-boundary spectrum at a diabolical flat band: two zero modes plus
/// `L-1` copies of each nonzero level, with a complete eigenbasis.
pub fn dp_spectrum_check<T: Real>(p: &ModelParams<T>, cells: usize) -> Result<bool> {
    let q = p.clone().with_cells(cells).with_boundary(crate::model::Boundary::Open);
    let report = classify_point(&q, T::lit(DEFAULT_CLASS_TOL))?;
    if report.label != DegeneracyLabel::DiabolicalFlatBand {
        return Err(Error::WrongClass {
            expected: DegeneracyLabel::DiabolicalFlatBand.as_str().into(),
            found: report.label.as_str().into(),
        });
    }
    let d = derive(&q);
    if !(p.g0.abs() < d.tbar.abs()) {
        return Err(Error::InvalidParameters("|gamma_0| must be below |tbar| for a diabolical level".into()));
    }
    let level = (d.tbar * d.tbar - p.g0 * p.g0).sqrt() * T::lit(2.0);
    let mut want = vec![C::<T>::zero(); 2];
    want.extend(std::iter::repeat(real(level)).take(cells - 1));
    want.extend(std::iter::repeat(real(-level)).take(cells - 1));
    let h = build_realspace(&q)?;
    let got = eig(&h, false)?.eigenvalues;
    let close = multiset_distance(&got, &want)? <= T::lit(1e-8);
    Ok(close && !is_defective(&h, T::lit(DEFAULT_DEFECT_TOL))?)
}

/// Candidate Jordan eigenvalues of the open ladder implied by the label.
fn analytic_candidates<T: Real>(r: &DegeneracyReport<T>) -> Vec<C<T>> {
    use DegeneracyLabel::*;
    match r.label {
        TriplePoint | EfbLine | EfbIntersection => vec![C::zero()],
        ElU | ElV | DiabolicalFlatBand => vec![C::zero(), r.lambda, -r.lambda],
        Generic | DfbPbc => Vec::new(),
    }
}

/// Classification plus the numerically certified Jordan structure of the
/// real-space Hamiltonian when it is small enough.
pub fn degeneracy_report<T: Real>(p: &ModelParams<T>, tol: T) -> Result<DegeneracyReport<T>> {
    let mut report = classify_point(p, tol)?;
    if p.dim() > MAX_JORDAN_DIM {
        return Ok(report);
    }
    let h = build_realspace(p)?;
    let mut rest = eig(&h, false)?.eigenvalues;
    let tol_rank = T::lit(DEFAULT_TOL_RANK);
    let mut jordan = Vec::new();
    let mut take = |lambda: C<T>, rest: &mut Vec<C<T>>| -> Result<()> {
        let sizes = jordan_structure(&h, lambda, tol_rank)?;
        let mult: usize = sizes.iter().sum();
        if mult == 0 {
            return Ok(());
        }
        // drop the `mult` numerical eigenvalues this block accounts for
        rest.sort_by(|a, b| {
            (*a - lambda)
                .norm()
                .partial_cmp(&(*b - lambda).norm())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        rest.drain(..mult.min(rest.len()));
        jordan.push(JordanBlocks { eigenvalue: lambda, sizes });
        Ok(())
    };
    let mut seen: Vec<C<T>> = Vec::new();
    for lam in analytic_candidates(&report) {
        if seen.iter().any(|s| (*s - lam).norm() <= tol * p.scale()) {
            continue;
        }
        seen.push(lam);
        take(lam, &mut rest)?;
    }
    let radius = T::lit(CLUSTER_RADIUS) * rest.iter().map(|z| z.norm()).fold(T::zero(), T::max);
    let groups = eigen_clusters(&rest, radius);
    let centres: Vec<C<T>> = groups.iter().map(|g| centroid(&rest, g)).collect();
    for c in centres {
        take(c, &mut rest)?;
    }
    let total: usize = jordan.iter().flat_map(|b: &JordanBlocks<T>| b.sizes.iter()).sum();
    if total == h.dim() {
        report.defective = jordan.iter().any(|b| b.sizes.iter().any(|&s| s >= 2));
        report.jordan = jordan;
    } else {
        report.defective = is_defective(&h, T::lit(DEFAULT_DEFECT_TOL))?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Boundary;
    use crate::scalar::cplx;

    fn label(tbar: f64, t0: f64, gbar: f64, g0: f64) -> DegeneracyLabel {
        let p = ModelParams::balanced(tbar, t0, gbar, g0, 8, Boundary::Open);
        classify_point(&p, DEFAULT_CLASS_TOL).unwrap().label
    }

    #[test]
    fn labels_at_reference_points() {
        assert_eq!(label(1.0, 0.5, 1.0, 0.5), DegeneracyLabel::TriplePoint);
        assert_eq!(label(1.0, 1.0, 0.5, 0.5), DegeneracyLabel::DiabolicalFlatBand);
        assert_eq!(label(1.0, 0.7, 0.7, 1.0), DegeneracyLabel::EfbLine);
        assert_eq!(label(1.0, 1.0, 1.0, 1.0), DegeneracyLabel::EfbIntersection);
        assert_eq!(label(1.0, -1.0, -1.0, 1.0), DegeneracyLabel::EfbIntersection);
        assert_eq!(label(1.0, 0.3, 0.8, 0.5), DegeneracyLabel::ElU);
        assert_eq!(label(1.0, 0.3, 1.2, 0.5), DegeneracyLabel::ElV);
        assert_eq!(label(1.0, 0.3, 0.1, 0.5), DegeneracyLabel::Generic);
    }

    #[test]
    fn dp_lambda_is_nonzero_level() {
        let p = ModelParams::balanced(1.0, 1.0, 0.5, 0.5, 8, Boundary::Open);
        let r = classify_point(&p, DEFAULT_CLASS_TOL).unwrap();
        assert!((r.lambda - cplx(2.0 * 0.75f64.sqrt(), 0.0)).norm() < 1e-14);
        assert!(!r.defective);
    }

    #[test]
    fn canonical_j2() {
        let j = ComplexMatrix::from_rows(&[
            vec![cplx(0.0f64, 0.0), cplx(1.0, 0.0)],
            vec![cplx(0.0, 0.0), cplx(0.0, 0.0)],
        ]);
        assert_eq!(jordan_structure(&j, cplx(0.0, 0.0), DEFAULT_TOL_RANK).unwrap(), vec![2]);
        assert!(jordan_structure(&j, cplx(1.0, 0.0), DEFAULT_TOL_RANK).unwrap().is_empty());
        assert_eq!(nilpotency_order(&j, 1e-10), Some(2));
        assert!(is_defective(&j, DEFAULT_DEFECT_TOL).unwrap());
    }

    #[test]
    fn mixed_blocks() {
        // J3(0) + J1(0) + J2(1)
        let mut h = ComplexMatrix::<f64>::zeros(6);
        h[(0, 1)] = cplx(1.0, 0.0);
        h[(1, 2)] = cplx(1.0, 0.0);
        h[(4, 4)] = cplx(1.0, 0.0);
        h[(5, 5)] = cplx(1.0, 0.0);
        h[(4, 5)] = cplx(1.0, 0.0);
        assert_eq!(jordan_structure(&h, cplx(0.0, 0.0), DEFAULT_TOL_RANK).unwrap(), vec![1, 3]);
        assert_eq!(jordan_structure(&h, cplx(1.0, 0.0), DEFAULT_TOL_RANK).unwrap(), vec![2]);
    }

    #[test]
    fn normal_matrices_not_defective() {
        let h = ComplexMatrix::from_diag(&[cplx(1.0f64, 0.0), cplx(1.0, 0.0), cplx(0.0, 2.0)]);
        assert!(!is_defective(&h, DEFAULT_DEFECT_TOL).unwrap());
        assert_eq!(nilpotency_order(&h, 1e-10), None);
        assert_eq!(
            jordan_structure(&h, cplx(1.0, 0.0), DEFAULT_TOL_RANK).unwrap(),
            vec![1, 1]
        );
    }

    #[test]
    fn clusters_chain_transitively() {
        let e = [cplx(0.0f64, 0.0), cplx(0.9, 0.0), cplx(1.8, 0.0), cplx(5.0, 0.0)];
        let g = eigen_clusters(&e, 1.0);
        assert_eq!(g, vec![vec![0, 1, 2], vec![3]]);
    }

    #[test]
    fn json_shape() {
        let p = ModelParams::balanced(1.0f64, 0.5, 1.0, 0.5, 4, Boundary::Open);
        let r = degeneracy_report(&p, DEFAULT_CLASS_TOL).unwrap();
        let j = r.to_json();
        assert_eq!(j["label"], "TriplePoint");
        assert_eq!(j["blocks"][0]["sizes"], serde_json::json!([4, 4]));
        assert_eq!(j["defective"], true);
    }
}
