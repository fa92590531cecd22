//! Parameter-grid sweeps over `(t0, gbar)` at fixed `tbar`, `g0` and size.

use std::fmt::Write as _;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;

use crate::degeneracy::{classify_point, DegeneracyLabel, DEFAULT_CLASS_TOL};
use crate::dynamics::{default_initial_state, propagate, Method, PropagateOptions};
use crate::error::{Error, Result};
use crate::localization::mean_dipr;
use crate::model::{build_realspace, Boundary, ModelParams};
use crate::scalar::{Real, C};
use crate::spectral::{
    bloch_spectrum, classify, default_tol_abs, fmt_real, ladder_spectrum_with, Detail, SpectralLabel,
    DEFAULT_TOL_REL,
};

pub const DEFAULT_GRID_POINTS: usize = 201;
pub const DEFAULT_RANGE: (f64, f64) = (-2.0, 2.0);
pub const DEFAULT_T_MAX: f64 = 20.0;
pub const DEFAULT_STEPS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundarySet {
    Pbc,
    Obc,
    #[default]
    Both,
}

impl BoundarySet {
    pub fn has(self, b: Boundary) -> bool {
        matches!(
            (self, b),
            (Self::Both, _) | (Self::Pbc, Boundary::Periodic) | (Self::Obc, Boundary::Open)
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Pbc => "pbc",
            Self::Obc => "obc",
            Self::Both => "both",
        }
    }
}

impl FromStr for BoundarySet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pbc" | "periodic" => Ok(Self::Pbc),
            "obc" | "open" => Ok(Self::Obc),
            "both" => Ok(Self::Both),
            other => Err(Error::InvalidParameters(format!("unknown boundary set '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis<T> {
    pub min: T,
    pub max: T,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec<T> {
    pub t0: Axis<T>,
    pub gbar: Axis<T>,
    pub g0: T,
    pub tbar: T,
    pub cells: usize,
    pub boundaries: BoundarySet,
    pub snap_special: bool,
    /// Relative tolerance of the degeneracy labels.
    pub class_tol: T,
    /// Relative tolerance of the real/imaginary spectral classes.
    pub tol_rel: T,
}

impl<T: Real> GridSpec<T> {
    pub fn new(g0: T) -> Self {
        let axis = Axis {
            min: T::lit(DEFAULT_RANGE.0),
            max: T::lit(DEFAULT_RANGE.1),
            points: DEFAULT_GRID_POINTS,
        };
        Self {
            t0: axis,
            gbar: axis,
            g0,
            tbar: T::one(),
            cells: 50,
            boundaries: BoundarySet::Both,
            snap_special: false,
            class_tol: T::lit(DEFAULT_CLASS_TOL),
            tol_rel: T::lit(DEFAULT_TOL_REL),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, a) in [("t0", &self.t0), ("gbar", &self.gbar)] {
            if a.points < 2 {
                return Err(Error::InvalidParameters(format!("{name} axis needs at least 2 points")));
            }
            if !(a.min.is_finite() && a.max.is_finite() && a.min < a.max) {
                return Err(Error::InvalidParameters(format!("{name} range must be finite with min < max")));
            }
        }
        if !(self.class_tol >= T::zero() && self.tol_rel >= T::zero()) {
            return Err(Error::InvalidParameters("tolerances must be non-negative".into()));
        }
        if !(self.g0.is_finite() && self.tbar.is_finite()) {
            return Err(Error::InvalidParameters("g0 and tbar must be finite".into()));
        }
        if self.cells < 2 || self.cells % 2 != 0 {
            return Err(Error::OddSize(self.cells));
        }
        Ok(())
    }

    /// Values where the exceptional lines, triple and diabolical points cross
    /// the axes.
    pub fn special_values(&self) -> Vec<T> {
        let mut v = vec![self.g0, -self.g0, self.tbar, -self.tbar];
        v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        v.dedup();
        v
    }

    pub fn t0_values(&self) -> Vec<T> {
        self.axis_values(&self.t0)
    }

    pub fn gbar_values(&self) -> Vec<T> {
        self.axis_values(&self.gbar)
    }

    fn axis_values(&self, a: &Axis<T>) -> Vec<T> {
        let mut v = linspace(a.min, a.max, a.points);
        if self.snap_special {
            snap(&mut v, &self.special_values());
        }
        v
    }

    /// Nodes in row-major order: `gbar` outer, `t0` inner.
    pub fn nodes(&self) -> Vec<(T, T)> {
        let ts = self.t0_values();
        self.gbar_values()
            .into_iter()
            .flat_map(|g| ts.iter().map(move |&t| (t, g)))
            .collect()
    }

    pub fn params(&self, t0: T, gbar: T, boundary: Boundary) -> ModelParams<T> {
        ModelParams::balanced(self.tbar, t0, gbar, self.g0, self.cells, boundary)
    }
}

pub fn linspace<T: Real>(min: T, max: T, n: usize) -> Vec<T> {
    let span = max - min;
    let last = T::from_usize_lossy(n - 1);
    (0..n)
        .map(|i| {
            if i + 1 == n {
                max
            } else {
                min + span * T::from_usize_lossy(i) / last
            }
        })
        .collect()
}

/// Move the nearest node onto each special value inside the range, keeping
/// the axis strictly increasing. A special value that would collide with an
/// already snapped node is skipped.
pub fn snap<T: Real>(axis: &mut [T], specials: &[T]) {
    let n = axis.len();
    let (lo, hi) = (axis[0], axis[n - 1]);
    let mut pinned = vec![false; n];
    for &s in specials {
        if s < lo || s > hi {
            continue;
        }
        let i = (0..n)
            .min_by(|&a, &b| {
                (axis[a] - s)
                    .abs()
                    .partial_cmp(&(axis[b] - s).abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(0);
        if pinned[i] && axis[i] != s {
            continue;
        }
        let left_ok = i == 0 || axis[i - 1] < s;
        let right_ok = i + 1 == n || s < axis[i + 1];
        if left_ok && right_ok {
            axis[i] = s;
            pinned[i] = true;
        }
    }
}

/// One grid node. Fields not computed by a given sweep stay `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridRow<T> {
    pub t0: T,
    pub gbar: T,
    pub m_pbc: Option<T>,
    pub m_obc: Option<T>,
    pub class_obc: Option<SpectralLabel>,
    pub mean_dipr: Option<T>,
    pub defective: Option<bool>,
    pub mipr_final: Option<T>,
    pub max_support: Option<usize>,
    pub degeneracy: Option<DegeneracyLabel>,
    /// `ok`, or the failure kind for this node.
    pub status: String,
}

impl<T: Real> GridRow<T> {
    fn blank(t0: T, gbar: T) -> Self {
        Self {
            t0,
            gbar,
            m_pbc: None,
            m_obc: None,
            class_obc: None,
            mean_dipr: None,
            defective: None,
            mipr_final: None,
            max_support: None,
            degeneracy: None,
            status: "ok".into(),
        }
    }

    fn fail(&mut self, e: &Error) {
        self.status = status_text(e);
    }
}

fn status_text(e: &Error) -> String {
    let kind = match e {
        Error::InvalidParameters(_) => "invalid_parameters",
        Error::ImbalancedParameters { .. } => "imbalanced",
        Error::OddSize(_) => "odd_size",
        Error::ConvergenceFailure { .. } => "no_convergence",
        Error::EmptySpectrum => "empty_spectrum",
        Error::SingularGauge { .. } => "singular_gauge",
        Error::DimensionMismatch { .. } => "dimension_mismatch",
        Error::IllConditioned { .. } => "ill_conditioned",
        Error::WrongClass { .. } => "wrong_class",
        Error::ZeroState => "zero_state",
        Error::Overflow { .. } => "overflow",
        Error::Io(_) => "io",
        _ => "error",
    };
    format!("error:{kind}")
}

fn run_grid<T: Real>(spec: &GridSpec<T>, node: impl Fn(&mut GridRow<T>) -> Result<()> + Sync) -> Result<Vec<GridRow<T>>> {
    spec.validate()?;
    Ok(spec
        .nodes()
        .into_par_iter()
        .map(|(t0, gbar)| {
            let mut row = GridRow::blank(t0, gbar);
            if let Err(e) = node(&mut row) {
                row.fail(&e);
            }
            row
        })
        .collect())
}

fn m_obc_node<T: Real>(spec: &GridSpec<T>, row: &mut GridRow<T>) -> Result<()> {
    let p = spec.params(row.t0, row.gbar, Boundary::Open);
    let tol_abs = default_tol_abs(&build_realspace(&p)?);
    let s = ladder_spectrum_with(&p, Detail::Values)?;
    let c = classify(&s.eigenvalues, spec.tol_rel, tol_abs)?;
    row.m_obc = Some(c.m);
    row.class_obc = Some(c.label);
    Ok(())
}

fn m_pbc_node<T: Real>(spec: &GridSpec<T>, row: &mut GridRow<T>) -> Result<()> {
    let p = spec.params(row.t0, row.gbar, Boundary::Periodic);
    let tol_abs = default_tol_abs(&build_realspace(&p)?);
    let e = bloch_spectrum(&p)?;
    row.m_pbc = Some(classify(&e, spec.tol_rel, tol_abs)?.m);
    Ok(())
}

/// Spectral density `M` under both boundaries, the open-boundary class and
/// the degeneracy label at every node.
pub fn phase_diagram<T: Real>(spec: &GridSpec<T>) -> Result<Vec<GridRow<T>>> {
    run_grid(spec, |row| {
        let p = spec.params(row.t0, row.gbar, Boundary::Open);
        row.degeneracy = Some(classify_point(&p, spec.class_tol)?.label);
        if spec.boundaries.has(Boundary::Periodic) {
            m_pbc_node(spec, row)?;
        }
        if spec.boundaries.has(Boundary::Open) {
            m_obc_node(spec, row)?;
        }
        Ok(())
    })
}

/// Mean directional IPR of the open-boundary eigenbasis at every node.
pub fn dipr_map<T: Real>(spec: &GridSpec<T>) -> Result<Vec<GridRow<T>>> {
    run_grid(spec, |row| {
        let p = spec.params(row.t0, row.gbar, Boundary::Open);
        let label = classify_point(&p, spec.class_tol)?.label;
        row.degeneracy = Some(label);
        row.defective = Some(label.is_exceptional());
        let s = ladder_spectrum_with(&p, Detail::Vectors)?;
        row.mean_dipr = Some(mean_dipr(&s, p.cells)?);
        Ok(())
    })
}

/// Final mIPR of the default wave packet evolved under open boundaries.
pub fn mipr_map<T: Real>(spec: &GridSpec<T>, t_max: T, n_steps: usize) -> Result<Vec<GridRow<T>>> {
    let opts = PropagateOptions {
        method: Method::Expm,
        ..PropagateOptions::default()
    };
    run_grid(spec, |row| {
        let p = spec.params(row.t0, row.gbar, Boundary::Open);
        row.degeneracy = Some(classify_point(&p, spec.class_tol)?.label);
        let h = build_realspace(&p)?;
        let psi = default_initial_state(p.cells)?;
        let tr = propagate(&h, &psi, t_max, n_steps, &opts)?;
        row.mipr_final = tr.mipr_series.last().copied();
        row.max_support = tr.support_series.iter().copied().max();
        Ok(())
    })
}

/// Periodic (Bloch) and open spectra at one parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumOverlay<T: Real> {
    pub pbc: Vec<C<T>>,
    pub obc: Vec<C<T>>,
}

pub fn spectrum_overlay<T: Real>(p: &ModelParams<T>) -> Result<SpectrumOverlay<T>> {
    let pbc = bloch_spectrum(&p.clone().with_boundary(Boundary::Periodic))?;
    let obc = ladder_spectrum_with(&p.clone().with_boundary(Boundary::Open), Detail::Values)?.eigenvalues;
    Ok(SpectrumOverlay { pbc, obc })
}

fn opt<T: Real>(x: Option<T>) -> String {
    x.map(fmt_real).unwrap_or_default()
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(format!("csv: {e}"))
}

fn write_rows<W: Write>(out: W, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(&r).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))?;
    Ok(())
}

/// `t0,gbar,M_pbc,M_obc,class_obc,degeneracy,status`
pub fn write_phase_csv<T: Real, W: Write>(out: W, rows: &[GridRow<T>]) -> Result<()> {
    write_rows(
        out,
        &["t0", "gbar", "M_pbc", "M_obc", "class_obc", "degeneracy", "status"],
        rows.iter().map(|r| {
            vec![
                fmt_real(r.t0),
                fmt_real(r.gbar),
                opt(r.m_pbc),
                opt(r.m_obc),
                r.class_obc.map(|c| c.as_str().to_string()).unwrap_or_default(),
                r.degeneracy.map(|c| c.as_str().to_string()).unwrap_or_default(),
                r.status.clone(),
            ]
        }),
    )
}

/// `t0,gbar,mean_dipr,defective,degeneracy,status`
pub fn write_dipr_csv<T: Real, W: Write>(out: W, rows: &[GridRow<T>]) -> Result<()> {
    write_rows(
        out,
        &["t0", "gbar", "mean_dipr", "defective", "degeneracy", "status"],
        rows.iter().map(|r| {
            vec![
                fmt_real(r.t0),
                fmt_real(r.gbar),
                opt(r.mean_dipr),
                r.defective.map(|d| d.to_string()).unwrap_or_default(),
                r.degeneracy.map(|c| c.as_str().to_string()).unwrap_or_default(),
                r.status.clone(),
            ]
        }),
    )
}

/// `t0,gbar,mipr_final,max_support,status`
pub fn write_mipr_csv<T: Real, W: Write>(out: W, rows: &[GridRow<T>]) -> Result<()> {
    write_rows(
        out,
        &["t0", "gbar", "mipr_final", "max_support", "status"],
        rows.iter().map(|r| {
            vec![
                fmt_real(r.t0),
                fmt_real(r.gbar),
                opt(r.mipr_final),
                r.max_support.map(|s| s.to_string()).unwrap_or_default(),
                r.status.clone(),
            ]
        }),
    )
}

/// `boundary,index,re_E,im_E`
pub fn write_overlay_csv<T: Real, W: Write>(out: W, ov: &SpectrumOverlay<T>) -> Result<()> {
    let tagged = ov
        .pbc
        .iter()
        .enumerate()
        .map(|(i, z)| ("pbc", i, z))
        .chain(ov.obc.iter().enumerate().map(|(i, z)| ("obc", i, z)));
    write_rows(
        out,
        &["boundary", "index", "re_E", "im_E"],
        tagged.map(|(b, i, z)| vec![b.to_string(), i.to_string(), fmt_real(z.re), fmt_real(z.im)]),
    )
}

/// Straight or curved locus to overdraw on a heatmap, in data coordinates.
pub type Polyline = Vec<(f64, f64)>;

/// Exceptional lines, the BBC line and hyperbola, and the EFB diagonal when
/// it exists, clipped to the grid window.
pub fn special_loci<T: Real>(spec: &GridSpec<T>) -> Vec<(String, Polyline)> {
    let (tb, g0) = (spec.tbar.to_f64_lossy(), spec.g0.to_f64_lossy());
    let (x0, x1) = (spec.t0.min.to_f64_lossy(), spec.t0.max.to_f64_lossy());
    let (y0, y1) = (spec.gbar.min.to_f64_lossy(), spec.gbar.max.to_f64_lossy());
    let xs: Vec<f64> = linspace(x0, x1, 400);
    let curve = |f: &dyn Fn(f64) -> f64| -> Polyline {
        xs.iter()
            .map(|&x| (x, f(x)))
            .filter(|&(_, y)| y.is_finite() && y >= y0 && y <= y1)
            .collect()
    };
    let mut out = vec![
        ("EL u=0 (+)".to_string(), curve(&|t| tb + t - g0)),
        ("EL u=0 (-)".to_string(), curve(&|t| -(tb + t) - g0)),
        ("EL v=0 (+)".to_string(), curve(&|t| tb - t + g0)),
        ("EL v=0 (-)".to_string(), curve(&|t| -(tb - t) + g0)),
    ];
    if tb != 0.0 {
        out.push(("BBC line".to_string(), curve(&|t| t * g0 / tb)));
    }
    out.push(("BBC hyperbola (+)".to_string(), curve(&|t| (t * t + g0 * g0 - tb * tb).sqrt())));
    out.push(("BBC hyperbola (-)".to_string(), curve(&|t| -(t * t + g0 * g0 - tb * tb).sqrt())));
    if (tb.abs() - g0.abs()).abs() <= DEFAULT_CLASS_TOL * tb.abs().max(g0.abs()) {
        let sign = if tb * g0 >= 0.0 { 1.0 } else { -1.0 };
        out.push(("EFB".to_string(), curve(&|t| sign * t)));
    }
    out.retain(|(_, p)| p.len() >= 2);
    out
}

fn colour(x: f64, lo: f64, hi: f64) -> String {
    if !x.is_finite() {
        return "#808080".into();
    }
    // blue (lo) to white to red (hi)
    let s = if hi > lo { ((x - lo) / (hi - lo)).clamp(0.0, 1.0) } else { 0.5 };
    let (r, g, b) = if s < 0.5 {
        let k = s / 0.5;
        (k, k, 1.0)
    } else {
        let k = (1.0 - s) / 0.5;
        (1.0, k, k)
    };
    format!("#{:02x}{:02x}{:02x}", (r * 255.0) as u8, (g * 255.0) as u8, (b * 255.0) as u8)
}

/// Heatmap of one row field with a linear colour map over `[lo, hi]`.
pub fn heatmap_svg<T: Real>(
    spec: &GridSpec<T>,
    rows: &[GridRow<T>],
    value: impl Fn(&GridRow<T>) -> Option<T>,
    (lo, hi): (f64, f64),
    title: &str,
) -> String {
    let (nx, ny) = (spec.t0.points, spec.gbar.points);
    let (w, h, pad) = (600.0, 600.0, 60.0);
    let (cw, ch) = (w / nx as f64, h / ny as f64);
    let (x0, x1) = (spec.t0.min.to_f64_lossy(), spec.t0.max.to_f64_lossy());
    let (y0, y1) = (spec.gbar.min.to_f64_lossy(), spec.gbar.max.to_f64_lossy());
    let px = |x: f64| pad + (x - x0) / (x1 - x0) * w;
    let py = |y: f64| pad + h - (y - y0) / (y1 - y0) * h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" font-family="sans-serif" font-size="14">"#,
        w + 2.0 * pad,
        h + 2.0 * pad
    );
    let _ = writeln!(s, r#"<text x="{}" y="30" text-anchor="middle">{}</text>"#, pad + w / 2.0, title);
    for (k, r) in rows.iter().enumerate() {
        let (i, j) = (k % nx, k / nx);
        let v = value(r).map(|x| x.to_f64_lossy()).unwrap_or(f64::NAN);
        let _ = writeln!(
            s,
            r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{}" data-t0="{}" data-gbar="{}" data-value="{}"/>"#,
            pad + i as f64 * cw,
            pad + h - (j + 1) as f64 * ch,
            cw + 0.05,
            ch + 0.05,
            colour(v, lo, hi),
            fmt_real(r.t0),
            fmt_real(r.gbar),
            v
        );
    }
    for (name, line) in special_loci(spec) {
        let pts: Vec<String> = line.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="orange" stroke-width="1.5"><title>{}</title></polyline>"#,
            pts.join(" "),
            name
        );
    }
    let _ = writeln!(
        s,
        r#"<rect x="{pad}" y="{pad}" width="{w}" height="{h}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">t0</text>"#,
        pad + w / 2.0,
        h + 2.0 * pad - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{}" text-anchor="middle" transform="rotate(-90 20 {})">gbar</text>"#,
        pad + h / 2.0,
        pad + h / 2.0
    );
    for (v, anchor_x, anchor_y) in [(x0, px(x0), h + pad + 18.0), (x1, px(x1), h + pad + 18.0)] {
        let _ = writeln!(s, r#"<text x="{anchor_x}" y="{anchor_y}" text-anchor="middle">{v}</text>"#);
    }
    for v in [y0, y1] {
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{v}</text>"#, pad - 6.0, py(v) + 5.0);
    }
    s.push_str("</svg>\n");
    s
}

/// Complex-plane scatter: periodic spectrum as dots, open spectrum as crosses.
pub fn overlay_svg<T: Real>(ov: &SpectrumOverlay<T>) -> String {
    let all: Vec<(f64, f64)> = ov
        .pbc
        .iter()
        .chain(&ov.obc)
        .map(|z| (z.re.to_f64_lossy(), z.im.to_f64_lossy()))
        .collect();
    let r = all
        .iter()
        .map(|&(x, y)| x.abs().max(y.abs()))
        .fold(0.0, f64::max)
        .max(1e-12)
        * 1.1;
    let (size, pad) = (600.0, 50.0);
    let px = |x: f64| pad + (x + r) / (2.0 * r) * size;
    let py = |y: f64| pad + size - (y + r) / (2.0 * r) * size;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{0}" height="{0}" font-family="sans-serif" font-size="14">"#,
        size + 2.0 * pad
    );
    let _ = writeln!(
        s,
        r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="silver"/><line x1="{}" y1="{}" x2="{}" y2="{}" stroke="silver"/>"#,
        px(-r),
        py(0.0),
        px(r),
        py(0.0),
        px(0.0),
        py(-r),
        px(0.0),
        py(r)
    );
    for z in &ov.pbc {
        let (x, y) = (z.re.to_f64_lossy(), z.im.to_f64_lossy());
        let _ = writeln!(
            s,
            r#"<circle cx="{:.3}" cy="{:.3}" r="2.5" fill="blue" data-re="{x}" data-im="{y}"/>"#,
            px(x),
            py(y)
        );
    }
    for z in &ov.obc {
        let (x, y) = (z.re.to_f64_lossy(), z.im.to_f64_lossy());
        let (cx, cy) = (px(x), py(y));
        let _ = writeln!(
            s,
            r#"<path d="M{:.3},{:.3}L{:.3},{:.3}M{:.3},{:.3}L{:.3},{:.3}" stroke="red" data-re="{x}" data-im="{y}"/>"#,
            cx - 3.0,
            cy - 3.0,
            cx + 3.0,
            cy + 3.0,
            cx - 3.0,
            cy + 3.0,
            cx + 3.0,
            cy - 3.0
        );
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">Re E</text>"#, pad + size / 2.0, size + 2.0 * pad - 10.0);
    let _ = writeln!(s, r#"<text x="15" y="{0}" transform="rotate(-90 15 {0})" text-anchor="middle">Im E</text>"#, pad + size / 2.0);
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(g0: f64, n: usize) -> GridSpec<f64> {
        GridSpec {
            t0: Axis { min: -2.0, max: 2.0, points: n },
            gbar: Axis { min: -2.0, max: 2.0, points: n },
            cells: 8,
            snap_special: true,
            ..GridSpec::new(g0)
        }
    }

    #[test]
    fn snapping_hits_specials() {
        let s = small(0.5, 101);
        let t = s.t0_values();
        for v in [-1.0, -0.5, 0.5, 1.0] {
            assert!(t.contains(&v), "{v}");
        }
        assert!(t.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(t[0], -2.0);
        assert_eq!(t[100], 2.0);
    }

    #[test]
    fn snap_skips_out_of_range() {
        let mut a = linspace(0.0, 1.0, 5);
        snap(&mut a, &[-3.0, 0.3, 7.0]);
        assert_eq!(a, vec![0.0, 0.3, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn rows_are_row_major() {
        let s = GridSpec { snap_special: false, ..small(0.5, 3) };
        let rows = phase_diagram(&s).unwrap();
        let order: Vec<(f64, f64)> = rows.iter().map(|r| (r.t0, r.gbar)).collect();
        assert_eq!(order[0], (-2.0, -2.0));
        assert_eq!(order[1], (0.0, -2.0));
        assert_eq!(order[3], (-2.0, 0.0));
    }

    #[test]
    fn triple_point_node_collapses() {
        let rows = phase_diagram(&small(0.5, 9)).unwrap();
        let r = rows.iter().find(|r| r.t0 == 0.5 && r.gbar == 1.0).unwrap();
        assert_eq!(r.class_obc, Some(SpectralLabel::Collapsed));
        assert_eq!(r.degeneracy, Some(DegeneracyLabel::TriplePoint));
        assert_eq!(r.status, "ok");
    }

    #[test]
    fn invalid_grid_rejected() {
        let mut s = small(0.5, 5);
        s.t0.points = 1;
        assert!(phase_diagram(&s).is_err());
        let mut s = small(0.5, 5);
        s.cells = 7;
        assert_eq!(phase_diagram(&s), Err(Error::OddSize(7)));
    }

    #[test]
    fn csv_headers() {
        let rows = phase_diagram(&small(0.5, 2)).unwrap();
        let mut buf = Vec::new();
        write_phase_csv(&mut buf, &rows).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("t0,gbar,M_pbc,M_obc,class_obc,degeneracy,status\n"));
        let mut buf = Vec::new();
        write_dipr_csv(&mut buf, &rows).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("t0,gbar,mean_dipr,defective,degeneracy,status\n"));
        let mut buf = Vec::new();
        write_mipr_csv(&mut buf, &rows).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("t0,gbar,mipr_final,max_support,status\n"));
    }

    #[test]
    fn loci_include_efb_when_tbar_equals_g0() {
        let names: Vec<String> = special_loci(&small(1.0, 5)).into_iter().map(|(n, _)| n).collect();
        assert!(names.iter().any(|n| n == "EFB"));
        let names: Vec<String> = special_loci(&small(0.5, 5)).into_iter().map(|(n, _)| n).collect();
        assert!(!names.iter().any(|n| n == "EFB"));
    }
}
