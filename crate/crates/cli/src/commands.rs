use std::io::Write;

use creutz_core::degeneracy::{degeneracy_report, nilpotency_order, DEFAULT_NILPOTENCY_TOL};
use creutz_core::dynamics::{
    initial_state, propagate, write_trace_csv, Method, OverflowPolicy, PropagateOptions, WavepacketTrace,
};
use creutz_core::gauge::gauge_report;
use creutz_core::linalg::{vec_norm, ComplexMatrix};
use creutz_core::localization::write_localization_csv;
use creutz_core::model::{build_realspace, Boundary, ModelParams};
use creutz_core::spectral::{
    bloch_spectrum, classify as spectral_class, default_tol_abs, ladder_spectrum, ladder_spectrum_with,
    write_spectrum_csv, Detail,
};
use creutz_core::sweep::{
    dipr_map, heatmap_svg, mipr_map, overlay_svg, phase_diagram, write_dipr_csv, write_mipr_csv,
    write_overlay_csv, write_phase_csv, Axis, BoundarySet, GridRow, GridSpec, SpectrumOverlay,
};
use creutz_core::Complex64;

use crate::config::Header;
use crate::{
    ClassifyArgs, EvolveArgs, Failure, Format, GridArgs, MethodArg, MiprArgs, OutArgs, OverflowArg, PhaseArgs,
    PointArgs, Span, SpectrumArgs,
};

type Outcome = Result<(), Failure>;

const TWO_TERM_TOL: f64 = 1e-10;
const NORM_TOL: f64 = 1e-9;
const CROSS_METHOD_TOL: f64 = 1e-8;

fn point_header(h: &mut Header, p: &PointArgs) {
    h.num("tbar", p.tbar);
    h.num("t0", p.t0);
    h.num("gbar", p.gbar);
    h.num("g0", p.g0);
    h.num("dt", p.dt);
    h.num("dgamma", p.dgamma);
    h.push("L", p.cells);
}

fn params(p: &PointArgs, boundary: Boundary) -> ModelParams<f64> {
    ModelParams::from_averages(p.tbar, p.dt, p.t0, p.gbar, p.dgamma, p.g0, p.cells, boundary)
}

fn sink(path: &Option<std::path::PathBuf>, bytes: &[u8]) -> Outcome {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| Failure::io(format!("{}: {e}", p.display()))),
        None => std::io::stdout()
            .lock()
            .write_all(bytes)
            .map_err(|e| Failure::io(e.to_string())),
    }
}

/// The JSON mirror of a CSV table: one object per row, numeric cells as
/// numbers and empty cells as null.
fn csv_to_json(csv: &[u8]) -> serde_json::Value {
    let text = String::from_utf8_lossy(csv);
    let mut lines = text.lines();
    let cols: Vec<&str> = lines.next().map(|l| l.split(',').collect()).unwrap_or_default();
    let rows = lines
        .map(|l| {
            let obj = cols
                .iter()
                .zip(l.split(','))
                .map(|(c, v)| {
                    let val = if v.is_empty() {
                        serde_json::Value::Null
                    } else if let Ok(x) = v.parse::<f64>() {
                        serde_json::Number::from_f64(x).map_or(serde_json::Value::Null, Into::into)
                    } else {
                        serde_json::Value::String(v.to_string())
                    };
                    (c.to_string(), val)
                })
                .collect();
            serde_json::Value::Object(obj)
        })
        .collect();
    serde_json::Value::Array(rows)
}

fn json_doc(header: &Header, key: &str, body: serde_json::Value) -> Vec<u8> {
    let mut doc = serde_json::Map::new();
    doc.insert("config".into(), header.to_json());
    doc.insert(key.into(), body);
    let mut s = serde_json::to_string_pretty(&serde_json::Value::Object(doc)).unwrap_or_default();
    s.push('\n');
    s.into_bytes()
}

fn svg_doc(header: &Header, svg: &str) -> Vec<u8> {
    format!("<!--\n{}-->\n{svg}", header.comment_lines()).into_bytes()
}

/// Write a table in the requested format; `svg` is only built when asked for.
fn emit_table(out: &OutArgs, header: &Header, csv: Vec<u8>, svg: impl FnOnce() -> Option<String>) -> Outcome {
    let bytes = match out.format {
        Format::Csv => {
            let mut b = header.comment_lines().into_bytes();
            b.extend(csv);
            b
        }
        Format::Json => json_doc(header, "rows", csv_to_json(&csv)),
        Format::Svg => match svg() {
            Some(s) => svg_doc(header, &s),
            None => return Err(Failure::usage("svg output is not available for this command")),
        },
    };
    sink(&out.out, &bytes)
}

fn out_header(h: &mut Header, out: &OutArgs) {
    h.push("format", out.format.as_str());
    h.push("seed", out.seed);
}

pub fn spectrum(a: &SpectrumArgs) -> Outcome {
    let mut h = Header::new("spectrum");
    point_header(&mut h, &a.point);
    h.push("boundary", a.boundary.as_str());
    h.flag("dipr", a.dipr);
    out_header(&mut h, &a.out);

    let base = params(&a.point, Boundary::Open);
    base.validate()?;
    let mut csv = Vec::new();
    if a.dipr {
        let b = match a.boundary {
            BoundarySet::Obc => Boundary::Open,
            BoundarySet::Pbc => Boundary::Periodic,
            BoundarySet::Both => return Err(Failure::usage("--dipr needs a single boundary")),
        };
        let s = ladder_spectrum(&base.with_boundary(b), true)?;
        if a.out.format == Format::Svg {
            return Err(Failure::usage("--dipr has no svg form"));
        }
        write_localization_csv(&mut csv, &s, base.cells)?;
        return emit_table(&a.out, &h, csv, || None);
    }
    let ov = SpectrumOverlay {
        pbc: if a.boundary.has(Boundary::Periodic) {
            bloch_spectrum(&base.with_boundary(Boundary::Periodic))?
        } else {
            Vec::new()
        },
        obc: if a.boundary.has(Boundary::Open) {
            ladder_spectrum_with(&base, Detail::Values)?.eigenvalues
        } else {
            Vec::new()
        },
    };
    match a.boundary {
        BoundarySet::Both => write_overlay_csv(&mut csv, &ov)?,
        BoundarySet::Obc => write_spectrum_csv(&mut csv, &ov.obc)?,
        BoundarySet::Pbc => write_spectrum_csv(&mut csv, &ov.pbc)?,
    }
    emit_table(&a.out, &h, csv, || Some(overlay_svg(&ov)))
}

fn grid_spec(a: &GridArgs) -> Result<(GridSpec<f64>, Span, Span), Failure> {
    let default = Span(creutz_core::sweep::DEFAULT_RANGE.0, creutz_core::sweep::DEFAULT_RANGE.1);
    let t0 = a.t0_range.or(a.range).unwrap_or(default);
    let gbar = a.gbar_range.or(a.range).unwrap_or(default);
    let mut spec = GridSpec::new(a.g0);
    spec.tbar = a.tbar;
    spec.cells = a.cells;
    spec.t0 = Axis { min: t0.0, max: t0.1, points: a.grid.0 };
    spec.gbar = Axis { min: gbar.0, max: gbar.1, points: a.grid.1 };
    spec.snap_special = a.snap_special;
    spec.class_tol = a.class_tol;
    spec.tol_rel = a.tol_rel;
    spec.validate()?;
    Ok((spec, t0, gbar))
}

fn grid_header(command: &str, a: &GridArgs, t0: Span, gbar: Span) -> Header {
    let mut h = Header::new(command);
    h.num("tbar", a.tbar);
    h.num("g0", a.g0);
    h.push("L", a.cells);
    h.push("grid", a.grid);
    h.push("t0-range", t0);
    h.push("gbar-range", gbar);
    h.flag("snap-special", a.snap_special);
    h.num("class-tol", a.class_tol);
    h.num("tol-rel", a.tol_rel);
    h
}

fn value_range(rows: &[GridRow<f64>], f: impl Fn(&GridRow<f64>) -> Option<f64>, symmetric: bool) -> (f64, f64) {
    let vals = rows.iter().filter_map(&f).filter(|x| x.is_finite());
    let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| (l.min(x), h.max(x)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if symmetric {
        let m = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
        (-m, m)
    } else {
        (lo, hi)
    }
}

pub fn phase(a: &PhaseArgs) -> Outcome {
    let (mut spec, t0, gbar) = grid_spec(&a.grid)?;
    spec.boundaries = a.boundary;
    let mut h = grid_header("phase", &a.grid, t0, gbar);
    h.push("boundary", a.boundary.as_str());
    out_header(&mut h, &a.grid.out);
    let rows = phase_diagram(&spec)?;
    let mut csv = Vec::new();
    write_phase_csv(&mut csv, &rows)?;
    emit_table(&a.grid.out, &h, csv, || {
        Some(if a.boundary.has(Boundary::Open) {
            heatmap_svg(&spec, &rows, |r| r.m_obc, (-1.0, 1.0), "M (open)")
        } else {
            heatmap_svg(&spec, &rows, |r| r.m_pbc, (-1.0, 1.0), "M (periodic)")
        })
    })
}

pub fn dipr(a: &GridArgs) -> Outcome {
    let (spec, t0, gbar) = grid_spec(a)?;
    let mut h = grid_header("dipr", a, t0, gbar);
    out_header(&mut h, &a.out);
    let rows = dipr_map(&spec)?;
    let mut csv = Vec::new();
    write_dipr_csv(&mut csv, &rows)?;
    emit_table(&a.out, &h, csv, || {
        let range = value_range(&rows, |r| r.mean_dipr, true);
        Some(heatmap_svg(&spec, &rows, |r| r.mean_dipr, range, "mean dIPR"))
    })
}

pub fn mipr(a: &MiprArgs) -> Outcome {
    let (spec, t0, gbar) = grid_spec(&a.grid)?;
    let mut h = grid_header("mipr", &a.grid, t0, gbar);
    h.num("t-max", a.t_max);
    h.push("steps", a.steps);
    out_header(&mut h, &a.grid.out);
    let rows = mipr_map(&spec, a.t_max, a.steps)?;
    let mut csv = Vec::new();
    write_mipr_csv(&mut csv, &rows)?;
    emit_table(&a.grid.out, &h, csv, || {
        let range = value_range(&rows, |r| r.mipr_final, true);
        Some(heatmap_svg(&spec, &rows, |r| r.mipr_final, range, "final mIPR"))
    })
}

pub fn classify(a: &ClassifyArgs) -> Outcome {
    let mut h = Header::new("classify");
    point_header(&mut h, &a.point);
    h.push("boundary", a.boundary);
    h.num("class-tol", a.class_tol);
    h.num("tol-rel", a.tol_rel);
    if let Some(t) = a.tol_abs {
        h.num("tol-abs", t);
    }
    h.push("seed", a.seed);

    let p = params(&a.point, a.boundary);
    p.validate()?;
    p.require_balanced()?;
    let report = degeneracy_report(&p, a.class_tol)?;
    let gauge = gauge_report(&p, a.class_tol)?;
    let tol_abs = match a.tol_abs {
        Some(t) => t,
        None => default_tol_abs(&build_realspace(&p)?),
    };
    let eigs = match a.boundary {
        Boundary::Open => ladder_spectrum_with(&p, Detail::Values)?.eigenvalues,
        Boundary::Periodic => bloch_spectrum(&p)?,
    };
    let class = spectral_class(&eigs, a.tol_rel, tol_abs)?;

    let mut doc = serde_json::Map::new();
    doc.insert("config".into(), h.to_json());
    doc.insert("degeneracy".into(), report.to_json());
    doc.insert("gauge".into(), gauge.to_json());
    doc.insert(
        "spectral".into(),
        serde_json::json!({ "boundary": a.boundary.as_str(), "label": class.label.as_str(), "M": class.m }),
    );
    let mut s = serde_json::to_string_pretty(&serde_json::Value::Object(doc)).unwrap_or_default();
    s.push('\n');
    sink(&a.out, s.as_bytes())
}

fn method(m: MethodArg) -> Method {
    match m {
        MethodArg::Auto => Method::Auto,
        MethodArg::Expm => Method::Expm,
        MethodArg::Eigen => Method::Eigen,
    }
}

pub fn evolve(a: &EvolveArgs) -> Outcome {
    let cell = a.cell.unwrap_or(a.point.cells.div_ceil(2));
    let mut h = Header::new("evolve");
    point_header(&mut h, &a.point);
    h.push("boundary", a.boundary);
    h.num("t-max", a.t_max);
    h.push("steps", a.steps);
    h.push("cell", cell);
    h.push("weight-a", a.weight_a);
    h.push("weight-b", a.weight_b);
    h.push("method", format!("{:?}", a.method).to_lowercase());
    h.push("overflow", format!("{:?}", a.overflow).to_lowercase());
    h.num("support-fraction", a.support_fraction);
    h.flag("self-check", a.self_check);
    out_header(&mut h, &a.out);
    if a.out.format == Format::Svg {
        return Err(Failure::usage("svg output is not available for evolve"));
    }

    let p = params(&a.point, a.boundary);
    p.validate()?;
    let hm = build_realspace(&p)?;
    let weights = (
        Complex64::new(a.weight_a.0, a.weight_a.1),
        Complex64::new(a.weight_b.0, a.weight_b.1),
    );
    let psi0 = initial_state(p.cells, cell, weights)?;
    let opts = PropagateOptions {
        method: method(a.method),
        overflow: match a.overflow {
            OverflowArg::Renormalize => OverflowPolicy::Renormalize,
            OverflowArg::Error => OverflowPolicy::Error,
        },
        support_fraction: a.support_fraction,
    };
    let trace = propagate(&hm, &psi0, a.t_max, a.steps, &opts)?;

    let mut csv = Vec::new();
    write_trace_csv(&mut csv, &trace)?;
    emit_table(&a.out, &h, csv, || None)?;

    if let Some(path) = &a.summary {
        let mut s = h.comment_lines();
        s.push_str("t,norm,log_norm,mipr,max_support\n");
        for m in 0..trace.len() {
            s.push_str(&format!(
                "{:?},{:?},{:?},{:?},{}\n",
                trace.times[m], trace.norms[m], trace.log_norms[m], trace.mipr_series[m], trace.support_series[m]
            ));
        }
        sink(&Some(path.clone()), s.as_bytes())?;
    }

    if a.self_check {
        self_check(&hm, &psi0, &trace, a, &opts)?;
    }
    Ok(())
}

fn self_check(
    h: &ComplexMatrix<f64>,
    psi0: &[Complex64],
    trace: &WavepacketTrace<f64>,
    a: &EvolveArgs,
    opts: &PropagateOptions<f64>,
) -> Outcome {
    let scale = h.inf_norm().max(1.0);
    let (kind, dev, tol) = if nilpotency_order(h, DEFAULT_NILPOTENCY_TOL) == Some(2) {
        // H^2 = 0, so exp(-iHt) psi0 = psi0 - i t H psi0
        let hp = h.matvec(psi0);
        let mut worst = 0.0f64;
        for m in 0..trace.len() {
            let t = trace.times[m];
            let expect: Vec<Complex64> = psi0
                .iter()
                .zip(&hp)
                .map(|(&x, &y)| x - Complex64::new(0.0, t) * y)
                .collect();
            let got = trace.raw_state(m);
            let diff: Vec<Complex64> = got.iter().zip(&expect).map(|(x, y)| x - y).collect();
            worst = worst.max(vec_norm(&diff) / vec_norm(&expect));
        }
        ("two-term", worst, TWO_TERM_TOL)
    } else if h.hermiticity_defect() <= 1e-14 * scale {
        let worst = trace.norms.iter().map(|n| (n - 1.0).abs()).fold(0.0, f64::max);
        ("unit-norm", worst, NORM_TOL)
    } else {
        let other = PropagateOptions {
            method: if trace.used_eigen { Method::Expm } else { Method::Eigen },
            ..*opts
        };
        match propagate(h, psi0, a.t_max, a.steps, &other) {
            Ok(alt) => {
                let mut worst = 0.0f64;
                for m in 0..trace.len() {
                    let diff: Vec<Complex64> =
                        trace.states[m].iter().zip(&alt.states[m]).map(|(x, y)| x - y).collect();
                    let dl = (trace.log_norms[m] - alt.log_norms[m]).abs() / trace.log_norms[m].abs().max(1.0);
                    worst = worst.max(vec_norm(&diff)).max(dl);
                }
                ("cross-method", worst, CROSS_METHOD_TOL)
            }
            Err(e) => {
                eprintln!("self-check skipped: no independent route ({e})");
                return Ok(());
            }
        }
    };
    if dev <= tol {
        eprintln!("self-check {kind}: max deviation {dev:.3e} <= {tol:e} ok");
        Ok(())
    } else {
        Err(Failure::numerical(format!(
            "self-check {kind} failed: max deviation {dev:.3e} > {tol:e}"
        )))
    }
}
