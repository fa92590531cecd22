use std::path::Path;
use std::process::{Command, Output};

fn creutz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_creutz")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = creutz(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

/// Column names and data rows below the `#` header.
fn table(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let cols = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (cols, rows)
}

fn column(cols: &[String], name: &str) -> usize {
    cols.iter().position(|c| c == name).unwrap_or_else(|| panic!("no column {name} in {cols:?}"))
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn hermitian_flat_band_spectrum() {
    let (cols, rows) = table(&ok(&["spectrum", "--t0", "1", "--gbar", "0", "--g0", "0", "--boundary", "pbc"]));
    let (re, im) = (column(&cols, "re_E"), column(&cols, "im_E"));
    assert_eq!(rows.len(), 100);
    for r in &rows {
        assert!((num(&r[re]).abs() - 2.0).abs() <= 1e-10 && num(&r[im]).abs() <= 1e-10, "{r:?}");
    }
}

#[test]
fn exceptional_flat_band_spectrum_is_zero() {
    let (cols, rows) = table(&ok(&["spectrum", "--t0", "0.7", "--gbar", "0.7", "--g0", "1", "--boundary", "obc"]));
    let (re, im) = (column(&cols, "re_E"), column(&cols, "im_E"));
    assert!(rows.iter().all(|r| num(&r[re]).hypot(num(&r[im])) <= 1e-6));
}

#[test]
fn both_boundaries_are_tagged() {
    let (cols, rows) = table(&ok(&["spectrum", "--t0", "0.3", "--gbar", "0.2", "--g0", "0.1", "--L", "6", "--boundary", "both"]));
    let b = column(&cols, "boundary");
    assert_eq!(rows.iter().filter(|r| r[b] == "pbc").count(), 12);
    assert_eq!(rows.iter().filter(|r| r[b] == "obc").count(), 12);
}

#[test]
fn usage_errors_exit_2() {
    let out = creutz(&["spectrum", "--t0", "1", "--gbar", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    for args in [
        &["phase", "--g0", "0.5", "--grid", "10"][..],
        &["phase", "--g0", "0.5", "--L", "7"],
        &["spectrum", "--t0", "1", "--gbar", "0", "--g0", "0", "--L", "0"],
        &["classify", "--t0", "0.5", "--gbar", "1", "--g0", "0.5", "--dt", "0.1"],
        &["evolve", "--t0", "1", "--gbar", "0.5", "--g0", "0.5", "--L", "10", "--cell", "11"],
    ] {
        assert_eq!(creutz(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn phase_row_count() {
    let (cols, rows) = table(&ok(&["phase", "--g0", "0.5", "--grid", "101x101", "--range=-2:2", "--L", "6", "--boundary", "pbc"]));
    assert_eq!(rows.len(), 10201);
    assert_eq!(cols[..2], ["t0", "gbar"]);
}

#[test]
fn dipr_flags_exceptional_flat_band_diagonal() {
    let (cols, rows) = table(&ok(&["dipr", "--g0", "1", "--snap-special", "--grid", "9x9", "--L", "8"]));
    let (t0, gbar, deg, def) = (column(&cols, "t0"), column(&cols, "gbar"), column(&cols, "degeneracy"), column(&cols, "defective"));
    let diagonal: Vec<_> = rows.iter().filter(|r| r[t0] == r[gbar]).collect();
    assert_eq!(diagonal.len(), 9);
    for r in diagonal {
        assert!(r[deg].starts_with("EFB"), "{r:?}");
        assert_eq!(r[def], "true");
    }
}

#[test]
fn mipr_header_records_t_max() {
    let text = ok(&["mipr", "--g0", "0.5", "--t-max", "20", "--grid", "3x3", "--L", "8", "--steps", "20"]);
    assert!(text.lines().any(|l| l == "# t-max=20.0"), "{text}");
    let (cols, rows) = table(&text);
    assert_eq!(rows.len(), 9);
    assert!(cols.contains(&"mipr_final".to_string()));
}

#[test]
fn classify_labels() {
    let label = |t0: &str, gbar: &str, g0: &str| {
        let v: serde_json::Value = serde_json::from_str(&ok(&["classify", "--t0", t0, "--gbar", gbar, "--g0", g0])).unwrap();
        v
    };
    assert_eq!(label("0.5", "1", "0.5")["degeneracy"]["label"], "TriplePoint");
    let dfb = label("1", "0.5", "0.5");
    assert_eq!(dfb["degeneracy"]["label"], "DiabolicalFlatBand");
    assert!((dfb["degeneracy"]["lambda_re"].as_f64().unwrap() - 2.0 * 0.75f64.sqrt()).abs() <= 1e-9);
    let generic = label("0.3", "0.2", "0.1");
    assert_eq!(generic["degeneracy"]["label"], "Generic");
    assert_eq!(generic["config"]["t0"], "0.3");
    assert!(generic["gauge"]["xi_inv"].is_number());
}

#[test]
fn compacton_support_stays_within_three_cells() {
    let dir = tempfile::tempdir().unwrap();
    let summary = dir.path().join("summary.csv");
    ok(&[
        "evolve", "--t0", "1", "--gbar", "0.5", "--g0", "0.5", "--t-max", "20", "--steps", "200",
        "--summary", summary.to_str().unwrap(), "-o", dir.path().join("trace.csv").to_str().unwrap(),
    ]);
    let (cols, rows) = table(&read(&summary));
    let s = column(&cols, "max_support");
    assert_eq!(rows.len(), 201);
    assert!(rows.iter().all(|r| r[s].parse::<usize>().unwrap() <= 3));
}

#[test]
fn self_check_passes_at_exceptional_flat_band() {
    let out = creutz(&["evolve", "--t0", "0.7", "--gbar", "0.7", "--g0", "1", "--self-check", "--t-max", "5", "--steps", "20"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn hermitian_evolution_keeps_unit_norm() {
    let (cols, rows) = table(&ok(&["evolve", "--t0", "0.5", "--gbar", "0", "--g0", "0", "--L", "20", "--self-check"]));
    let n = column(&cols, "norm");
    assert!(rows.iter().all(|r| (num(&r[n]) - 1.0).abs() <= 1e-9));
}

#[test]
fn overflow_without_renormalization_exits_3() {
    let out = creutz(&[
        "evolve", "--t0", "0.5", "--gbar", "2", "--g0", "1", "--boundary", "pbc", "--overflow", "error", "--t-max", "400",
        "--steps", "20",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn header_reproduces_output() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["phase", "--g0", "0.5", "--grid", "5x4", "--L", "6", "--t0-range=-1:1.5", "--snap-special"][..],
        &["dipr", "--g0", "0.8", "--grid", "3x3", "--L", "8", "--tol-rel", "1e-8"],
        &["evolve", "--t0", "0.4", "--gbar", "0.3", "--g0", "0.2", "--L", "8", "--steps", "5", "--weight-b", "0,1"],
        &["spectrum", "--t0", "0.4", "--gbar", "0.3", "--g0", "0.2", "--L", "8", "--boundary", "both"],
    ] {
        let first = dir.path().join("first");
        let second = dir.path().join("second");
        let mut a = args.to_vec();
        a.extend(["-o", first.to_str().unwrap()]);
        ok(&a);
        ok(&[args[0], "--config", first.to_str().unwrap(), "-o", second.to_str().unwrap()]);
        assert_eq!(read(&first), read(&second), "{args:?}");
    }
}

#[test]
fn explicit_flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg");
    std::fs::write(&cfg, "g0=0.5\ngrid=3x3\nL=6\n").unwrap();
    let text = ok(&["phase", "--config", cfg.to_str().unwrap(), "--g0", "0.25"]);
    assert!(text.contains("# g0=0.25\n"));
    assert!(text.contains("# grid=3x3\n"));
    std::fs::write(&cfg, "command=dipr\n").unwrap();
    assert_eq!(creutz(&["phase", "--config", cfg.to_str().unwrap(), "--g0", "1"]).status.code(), Some(2));
}

#[test]
fn thread_count_does_not_change_output() {
    let args = ["dipr", "--g0", "0.6", "--grid", "6x5", "--L", "10"];
    let one = ok(&[&["--threads", "1"][..], &args].concat());
    let four = ok(&[&["--threads", "4"][..], &args].concat());
    assert_eq!(one, four);
}

#[test]
fn json_and_svg_outputs() {
    let v: serde_json::Value = serde_json::from_str(&ok(&["phase", "--g0", "0.5", "--grid", "2x2", "--L", "6", "--format", "json"])).unwrap();
    assert_eq!(v["config"]["format"], "json");
    let svg = ok(&["phase", "--g0", "0.5", "--grid", "2x2", "--L", "6", "--format", "svg"]);
    assert!(svg.starts_with("<!--\n# command=phase\n"));
    assert!(svg.contains("<svg"));
}

#[test]
fn missing_output_directory_exits_1() {
    let out = creutz(&["classify", "--t0", "0.3", "--gbar", "0.2", "--g0", "0.1", "-o", "/nonexistent/dir/out.json"]);
    assert_eq!(out.status.code(), Some(1));
}
