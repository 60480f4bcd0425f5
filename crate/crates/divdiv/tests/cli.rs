use std::process::Command;

use divdiv::core::mesh::Domain;
use divdiv::meshio::read_mesh;
use divdiv::report::ConvergenceReport;

fn divdiv() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_divdiv"));
    c.env("DIVDIV_THREADS", "2");
    c
}

#[test]
fn csv_is_deterministic_across_runs_and_thread_counts() {
    let a = divdiv().args(["--levels", "3"]).output().unwrap();
    let b = divdiv().args(["--levels", "3"]).env("DIVDIV_THREADS", "1").output().unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().nth(1).unwrap().starts_with("1,1.414214e+00,"));
}

#[test]
fn json_report_roundtrips_through_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let mesh = dir.path().join("mesh.txt");
    let status = divdiv()
        .args(["--example", "square-nonuniform", "--levels", "2", "--format", "json", "--solver", "krylov"])
        .arg("--out")
        .arg(&out)
        .arg("--export-mesh")
        .arg(&mesh)
        .status()
        .unwrap();
    assert!(status.success());
    let report = ConvergenceReport::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(report.complete);
    assert_eq!(report.levels.len(), 2);
    assert!(report.levels[1].rates.is_some());
    let m = read_mesh(std::io::BufReader::new(std::fs::File::open(&mesh).unwrap()), Domain::UnitSquare).unwrap();
    assert_eq!(m.n_triangles(), report.levels[1].n_triangles);
}

#[test]
fn system_export_writes_matrix_market_files() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("sys");
    let status = divdiv().args(["--levels", "1", "--export-system"]).arg(&prefix).status().unwrap();
    assert!(status.success());
    let m = std::fs::read_to_string(dir.path().join("sys_M.mtx")).unwrap();
    assert!(m.starts_with("%%MatrixMarket matrix coordinate real general"));
    assert!(dir.path().join("sys_B.mtx").exists());
}

#[test]
fn exit_codes() {
    let code = |c: &mut Command| c.output().unwrap().status.code();
    assert_eq!(code(divdiv().args(["--levels", "0"])), Some(4));
    assert_eq!(code(divdiv().args(["--tol=-1"])), Some(4));
    assert_eq!(code(divdiv().args(["--example", "disk"])), Some(4));
    assert_eq!(code(divdiv().env("DIVDIV_THREADS", "zero")), Some(4));
    assert_eq!(code(divdiv().arg("--help")), Some(0));
    assert_eq!(code(divdiv().args(["--check", "unisolvence"])), Some(0));
}

#[test]
fn exhausted_krylov_budget_reports_a_level_failure() {
    // tolerance below attainable accuracy: the solver stops with NotConverged
    let out = divdiv().args(["--levels", "2", "--solver", "krylov", "--tol", "1e-30"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1, "only the header: level 1 already fails");
}
