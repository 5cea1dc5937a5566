use std::path::PathBuf;
use std::process::Command;

fn bench() -> Command {
    Command::new(env!("CARGO_BIN_EXE_krylov-bench"))
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("krylov-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

#[test]
fn hilbert_sweep_writes_csv_summary_and_plots() {
    let dir = scratch("hilbert");
    let out = bench()
        .args(["hilbert", "--sizes", "2-5", "--trials", "2", "--methods", "cg,gmres"])
        .arg("--out-dir")
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("hilbert.csv")).unwrap();
    assert!(csv.starts_with("family,n,cond,method,policy,seed,"));
    // 4 sizes × 2 trials × (2 methods × 3 policies + lu)
    assert_eq!(csv.lines().count(), 1 + 4 * 2 * 7);
    assert!(dir.join("hilbert_summary.csv").is_file());
    for stem in ["solution_norm", "residual_norm"] {
        let svg = std::fs::read_to_string(dir.join(format!("hilbert_{stem}.svg"))).unwrap();
        assert!(svg.starts_with("<svg"));
    }

    let plot = dir.join("cg.svg");
    let out = bench()
        .args(["plot", "--metric", "solution", "--only", "cg"])
        .arg("--input")
        .arg(dir.join("hilbert.csv"))
        .arg("--output")
        .arg(&plot)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read_to_string(&plot).unwrap().matches("<polyline").count(), 3);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn solve_prints_one_row_per_method_and_policy() {
    let out = bench()
        .args(["solve", "--matrix", "random:30:1e4", "--methods", "bicgstab", "--seed", "3"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("random,30,1.0000000000000000e4,bicgstab,classic,"));
}

#[test]
fn fatal_errors_exit_nonzero_with_one_line() {
    for args in [
        &["hilbert", "--trials", "0"][..],
        &["random", "--conds", "0.5"],
        &["solve", "--matrix", "/does/not/exist.mtx"],
        &["hilbert", "--methods", "qmr"],
    ] {
        let out = bench().args(args).output().unwrap();
        assert!(!out.status.success(), "{args:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert_eq!(err.lines().count(), 1, "{args:?}: {err}");
        assert!(err.starts_with("error: "));
    }
}

#[test]
fn files_without_fetched_matrices_explains_itself() {
    let empty = scratch("nomats");
    std::fs::create_dir_all(&empty).unwrap();
    let out = bench()
        .arg("files")
        .env("KRYLOV_MATRIX_DIR", &empty)
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("krylov-bench fetch"), "{err}");
    std::fs::remove_dir_all(&empty).unwrap();
}
