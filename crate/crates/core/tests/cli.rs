//! The command-line binary: files written, formats and exit codes.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_helmholtz-iga"))
}

fn write_config(dir: &Path, reference: &str) -> std::path::PathBuf {
    std::fs::write(dir.join("ref.csv"), reference).unwrap();
    let cfg = dir.join("small.cfg");
    std::fs::write(&cfg, "name = small\nproblem = mp1b\nk = 40\np = 2\nreference = ref.csv\n[preconditioner C_ex]\nbeta2 = 1/k\n").unwrap();
    cfg
}

fn iterations(dir: &Path) -> usize {
    let out = bin().args(["table", "--config"]).arg(write_config(dir, "preconditioner,p,k,iterations\nC_ex,2,40,0\n")).arg("--out").arg(dir).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let text = std::fs::read_to_string(dir.join("small.csv")).unwrap();
    let records = helmholtz_iga::harness::records_from_csv(&text).unwrap();
    records[0].iterations
}

#[test]
fn table_exit_code_follows_the_golden_comparison() {
    let dir = tempfile::tempdir().unwrap();
    let n = iterations(dir.path());
    let ok = bin()
        .args(["table", "--threads", "1", "--config"])
        .arg(write_config(dir.path(), &format!("preconditioner,p,k,iterations\nC_ex,2,40,{n}\n")))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(dir.path().join("small-comparison.csv").exists());

    let cmp = bin()
        .args(["compare", "--results"])
        .arg(dir.path().join("small.csv"))
        .arg("--reference")
        .arg(dir.path().join("ref.csv"))
        .output()
        .unwrap();
    assert_eq!(cmp.status.code(), Some(0));
}

#[test]
fn json_output_and_size_cap() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "preconditioner,p,k,iterations\nC_ex,2,40,5\n");
    let out = bin().args(["table", "--format", "json", "--max-n", "10", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "skipped cells never fail the comparison");
    let text = std::fs::read_to_string(dir.path().join("small.json")).unwrap();
    let records = helmholtz_iga::harness::records_from_json(&text).unwrap();
    assert_eq!(records[0].status, helmholtz_iga::harness::RunStatus::Skipped);
}

#[test]
fn runtime_errors_exit_with_one() {
    let missing = bin().args(["table", "--config", "/nonexistent/x.cfg"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(1));
    let bad = bin().args(["solve", "--problem", "mp1b", "--k", "20", "--p", "1", "--precond", "nope"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
    let usage = bin().args(["compare", "stray"]).output().unwrap();
    assert_eq!(usage.status.code(), Some(1));
}

#[test]
fn solve_and_convergence_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().args(["solve", "--problem", "mp1b", "--k", "50", "--p", "3", "--precond", "D_eps"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("Converged"));

    let cfg = dir.path().join("conv.cfg");
    std::fs::write(&cfg, "study = convergence\nproblem = mp1a\nk = 1\np = 1, 2\nelements = 8, 16, 32\n").unwrap();
    let out = bin().args(["convergence", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("convergence_mp1a_p2_k1.csv").exists());
}
