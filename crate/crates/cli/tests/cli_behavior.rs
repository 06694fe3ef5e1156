//! End-to-end checks of the command-line contract: key resolution and
//! precedence, exit codes, CSV shapes, output routing, and determinism.

use std::io::Write as _;
use std::process::{Command, Output};

use relaykey_core::gaussian::{max_key_rate_gaussian, oneway_capacity};
use relaykey_core::prob::{dsbs, CondChannel};
use relaykey_core::regions::inner_point;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_relaykey"));
    c.env_remove("RELAYKEY_OUT_DIR");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary should spawn")
}

fn stdout_str(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("stdout should be UTF-8")
}

fn stderr_str(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).expect("stderr should be UTF-8")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("process should exit normally")
}

fn temp_config(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

#[test]
fn compare_row_matches_the_library_to_nine_digits() {
    let o = run(&["compare", "--rho", "0.6", "--r1", "0.6", "--r2", "0.4", "--rc", "1"]);
    assert_eq!(code(&o), 0);
    let text = stdout_str(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "rho,r1,r2,rc,rk,c1to2,c2to1,strict");
    let cells: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(cells.len(), 8);
    let rk: f64 = cells[4].parse().unwrap();
    let c1: f64 = cells[5].parse().unwrap();
    let c2: f64 = cells[6].parse().unwrap();
    let want_rk = max_key_rate_gaussian(0.6, 0.6, 0.4, 1.0).unwrap();
    let want_c1 = oneway_capacity(0.6, 0.6, 1.0).unwrap();
    let want_c2 = oneway_capacity(0.6, 0.4, 1.0).unwrap();
    assert!((rk - want_rk).abs() < 1e-8);
    assert!((c1 - want_c1).abs() < 1e-8);
    assert!((c2 - want_c2).abs() < 1e-8);
    assert_eq!(cells[7], "1");
}

#[test]
fn region_point_matches_the_library() {
    let o = run(&["region", "--source", "dsbs:0.1", "--ch1", "identity:2", "--ch2", "identity:2"]);
    assert_eq!(code(&o), 0);
    let text = stdout_str(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "r1,r2,rc,rk,rk_alt,channel_id");
    let cells: Vec<&str> = lines.next().unwrap().split(',').collect();
    let p = inner_point(&dsbs(0.1).unwrap(), &CondChannel::identity(2), &CondChannel::identity(2))
        .unwrap();
    let rk: f64 = cells[3].parse().unwrap();
    assert!((rk - p.rates.rk).abs() < 1e-8);
    assert_eq!(cells[5], "0");
}

#[test]
fn flags_override_config_file_values() {
    let f = temp_config("rho = 0.5\nr1 = 0.6\nr2 = 0.4\nrc = 1\n");
    let from_file = run(&["compare", "--config", f.path().to_str().unwrap()]);
    let overridden = run(&["compare", "--config", f.path().to_str().unwrap(), "--rho", "0.6"]);
    assert_eq!(code(&from_file), 0);
    assert_eq!(code(&overridden), 0);
    let file_row = stdout_str(&from_file);
    let flag_row = stdout_str(&overridden);
    assert!(file_row.lines().nth(1).unwrap().starts_with("5.00000000e-1,"));
    assert!(flag_row.lines().nth(1).unwrap().starts_with("6.00000000e-1,"));
}

#[test]
fn missing_required_key_exits_2_and_names_it() {
    let o = run(&["compare", "--r1", "0.6", "--r2", "0.4", "--rc", "1"]);
    assert_eq!(code(&o), 2);
    assert!(stderr_str(&o).contains("missing required key `rho`"));
    assert!(stdout_str(&o).is_empty());
}

#[test]
fn unknown_config_key_exits_2_and_names_it() {
    let f = temp_config("rho = 0.6\nr1 = 0.6\nr2 = 0.4\nrc = 1\nwhatever = 3\n");
    let o = run(&["compare", "--config", f.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr_str(&o).contains("unknown key `whatever`"));
}

#[test]
fn unparseable_config_value_exits_2_and_names_the_key() {
    let f = temp_config("rho = fast\nr1 = 0.6\nr2 = 0.4\nrc = 1\n");
    let o = run(&["compare", "--config", f.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr_str(&o).contains("key `rho`"));
}

#[test]
fn key_that_does_not_apply_exits_2() {
    let o = run(&[
        "region", "--source", "dsbs:0.1", "--ch1", "identity:2", "--ch2", "identity:2",
        "--restarts", "4",
    ]);
    assert_eq!(code(&o), 2);
    assert!(stderr_str(&o).contains("restarts"));
}

#[test]
fn unknown_flag_exits_2() {
    let o = run(&["compare", "--rho", "0.6", "--r1", "0.6", "--r2", "0.4", "--rc", "1", "--zap"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn computational_failure_exits_1_with_a_diagnostic() {
    // A blocklength this large makes the codebook infeasible; the run must
    // fail with the cap named on the error stream, not crash or succeed.
    let o = run(&[
        "exact", "--n", "40", "--source", "dsbs:0.2", "--ch1", "identity:2", "--ch2",
        "identity:2",
    ]);
    assert_eq!(code(&o), 1);
    assert!(stderr_str(&o).contains("cap"));
    assert!(stdout_str(&o).is_empty());
}

#[test]
fn help_requests_exit_0() {
    let o = run(&["--help"]);
    assert_eq!(code(&o), 0);
    for sub in ["region", "gaussian", "simulate", "exact", "compare", "selftest"] {
        assert!(stdout_str(&o).contains(sub), "help should list `{sub}`");
    }
}

#[test]
fn out_dir_env_var_routes_relative_output_paths() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["compare", "--rho", "0.6", "--r1", "0.6", "--r2", "0.4", "--rc", "1", "--out", "row.csv"])
        .env("RELAYKEY_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(stdout_str(&o).is_empty());
    let written = std::fs::read_to_string(dir.path().join("row.csv")).unwrap();
    assert!(written.starts_with("rho,r1,r2,rc,rk,c1to2,c2to1,strict\n"));
}

#[test]
fn absolute_output_paths_ignore_the_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("direct.csv");
    let o = bin()
        .args(["compare", "--rho", "0.6", "--r1", "0.6", "--r2", "0.4", "--rc", "1"])
        .arg("--out")
        .arg(&target)
        .env("RELAYKEY_OUT_DIR", "/nonexistent-prefix")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(target.exists());
}

#[test]
fn identical_invocations_are_byte_identical() {
    let args = ["simulate", "--n", "4", "--source", "dsbs:0.2", "--ch1", "identity:2",
        "--ch2", "identity:2", "--eps", "1.8", "--trials", "500", "--master-seed", "9"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn simulation_rows_have_the_documented_shape() {
    let o = run(&[
        "exact", "--mode", "trusted", "--n", "3", "--source", "dsbs:0.2", "--ch",
        "forward-y:2x2", "--eps", "1.8",
    ]);
    assert_eq!(code(&o), 0);
    let text = stdout_str(&o);
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert_eq!(
        header,
        "mode,n,eps,slack,rb,rk1,rk2,rkz,trials,seed,agreement,enc_fail,dec_fail,key_entropy_rate,leakage_rate,leakage_se,partial_key_mi"
    );
    let cells: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(cells.len(), 17);
    assert_eq!(cells[0], "trusted");
    // Index rates do not exist in the trusted pipeline.
    for i in [4, 5, 6, 7] {
        assert_eq!(cells[i], "NA");
    }
}

#[test]
fn source_tables_load_like_their_builtin_equivalents() {
    let f = temp_config("X:2 Y:2\n0 0 0.45\n0 1 0.05\n1 0 0.05\n1 1 0.45\n");
    let from_file = run(&[
        "region", "--source", f.path().to_str().unwrap(), "--ch1", "identity:2", "--ch2",
        "identity:2",
    ]);
    let from_builtin =
        run(&["region", "--source", "dsbs:0.1", "--ch1", "identity:2", "--ch2", "identity:2"]);
    assert_eq!(code(&from_file), 0);
    assert_eq!(from_file.stdout, from_builtin.stdout);
}

#[test]
fn optimizer_writes_the_requested_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let o = bin()
        .args(["region", "--task", "optimize", "--source", "dsbs:0.1", "--restarts", "3",
            "--max-iters", "40", "--seed", "5"])
        .arg("--trace")
        .arg(&trace)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(&trace).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "restart,best_rk");
    assert_eq!(lines.len(), 4); // header + one row per restart
    assert!(lines[1].starts_with("0,"));
}

#[test]
fn codebook_dump_lists_indexed_words() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("book.txt");
    let o = bin()
        .args(["exact", "--n", "3", "--source", "dsbs:0.2", "--ch1", "identity:2", "--ch2",
            "identity:2", "--eps", "1.8"])
        .arg("--dump-codebook")
        .arg(&dump)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(&dump).unwrap();
    for line in text.lines() {
        let mut parts = line.split_whitespace();
        let user: u8 = parts.next().unwrap().parse().unwrap();
        assert!(user == 1 || user == 2);
        let tuple = parts.next().unwrap();
        assert_eq!(tuple.split(',').count(), 4);
        assert_eq!(parts.count(), 3); // n symbols per word
    }
}

#[test]
fn selftest_passes_and_reports_each_check() {
    let o = run(&["selftest"]);
    assert_eq!(code(&o), 0);
    let text = stdout_str(&o);
    assert!(text.lines().filter(|l| l.starts_with("ok ")).count() >= 5);
    assert!(text.trim_end().ends_with("0 failed"));
}

#[test]
fn gaussian_sweeps_emit_one_row_per_point() {
    let o = run(&["gaussian", "--mode", "alpha", "--rho", "0.6", "--r1", "0.6", "--r2", "0.4",
        "--rc", "1", "--points", "11"]);
    assert_eq!(code(&o), 0);
    let text = stdout_str(&o);
    assert_eq!(text.lines().next().unwrap(), "alpha,rk,c1to2,c2to1,cstar");
    assert_eq!(text.lines().count(), 12);
}
