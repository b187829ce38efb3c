//! Golden-file harness shared by the CLI tests and the acceptance target.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

/// Set to regenerate the files under `tests/golden/` instead of comparing.
pub const BLESS_VAR: &str = "NILMOMENT_BLESS";

pub struct GoldenCase {
    pub name: &'static str,
    pub args: &'static [&'static str],
    pub exit: i32,
}

pub const GOLDEN_CASES: &[GoldenCase] = &[
    GoldenCase { name: "soliton_heisenberg", args: &["soliton", "fixtures/heisenberg.json"], exit: 0 },
    GoldenCase { name: "soliton_abelian_k", args: &["soliton", "fixtures/abelian_k.json"], exit: 0 },
    GoldenCase { name: "soliton_filiform4", args: &["soliton", "fixtures/filiform4.json"], exit: 0 },
    GoldenCase { name: "flow_heisenberg", args: &["flow", "fixtures/heisenberg.json"], exit: 0 },
    GoldenCase {
        name: "detect_heis_diag112",
        args: &["detect", "fixtures/heis_diag112.json", "--compare-flow"],
        exit: 0,
    },
    GoldenCase { name: "detect_heis_not_derivation", args: &["detect", "fixtures/heis_not_derivation.json"], exit: 1 },
    GoldenCase { name: "detect_heis_plus_heis", args: &["detect", "fixtures/heis_plus_heis.json"], exit: 0 },
    GoldenCase { name: "detect_heis_plus_abelian", args: &["detect", "fixtures/heis_plus_abelian.json"], exit: 0 },
    GoldenCase { name: "detect_filiform4_plus_heis", args: &["detect", "fixtures/filiform4_plus_heis.json"], exit: 0 },
    GoldenCase { name: "detect_heis_bad_split", args: &["detect", "fixtures/heis_bad_split.json"], exit: 1 },
    GoldenCase { name: "adjoint_rep_3", args: &["adjoint", "rep", "3"], exit: 0 },
    GoldenCase { name: "adjoint_rep_3_2_1", args: &["adjoint", "rep", "3,2,1"], exit: 0 },
    GoldenCase { name: "adjoint_partitions_4", args: &["adjoint", "partitions", "4"], exit: 0 },
    GoldenCase { name: "adjoint_classify_conj_3_1", args: &["adjoint", "classify", "fixtures/conj_3_1.json"], exit: 0 },
    GoldenCase {
        name: "adjoint_classify_jordan_4_2",
        args: &["adjoint", "classify", "fixtures/jordan/jordan_4_2.json"],
        exit: 0,
    },
    GoldenCase {
        name: "adjoint_verify_unscaled_jordan_2",
        args: &["adjoint", "verify", "fixtures/unscaled_jordan_2.json"],
        exit: 0,
    },
    GoldenCase {
        name: "adjoint_verify_generic_nilpotent",
        args: &["adjoint", "verify", "fixtures/generic_nilpotent.json"],
        exit: 1,
    },
    GoldenCase {
        name: "adjoint_detect_so3",
        args: &["adjoint", "detect", "fixtures/so3_element.json", "fixtures/so3_basis.json"],
        exit: 0,
    },
    GoldenCase {
        name: "adjoint_detect_block_sl",
        args: &["adjoint", "detect", "fixtures/block_element.json", "fixtures/block_sl_2_2_basis.json"],
        exit: 0,
    },
];

/// Inputs that must be rejected with exit code 2 and a diagnostic on stderr
/// mentioning the given fragment.
pub const BAD_INPUTS: &[(&[&str], &str)] = &[
    (&["soliton", "fixtures/malformed.json"], "invalid type"),
    (&["soliton", "fixtures/duplicate.json"], "duplicate of brackets[0]"),
    (&["soliton", "fixtures/jacobi_violation.json"], "Jacobi"),
    (&["soliton", "fixtures/solvable.json"], "not nilpotent"),
    (&["soliton", "fixtures/does_not_exist.json"], "does_not_exist.json"),
    (&["adjoint", "classify", "fixtures/not_nilpotent.json"], "not nilpotent"),
    (&["adjoint", "rep", "1,3"], "partition"),
    (&["adjoint", "partitions", "0"], "partition"),
];

pub fn crate_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
    pub report: Option<String>,
}

pub fn run(args: &[&str], out: Option<&Path>) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_nilmoment"));
    cmd.current_dir(crate_root());
    if let Some(out) = out {
        cmd.arg("--out").arg(out);
    }
    let output = cmd.args(args).output().expect("failed to spawn nilmoment");
    let report = out.and_then(|p| std::fs::read_to_string(p).ok());
    Run {
        code: output.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&output.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&output.stderr).into_owned(),
        report,
    }
}

fn scratch_path(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("nilmoment-{}-{name}.json", std::process::id()))
}

/// Runs a case and compares stdout and the JSON report with the stored
/// goldens. Returns a description of every mismatch.
pub fn check_case(case: &GoldenCase) -> Vec<String> {
    let out = scratch_path(case.name);
    let got = run(case.args, Some(&out));
    let _ = std::fs::remove_file(&out);
    let mut problems = Vec::new();
    if got.code != case.exit {
        problems.push(format!("{}: exit {} (expected {}): {}", case.name, got.code, case.exit, got.stderr));
    }
    let Some(report) = got.report else {
        problems.push(format!("{}: no report written", case.name));
        return problems;
    };
    let dir = crate_root().join("tests/golden");
    let text_path = dir.join(format!("{}.txt", case.name));
    let json_path = dir.join(format!("{}.json", case.name));
    if std::env::var_os(BLESS_VAR).is_some() {
        std::fs::write(&text_path, &got.stdout).unwrap();
        std::fs::write(&json_path, &report).unwrap();
        return problems;
    }
    for (path, actual) in [(&text_path, &got.stdout), (&json_path, &report)] {
        match std::fs::read_to_string(path) {
            Ok(expected) if &expected == actual => {}
            Ok(expected) => problems.push(format!(
                "{}: output differs from {}\n--- expected\n{expected}\n--- actual\n{actual}",
                case.name,
                path.display()
            )),
            Err(e) => problems.push(format!("{}: cannot read {}: {e}", case.name, path.display())),
        }
    }
    problems
}

/// Runs a rejected input and describes what went wrong, if anything.
pub fn check_bad_input(args: &[&str], fragment: &str) -> Option<String> {
    let got = run(args, None);
    if got.code != 2 {
        return Some(format!("{args:?}: exit {} (expected 2)", got.code));
    }
    if !got.stderr.starts_with("error: ") || !got.stderr.contains(fragment) {
        return Some(format!("{args:?}: diagnostic {:?} lacks {fragment:?}", got.stderr));
    }
    None
}
