//! End-to-end runs of the `crownkernel` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const STAR: &str = "p 4 3\ne 1 2\ne 1 3\ne 1 4\n";
const K4: &str = "p 4 6\ne 1 2\ne 1 3\ne 1 4\ne 2 3\ne 2 4\ne 3 4\n";

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_crownkernel"));
    c.env_remove("CROWNKERNEL_ORACLE_CAP");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn report_value(report: &str, key: &str) -> String {
    report
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no `{key}` in report:\n{report}"))
        .to_string()
}

#[test]
fn star_with_one_deletion_reduces_to_nothing() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "star.g", STAR);
    let (kernel, report) = (dir.path().join("k.g"), dir.path().join("r.txt"));
    let out = run(&[
        "kernelize", "--problem", "coc", "--mode", "poly", "-k", "1", "-W", "1",
        "-i", s(&input), "-o", s(&kernel), "--report", s(&report),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = fs::read_to_string(&report).unwrap();
    assert_eq!(report_value(&r, "verdict"), "reduced");
    assert_eq!(report_value(&r, "kernel.vertices"), "0");
    assert_eq!(report_value(&r, "certificate.count"), "1");
    assert_eq!(fs::read_to_string(&kernel).unwrap().trim(), "p 0 0");
}

#[test]
fn clique_above_the_integrity_budget_is_rejected() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "k4.g", K4);
    let out = run(&["kernelize", "--problem", "vi", "-p", "2", "-i", s(&input)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("verdict = decided-no"));
}

#[test]
fn usage_and_parse_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "k4.g", K4);
    assert_eq!(run(&["kernelize", "--problem", "coc", "-k", "1", "-i", s(&input)]).status.code(), Some(2));
    assert_eq!(run(&["kernelize", "--problem", "vi", "-i", s(&input)]).status.code(), Some(2));
    let bad = write(&dir, "bad.g", "p 2 1\ne 1 1\n");
    let out = run(&["kernelize", "--problem", "vi", "-p", "1", "-i", s(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    assert_eq!(run(&["kernelize", "--problem", "nope"]).status.code(), Some(2));
}

#[test]
fn kernel_input_from_stdin() {
    use std::io::Write;
    use std::process::Stdio;
    let mut child = bin()
        .args(["kernelize", "--problem", "coc", "-k", "1", "-W", "1"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(STAR.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "p 0 0");
}

#[test]
fn verify_accepts_genuine_runs_and_rejects_tampering() {
    let dir = TempDir::new().unwrap();
    let gen = run(&["gen", "--kind", "gnp", "--n", "12", "--edge-p", "0.25", "--seed", "3"]);
    assert_eq!(gen.status.code(), Some(0));
    let input = write(&dir, "g.g", &String::from_utf8(gen.stdout).unwrap());
    for (problem, params) in [
        ("coc", vec!["-k", "2", "-W", "2"]),
        ("vi", vec!["-p", "3"]),
        ("wcoc", vec!["-k", "2", "-W", "2"]),
        ("wvi", vec!["-p", "3"]),
    ] {
        let (kernel, report) = (dir.path().join(format!("{problem}.k")), dir.path().join(format!("{problem}.r")));
        let mut args = vec!["kernelize", "--problem", problem, "-i", s(&input), "-o", s(&kernel), "--report", s(&report)];
        args.extend(params);
        let out = run(&args);
        assert!(matches!(out.status.code(), Some(0 | 1)), "{problem}: {}", String::from_utf8_lossy(&out.stderr));
        let v = run(&["verify", "-i", s(&input), "--kernel", s(&kernel), "--report", s(&report)]);
        assert_eq!(v.status.code(), Some(0), "{problem}: {}", String::from_utf8_lossy(&v.stdout));
    }
    // A kernel that does not match the certificate must fail.
    let kernel = dir.path().join("coc.k");
    fs::write(&kernel, "p 1 0\n").unwrap();
    let v = run(&["verify", "-i", s(&input), "--kernel", s(&kernel), "--report", s(&dir.path().join("coc.r"))]);
    assert_eq!(v.status.code(), Some(1));
}

#[test]
fn replaying_the_certificate_rebuilds_the_kernel_bytes() {
    let dir = TempDir::new().unwrap();
    // Three six-leaf stars next to a triangle with a tail.
    let mut edges: Vec<(u32, u32)> = Vec::new();
    for c in [1, 8, 15] {
        edges.extend((1..=6).map(|i| (c, c + i)));
    }
    edges.extend([(22, 23), (23, 24), (22, 24), (24, 25), (25, 26)]);
    let mut text = format!("p 26 {}\n", edges.len());
    for (u, v) in edges {
        text.push_str(&format!("e {u} {v}\n"));
    }
    let input = write(&dir, "g.g", &text);
    let (kernel, report) = (dir.path().join("k.g"), dir.path().join("r.txt"));
    let out = run(&[
        "kernelize", "--problem", "coc", "-k", "6", "-W", "1", "--mode", "fpt",
        "-i", s(&input), "-o", s(&kernel), "--report", s(&report),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = fs::read_to_string(&report).unwrap();
    assert_eq!(report_value(&r, "verdict"), "reduced");
    assert!(report_value(&r, "certificate.count").parse::<u32>().unwrap() >= 1);
    let v = run(&["verify", "-i", s(&input), "--kernel", s(&kernel), "--report", s(&report), "--skip-oracle"]);
    assert_eq!(v.status.code(), Some(0), "{}", String::from_utf8_lossy(&v.stdout));

    // Running twice gives identical kernels and identical reports apart from timing.
    let (kernel2, report2) = (dir.path().join("k2.g"), dir.path().join("r2.txt"));
    run(&[
        "kernelize", "--problem", "coc", "-k", "6", "-W", "1", "--mode", "fpt",
        "-i", s(&input), "-o", s(&kernel2), "--report", s(&report2),
    ]);
    assert_eq!(fs::read(&kernel).unwrap(), fs::read(&kernel2).unwrap());
    let strip = |p: &Path| -> String {
        fs::read_to_string(p).unwrap().lines().filter(|l| !l.starts_with("timings.")).collect::<Vec<_>>().join("\n")
    };
    assert_eq!(strip(&report), strip(&report2));
}

#[test]
fn gen_is_deterministic_per_seed() {
    let a = run(&["gen", "--kind", "gnp", "--n", "30", "--seed", "11", "--max-weight", "3"]).stdout;
    let b = run(&["gen", "--kind", "gnp", "--n", "30", "--seed", "11", "--max-weight", "3"]).stdout;
    let c = run(&["gen", "--kind", "gnp", "--n", "30", "--seed", "12", "--max-weight", "3"]).stdout;
    assert_eq!(a, b);
    assert_ne!(a, c);
    let cliques = String::from_utf8(run(&["gen", "--kind", "disjoint-cliques", "--count", "3", "--size", "4", "--seed", "7"]).stdout).unwrap();
    assert!(cliques.starts_with("p 12 18\n"));
}

#[test]
fn solve_answers_and_respects_the_cap() {
    let dir = TempDir::new().unwrap();
    let k4 = write(&dir, "k4.g", K4);
    let out = run(&["solve", "--problem", "vi", "-p", "2", "-i", s(&k4)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("answer = no"));
    let star = write(&dir, "star.g", STAR);
    let out = run(&["solve", "--problem", "coc", "-k", "1", "-W", "1", "-i", s(&star)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("witness = 1"));

    let big = run(&["gen", "--kind", "gnp", "--n", "16", "--seed", "1"]).stdout;
    let big = write(&dir, "big.g", &String::from_utf8(big).unwrap());
    assert_eq!(run(&["solve", "--problem", "coc", "-k", "2", "-W", "2", "-i", s(&big)]).status.code(), Some(2));
    let raised = bin()
        .args(["solve", "--problem", "coc", "-k", "2", "-W", "2", "-i", s(&big)])
        .env("CROWNKERNEL_ORACLE_CAP", "16")
        .output()
        .unwrap();
    assert!(matches!(raised.status.code(), Some(0 | 1)));
    assert!(matches!(
        run(&["solve", "--problem", "coc", "-k", "2", "-W", "2", "--cap", "16", "-i", s(&big)]).status.code(),
        Some(0 | 1)
    ));
}

#[test]
fn bench_prints_a_table_and_rejects_empty_grids() {
    let out = run(&["bench", "--problem", "coc", "--n", "20,30", "-k", "2", "-W", "1,2", "--runs", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let table = String::from_utf8(out.stdout).unwrap();
    assert_eq!(table.lines().filter(|l| l.starts_with("coc")).count(), 4);
    assert_eq!(run(&["bench", "--problem", "coc", "-k", "2"]).status.code(), Some(2));
    assert_eq!(run(&["bench", "--problem", "vi", "-p", "", "--n", "10"]).status.code(), Some(2));
}

#[test]
fn auto_mode_picks_by_graph_shape() {
    let dir = TempDir::new().unwrap();
    let k4 = write(&dir, "k4.g", K4);
    let report = dir.path().join("r.txt");
    let mode = |w: &str| {
        run(&["kernelize", "--problem", "coc", "-k", "1", "-W", w, "-i", s(&k4), "-o", s(&dir.path().join("k")), "--report", s(&report)]);
        report_value(&fs::read_to_string(&report).unwrap(), "params.mode")
    };
    assert_eq!(mode("1"), "poly-w1");
    assert_eq!(mode("2"), "poly-clawfree");
    let claw = write(&dir, "claw.g", "p 5 4\ne 1 2\ne 1 3\ne 1 4\ne 4 5\n");
    run(&["kernelize", "--problem", "coc", "-k", "1", "-W", "2", "-i", s(&claw), "-o", s(&dir.path().join("k")), "--report", s(&report)]);
    assert_eq!(report_value(&fs::read_to_string(&report).unwrap(), "params.mode"), "fpt");
}
