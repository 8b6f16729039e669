use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use tm_cli::{run, Exit};

fn corpus(case: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(case)
        .join("model.tm")
        .display()
        .to_string()
}

fn tm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tm"))
        .args(args)
        .env("TM_COLOR", "0")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn in_process(args: &[&str]) -> (Exit, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let mut argv = vec!["tm"];
    argv.extend_from_slice(args);
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

const BAD: &str = "model \"bad\" {\n  thimac A {\n    action t: transfer\n    action p: process\n  }\n  flow A.t -> A.p\n}\n";

#[test]
fn check_valid_corpus_is_silent() {
    for case in ["sales", "h2s", "milk"] {
        let o = tm(&["check", &corpus(case)]);
        assert_eq!(o.status.code(), Some(0), "{case}");
        assert!(o.stdout.is_empty() && o.stderr.is_empty(), "{case}");
    }
}

#[test]
fn check_reports_one_adjacency_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.tm");
    fs::write(&path, BAD).unwrap();
    let o = tm(&["check", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());
    let text = stderr(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1, "{text}");
    assert!(lines[0].starts_with("ERROR V3 "), "{text}");
    assert!(lines[0].contains("bad.tm:6:3 "), "{text}");
}

#[test]
fn check_directory_takes_worst_exit() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("a.tm"), BAD).unwrap();
    fs::write(
        dir.path().join("b.tm"),
        fs::read_to_string(corpus("sales")).unwrap(),
    )
    .unwrap();
    fs::write(dir.path().join("notes.txt"), "not a model").unwrap();
    let o = tm(&["check", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr(&o).lines().count(), 1);
}

#[test]
fn check_mode_flag() {
    let o = tm(&["check", "--mode", "simplified", &corpus("sales")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).lines().all(|l| l.starts_with("ERROR V6 ")));
}

#[test]
fn syntax_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.tm");
    fs::write(&path, "model \"x\" { thimac }").unwrap();
    let o = tm(&["check", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("ERROR SYN001 "), "{}", stderr(&o));
}

#[test]
fn simulate_trace() {
    let sales = corpus("sales");
    let ok = tm(&["simulate", &sales, "--trace", "E1,E2,E3,E4,E5,E6"]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(stdout(&ok), "ACCEPTED\n");
    let bad = tm(&["simulate", &sales, "--trace", "E1,E3,E2,E4,E5,E6"]);
    assert_eq!(bad.status.code(), Some(1));
    assert_eq!(stdout(&bad), "REJECTED after 1 events\n");
}

#[test]
fn simulate_enumerate_and_next() {
    let h2s = corpus("h2s");
    let o = tm(&["simulate", &h2s, "--enumerate", "--max-loop", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 2);
    let next = tm(&["simulate", &h2s, "--next", "E1,E2,E4,E3,E5,E6,E7"]);
    assert_eq!(stdout(&next), "E14\nE8\n");
    let milk = tm(&[
        "simulate",
        &corpus("milk"),
        "--enumerate",
        "--max-traces",
        "3",
    ]);
    assert_eq!(stdout(&milk).lines().count(), 3);
    assert!(!milk.stderr.is_empty());
}

#[test]
fn usage_and_io_exits() {
    assert_eq!(tm(&["check", "--bogus"]).status.code(), Some(2));
    assert_eq!(tm(&[]).status.code(), Some(2));
    assert_eq!(tm(&["simulate", &corpus("sales")]).status.code(), Some(2));
    assert_eq!(
        tm(&["check", "/definitely/not/here.tm"]).status.code(),
        Some(3)
    );
    let help = tm(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(stdout(&help).contains("simulate"));
}

#[test]
fn render_formats() {
    let sales = corpus("sales");
    let dot = tm(&["render", &sales]);
    assert_eq!(dot.status.code(), Some(0));
    assert!(stdout(&dot).starts_with("digraph "));
    let svg = tm(&["render", &sales, "--view", "chronology", "--format", "svg"]);
    assert!(stdout(&svg).starts_with("<svg "));
    let filtered = tm(&["render", &sales, "--view", "dynamic", "--events", "E1,E2"]);
    assert_eq!(
        stdout(&filtered)
            .matches("subgraph \"cluster_event_")
            .count(),
        2
    );

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sales.svg");
    let o = tm(&[
        "render",
        &sales,
        "--format",
        "svg",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert!(fs::read_to_string(out).unwrap().starts_with("<svg "));
}

#[test]
fn simplify_prints_valid_simplified_model() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("simple.tm");
    let o = tm(&["simplify", &corpus("h2s"), "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let check = tm(&["check", "--mode", "simplified", out.to_str().unwrap()]);
    assert_eq!(check.status.code(), Some(0), "{}", stderr(&check));
}

#[test]
fn narrate_and_coverage() {
    let n = tm(&["narrate", &corpus("h2s")]);
    assert_eq!(n.status.code(), Some(0));
    let text = stdout(&n);
    let either = text.find("Either:").unwrap();
    assert!(text[either..].contains("Or:"));

    let c = tm(&["coverage", &corpus("h2s")]);
    assert_eq!(c.status.code(), Some(0));
    assert!(stdout(&c).starts_with("coverage: 49.6%\ncovered: 630/1270 bytes\n"));

    let none = tm(&["coverage", &corpus("sales")]);
    assert_ne!(none.status.code(), Some(0));
}

#[test]
fn color_follows_env() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.tm");
    fs::write(&path, BAD).unwrap();
    let colored = Command::new(env!("CARGO_BIN_EXE_tm"))
        .args(["check", path.to_str().unwrap()])
        .env("TM_COLOR", "1")
        .output()
        .unwrap();
    assert!(stderr(&colored).contains("\x1b["));
    assert!(!stderr(&tm(&["check", path.to_str().unwrap()])).contains("\x1b["));
}

#[test]
fn run_in_process() {
    let (code, out, err) = in_process(&["narrate", &corpus("sales")]);
    assert_eq!(code, Exit::Success);
    assert!(out.ends_with("(E6)\n"), "{out}");
    assert!(err.is_empty());
    let (code, _, err) = in_process(&["render", &corpus("sales"), "--view", "sideways"]);
    assert_eq!(code, Exit::Usage);
    assert!(!err.is_empty());
}
