use std::path::Path;
use std::process::{Command, Output};

use cpda::fixtures;
use cpda::format::write_array;
use cpda::model::Entry;
use tempfile::TempDir;

fn cpda(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cpda"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn build(dir: &Path, name: &str, args: &[&str]) -> String {
    let path = dir.join(name).to_str().unwrap().to_string();
    let mut full = vec!["build"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", &path]);
    let o = cpda(&full);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    path
}

#[test]
fn build_and_validate_example() {
    let dir = TempDir::new().unwrap();
    let path = build(
        dir.path(),
        "ex.cpda",
        &[
            "--family", "c1pp", "--H", "5", "--r", "3", "--b", "1", "--lambda", "1",
        ],
    );
    let o = cpda(&["validate", "--cpda", &path]);
    assert_eq!(code(&o), 0);
    assert!(
        stdout(&o).starts_with("CPDA (10,5,2,10), w: {2:10}\n"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn build_construction2() {
    let o = cpda(&[
        "build", "--family", "c2", "--H", "5", "--r", "2", "--b", "2", "--lambda", "1",
    ]);
    assert_eq!(code(&o), 0);
    assert!(stderr(&o).contains("CPDA (10,20,14,30)"), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("#CPDA v1\nH 5\nr 2\nF 20\nK 10\n"));
}

#[test]
fn build_rejects_bad_parameters() {
    let o = cpda(&[
        "build", "--family", "c1p", "--H", "3", "--r", "2", "--b", "2", "--lambda", "0",
    ]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("lambda must be >= 1"));

    let o = cpda(&[
        "build", "--family", "c2", "--H", "5", "--r", "2", "--b", "1", "--lambda", "1",
    ]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("lambda < b"));

    let o = cpda(&["build", "--family", "c1pp", "--H", "5"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("--r is required"));

    let o = cpda(&["build", "--family", "nope"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn validate_reports_mutation_witness() {
    let dir = TempDir::new().unwrap();
    let mut ex = fixtures::example1();
    ex.set(2, 3, Entry::Symbol(2));
    let path = dir.path().join("bad.cpda");
    std::fs::write(&path, write_array(&ex)).unwrap();
    let o = cpda(&["validate", path.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(
        stdout(&o).contains("AXIOM=C2b FAIL symbol=2 rows=(2,3) cols=(1-2-3,1-3-4)"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn mn_array_is_a_pda_but_not_a_cpda() {
    let dir = TempDir::new().unwrap();
    let path = build(
        dir.path(),
        "mn.cpda",
        &["--family", "mn", "--k", "4", "--t", "1"],
    );
    let o = cpda(&["validate", &path]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).starts_with("PDA (4,4,1,6)"));
    let o = cpda(&["validate", "--cpda", &path]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("AXIOM=C3 FAIL"));
}

#[test]
fn validate_parse_failure_is_usage_error() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("broken.cpda");
    let text = write_array(&fixtures::example1()).replace("2 3 4 *", "2 x7 4 *");
    std::fs::write(&path, text).unwrap();
    let o = cpda(&["validate", path.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("row 2"), "{}", stderr(&o));
    assert_eq!(code(&cpda(&["validate", "/nonexistent/file"])), 2);
}

#[test]
fn simulate_example() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("ex1.cpda");
    std::fs::write(&path, write_array(&fixtures::example1())).unwrap();
    let o = cpda(&[
        "simulate",
        path.to_str().unwrap(),
        "--demands",
        "1,2,3,4,5,6,7,8,9,10",
        "--files",
        "10",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    assert!(
        out.contains("X_1 = W_{1,3} ⊕ W_{2,4} ⊕ W_{3,5} via h_1,h_2\n"),
        "{out}"
    );
    assert!(
        out.contains("X_10 = W_{6,1} ⊕ W_{9,2} ⊕ W_{10,3} via h_4,h_5\n"),
        "{out}"
    );
    assert_eq!(out.matches("RATE=2/5").count(), 5);
    assert!(out.contains("DECODE OK\n"));
    assert!(out.contains("RATES_MATCH_ARRAY=true\n"));

    let o = cpda(&[
        "simulate",
        path.to_str().unwrap(),
        "--demands",
        "distinct",
        "--table",
    ]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(
        out.contains("1 | X_1 = W_{1,3} ⊕ W_{2,4} ⊕ W_{3,5} | h_1 | X_{1,1}\n"),
        "{out}"
    );
    assert!(out.contains(" |  | h_2 | X_{1,2}\n"));
}

#[test]
fn simulate_rejects_bad_demands() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("ex1.cpda");
    std::fs::write(&path, write_array(&fixtures::example1())).unwrap();
    let p = path.to_str().unwrap();
    let o = cpda(&["simulate", p, "--demands", "0,2,3,4,5,6,7,8,9,10"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("outside 1..=10"), "{}", stderr(&o));
    assert_eq!(code(&cpda(&["simulate", p, "--demands", "1,2"])), 2);
    assert_eq!(
        code(&cpda(&[
            "simulate",
            p,
            "--demands",
            "1,2,3,4,5,6,7,8,9,11",
            "--files",
            "10"
        ])),
        2
    );
    assert_eq!(
        code(&cpda(&[
            "simulate",
            p,
            "--demands",
            "distinct",
            "--files",
            "3"
        ])),
        2
    );
}

#[test]
fn simulate_refuses_unroutable_array() {
    let dir = TempDir::new().unwrap();
    let path = build(
        dir.path(),
        "mn.cpda",
        &["--family", "mn", "--k", "4", "--t", "1"],
    );
    let o = cpda(&["simulate", &path]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("share no relay"));
}

#[test]
fn outputs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = build(
        dir.path(),
        "a.cpda",
        &[
            "--family", "c2", "--H", "6", "--r", "3", "--b", "2", "--lambda", "1",
        ],
    );
    let b = build(
        dir.path(),
        "b.cpda",
        &[
            "--family", "c2", "--H", "6", "--r", "3", "--b", "2", "--lambda", "1",
        ],
    );
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let x = cpda(&["simulate", &a, "--seed", "42", "--files", "3"]);
    let y = cpda(&["simulate", &a, "--seed", "42", "--files", "3"]);
    assert_eq!(code(&x), 0);
    assert_eq!(x.stdout, y.stdout);
    let z = cpda(&["simulate", &a, "--seed", "43", "--files", "3"]);
    assert_ne!(x.stdout, z.stdout);
    assert_eq!(
        cpda(&["compare", "--H", "8", "--r", "2"]).stdout,
        cpda(&["compare", "--H", "8", "--r", "2"]).stdout
    );
}

#[test]
fn params_output() {
    let o = cpda(&[
        "params", "--family", "scheme2", "--H", "4", "--r", "2", "--t", "1",
    ]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("R_h=1/2 "), "{out}");
    assert!(out.contains("F_eff=6\n"), "{out}");

    let o = cpda(&[
        "params", "--family", "c1pp", "--H", "5", "--r", "3", "--b", "1", "--lambda", "1", "--csv",
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        stdout(&o).lines().nth(1).unwrap(),
        "5,3,c1pp,c1pp:b=1;lambda=1,2,5,2,5,10,true,2,5,0.400000,0.400000,"
    );

    let o = cpda(&[
        "params", "--family", "scheme3", "--H", "5", "--r", "2", "--b", "1", "--lambda", "1",
    ]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("not applicable"));
}

#[test]
fn compare_flags_inapplicable_baselines() {
    let o = cpda(&["compare", "--H", "5", "--r", "3"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let body: Vec<&str> = out.lines().skip(1).collect();
    assert!(!body.is_empty());
    for line in &body {
        let fields: Vec<&str> = line.split(',').collect();
        let applicable = fields[9] == "true";
        match fields[2] {
            "scheme1" => assert!(applicable, "{line}"),
            "scheme2" | "scheme3" => assert!(!applicable, "{line}"),
            other => panic!("unexpected family {other}"),
        }
    }
}

#[test]
fn compare_grid_handling() {
    let o = cpda(&["compare", "--H", "4", "--r", "2", "--grid", "0:1:1/4"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 1 + 3 * 5);
    let o = cpda(&["compare", "--H", "4", "--r", "2", "--grid", "1/3,x"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("malformed grid"));
}

#[test]
fn dominance_exit_code_tracks_violations() {
    let o = cpda(&["compare", "--H", "20", "--r", "4", "--check-dominance"]);
    let err = stderr(&o);
    assert!(err.contains("max R_h(scheme1)/R_h(scheme2)"), "{err}");
    let violated = err.contains("VIOLATION");
    assert_eq!(code(&o), if violated { 1 } else { 0 }, "{err}");
}
