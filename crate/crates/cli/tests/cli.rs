use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn tisched(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tisched")).args(args).output().expect("binary runs")
}

fn gen(dir: &Path, name: &str, extra: &[&str]) -> String {
    let path = dir.join(name).to_string_lossy().into_owned();
    let mut args = vec!["gen", "--interventions", "8", "--technicians", "4", "--domains", "2", "--levels", "2"];
    args.extend_from_slice(extra);
    args.extend_from_slice(&["--out", &path]);
    let out = tisched(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn solve_then_check() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen(dir.path(), "i.txt", &["--seed", "4"]);
    let sol = dir.path().join("s.txt").to_string_lossy().into_owned();
    let out = tisched(&["solve", "--instance", &inst, "--iterations", "10", "--out", &sol]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("exact=true"));

    let out = tisched(&["check", "--instance", &inst, "--solution", &sol]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let obj_line = fs::read_to_string(&sol).unwrap().lines().last().unwrap().to_string();
    assert_eq!(format!("OBJ {}", stdout.trim()), obj_line);
}

#[test]
fn check_reports_violations_with_status_two() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("i.txt");
    fs::write(&inst, "HMAX 120\nBUDGET 0\nDOMAINS 1\nLEVELS 1\nTECHNICIANS 1\n0 1\nINTERVENTIONS 2\n0 60 1 1 P R 1\n1 60 2 1 P R 1\n")
        .unwrap();
    let sol = dir.path().join("s.txt");
    fs::write(&sol, "HIRED\n0 1 0 T 0\n1 1 30 T 0\n").unwrap();
    let out = tisched(&["check", "--instance", inst.to_str().unwrap(), "--solution", sol.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("60 90 0 0 2940\n"), "{stdout}");
    assert!(stdout.contains("OVERLAP"));
}

#[test]
fn malformed_input_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("i.txt");
    fs::write(&inst, "HMAX 120\nBUDGET nope\n").unwrap();
    let out = tisched(&["solve", "--instance", inst.to_str().unwrap(), "--time-limit", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn oracle_and_verbose_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.txt").to_string_lossy().into_owned();
    let out = tisched(&[
        "gen", "--interventions", "4", "--technicians", "2", "--domains", "1", "--levels", "1", "--seed", "2", "--out", &path,
    ]);
    assert!(out.status.success());
    let out = tisched(&["oracle", "--instance", &path]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("OBJ "));

    let out = tisched(&["-v", "solve", "--instance", &path, "--iterations", "4"]);
    let log = String::from_utf8_lossy(&out.stderr);
    assert_eq!(log.lines().filter(|l| l.contains("order (")).count(), 24, "{log}");
}

#[test]
fn bench_table() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), "a.txt", &["--seed", "1"]);
    gen(dir.path(), "b.txt", &["--seed", "2"]);
    let reference = dir.path().join("best.csv");
    fs::write(&reference, "instance,best\na,1\n").unwrap();
    let out = tisched(&[
        "bench",
        "--dir",
        dir.path().to_str().unwrap(),
        "--ref",
        reference.to_str().unwrap(),
        "--time-limit",
        "0.2",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("instance  int."));
    assert!(lines[1].starts_with("a ") && lines[1].contains(" 0.9"), "{table}");
    assert!(lines[2].starts_with("b ") && !lines[2].contains('.'), "{table}");
}
