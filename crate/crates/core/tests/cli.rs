use std::path::Path;
use std::process::{Command, Output};

const EXAMPLE: &str = "\
minknap 1
threshold 1
item x1 cost 3/10 profit 3/10
item x2 cost 4/10 profit 4/10
item x3 cost 5/10 profit 5/10
item x4 cost 8/10 profit 8/10
";

fn minknap(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_minknap"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn generated_ola_instance_solves_to_two() {
    let dir = tempfile::tempdir().unwrap();
    let gen = minknap(
        &["gen", "--family", "ola", "--n", "4", "-o", "ola4.mk"],
        dir.path(),
    );
    assert!(gen.status.success());
    let out = minknap(&["solve", "ola4.mk", "--mode", "exact"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).lines().next(), Some("2"));
}

#[test]
fn separate_reports_the_violated_cut() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("inst.mk"), EXAMPLE).unwrap();
    let out = minknap(
        &[
            "separate",
            "inst.mk",
            "--point",
            "0,0,1/2,2/5",
            "--families",
            "p12",
            "--mode",
            "exact",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stdout(&out).lines().next(), Some("x1 + x4 >= 1"));
}

#[test]
fn separate_certifies_a_satisfying_point() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("inst.mk"), EXAMPLE).unwrap();
    let out = minknap(&["separate", "inst.mk", "--point", "1,1,1,1"], dir.path());
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn verify_prints_pitch_and_validity() {
    let dir = tempfile::tempdir().unwrap();
    let gen = minknap(&["gen", "--family", "wild", "-o", "wild.mk"], dir.path());
    assert!(gen.status.success());
    let out = minknap(
        &["verify", "wild.mk", "--ineq", "1,0,1,1,2,1,2 >= 3"],
        dir.path(),
    );
    assert_eq!(stdout(&out).trim(), "pitch=3 valid=true");
    std::fs::write(dir.path().join("inst.mk"), EXAMPLE).unwrap();
    let out = minknap(&["verify", "inst.mk", "--ineq", "0,1,1,0 >= 1"], dir.path());
    assert_eq!(stdout(&out).trim(), "pitch=1 valid=false");
}

#[test]
fn bad_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.mk"), "minknap 1\nthreshold 0\n").unwrap();
    for args in [
        &["solve", "bad.mk"][..],
        &["solve", "missing.mk"],
        &["frobnicate"],
    ] {
        let out = minknap(args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}
