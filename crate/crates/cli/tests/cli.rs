use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn prchan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prchan")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn fixture(name: &str) -> String {
    fixtures_dir().join(format!("{name}.json")).to_string_lossy().into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn every_shipped_fixture_reverifies() {
    let expected = [
        ("example_2_11", "check", 1),
        ("identity2", "check", 0),
        ("dephasing", "check", 1),
        ("example_2_6", "check", 1),
        ("remark_rank2", "check", 1),
        ("remark_rank3", "check", 1),
        ("f3_real", "frame", 0),
        ("f3_complex", "frame", 1),
        ("parseval3", "frame", 0),
    ];
    let mut seen = 0;
    for entry in fs::read_dir(fixtures_dir()).unwrap() {
        let path = entry.unwrap().path();
        let stem = path.file_stem().unwrap().to_string_lossy().into_owned();
        let (_, sub, want) = expected
            .iter()
            .find(|(n, _, _)| *n == stem)
            .unwrap_or_else(|| panic!("no expectation for fixture {stem}"));
        let out = prchan(&[sub, path.to_str().unwrap()]);
        assert_eq!(code(&out), *want, "{stem}: {}", stdout(&out));
        seen += 1;
    }
    assert_eq!(seen, expected.len());
}

#[test]
fn shipped_fixtures_match_the_generator() {
    let dir = tempfile::tempdir().unwrap();
    let out = prchan(&["fixtures", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    for entry in fs::read_dir(dir.path()).unwrap() {
        let path = entry.unwrap().path();
        let shipped = fixtures_dir().join(path.file_name().unwrap());
        assert_eq!(fs::read(&path).unwrap(), fs::read(&shipped).unwrap(), "{}", path.display());
    }
}

#[test]
fn check_reports_method_and_certificate() {
    let out = prchan(&["check", &fixture("example_2_11")]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("method: NECESSARY_VIOLATION"));

    let out = prchan(&["check", &fixture("identity2")]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("method: RANK1"));

    let out = prchan(&["check", &fixture("dephasing"), "--output", "json"]);
    assert_eq!(code(&out), 1);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["verdict"]["certificate"]["type"], "STATE_WITNESS");
    assert_eq!(v["verdict"]["status"], "NOT_PR");
}

#[test]
fn json_output_is_byte_stable() {
    for args in [
        vec!["check", "--output", "json", "--seed", "3"],
        vec!["frame", "--output", "json", "--seed", "3"],
    ] {
        let name = if args[0] == "check" { "example_2_6" } else { "f3_complex" };
        let path = fixture(name);
        let mut full = args.clone();
        full.insert(1, &path);
        let a = prchan(&full);
        let b = prchan(&full);
        assert_eq!(a.stdout, b.stdout);
        assert!(serde_json::from_slice::<serde_json::Value>(&a.stdout).is_ok());
    }
}

#[test]
fn method_flag_restricts_the_pipeline() {
    let out = prchan(&["check", &fixture("example_2_6"), "--method", "exact"]);
    assert_eq!(code(&out), 3);
    let out = prchan(&["check", &fixture("example_2_6"), "--method", "oracle"]);
    assert_eq!(code(&out), 1);
    let out = prchan(&["check", &fixture("example_2_11"), "--method", "necessary"]);
    assert_eq!(code(&out), 1);
    let out = prchan(&["check", &fixture("identity2"), "--method", "necessary"]);
    assert_eq!(code(&out), 2);
    assert!(stdout(&out).contains("PASS"));
}

#[test]
fn input_errors_exit_3() {
    assert_eq!(code(&prchan(&["frame", "missing.json"])), 3);
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\n  \"dim_in\": 2,\n  \"dim_out\": oops\n}\n").unwrap();
    let out = prchan(&["check", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 3"), "{err}");
    assert_eq!(code(&prchan(&["spectrum", &fixture("example_2_11"), "--j", "9"])), 3);
}

#[test]
fn construct_writes_verified_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = prchan(&["construct", "--recipe", "from-observables", "--frame", &fixture("parseval3"), "--r", "2", "--out", d]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    for f in ["channel.json", "povm.json", "verdict.json"] {
        assert!(dir.path().join(f).exists());
    }
    let channel = dir.path().join("channel.json");
    assert_eq!(code(&prchan(&["check", channel.to_str().unwrap()])), 0);

    let out = prchan(&["construct", "--recipe", "projection", "--n", "2", "--dims", "1,1"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("claimed: NOT_PR, verified: true"));

    let out = prchan(&["construct", "--recipe", "rankr", "--n", "2", "--r", "5"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn spectrum_flags_the_vanishing_pair() {
    let out = prchan(&["spectrum", &fixture("example_2_11"), "--j", "1"]);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    assert!(text.contains("(-1.000000+0.000000i, 1.414214+0.000000i)"));
    assert!(text.contains("(1.000000+0.000000i, 0.000000+0.000000i)"));
    assert!(text.contains("1 + <p1, p2> = 0.000000+0.000000i  [zero"));
}
