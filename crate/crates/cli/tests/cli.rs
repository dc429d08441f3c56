use std::process::{Command, Output};

fn randpre(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_randpre"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn same_seed_gives_identical_csv() {
    let args = [
        "table1", "--n", "64", "--r", "2", "--trials", "1", "--seed", "11",
    ];
    let a = randpre(&args);
    let b = randpre(&args);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), randpre::experiment::CSV_HEADER);
    // 2 kinds x 3 methods
    assert_eq!(lines.count(), 6);
}

#[test]
fn different_seed_changes_values() {
    let a = randpre(&[
        "table3", "--n", "64", "--r", "1", "--trials", "2", "--seed", "1",
    ]);
    let b = randpre(&[
        "table3", "--n", "64", "--r", "1", "--trials", "2", "--seed", "2",
    ]);
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn invalid_config_exits_one_with_field() {
    let o = randpre(&["table2", "--trials", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("trials"), "{}", stderr(&o));
    let o = randpre(&["table1", "--kind", "srft", "--trials", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("kinds"));
}

#[test]
fn empty_policy_is_a_config_error() {
    let o = randpre(&[
        "policy", "--n", "32", "--r", "2", "--trials", "1", "--policy", "",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("polic"), "{}", stderr(&o));
}

#[test]
fn passing_check_exits_zero() {
    let o = randpre(&["genp", "--trials", "20", "--check"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("PASS"));
}

#[test]
fn failing_check_exits_two() {
    // the additive column sits near 1e-7, far above the 1e-11 threshold
    let o = randpre(&[
        "table1", "--n", "64", "--r", "2", "--trials", "2", "--check",
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("FAIL"));
}

#[test]
fn out_file_and_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cur.csv");
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        format!(
            "trials = 5\nseed = 9\nsizes = [[6, 2]]\nout = {:?}\n",
            out.to_str().unwrap()
        ),
    )
    .unwrap();
    let o = randpre(&["cur", "--config", cfg.to_str().unwrap(), "--trials", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("volume_gap"));
    let csv = std::fs::read_to_string(&out).unwrap();
    let row = csv.lines().nth(1).unwrap();
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields[0], "cur");
    assert_eq!(fields[11], "3");
    assert_eq!(fields[12], "9");
}

#[test]
fn bad_config_key_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "trails = 3\n").unwrap();
    let o = randpre(&["srft", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}
