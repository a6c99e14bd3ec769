use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn discrim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_discrim"))
        .args(args)
        .output()
        .expect("failed to run discrim")
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// CSV data lines (no `#` comments, no header).
fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

/// Drops the last CSV column, which is wall_ms in every table.
fn without_wall(csv: &str) -> String {
    csv.lines()
        .map(|l| if l.starts_with('#') { l } else { l.rsplit_once(',').map_or(l, |(a, _)| a) })
        .collect::<Vec<_>>()
        .join("\n")
}

const ONE_STAGE: &str = "free_rank = 2\n[[stages]]\nu = \"g1\"\nrank = 1\n";

#[test]
fn zn_table_has_one_row_per_radius() {
    let o = discrim(&["zn", "--n", "2", "--rmax", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("# discrim "));
    assert!(out.contains("# seed 0"));
    let rows = data_rows(&out);
    assert_eq!(rows.len(), 7);
    let exact: Vec<&str> = rows.iter().map(|r| r[4].as_str()).collect();
    assert_eq!(exact, ["1", "1", "2", "3", "3", "4", "4"]);
}

#[test]
fn budget_stops_early_with_partial_output() {
    let o = discrim(&["zn", "--n", "3", "--rmax", "9", "--budget", "100000"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!data_rows(&stdout(&o)).is_empty());
}

#[test]
fn bad_arguments_are_input_errors() {
    assert_eq!(discrim(&["zn", "--n", "2"]).status.code(), Some(2));
    let missing = discrim(&["curve", "--spec", "/nonexistent.toml", "--rmax", "1"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn bigpowers_threshold_and_rejection() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "a.toml", "u = \"g1\"\ngs = [\"g1 g1 g1 g2 G1 G1\"]\n");
    let o = discrim(&["bigpowers", "--spec", good.to_str().unwrap(), "--samples", "300"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = data_rows(&stdout(&o));
    assert_eq!(rows[0][4], "3");
    assert!(rows[0].contains(&"pass".to_string()));

    let bad = write(dir.path(), "b.toml", "u = \"g1\"\ngs = [\"G1 G1\"]\n");
    assert_eq!(discrim(&["bigpowers", "--spec", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn crosscheck_agrees_and_detects_a_bad_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "g.toml", ONE_STAGE);
    let s = spec.to_str().unwrap();
    let ok = discrim(&["crosscheck", "--spec", s, "--r", "1"]);
    assert_eq!(ok.status.code(), Some(0));
    let broken = discrim(&["crosscheck", "--spec", s, "--r", "1", "--p", "1"]);
    assert_eq!(broken.status.code(), Some(1));
    assert!(stdout(&broken).contains("G1 t1.1"));
}

#[test]
fn curve_matches_known_values() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "g.toml", ONE_STAGE);
    let o = discrim(&["curve", "--spec", spec.to_str().unwrap(), "--rmax", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let p: Vec<String> = data_rows(&stdout(&o)).iter().map(|r| r[1].clone()).collect();
    assert_eq!(p, ["1", "2", "4", "6"]);

    let two = write(dir.path(), "h.toml", &format!("{ONE_STAGE}[[stages]]\nu = \"g2\"\nrank = 1\n"));
    let o = discrim(&["curve", "--spec", two.to_str().unwrap(), "--rmax", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let last = data_rows(&stdout(&o)).pop().unwrap();
    assert_eq!(last[5], "57");
    assert_eq!(last[9], "true");
}

#[test]
fn ball_sizes_for_free_group() {
    let o = discrim(&["ball", "--rank", "2", "--rmax", "3"]);
    let sizes: Vec<String> = data_rows(&stdout(&o)).iter().map(|r| r[1].clone()).collect();
    assert_eq!(sizes, ["1", "5", "17", "53"]);
}

#[test]
fn reruns_are_identical_apart_from_timing() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "g.toml", ONE_STAGE);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = discrim(&[
            "curve", "--spec", spec.to_str().unwrap(), "--rmax", "3", "--seed", "5", "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        assert!(o.stdout.is_empty());
    }
    let a = std::fs::read_to_string(a).unwrap();
    let b = std::fs::read_to_string(b).unwrap();
    assert!(a.contains("# seed 5"));
    assert_eq!(without_wall(&a), without_wall(&b));
}

#[test]
fn jsonl_rows_parse() {
    let o = discrim(&["zn", "--n", "1", "--rmax", "2", "--format", "jsonl"]);
    let lines: Vec<serde_json::Value> =
        stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines[0]["tool"], "discrim");
    assert_eq!(lines[0]["config"]["n"], 1);
    assert_eq!(lines.len(), 4);
    assert!(lines[1..].iter().all(|r| r["wall_ms"].is_u64()));
}
