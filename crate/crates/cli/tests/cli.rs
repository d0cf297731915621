use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn mulimit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mulimit")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn verdict_classes(dir: &Path) -> Vec<(String, String)> {
    fs::read_to_string(dir.join("verdicts.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let mut f = l.split(',');
            (f.next().unwrap().to_string(), f.next().unwrap().to_string())
        })
        .collect()
}

#[test]
fn oracle_prints_count_total_ratio() {
    let dir = TempDir::new().unwrap();
    for (word, time, expected) in [("0", 1, "1 8 0.125"), ("0", 2, "1 32 0.03125"), ("00", 1, "1 16 0.0625")] {
        let cfg = write_config(
            dir.path(),
            "oracle.toml",
            &format!("mode = \"oracle\"\nrule = \"max\"\nword = \"{word}\"\ntime = {time}\n"),
        );
        let out = mulimit(&["oracle", "--config", &cfg]);
        assert!(out.status.success());
        assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), expected);
    }
}

#[test]
fn max_fixture_zero_decays() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "max.toml",
        "mode = \"max-fixture\"\nwidth = 2048\nsteps = 400\ntrials = 4\nstride = 10\ntransient = 20\nqueries = [\"0\", \"1\"]\n",
    );
    let out_dir = dir.path().join("out");
    let out = mulimit(&["run", "--config", &cfg, "--strict", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let classes = verdict_classes(&out_dir);
    assert_eq!(classes[0], ("0".to_string(), "decaying".to_string()));
    assert_eq!(classes[1], ("1".to_string(), "persistent".to_string()));
    let segments = fs::read_to_string(out_dir.join("segments.csv")).unwrap();
    assert_eq!(segments.lines().count(), 1);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "run.toml",
        "width = 128\nsteps = 400\ntrials = 3\nseed = 11\nstride = 20\ntransient = 20\nqueries = [\"a\", \"#\"]\ndiagram = true\n[family.1]\nkind = \"fibonacci\"\n",
    );
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let out = mulimit(&["run", "--config", &cfg, "--out", d.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["densities.csv", "segments.csv", "verdicts.csv", "diagram-trial-0.pgm", "diagram-trial-2.pgm"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn zero_step_diagram_is_one_row() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "d.toml",
        "width = 16\nsteps = 0\nqueries = [\"a\"]\n[family.1]\nkind = \"thue-morse\"\n",
    );
    let out = mulimit(&["diagram", "--config", &cfg, "--trial", "3", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let pgm = fs::read_to_string(dir.path().join("diagram-trial-3.pgm")).unwrap();
    let mut lines = pgm.lines();
    assert_eq!(lines.next(), Some("P2"));
    assert_eq!(lines.next(), Some("16 1"));
}

#[test]
fn invalid_config_exits_one_with_field() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", "star_density = 2.0\n[family.1]\nkind = \"fibonacci\"\n");
    let out = mulimit(&["run", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("star_density"));

    let cfg = write_config(dir.path(), "typo.toml", "widht = 10\n");
    let out = mulimit(&["run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn strict_flags_inconclusive_with_two() {
    // # density halves over the run but stays well above zero
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "short.toml",
        "width = 256\nsteps = 320\nstride = 2\ntransient = 4\nqueries = [\"#\"]\n[family.1]\nkind = \"fibonacci\"\n",
    );
    let out_dir = dir.path().join("o");
    let out = mulimit(&["run", "--config", &cfg, "--strict", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(verdict_classes(&out_dir)[0].1, "inconclusive");
    assert_eq!(out.status.code(), Some(2));
    let lax = mulimit(&["run", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(lax.status.code(), Some(0));
}
