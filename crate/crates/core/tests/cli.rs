use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use orbitlab::cli::{CACHE_DIR_ENV, EXIT_MISSING_CACHE, EXIT_RESOURCE, EXIT_UNKNOWN_EXPERIMENT, EXIT_USAGE};

fn orbitlab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orbitlab"))
        .args(args)
        .current_dir(dir)
        .env_remove(CACHE_DIR_ENV)
        .output()
        .expect("spawn orbitlab")
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

#[test]
fn count_ball_from_config_writes_one_row() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "cb.toml", "experiment = \"count-ball\"\nt = 12.0\n[lattice]\nkind = \"psl2z\"\n");
    let o = orbitlab(d.path(), &["enumerate", "--cache-dir", "cache", "--out-dir", "out"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = orbitlab(d.path(), &["run", "--config", "cb.toml", "--cache-dir", "cache", "--out-dir", "out"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let csv = fs::read_to_string(d.path().join("out/count_ball.csv")).unwrap();
    let lines: Vec<_> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "bin_id,lo,hi,observed,predicted,ratio");
    let ratio: f64 = lines[1].rsplit(',').next().unwrap().parse().unwrap();
    assert!((ratio - 1.0).abs() < 0.05);

    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.path().join("out/count_ball.json")).unwrap()).unwrap();
    assert_eq!(json["schema_version"], 1);
    assert_eq!(json["parameters"]["t"], 12.0);
    assert_eq!(json["provenance"]["caches"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn radius_over_cap_is_a_resource_error_without_output() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "big.toml", "experiment = \"count-ball\"\nt = 100.0\n");
    let o = orbitlab(d.path(), &["run", "--config", "big.toml", "--cache-dir", "cache", "--out-dir", "out"]);
    assert_eq!(o.status.code(), Some(EXIT_RESOURCE));
    assert!(!d.path().join("out").exists());
    assert!(!d.path().join("cache").exists());
}

#[test]
fn seeded_rerun_is_byte_identical() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "tr.toml", "experiment = \"translate\"\nsamples = 20000\nmargins = [0.0, 4.0]\n");
    let mut runs = Vec::new();
    for out in ["a", "b"] {
        let o = orbitlab(d.path(), &["run", "--config", "tr.toml", "--seed", "11", "--out-dir", out]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        runs.push((
            fs::read(d.path().join(out).join("translate.csv")).unwrap(),
            fs::read(d.path().join(out).join("translate.json")).unwrap(),
        ));
    }
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn error_classes_have_distinct_exit_codes() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "u.toml", "experiment = \"count-everything\"\n");
    let o = orbitlab(d.path(), &["run", "--config", "u.toml"]);
    assert_eq!(o.status.code(), Some(EXIT_UNKNOWN_EXPERIMENT));

    let o = orbitlab(d.path(), &["count-sector", "--cache-dir", "nowhere", "--out-dir", "out"]);
    assert_eq!(o.status.code(), Some(EXIT_MISSING_CACHE));
    assert!(String::from_utf8_lossy(&o.stderr).contains("orbitlab enumerate"));

    write(d.path(), "typo.toml", "experimnet = \"count-ball\"\n");
    let o = orbitlab(d.path(), &["run", "--config", "typo.toml"]);
    assert_eq!(o.status.code(), Some(EXIT_USAGE));

    write(d.path(), "cb.toml", "experiment = \"count-ball\"\n");
    let o = orbitlab(d.path(), &["count-sector", "--config", "cb.toml"]);
    assert_eq!(o.status.code(), Some(EXIT_USAGE));
    assert!(!d.path().join("out").exists());
}

#[test]
fn short_cache_asks_for_a_larger_enumeration() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "e.toml", "t = 6.0\n");
    assert!(orbitlab(d.path(), &["enumerate", "--config", "e.toml", "--cache-dir", "c", "--out-dir", "o"]).status.success());
    write(d.path(), "b.toml", "t = 9.0\n");
    let o = orbitlab(d.path(), &["count-ball", "--config", "b.toml", "--cache-dir", "c", "--out-dir", "o"]);
    assert_eq!(o.status.code(), Some(EXIT_MISSING_CACHE));
}

#[test]
fn environment_selects_the_cache_dir() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "e.toml", "t = 6.0\ncache_dir = \"from-config\"\n");
    let run = |args: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_orbitlab"))
            .args(args)
            .current_dir(d.path())
            .env(CACHE_DIR_ENV, "from-env")
            .output()
            .unwrap()
    };
    assert!(run(&["enumerate", "--config", "e.toml", "--out-dir", "o"]).status.success());
    assert!(d.path().join("from-env").is_dir());
    assert!(!d.path().join("from-config").exists());
    assert!(run(&["count-ball", "--config", "e.toml", "--out-dir", "o"]).status.success());
}

#[test]
fn selftest_passes_at_small_sample_counts() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "s.toml", "samples = 500\n");
    let o = orbitlab(d.path(), &["selftest", "--config", "s.toml", "--out-dir", "o"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(d.path().join("o/selftest.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 15);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",true")));
}
