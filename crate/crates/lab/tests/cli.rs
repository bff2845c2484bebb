use std::path::Path;
use std::process::{Command, Output};

fn poslab(args: &[&str], out_dir: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_poslab"));
    cmd.args(args).env_remove("POSLAB_OUTPUT_DIR");
    if let Some(d) = out_dir {
        cmd.env("POSLAB_OUTPUT_DIR", d);
    }
    cmd.output().unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn list_experiments_names_all_eight() {
    let out = poslab(&["list-experiments"], None);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for name in [
        "tails",
        "project",
        "fragility",
        "causality",
        "minloc",
        "commutator",
        "belljump",
        "jointclick",
    ] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name}");
    }
}

#[test]
fn validate_echoes_defaults_or_itemizes_errors() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_config(
        dir.path(),
        "good.conf",
        "experiment = minloc\nregion_half_width = 1\n",
    );
    let out = poslab(&["validate", &good], None);
    assert_eq!(out.status.code(), Some(0));
    let echo: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(echo["points"], 64);
    assert_eq!(echo["shrink_levels"], 2);

    let bad = write_config(
        dir.path(),
        "bad.conf",
        "experiment = minloc\nregion_half_width = wide\nregion_half_width = 1\ncolour = red\n",
    );
    let out = poslab(&["validate", &bad], None);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(
        err.contains("line 2: `region_half_width` must be a number"),
        "{err}"
    );
    assert!(err.contains("lines 2 and 3"), "{err}");
    assert!(err.contains("line 4: unknown key `colour`"), "{err}");
}

#[test]
fn run_writes_into_env_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "tails.conf",
        "experiment = tails\noutput_dir = ignored-by-env\n",
    );
    let out_dir = dir.path().join("artifacts");
    let out = poslab(&["run", &cfg], Some(&out_dir));
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for f in ["tail_profile.csv", "tail_fit.json", "manifest.json"] {
        assert!(out_dir.join(f).is_file(), "{f}");
    }
    assert!(!Path::new("ignored-by-env").exists());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 2);
}

#[test]
fn horizon_breach_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.conf",
        "experiment = causality\nbump_radius = 2\ntime = 19\npoints = 256\n",
    );
    let out = poslab(&["run", &cfg], Some(&dir.path().join("out")));
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .contains("causality_within_horizon"));
    // artifacts are still written
    assert!(dir.path().join("out/causality.csv").is_file());
}

#[test]
fn runtime_failures_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = poslab(
        &["run", dir.path().join("missing.conf").to_str().unwrap()],
        None,
    );
    assert_eq!(out.status.code(), Some(2));

    let blocker = dir.path().join("blocker");
    std::fs::write(&blocker, b"").unwrap();
    let cfg = write_config(
        dir.path(),
        "p.conf",
        "experiment = project\nbump_radius = 2\npoints = 64\nlength = 16\n",
    );
    let out = poslab(&["run", &cfg], Some(&blocker.join("x")));
    assert_eq!(out.status.code(), Some(2));
}
