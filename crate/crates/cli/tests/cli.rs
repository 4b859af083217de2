use std::path::Path;
use std::process::{Command, Output};

fn defbec(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_defbec")).args(args).current_dir(dir).output().expect("binary runs")
}

fn sodium_sweep(dir: &Path, out: &str, threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_defbec"));
    cmd.args([
        "sweep", "--preset", "sodium", "--kappa", "0,0.005,0.008", "--natoms", "1e14", "--eta-zero", "--delta-range",
        "-2e7:2e7", "--points", "400", "--photons", "25", "--out", out, "--format", "csv,json,svg",
    ])
    .current_dir(dir);
    if let Some(t) = threads {
        cmd.env("DEFBEC_THREADS", t);
    }
    cmd.output().expect("binary runs")
}

#[test]
fn sweep_writes_all_formats_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let names = ["sweep.csv", "sweep.json", "n_group_natoms_100000000000000.svg"];
    let a = sodium_sweep(dir.path(), "a", None);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let first: Vec<Vec<u8>> = names.iter().map(|n| std::fs::read(dir.path().join("a").join(n)).unwrap()).collect();
    let b = sodium_sweep(dir.path(), "a", Some("1"));
    assert!(b.status.success());
    for (name, x) in names.iter().zip(&first) {
        let y = std::fs::read(dir.path().join("a").join(name)).unwrap();
        assert!(*x == y, "{name} differs between runs");
    }

    let csv = String::from_utf8(first[0].clone()).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "kappa,n_atoms,delta_hz,chi1_re,chi1_im,chinl_re,chinl_im,chi_re,chi_im,n_group");
    assert_eq!(lines.count(), 1200);
    let stdout = String::from_utf8_lossy(&a.stdout);
    assert_eq!(stdout.matches("n_g zero crossings").count(), 3);
    assert!(stdout.contains("both signs"));
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.toml"),
        "kappa = [0.0]\nnatoms = [300, 100]\ndelta_range = [-1e7, 1e7]\npoints = 11\nformat = [\"csv\"]\nout = \"cfg\"\n",
    )
    .unwrap();
    let o = defbec(&["sweep", "--config", "run.toml", "--points", "7"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("cfg/sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 7);

    std::fs::write(dir.path().join("bad.toml"), "kappa = [0.0]\nnatoms = [1e14]\ndelta_range = [-1, 1]\nfrobnicate = 3\n").unwrap();
    let o = defbec(&["sweep", "--config", "bad.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("frobnicate"));

    std::fs::write(dir.path().join("nodelta.toml"), "kappa = [0.0]\nnatoms = [1e14]\n").unwrap();
    let o = defbec(&["sweep", "--config", "nodelta.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("delta_range"));
}

#[test]
fn pulse_through_vacuum_and_doublet() {
    let dir = tempfile::tempdir().unwrap();
    let o = defbec(&["pulse", "--medium", "vacuum", "--out", "p.csv"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("n_g at carrier    1.000000000"));
    assert!(dir.path().join("p.csv").exists());

    let o = defbec(
        &["pulse", "--medium", "wang", "--slab-length", "0.06", "--fwhm", "1.2e-5", "--samples", "16384"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("n_g at carrier    -309."));
}

#[test]
fn validate_reports_every_criterion() {
    let dir = tempfile::tempdir().unwrap();
    let o = defbec(&["validate"], dir.path());
    let stdout = String::from_utf8_lossy(&o.stdout);
    for id in 1..=9 {
        assert!(stdout.contains(&format!("[C{id}]")), "C{id} missing");
    }
    // the EIT dip depth and the eta trend fail with the preset numbers
    assert_eq!(stdout.lines().filter(|l| l.starts_with("FAIL")).count(), 2);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bad_thread_count_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_defbec"))
        .args(["sweep", "--points", "3"])
        .env("DEFBEC_THREADS", "zero")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
