use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_linksim"))
}

#[test]
fn simulate_then_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "min_block_errors = 2\nmax_blocks = 4\n").unwrap();
    let out = dir.path().join("run");
    let st = bin()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .args(["--modes", "stbc,sm", "--snr", "10:10:30", "--seed", "3"])
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    for f in ["sweep.csv", "sweep_meta.txt", "config.toml", "envelopes.csv", "switching_point.txt", "fig7.svg"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 6 * 3);
    let re = dir.path().join("re");
    let st = bin().arg("analyze").arg("--in").arg(out.join("sweep.csv")).arg("--out").arg(&re).output().unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    assert_eq!(
        std::fs::read_to_string(re.join("envelopes.csv")).unwrap(),
        std::fs::read_to_string(out.join("envelopes.csv")).unwrap()
    );
}

#[test]
fn profile_subset_writes_csv_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "min_block_errors = 1\nmax_blocks = 2\n").unwrap();
    let st = bin()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .args(["--modes", "siso", "--profiles", "QPSK-1/2,64QAM-3/4", "--snr", "20", "--serial", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    assert!(dir.path().join("sweep.csv").exists());
    assert!(!dir.path().join("envelopes.csv").exists());
    let st = bin().arg("analyze").arg("--in").arg(dir.path().join("sweep.csv")).arg("--out").arg(dir.path()).output().unwrap();
    assert!(!st.status.success());
}

#[test]
fn bad_input_exits_nonzero() {
    let st = bin().args(["simulate", "--modes", "mimo"]).output().unwrap();
    assert!(!st.status.success());
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "fft_size = 500\n").unwrap();
    let st = bin().args(["simulate", "--config"]).arg(&cfg).output().unwrap();
    assert!(!st.status.success());
    assert!(!String::from_utf8_lossy(&st.stderr).is_empty());
    let st = bin().args(["analyze", "--in", "/nonexistent.csv", "--out"]).arg(dir.path()).output().unwrap();
    assert!(!st.status.success());
}

#[test]
fn selftest_and_layout() {
    let st = bin().arg("selftest").output().unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stdout));
    assert!(!String::from_utf8_lossy(&st.stdout).contains("FAIL"));
    let st = bin().arg("layout").output().unwrap();
    assert!(st.status.success());
    assert!(String::from_utf8_lossy(&st.stdout).lines().count() >= 512);
}
