//! Command-line behaviour.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_zakotfs"))
}

const TINY: &str = r#"
[channel]
nu_max = [800.0]
oversampling = 4
[link]
snr_db = [8.0, 12.0]
schemes = ["ldpc-strip", "uncoded-rpe"]
[pilot]
rpe_realizations = 2
[run]
trials = 4
frames_per_channel = 2
batch_channels = 2
"#;

#[test]
fn sweep_writes_csv_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tiny.toml");
    std::fs::write(&cfg, TINY).unwrap();
    let mut outputs = Vec::new();
    for (sub, workers) in [("a", "1"), ("b", "2")] {
        let out = dir.path().join(sub);
        let status = bin()
            .args(["sweep-snr", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .args(["--workers", workers, "--seed", "9"])
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(std::fs::read_to_string(out.join("ber_vs_snr.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let lines: Vec<&str> = outputs[0].lines().collect();
    assert!(lines[1].starts_with("# config_sha256="));
    assert_eq!(lines[2], "# seed=9");
    assert_eq!(lines.len(), 4 + 2 * 2);
}

#[test]
fn pulsone_and_code_export() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    assert!(bin().arg("pulsone-dump").arg("--out").arg(out).status().unwrap().success());
    let pulsone = std::fs::read_to_string(out.join("pulsone.csv")).unwrap();
    assert_eq!(pulsone.lines().count(), 2 + 1536);
    assert!(bin().arg("code-export").arg("--out").arg(out).status().unwrap().success());
    let alist = std::fs::read_to_string(out.join("code.alist")).unwrap();
    assert!(alist.starts_with("3012 1506\n3 6\n"));
}

#[test]
fn bad_config_fails_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[link]\nschemes = [\"turbo-strip\"]\n").unwrap();
    let out = bin().arg("heatmap").arg("--config").arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("turbo"), "{err}");
    let missing = bin().args(["heatmap", "--config", "/nonexistent/cfg.toml"]).output().unwrap();
    assert!(!missing.status.success());
}
