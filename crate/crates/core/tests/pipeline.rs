//! End-to-end runs of the experiment engine on small configurations.

use zakotfs::harness::{report, Experiment, ExperimentConfig, Modem};
use zakotfs::ldpc::{read_alist, write_alist};

fn small(nu: &[f64], snr: &[f64], schemes: &[&str]) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.channel.nu_max = nu.to_vec();
    cfg.channel.oversampling = 4;
    cfg.link.snr_db = snr.to_vec();
    cfg.link.schemes = schemes.iter().map(|s| s.parse().unwrap()).collect();
    cfg.pilot.rpe_realizations = 4;
    cfg.run.trials = 4;
    cfg.run.frames_per_channel = 2;
    cfg.run.batch_channels = 2;
    cfg
}

#[test]
fn sweep_row_count_and_order() {
    let cfg = small(&[500.0, 3000.0], &[10.0, 20.0], &["ldpc-strip", "uncoded-standard", "ldpc-rpe"]);
    let rows = Experiment::new(cfg, 1).unwrap().run_sweep().unwrap();
    assert_eq!(rows.len(), 2 * 2 * 3);
    assert_eq!((rows[0].nu_max, rows[0].snr_db), (500.0, 10.0));
    assert_eq!(rows[3].snr_db, 20.0);
    assert_eq!(rows[6].nu_max, 3000.0);
    for r in &rows {
        assert!(r.frames == 4 || r.bit_errors >= 100, "{} {}", r.scheme, r.frames);
        assert!(r.frames % 2 == 0);
    }
    assert_eq!(rows[0].info_bits_per_frame, 1506);
}

#[test]
fn high_snr_low_doppler_is_error_free() {
    let cfg = small(&[300.0], &[40.0], &["ldpc-strip", "uncoded-standard"]);
    let rows = Experiment::new(cfg, 1).unwrap().run_sweep().unwrap();
    for r in &rows {
        assert_eq!(r.bit_errors, 0, "{}", r.scheme);
    }
    assert!(rows[0].mean_iterations() <= 1.0);
}

#[test]
fn noisy_pilot_costs_little_over_noiseless() {
    let mut cfg = small(&[1000.0], &[3.0], &["uncoded-standard"]);
    cfg.run.trials = 8;
    let noisy = Experiment::new(cfg.clone(), 1).unwrap().run_sweep().unwrap()[0].ber();
    cfg.pilot.noiseless = true;
    let genie = Experiment::new(cfg, 1).unwrap().run_sweep().unwrap()[0].ber();
    assert!(genie > 0.0);
    assert!(noisy < 1.3 * genie, "noisy {noisy} genie {genie}");
}

#[test]
fn stopping_rule_caps_frames() {
    let mut cfg = small(&[1000.0], &[0.0], &["uncoded-standard", "ldpc-strip"]);
    cfg.run.trials = 40;
    cfg.run.target_errors = 100;
    let rows = Experiment::new(cfg, 1).unwrap().run_sweep().unwrap();
    // At 0 dB uncoded frames carry ~100 errors each: the first channel is
    // enough. The stop is checked per channel, so frames come in pairs.
    assert_eq!(rows[0].frames, 2);
    assert!(rows[0].bit_errors >= 100);
    assert!(rows[1].frames <= 40);
}

#[test]
fn heatmap_low_rpe_region_shrinks() {
    let mut cfg = small(&[500.0, 12000.0], &[13.0], &["ldpc-strip"]);
    cfg.pilot.rpe_realizations = 10;
    let exp = Experiment::new(cfg.clone(), 1).unwrap();
    let maps = exp.run_heatmap().unwrap();
    let low = maps[0].1.fraction_below(0.01);
    let high = maps[1].1.fraction_below(0.01);
    assert!(high < low, "{low} -> {high}");
    assert!(maps[1].1.mean() > maps[0].1.mean());
    let mut out = Vec::new();
    report::write_heatmap(&mut out, &cfg, &maps).unwrap();
    assert_eq!(String::from_utf8(out).unwrap().lines().count(), 4 + 2 * 1536);
}

#[test]
fn mc_modem_runs_through_the_engine() {
    let mut cfg = small(&[500.0], &[30.0], &["ldpc-strip"]);
    cfg.link.modem = Modem::Mc;
    let rows = Experiment::new(cfg, 1).unwrap().run_sweep().unwrap();
    assert_eq!(rows[0].modem, Modem::Mc);
    assert_eq!(rows[0].bit_errors, 0);
}

#[test]
fn exported_code_matches_engine_code() {
    let exp = Experiment::new(small(&[0.0], &[10.0], &["ldpc-strip"]), 1).unwrap();
    let code = read_alist(&write_alist(exp.code())).unwrap();
    assert_eq!(code.checks(), exp.code().checks());
}
