use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use zakotfs::dd::DDSignal;
use zakotfs::harness::{report, Experiment, ExperimentConfig};
use zakotfs::ldpc::write_alist;
use zakotfs::zak::inverse_zak;
use zakotfs::Complex;

/// Zak-OTFS link simulator.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Averaged RPE map for every configured Doppler value.
    Heatmap(Common),
    /// BER against maximum Doppler.
    SweepDoppler(Common),
    /// BER against SNR.
    SweepSnr(Common),
    /// Time-domain samples of the pulsone at the pilot bin.
    PulsoneDump(Common),
    /// Parity-check matrix of the LDPC code in alist format.
    CodeExport(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML); defaults to the reference setup.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))?,
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.run.seed = seed;
        }
        Ok(cfg)
    }

    fn create(&self, name: &str) -> Result<BufWriter<File>> {
        std::fs::create_dir_all(&self.out).with_context(|| format!("creating {}", self.out.display()))?;
        let path = self.out.join(name);
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        Ok(BufWriter::new(file))
    }
}

fn finish(mut w: BufWriter<File>, dir: &Path, name: &str) -> Result<()> {
    w.flush()?;
    eprintln!("wrote {}", dir.join(name).display());
    Ok(())
}

fn sweep(args: &Common, name: &str) -> Result<()> {
    let cfg = args.load()?;
    let exp = Experiment::new(cfg.clone(), args.workers)?;
    let rows = exp.run_sweep()?;
    for r in &rows {
        eprintln!(
            "{} nu_max={} snr={} frames={} ber={:e} ({:.1?})",
            r.scheme,
            r.nu_max,
            r.snr_db,
            r.frames,
            r.ber(),
            r.wall_time
        );
    }
    let mut w = args.create(name)?;
    report::write_rows(&mut w, name.trim_end_matches(".csv"), &cfg, &rows)?;
    finish(w, &args.out, name)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Heatmap(args) => {
            let cfg = args.load()?;
            let exp = Experiment::new(cfg.clone(), args.workers)?;
            let maps = exp.run_heatmap()?;
            let mut w = args.create("heatmap.csv")?;
            report::write_heatmap(&mut w, &cfg, &maps)?;
            finish(w, &args.out, "heatmap.csv")?;
            let mut w = args.create("heatmap_summary.csv")?;
            report::write_heatmap_summary(&mut w, &cfg, &maps, 0.1, exp.pilot().l_p)?;
            finish(w, &args.out, "heatmap_summary.csv")
        }
        Command::SweepDoppler(args) => sweep(&args, "ber_vs_doppler.csv"),
        Command::SweepSnr(args) => sweep(&args, "ber_vs_snr.csv"),
        Command::PulsoneDump(args) => {
            let cfg = args.load()?;
            let params = cfg.lattice_params()?;
            let (k, l) = (params.m() / 2, params.n() / 2);
            let frame = inverse_zak(&DDSignal::pulse(params, k, l, Complex::new(1.0, 0.0)));
            let mut w = args.create("pulsone.csv")?;
            writeln!(w, "# pulsone at k={k} l={l}")?;
            writeln!(w, "n,t_s,re,im")?;
            for (n, s) in frame.samples().iter().enumerate() {
                writeln!(w, "{n},{:e},{:e},{:e}", n as f64 / params.bandwidth(), s.re, s.im)?;
            }
            finish(w, &args.out, "pulsone.csv")
        }
        Command::CodeExport(args) => {
            let cfg = args.load()?;
            let code = zakotfs::ldpc::LdpcCode::construct(cfg.link.code_seed)?;
            let mut w = args.create("code.alist")?;
            w.write_all(write_alist(&code).as_bytes())?;
            finish(w, &args.out, "code.alist")
        }
    }
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(2);
    }
}
