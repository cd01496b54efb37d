use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use linksim::harness::{
    analyze, emit_csv, read_csv, run_sweep_with, write_analysis, CsiMode, Execution, SimConfig, SnrGrid,
    SweepMeta,
};
use linksim::ofdm::GridLayout;
use linksim::params::{BurstProfile, MimoMode};
use linksim::{selftest, Error, Result};

#[derive(Parser)]
#[command(name = "linksim", version, about = "OFDMA downlink link-level simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte-Carlo sweep and write CSV, envelopes and plots.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated list of siso, stbc, sm.
        #[arg(long, value_delimiter = ',')]
        modes: Option<Vec<MimoMode>>,
        /// Comma-separated profiles such as QPSK-1/2,64QAM-3/4.
        #[arg(long, value_delimiter = ',')]
        profiles: Option<Vec<BurstProfile>>,
        /// SNR grid start:step:stop in dB, or a single value.
        #[arg(long)]
        snr: Option<SnrGrid>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csi: Option<CsiMode>,
        /// Run points on one thread.
        #[arg(long)]
        serial: bool,
    },
    /// Recompute AMC envelopes and the switching point from a sweep CSV.
    Analyze {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the quick invariant checks.
    Selftest,
    /// Print the subcarrier layout (bin index and role).
    Layout {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn load_config(path: Option<&Path>) -> Result<SimConfig> {
    match path {
        Some(p) => SimConfig::load(p),
        None => Ok(SimConfig::default()),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    config: Option<PathBuf>,
    modes: Option<Vec<MimoMode>>,
    profiles: Option<Vec<BurstProfile>>,
    snr: Option<SnrGrid>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    csi: Option<CsiMode>,
    serial: bool,
) -> Result<bool> {
    let mut cfg = load_config(config.as_deref())?;
    if let Some(m) = modes {
        cfg.modes = m;
    }
    if let Some(p) = profiles {
        cfg.profiles = p;
    }
    if let Some(s) = snr {
        cfg.snr = s;
    }
    if let Some(s) = seed {
        cfg.master_seed = s;
    }
    if let Some(o) = out {
        cfg.out_dir = o;
    }
    if let Some(c) = csi {
        cfg.csi = c;
    }
    cfg.validate()?;
    let exec = if serial { Execution::Serial } else { Execution::Parallel };
    let report = run_sweep_with(&cfg, exec)?;
    for f in &report.failures {
        eprintln!("point failed: {} {} {} dB: {}", f.mode, f.profile, f.snr_db, f.error);
    }
    let dir = cfg.out_dir.clone();
    create_dir(&dir)?;
    write_file(&dir.join("config.toml"), &cfg.to_toml_string())?;
    write_file(&dir.join("sweep_meta.txt"), &SweepMeta::from_config(&cfg).render())?;
    if report.result.is_empty() {
        return Err(Error::IncompleteSweep("every point failed".into()));
    }
    emit_csv(&report.result, &dir.join("sweep.csv"))?;
    let complete = report
        .result
        .modes()
        .into_iter()
        .all(|m| report.result.profiles(m).len() == BurstProfile::ALL.len());
    if complete {
        let analysis = analyze(&report.result)?;
        write_analysis(&report.result, &analysis, &dir)?;
        print!("{}", analysis.summary());
    } else {
        println!("analysis skipped: AMC envelopes need all six profiles");
    }
    println!("{} points written to {}", report.result.len(), dir.display());
    Ok(report.failures.is_empty())
}

fn analyze_csv(input: &Path, out: &Path) -> Result<()> {
    let meta_path = input.with_file_name("sweep_meta.txt");
    let (fingerprint, seed) = match std::fs::read_to_string(&meta_path) {
        Ok(text) => {
            let m = SweepMeta::parse(&text)?;
            (m.fingerprint, m.master_seed)
        }
        Err(_) => (String::new(), 0),
    };
    let sweep = read_csv(input, fingerprint, seed)?;
    let analysis = analyze(&sweep)?;
    create_dir(out)?;
    write_analysis(&sweep, &analysis, out)?;
    print!("{}", analysis.summary());
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Simulate {
            config,
            modes,
            profiles,
            snr,
            seed,
            out,
            csi,
            serial,
        } => simulate(config, modes, profiles, snr, seed, out, csi, serial),
        Command::Analyze { input, out } => analyze_csv(&input, &out).map(|_| true),
        Command::Selftest => {
            let checks = selftest::run_all();
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            Ok(checks.iter().all(|c| c.passed))
        }
        Command::Layout { config } => {
            let cfg = load_config(config.as_deref())?;
            print!("{}", GridLayout::new(&cfg.params)?.dump());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
