//! Monte-Carlo sweep over (mode, profile, SNR) points.
//!
//! Seeds: the seed of a point is the first 8 bytes (little endian) of
//! `SHA-256(master_seed_le || mode_index || profile_index || snr_mdb_le)`,
//! where `snr_mdb` is the SNR in milli-dB rounded to an `i64`. Trial `k`
//! of a point draws from `ChaCha8Rng::from_seed(SHA-256(point_seed_le ||
//! k_le))`. Results therefore do not depend on execution order, thread
//! count or the rest of the grid.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::config::SimConfig;
use super::link::LinkSimulator;
use crate::channel::snr_to_noise_var;
use crate::error::{Error, Result};
use crate::metrics::{LinkMetrics, SweepResult};
use crate::params::{BurstProfile, MimoMode};

pub fn point_seed(master_seed: u64, mode: MimoMode, profile: BurstProfile, snr_db: f64) -> u64 {
    let mdb = (snr_db * 1000.0).round() as i64;
    let mut h = Sha256::new();
    h.update(master_seed.to_le_bytes());
    h.update([mode.index() as u8, profile.index() as u8]);
    h.update(mdb.to_le_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

pub fn trial_rng(point_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(point_seed.to_le_bytes());
    h.update(trial.to_le_bytes());
    ChaCha8Rng::from_seed(h.finalize().into())
}

/// Runs trials until `min_block_errors` block errors or `max_blocks` blocks.
/// The block cap is checked after whole trials, so a point may overshoot it
/// by less than one trial's worth of blocks.
pub fn run_point(
    cfg: &SimConfig,
    mode: MimoMode,
    profile: BurstProfile,
    snr_db: f64,
    point_seed: u64,
) -> Result<LinkMetrics> {
    let sim = LinkSimulator::new(cfg, mode, profile)?;
    let noise_var = cfg.noise_var_override.unwrap_or_else(|| snr_to_noise_var(snr_db));
    let (mut bits, mut bit_errors, mut blocks, mut block_errors) = (0u64, 0u64, 0u64, 0u64);
    let mut trial = 0u64;
    while block_errors < cfg.stop.min_block_errors && blocks < cfg.stop.max_blocks {
        let mut rng = trial_rng(point_seed, trial);
        let o = sim.run_trial(&mut rng, noise_var)?;
        bits += o.bits();
        bit_errors += o.bit_errors();
        blocks += o.blocks.len() as u64;
        block_errors += o.block_errors();
        trial += 1;
    }
    LinkMetrics::from_counts(
        &cfg.params,
        mode,
        profile,
        snr_db,
        bits,
        bit_errors,
        blocks,
        block_errors,
        point_seed,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointFailure {
    pub mode: MimoMode,
    pub profile: BurstProfile,
    pub snr_db: f64,
    pub error: Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub result: SweepResult,
    pub failures: Vec<PointFailure>,
}

/// Every (mode, profile, snr) triple in the config, in output order.
pub fn sweep_points(cfg: &SimConfig) -> Vec<(MimoMode, BurstProfile, f64)> {
    let mut modes = cfg.modes.clone();
    modes.sort();
    modes.dedup();
    let mut profiles = cfg.profiles.clone();
    profiles.sort_by_key(BurstProfile::index);
    profiles.dedup();
    let grid = cfg.snr.points();
    let mut out = Vec::with_capacity(modes.len() * profiles.len() * grid.len());
    for &m in &modes {
        for &p in &profiles {
            for &s in &grid {
                out.push((m, p, s));
            }
        }
    }
    out
}

pub fn run_sweep(cfg: &SimConfig) -> Result<SweepReport> {
    run_sweep_with(cfg, Execution::Parallel)
}

/// Failed points are reported and left out of the result; the remaining
/// points still run.
pub fn run_sweep_with(cfg: &SimConfig, exec: Execution) -> Result<SweepReport> {
    cfg.validate()?;
    let points = sweep_points(cfg);
    let one = |&(m, p, s): &(MimoMode, BurstProfile, f64)| {
        run_point(cfg, m, p, s, point_seed(cfg.master_seed, m, p, s)).map_err(|error| PointFailure {
            mode: m,
            profile: p,
            snr_db: s,
            error,
        })
    };
    let outcomes: Vec<std::result::Result<LinkMetrics, PointFailure>> = match exec {
        Execution::Serial => points.iter().map(one).collect(),
        Execution::Parallel => points.par_iter().map(one).collect(),
    };
    let mut ok = Vec::with_capacity(outcomes.len());
    let mut failures = Vec::new();
    for o in outcomes {
        match o {
            Ok(m) => ok.push(m),
            Err(f) => failures.push(f),
        }
    }
    Ok(SweepReport {
        result: SweepResult::new(ok, cfg.fingerprint(), cfg.master_seed)?,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{SnrGrid, StopRule};
    use rand::RngCore;

    fn small() -> SimConfig {
        SimConfig {
            modes: vec![MimoMode::Siso, MimoMode::Sm2x2],
            profiles: vec![BurstProfile::QPSK_1_2, BurstProfile::QAM16_3_4],
            snr: SnrGrid::new(4.0, 4.0, 8.0).unwrap(),
            stop: StopRule {
                min_block_errors: 3,
                max_blocks: 8,
            },
            ..SimConfig::default()
        }
    }

    #[test]
    fn seeds_are_stable_and_distinct() {
        let a = point_seed(1, MimoMode::Siso, BurstProfile::QPSK_1_2, 10.0);
        assert_eq!(a, point_seed(1, MimoMode::Siso, BurstProfile::QPSK_1_2, 10.0));
        assert_ne!(a, point_seed(2, MimoMode::Siso, BurstProfile::QPSK_1_2, 10.0));
        assert_ne!(a, point_seed(1, MimoMode::Sm2x2, BurstProfile::QPSK_1_2, 10.0));
        assert_ne!(a, point_seed(1, MimoMode::Siso, BurstProfile::QPSK_3_4, 10.0));
        assert_ne!(a, point_seed(1, MimoMode::Siso, BurstProfile::QPSK_1_2, 10.001));
        let mut r1 = trial_rng(a, 0);
        let mut r2 = trial_rng(a, 1);
        assert_ne!(r1.next_u64(), r2.next_u64());
        assert_eq!(trial_rng(a, 5).next_u64(), trial_rng(a, 5).next_u64());
    }

    #[test]
    fn point_is_reproducible_and_honours_stop_rule() {
        let cfg = small();
        let s = point_seed(cfg.master_seed, MimoMode::Siso, BurstProfile::QPSK_1_2, 0.0);
        let a = run_point(&cfg, MimoMode::Siso, BurstProfile::QPSK_1_2, 0.0, s).unwrap();
        let b = run_point(&cfg, MimoMode::Siso, BurstProfile::QPSK_1_2, 0.0, s).unwrap();
        assert_eq!(a, b);
        assert!(a.block_errors >= 3 || a.blocks_tested >= 8);
        assert_eq!(a.bits_tested, a.blocks_tested * 360);
        assert_eq!(a.seed, s);
    }

    #[test]
    fn noiseless_override_is_error_free() {
        let cfg = SimConfig {
            noise_var_override: Some(0.0),
            stop: StopRule {
                min_block_errors: 1,
                max_blocks: 4,
            },
            ..SimConfig::default()
        };
        for mode in MimoMode::ALL {
            let m = run_point(&cfg, mode, BurstProfile::QAM64_3_4, 0.0, 3).unwrap();
            assert_eq!((m.ber, m.bler), (0.0, 0.0));
        }
    }

    #[test]
    fn serial_equals_parallel_and_reruns() {
        let cfg = small();
        let serial = run_sweep_with(&cfg, Execution::Serial).unwrap();
        let parallel = run_sweep_with(&cfg, Execution::Parallel).unwrap();
        assert!(serial.failures.is_empty());
        assert_eq!(serial, parallel);
        assert_eq!(serial.result.len(), 2 * 2 * 2);
        let row = &serial.result.points()[5];
        let again = run_point(&cfg, row.mode, row.profile, row.snr_db, row.seed).unwrap();
        assert_eq!(&again, row);
    }

    #[test]
    fn grid_cardinality() {
        let cfg = SimConfig {
            snr: SnrGrid::new(0.0, 2.0, 30.0).unwrap(),
            ..SimConfig::default()
        };
        assert_eq!(sweep_points(&cfg).len(), 288);
    }
}
