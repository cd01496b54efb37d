use linksim::harness::{run_sweep_with, write_csv, Execution, SimConfig, SnrGrid, StopRule};
use linksim::params::{BurstProfile, MimoMode};

fn cfg(seed: u64) -> SimConfig {
    SimConfig {
        profiles: vec![BurstProfile::QPSK_1_2, BurstProfile::QAM64_3_4],
        snr: SnrGrid::new(0.0, 6.0, 24.0).unwrap(),
        stop: StopRule {
            min_block_errors: 4,
            max_blocks: 12,
        },
        master_seed: seed,
        ..SimConfig::default()
    }
}

fn csv_bytes(cfg: &SimConfig, exec: Execution) -> Vec<u8> {
    let report = run_sweep_with(cfg, exec).unwrap();
    assert!(report.failures.is_empty());
    let mut out = Vec::new();
    write_csv(&report.result, &mut out).unwrap();
    out
}

#[test]
fn repeated_sweeps_are_byte_identical() {
    let c = cfg(7);
    let a = csv_bytes(&c, Execution::Parallel);
    assert_eq!(a, csv_bytes(&c, Execution::Parallel));
    assert_eq!(a, csv_bytes(&c, Execution::Serial));
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 1 + 3 * 2 * 5);
}

#[test]
fn seed_changes_results() {
    assert_ne!(csv_bytes(&cfg(7), Execution::Serial), csv_bytes(&cfg(8), Execution::Serial));
}

#[test]
fn point_does_not_depend_on_grid() {
    let full = run_sweep_with(&cfg(7), Execution::Serial).unwrap().result;
    let one = SimConfig {
        modes: vec![MimoMode::Sm2x2],
        profiles: vec![BurstProfile::QAM64_3_4],
        snr: SnrGrid::single(18.0),
        ..cfg(7)
    };
    let single = run_sweep_with(&one, Execution::Serial).unwrap().result;
    let want = full
        .points()
        .iter()
        .find(|p| p.mode == MimoMode::Sm2x2 && p.profile == BurstProfile::QAM64_3_4 && p.snr_db == 18.0)
        .unwrap();
    assert_eq!(&single.points()[0], want);
}
