//! Error counting, link throughput, AMC selection and the STBC/SM switching
//! point.

use std::collections::HashSet;

use crate::error::{check_len, invalid, Error, Result};
use crate::params::{info_bits_per_ofdm_symbol, BurstProfile, MimoMode, OfdmaParams};

/// Measured performance at one (mode, profile, SNR) point.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkMetrics {
    pub snr_db: f64,
    pub mode: MimoMode,
    pub profile: BurstProfile,
    pub bits_tested: u64,
    pub bit_errors: u64,
    pub blocks_tested: u64,
    pub block_errors: u64,
    pub ber: f64,
    pub bler: f64,
    pub throughput_bps: f64,
    pub normalized_bpshz: f64,
    pub seed: u64,
}

impl LinkMetrics {
    #[allow(clippy::too_many_arguments)]
    pub fn from_counts(
        params: &OfdmaParams,
        mode: MimoMode,
        profile: BurstProfile,
        snr_db: f64,
        bits_tested: u64,
        bit_errors: u64,
        blocks_tested: u64,
        block_errors: u64,
        seed: u64,
    ) -> Result<Self> {
        if bits_tested == 0 || blocks_tested == 0 {
            return Err(invalid("a point needs at least one tested block"));
        }
        if bit_errors > bits_tested || block_errors > blocks_tested {
            return Err(invalid("error counts exceed tested counts"));
        }
        let ber = bit_errors as f64 / bits_tested as f64;
        let bler = block_errors as f64 / blocks_tested as f64;
        Ok(LinkMetrics {
            snr_db,
            mode,
            profile,
            bits_tested,
            bit_errors,
            blocks_tested,
            block_errors,
            ber,
            bler,
            throughput_bps: link_throughput(params, profile, mode, bler)?,
            normalized_bpshz: normalized_throughput(profile, mode, bler)?,
            seed,
        })
    }

    /// True when the point stopped on the block cap before collecting
    /// `min_block_errors` errors.
    pub fn censored(&self, min_block_errors: u64) -> bool {
        self.block_errors < min_block_errors
    }

    /// BER for log-scale display: zero-error points sit at `1 / bits_tested`.
    pub fn ber_floored(&self) -> f64 {
        if self.bit_errors == 0 {
            1.0 / self.bits_tested as f64
        } else {
            self.ber
        }
    }
}

pub fn count_bit_errors(tx: &[u8], rx: &[u8]) -> Result<u64> {
    check_len("received bits", tx.len(), rx.len())?;
    Ok(tx.iter().zip(rx).filter(|(a, b)| a != b).count() as u64)
}

pub fn compute_ber(tx: &[u8], rx: &[u8]) -> Result<f64> {
    if tx.is_empty() {
        return Err(invalid("cannot compute BER of an empty block"));
    }
    Ok(count_bit_errors(tx, rx)? as f64 / tx.len() as f64)
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(invalid(format!("{name} {p} outside [0, 1]")))
    }
}

/// `N_D N_b R_FEC R_STC / T_s * (1 - PER)` in bit/s, with `T_s` taken from
/// the parameter set.
pub fn link_throughput(
    params: &OfdmaParams,
    profile: BurstProfile,
    mode: MimoMode,
    per: f64,
) -> Result<f64> {
    link_throughput_with_symbol_time(params, profile, mode, per, params.symbol_duration_s())
}

/// As [`link_throughput`] with an explicit OFDM symbol duration.
pub fn link_throughput_with_symbol_time(
    params: &OfdmaParams,
    profile: BurstProfile,
    mode: MimoMode,
    per: f64,
    symbol_time_s: f64,
) -> Result<f64> {
    check_probability("PER", per)?;
    if !(symbol_time_s > 0.0) {
        return Err(invalid("symbol duration must be positive"));
    }
    let bits = info_bits_per_ofdm_symbol(params, profile, mode)?;
    Ok(bits as f64 / symbol_time_s * (1.0 - per))
}

/// `(1 - BLER) r log2(M) R_STC` in bit/s/Hz.
pub fn normalized_throughput(profile: BurstProfile, mode: MimoMode, bler: f64) -> Result<f64> {
    check_probability("BLER", bler)?;
    Ok((1.0 - bler)
        * profile.fec_rate().as_f64()
        * profile.bits_per_symbol() as f64
        * mode.stc_rate() as f64)
}

/// Every point of a sweep, ordered by (mode, profile, snr).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    points: Vec<LinkMetrics>,
    pub fingerprint: String,
    pub master_seed: u64,
}

impl SweepResult {
    pub fn new(mut points: Vec<LinkMetrics>, fingerprint: String, master_seed: u64) -> Result<Self> {
        if points.iter().any(|p| !p.snr_db.is_finite()) {
            return Err(invalid("SNR values must be finite"));
        }
        points.sort_by(|a, b| {
            (a.mode, a.profile.index())
                .cmp(&(b.mode, b.profile.index()))
                .then(a.snr_db.total_cmp(&b.snr_db))
        });
        let mut seen = HashSet::new();
        for p in &points {
            if !seen.insert((p.mode, p.profile, p.snr_db.to_bits())) {
                return Err(invalid(format!(
                    "duplicate point {} {} at {} dB",
                    p.mode, p.profile, p.snr_db
                )));
            }
        }
        Ok(SweepResult {
            points,
            fingerprint,
            master_seed,
        })
    }

    pub fn points(&self) -> &[LinkMetrics] {
        &self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn modes(&self) -> Vec<MimoMode> {
        let mut m: Vec<MimoMode> = self.points.iter().map(|p| p.mode).collect();
        m.dedup();
        m
    }

    pub fn profiles(&self, mode: MimoMode) -> Vec<BurstProfile> {
        let mut v: Vec<BurstProfile> = self
            .points
            .iter()
            .filter(|p| p.mode == mode)
            .map(|p| p.profile)
            .collect();
        v.dedup();
        v
    }

    /// One profile's points in increasing SNR.
    pub fn curve(&self, mode: MimoMode, profile: BurstProfile) -> Vec<&LinkMetrics> {
        self.points
            .iter()
            .filter(|p| p.mode == mode && p.profile == profile)
            .collect()
    }

    /// Sorted distinct SNR values measured for a mode.
    pub fn snr_grid(&self, mode: MimoMode) -> Vec<f64> {
        let mut g: Vec<f64> = self
            .points
            .iter()
            .filter(|p| p.mode == mode)
            .map(|p| p.snr_db)
            .collect();
        g.sort_by(f64::total_cmp);
        g.dedup();
        g
    }
}

/// Profile with the highest link throughput. Ties go to the lower
/// modulation order, then the lower code rate.
pub fn amc_select(per_profile: &[LinkMetrics]) -> Result<BurstProfile> {
    let first = per_profile
        .first()
        .ok_or_else(|| Error::IncompleteSweep("no profiles to select from".into()))?;
    let mut best: Option<&LinkMetrics> = None;
    for profile in BurstProfile::ALL {
        let m = per_profile
            .iter()
            .find(|m| m.profile == profile)
            .ok_or_else(|| Error::IncompleteSweep(format!("missing profile {profile}")))?;
        if m.mode != first.mode || m.snr_db != first.snr_db {
            return Err(invalid("AMC selection needs one mode at one SNR"));
        }
        if best.map_or(true, |b| m.throughput_bps > b.throughput_bps) {
            best = Some(m);
        }
    }
    Ok(best.expect("six profiles checked").profile)
}

/// Best-profile throughput of one mode across the SNR grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub mode: MimoMode,
    pub snr_db: Vec<f64>,
    pub best: Vec<BurstProfile>,
    pub throughput_bps: Vec<f64>,
    pub normalized_bpshz: Vec<f64>,
    /// `normalized_bpshz` after isotonic (non-decreasing) regression.
    pub smoothed_bpshz: Vec<f64>,
}

pub fn amc_envelope(sweep: &SweepResult, mode: MimoMode) -> Result<Envelope> {
    let grid = sweep.snr_grid(mode);
    if grid.is_empty() {
        return Err(Error::IncompleteSweep(format!("no points for mode {mode}")));
    }
    let mut env = Envelope {
        mode,
        snr_db: grid.clone(),
        best: Vec::with_capacity(grid.len()),
        throughput_bps: Vec::with_capacity(grid.len()),
        normalized_bpshz: Vec::with_capacity(grid.len()),
        smoothed_bpshz: Vec::new(),
    };
    for &snr in &grid {
        let here: Vec<LinkMetrics> = sweep
            .points()
            .iter()
            .filter(|p| p.mode == mode && p.snr_db == snr)
            .cloned()
            .collect();
        let profile = amc_select(&here).map_err(|e| match e {
            Error::IncompleteSweep(msg) => Error::IncompleteSweep(format!("{mode} at {snr} dB: {msg}")),
            other => other,
        })?;
        let m = here.iter().find(|m| m.profile == profile).expect("selected");
        env.best.push(profile);
        env.throughput_bps.push(m.throughput_bps);
        env.normalized_bpshz.push(m.normalized_bpshz);
    }
    env.smoothed_bpshz = isotonic_increasing(&env.normalized_bpshz);
    Ok(env)
}

/// Least-squares non-decreasing fit (pool adjacent violators).
pub fn isotonic_increasing(values: &[f64]) -> Vec<f64> {
    // (block mean, block size)
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(values.len());
    for &v in values {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (m2, n2) = blocks[blocks.len() - 1];
            let (m1, n1) = blocks[blocks.len() - 2];
            if m1 <= m2 {
                break;
            }
            blocks.pop();
            let n = n1 + n2;
            *blocks.last_mut().expect("two blocks") = ((m1 * n1 as f64 + m2 * n2 as f64) / n as f64, n);
        }
    }
    blocks
        .into_iter()
        .flat_map(|(m, n)| std::iter::repeat(m).take(n))
        .collect()
}

/// Number of sign changes of `sm - stbc` along the grid, ignoring ties.
pub fn crossing_count(stbc: &[f64], sm: &[f64]) -> usize {
    let signs: Vec<bool> = stbc
        .iter()
        .zip(sm)
        .filter(|(a, b)| a != b)
        .map(|(a, b)| b > a)
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// SNR above which SM's envelope is never below STBC's.
///
/// Finds the lowest grid index `i` with `sm[j] >= stbc[j]` for every
/// `j >= i` and interpolates the zero of `sm - stbc` between `grid[i-1]`
/// and `grid[i]`.
pub fn ams_switching_point(grid: &[f64], stbc: &[f64], sm: &[f64]) -> Result<f64> {
    check_len("STBC envelope", grid.len(), stbc.len())?;
    check_len("SM envelope", grid.len(), sm.len())?;
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(invalid("SNR grid must be strictly increasing"));
    }
    let diff: Vec<f64> = sm.iter().zip(stbc).map(|(a, b)| a - b).collect();
    let mut i = diff.len();
    while i > 0 && diff[i - 1] >= 0.0 {
        i -= 1;
    }
    if i == diff.len() || i == 0 {
        return Err(Error::NoCrossover);
    }
    let (d0, d1) = (diff[i - 1], diff[i]);
    let t = d0 / (d0 - d1);
    Ok(grid[i - 1] + t * (grid[i] - grid[i - 1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn metrics(mode: MimoMode, profile: BurstProfile, snr: f64, block_errors: u64) -> LinkMetrics {
        LinkMetrics::from_counts(
            &OfdmaParams::default(),
            mode,
            profile,
            snr,
            100_000,
            block_errors,
            100,
            block_errors,
            0,
        )
        .unwrap()
    }

    #[test]
    fn ber_examples() {
        let tx = [0u8, 1, 1, 0, 1, 0, 0, 1];
        assert_eq!(compute_ber(&tx, &tx).unwrap(), 0.0);
        let inv: Vec<u8> = tx.iter().map(|b| b ^ 1).collect();
        assert_eq!(compute_ber(&tx, &inv).unwrap(), 1.0);
        let mut one = tx;
        one[3] ^= 1;
        assert_eq!(compute_ber(&tx, &one).unwrap(), 0.125);
        assert!(compute_ber(&tx, &tx[..7]).is_err());
    }

    #[test]
    fn throughput_examples() {
        let p = OfdmaParams::default();
        let ts = 102.9e-6;
        let a = link_throughput_with_symbol_time(&p, BurstProfile::QPSK_1_2, MimoMode::Siso, 0.0, ts).unwrap();
        assert!((a / 1e6 - 3.499).abs() < 5e-4, "{a}");
        let b = link_throughput_with_symbol_time(&p, BurstProfile::QAM64_3_4, MimoMode::Sm2x2, 0.0, ts).unwrap();
        assert!((b / 1e6 - 31.49).abs() < 5e-3, "{b}");
        for profile in BurstProfile::ALL {
            assert_eq!(link_throughput(&p, profile, MimoMode::Stbc2x2, 1.0).unwrap(), 0.0);
        }
        assert!(link_throughput(&p, BurstProfile::QPSK_1_2, MimoMode::Siso, 1.5).is_err());
        assert!(link_throughput(&p, BurstProfile::QPSK_1_2, MimoMode::Siso, -0.1).is_err());
    }

    #[test]
    fn derived_symbol_time() {
        let p = OfdmaParams::default();
        let a = link_throughput(&p, BurstProfile::QPSK_1_2, MimoMode::Siso, 0.0).unwrap();
        assert!((a - 360.0 / (91.4e-6 * 1.125)).abs() < 1e-6);
    }

    #[test]
    fn normalized_examples() {
        let q = |p, m, b| normalized_throughput(p, m, b).unwrap();
        assert_eq!(q(BurstProfile::QAM64_3_4, MimoMode::Siso, 0.0), 4.5);
        assert_eq!(q(BurstProfile::QPSK_1_2, MimoMode::Siso, 0.0), 1.0);
        assert_eq!(q(BurstProfile::QAM16_1_2, MimoMode::Siso, 0.5), 1.0);
        let peaks: Vec<f64> = BurstProfile::ALL
            .iter()
            .map(|&p| q(p, MimoMode::Siso, 0.0))
            .collect();
        assert_eq!(peaks, vec![1.0, 1.5, 2.0, 3.0, 4.0, 4.5]);
        assert!(normalized_throughput(BurstProfile::QPSK_1_2, MimoMode::Siso, 1.01).is_err());
    }

    #[test]
    fn sm_peak_is_exactly_double() {
        let p = OfdmaParams::default();
        for profile in BurstProfile::ALL {
            let siso = link_throughput(&p, profile, MimoMode::Siso, 0.0).unwrap();
            let sm = link_throughput(&p, profile, MimoMode::Sm2x2, 0.0).unwrap();
            assert_eq!(sm, 2.0 * siso);
            let stbc = link_throughput(&p, profile, MimoMode::Stbc2x2, 0.0).unwrap();
            assert_eq!(stbc, siso);
        }
    }

    #[test]
    fn censoring_and_floor() {
        let m = metrics(MimoMode::Siso, BurstProfile::QPSK_1_2, 30.0, 0);
        assert!(m.censored(100));
        assert_eq!(m.ber_floored(), 1e-5);
        let m = metrics(MimoMode::Siso, BurstProfile::QPSK_1_2, 0.0, 100);
        assert!(!m.censored(100));
        assert_eq!(m.ber_floored(), m.ber);
    }

    #[test]
    fn amc_extremes_and_ties() {
        let high: Vec<LinkMetrics> = BurstProfile::ALL
            .iter()
            .map(|&p| metrics(MimoMode::Siso, p, 40.0, 0))
            .collect();
        assert_eq!(amc_select(&high).unwrap(), BurstProfile::QAM64_3_4);

        let low: Vec<LinkMetrics> = BurstProfile::ALL
            .iter()
            .map(|&p| metrics(MimoMode::Siso, p, 0.0, if p == BurstProfile::QPSK_1_2 { 60 } else { 100 }))
            .collect();
        assert_eq!(amc_select(&low).unwrap(), BurstProfile::QPSK_1_2);

        // QPSK 3/4 at BLER 0 and 16QAM 3/4 at BLER 0.5 both give 1.5 bps/Hz.
        let tie: Vec<LinkMetrics> = BurstProfile::ALL
            .iter()
            .map(|&p| {
                let e = match p {
                    BurstProfile::QPSK_3_4 => 0,
                    BurstProfile::QAM16_3_4 => 50,
                    _ => 100,
                };
                metrics(MimoMode::Siso, p, 10.0, e)
            })
            .collect();
        assert_eq!(amc_select(&tie).unwrap(), BurstProfile::QPSK_3_4);

        assert!(matches!(amc_select(&high[..5]), Err(Error::IncompleteSweep(_))));
        assert!(matches!(amc_select(&[]), Err(Error::IncompleteSweep(_))));
    }

    #[test]
    fn isotonic_fits() {
        assert_eq!(isotonic_increasing(&[1.0, 2.0, 3.0]), vec![1.0, 2.0, 3.0]);
        assert_eq!(isotonic_increasing(&[3.0, 1.0]), vec![2.0, 2.0]);
        assert_eq!(isotonic_increasing(&[1.0, 3.0, 2.0, 4.0]), vec![1.0, 2.5, 2.5, 4.0]);
        assert!(isotonic_increasing(&[]).is_empty());
    }

    #[test]
    fn switching_point_examples() {
        let grid = [10.0, 20.0, 30.0];
        let x = ams_switching_point(&grid, &[2.0, 2.0, 2.0], &[1.0, 3.0, 4.0]).unwrap();
        assert!(x > 10.0 && x <= 20.0);
        assert_eq!(x, 15.0);
        assert_eq!(
            ams_switching_point(&grid, &[2.0, 2.0, 2.0], &[1.0, 1.5, 1.9]),
            Err(Error::NoCrossover)
        );
        // dip back below STBC: the later crossing counts
        let x = ams_switching_point(&[0.0, 1.0, 2.0, 3.0], &[2.0; 4], &[3.0, 1.0, 2.0, 4.0]).unwrap();
        assert_eq!(x, 2.0);
        assert_eq!(crossing_count(&[2.0; 4], &[3.0, 1.0, 2.0, 4.0]), 2);
        assert_eq!(crossing_count(&[2.0, 2.0, 2.0], &[1.0, 3.0, 4.0]), 1);
        assert!(ams_switching_point(&[1.0, 1.0], &[0.0; 2], &[0.0; 2]).is_err());
    }

    #[test]
    fn envelope_over_synthetic_sweep() {
        let mut pts = Vec::new();
        for (i, snr) in [0.0, 10.0, 20.0].into_iter().enumerate() {
            for p in BurstProfile::ALL {
                let e = (100 - (i as u64 * 40 * (6 - p.index() as u64) / 6).min(100)).min(100);
                pts.push(metrics(MimoMode::Stbc2x2, p, snr, e));
            }
        }
        let sweep = SweepResult::new(pts.clone(), "fp".into(), 1).unwrap();
        let env = amc_envelope(&sweep, MimoMode::Stbc2x2).unwrap();
        assert_eq!(env.snr_db, vec![0.0, 10.0, 20.0]);
        for (k, &snr) in env.snr_db.iter().enumerate() {
            for p in pts.iter().filter(|m| m.snr_db == snr) {
                assert!(env.throughput_bps[k] >= p.throughput_bps);
            }
        }
        assert!(env.smoothed_bpshz.windows(2).all(|w| w[0] <= w[1]));
        assert!(amc_envelope(&sweep, MimoMode::Sm2x2).is_err());

        let mut dup = pts.clone();
        dup.push(pts[0].clone());
        assert!(SweepResult::new(dup, "fp".into(), 1).is_err());
    }

    #[test]
    fn sweep_ordering() {
        let pts = vec![
            metrics(MimoMode::Sm2x2, BurstProfile::QPSK_1_2, 0.0, 1),
            metrics(MimoMode::Siso, BurstProfile::QAM64_3_4, 2.0, 1),
            metrics(MimoMode::Siso, BurstProfile::QAM64_3_4, 0.0, 1),
            metrics(MimoMode::Siso, BurstProfile::QPSK_1_2, 4.0, 1),
        ];
        let s = SweepResult::new(pts, String::new(), 0).unwrap();
        let keys: Vec<(MimoMode, BurstProfile, f64)> =
            s.points().iter().map(|p| (p.mode, p.profile, p.snr_db)).collect();
        assert_eq!(
            keys,
            vec![
                (MimoMode::Siso, BurstProfile::QPSK_1_2, 4.0),
                (MimoMode::Siso, BurstProfile::QAM64_3_4, 0.0),
                (MimoMode::Siso, BurstProfile::QAM64_3_4, 2.0),
                (MimoMode::Sm2x2, BurstProfile::QPSK_1_2, 0.0),
            ]
        );
        assert_eq!(s.modes(), vec![MimoMode::Siso, MimoMode::Sm2x2]);
    }

    proptest! {
        #[test]
        fn eq3_eq4_proportional(per in 0.0f64..=1.0, pi in 0usize..6, mi in 0usize..3) {
            let params = OfdmaParams::default();
            let profile = BurstProfile::ALL[pi];
            let mode = MimoMode::ALL[mi];
            let c = link_throughput(&params, profile, mode, per).unwrap();
            let t = normalized_throughput(profile, mode, per).unwrap();
            let k = params.n_data as f64 / params.symbol_duration_s();
            prop_assert!((c - k * t).abs() <= 1e-9 * c.max(1.0));
        }

        #[test]
        fn amc_scale_invariant(errs in proptest::collection::vec(0u64..=100, 6), scale in 0.01f64..100.0) {
            let pts: Vec<LinkMetrics> = BurstProfile::ALL
                .iter()
                .zip(&errs)
                .map(|(&p, &e)| metrics(MimoMode::Siso, p, 5.0, e))
                .collect();
            let mut scaled = pts.clone();
            for m in &mut scaled {
                m.throughput_bps *= scale;
            }
            prop_assert_eq!(amc_select(&pts).unwrap(), amc_select(&scaled).unwrap());
        }

        #[test]
        fn isotonic_is_monotone_and_mean_preserving(v in proptest::collection::vec(-10.0f64..10.0, 1..40)) {
            let f = isotonic_increasing(&v);
            prop_assert_eq!(f.len(), v.len());
            prop_assert!(f.windows(2).all(|w| w[0] <= w[1] + 1e-12));
            let s0: f64 = v.iter().sum();
            let s1: f64 = f.iter().sum();
            prop_assert!((s0 - s1).abs() < 1e-9);
        }
    }
}
