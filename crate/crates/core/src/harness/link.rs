//! One Monte-Carlo trial of the full transmit/receive chain.
//!
//! A trial spans `block_length_symbols` OFDM symbol times under a single
//! channel draw and carries `block_length_symbols * R_STC` FEC blocks:
//!
//! * SISO: block `t` fills symbol time `t`.
//! * STBC: blocks `2p` and `2p+1` are Alamouti-paired subcarrier by
//!   subcarrier across symbol times `2p` and `2p+1`.
//! * SM: blocks `2t` and `2t+1` share symbol time `t`, one per antenna.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use rand::Rng;

use super::config::{CsiMode, SimConfig};
use crate::bitsource::{derandomize, generate_from, randomize, LfsrSeed};
use crate::channel::{add_awgn, convolve_time, draw_channel, ChannelConfig, ChannelRealization};
use crate::error::{invalid, Result};
use crate::fec::{cc_encode, depuncture, puncture, CodeConfig, Interleaver, ViterbiDecoder};
use crate::mapping::{demap_soft_each, map_bits};
use crate::metrics::count_bit_errors;
use crate::mimo::{mmse_detect, sm_encode, stbc_combine, stbc_encode, MimoChannelAtSubcarrier};
use crate::ofdm::{
    equalize_siso, estimate_channel, subcarrier_map, EstimateSource, FrequencyGrid, GridLayout,
    OfdmModem, PilotAssignment,
};
use crate::params::{coded_bits_per_stream, info_bits_per_block, BurstProfile, MimoMode};

/// Smallest noise variance handed to detectors and the demapper, so the
/// noiseless hook still yields finite LLRs.
pub const NOISE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockOutcome {
    pub bits: usize,
    pub bit_errors: usize,
}

impl BlockOutcome {
    pub fn is_error(&self) -> bool {
        self.bit_errors > 0
    }
}

/// Per-block results of one channel realization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialOutcome {
    pub blocks: Vec<BlockOutcome>,
}

impl TrialOutcome {
    pub fn bits(&self) -> u64 {
        self.blocks.iter().map(|b| b.bits as u64).sum()
    }

    pub fn bit_errors(&self) -> u64 {
        self.blocks.iter().map(|b| b.bit_errors as u64).sum()
    }

    pub fn block_errors(&self) -> u64 {
        self.blocks.iter().filter(|b| b.is_error()).count() as u64
    }
}

/// Soft detector output for one FEC block.
struct Detected {
    symbols: Vec<Complex64>,
    noise_vars: Vec<f64>,
}

impl Detected {
    fn with_capacity(n: usize) -> Self {
        Detected {
            symbols: Vec::with_capacity(n),
            noise_vars: Vec::with_capacity(n),
        }
    }

    fn push(&mut self, s: Complex64, v: f64) {
        self.symbols.push(s);
        self.noise_vars.push(v.max(NOISE_FLOOR));
    }
}

/// Everything needed to run trials for one (mode, profile) pair.
#[derive(Debug, Clone)]
pub struct LinkSimulator {
    mode: MimoMode,
    profile: BurstProfile,
    layout: GridLayout,
    modem: OfdmModem,
    channel: ChannelConfig,
    csi: CsiMode,
    scrambler: LfsrSeed,
    code: CodeConfig,
    decoder: ViterbiDecoder,
    interleaver: Interleaver,
    info_bits: usize,
    pilots: Vec<PilotAssignment>,
}

impl LinkSimulator {
    pub fn new(cfg: &SimConfig, mode: MimoMode, profile: BurstProfile) -> Result<Self> {
        cfg.channel.validate(cfg.params.cp_len())?;
        let t = cfg.channel.block_length_symbols;
        if mode == MimoMode::Stbc2x2 && t % 2 != 0 {
            return Err(invalid("STBC needs an even number of symbols per channel block"));
        }
        let layout = GridLayout::new(&cfg.params)?;
        let code = CodeConfig::new(profile.fec_rate());
        let n_tx = mode.n_tx();
        Ok(LinkSimulator {
            mode,
            profile,
            modem: OfdmModem::from_params(&cfg.params)?,
            channel: cfg.channel.clone(),
            csi: cfg.csi,
            scrambler: cfg.scrambler_seed,
            code,
            decoder: ViterbiDecoder::new(&code),
            interleaver: Interleaver::new(
                coded_bits_per_stream(&cfg.params, profile),
                profile.bits_per_symbol(),
            )?,
            info_bits: info_bits_per_block(&cfg.params, profile)?,
            pilots: (0..n_tx).map(|a| layout.pilots_for(a, n_tx)).collect(),
            layout,
        })
    }

    pub fn mode(&self) -> MimoMode {
        self.mode
    }

    pub fn profile(&self) -> BurstProfile {
        self.profile
    }

    pub fn info_bits_per_block(&self) -> usize {
        self.info_bits
    }

    pub fn blocks_per_trial(&self) -> usize {
        self.channel.block_length_symbols * self.mode.stc_rate()
    }

    /// Randomize, encode, puncture, interleave and map one block.
    pub fn encode_block(&self, info: &[u8]) -> Result<Vec<Complex64>> {
        let scrambled = randomize(info, self.scrambler)?;
        let coded = cc_encode(&scrambled, &self.code)?;
        let punctured = puncture(&coded, self.code.puncture_rate)?;
        let interleaved = self.interleaver.interleave(&punctured)?;
        map_bits(&interleaved, self.profile.modulation())
    }

    /// Soft demap, deinterleave, depuncture, decode and derandomize.
    pub fn decode_block(&self, symbols: &[Complex64], noise_vars: &[f64]) -> Result<Vec<u8>> {
        let llrs = demap_soft_each(symbols, noise_vars, self.profile.modulation())?;
        let deint = self.interleaver.deinterleave(&llrs)?;
        let soft = depuncture(&deint, self.code.puncture_rate)?;
        let decoded = self.decoder.decode(&soft.llrs)?;
        Ok(derandomize(&decoded, self.scrambler)?.into_inner())
    }

    /// Per-antenna frequency grids for every symbol time, `[time][antenna]`.
    fn build_grids(&self, blocks: &[Vec<Complex64>]) -> Result<Vec<Vec<FrequencyGrid>>> {
        let t_len = self.channel.block_length_symbols;
        let n_data = self.layout.data_bins().len();
        let mut out = Vec::with_capacity(t_len);
        match self.mode {
            MimoMode::Siso => {
                for block in blocks {
                    out.push(vec![subcarrier_map(block, &self.pilots[0], &self.layout)?]);
                }
            }
            MimoMode::Stbc2x2 => {
                for pair in blocks.chunks_exact(2) {
                    let seq: Vec<Complex64> =
                        pair[0].iter().zip(&pair[1]).flat_map(|(&a, &b)| [a, b]).collect();
                    let grid = stbc_encode(&seq)?;
                    for q in 0..2 {
                        let mut row = Vec::with_capacity(2);
                        for (a, stream) in grid.streams.iter().enumerate() {
                            let data: Vec<Complex64> = (0..n_data).map(|k| stream[2 * k + q]).collect();
                            row.push(subcarrier_map(&data, &self.pilots[a], &self.layout)?);
                        }
                        out.push(row);
                    }
                }
            }
            MimoMode::Sm2x2 => {
                for pair in blocks.chunks_exact(2) {
                    let seq: Vec<Complex64> =
                        pair[0].iter().zip(&pair[1]).flat_map(|(&a, &b)| [a, b]).collect();
                    let grid = sm_encode(&seq)?;
                    let mut row = Vec::with_capacity(2);
                    for (a, stream) in grid.streams.iter().enumerate() {
                        row.push(subcarrier_map(stream, &self.pilots[a], &self.layout)?);
                    }
                    out.push(row);
                }
            }
        }
        Ok(out)
    }

    /// OFDM-modulates, passes the sample streams through the multipath
    /// channel, demodulates and adds noise. Returns `[time][rx]` grids.
    pub fn propagate<R: Rng + ?Sized>(
        &self,
        tx: &[Vec<FrequencyGrid>],
        real: &ChannelRealization,
        noise_var: f64,
        rng: &mut R,
    ) -> Result<Vec<Vec<FrequencyGrid>>> {
        let n_tx = self.mode.n_tx();
        let sps = self.modem.samples_per_symbol();
        let mut signals = vec![Vec::with_capacity(sps * tx.len()); n_tx];
        for row in tx {
            for (a, grid) in row.iter().enumerate() {
                signals[a].extend(self.modem.modulate(grid)?);
            }
        }
        let received = convolve_time(&signals, real)?;
        let mut out = Vec::with_capacity(tx.len());
        for t in 0..tx.len() {
            let mut row = Vec::with_capacity(received.len());
            for r in &received {
                let mut g = self.modem.demodulate(&r[t * sps..(t + 1) * sps])?;
                add_awgn(&mut g, noise_var, rng);
                row.push(g);
            }
            out.push(row);
        }
        Ok(out)
    }

    /// Channel knowledge `[rx][tx]` per FFT bin at symbol time `t`.
    fn estimates(
        &self,
        rx: &[Vec<FrequencyGrid>],
        real: &ChannelRealization,
        t: usize,
    ) -> Result<Vec<Vec<Vec<Complex64>>>> {
        let n_tx = self.mode.n_tx();
        (0..self.mode.n_rx())
            .map(|r| {
                (0..n_tx)
                    .map(|a| {
                        let src = match self.csi {
                            CsiMode::Perfect => EstimateSource::Perfect(real.response(r, a)),
                            CsiMode::Pilot => EstimateSource::PilotLs(&self.pilots[a]),
                        };
                        estimate_channel(&rx[t][r], src, &self.layout)
                    })
                    .collect()
            })
            .collect()
    }

    fn detect(
        &self,
        rx: &[Vec<FrequencyGrid>],
        real: &ChannelRealization,
        noise_var: f64,
    ) -> Result<Vec<Detected>> {
        let nv = noise_var.max(NOISE_FLOOR);
        let n_data = self.layout.data_bins().len();
        let mut out = Vec::with_capacity(self.blocks_per_trial());
        match self.mode {
            MimoMode::Siso => {
                for t in 0..rx.len() {
                    let h = self.estimates(rx, real, t)?;
                    let eq = equalize_siso(&rx[t][0], &h[0][0], nv, &self.layout)?;
                    let mut d = Detected::with_capacity(n_data);
                    for (s, v) in eq.symbols.into_iter().zip(eq.noise_vars) {
                        d.push(s, v);
                    }
                    out.push(d);
                }
            }
            MimoMode::Stbc2x2 => {
                for p in 0..rx.len() / 2 {
                    let (t0, t1) = (2 * p, 2 * p + 1);
                    let h0 = self.estimates(rx, real, t0)?;
                    let h = if self.csi == CsiMode::Pilot {
                        // average the estimates of both symbol times
                        let h1 = self.estimates(rx, real, t1)?;
                        average(&h0, &h1)
                    } else {
                        h0
                    };
                    let mut a = Detected::with_capacity(n_data);
                    let mut b = Detected::with_capacity(n_data);
                    for &bin in self.layout.data_bins() {
                        let y: Vec<[Complex64; 2]> = (0..2)
                            .map(|r| [rx[t0][r].bins[bin], rx[t1][r].bins[bin]])
                            .collect();
                        let hr: Vec<[Complex64; 2]> = (0..2).map(|r| [h[r][0][bin], h[r][1][bin]]).collect();
                        let est = stbc_combine(&y, &hr, nv)?;
                        a.push(est.symbols[0], est.noise_var);
                        b.push(est.symbols[1], est.noise_var);
                    }
                    out.push(a);
                    out.push(b);
                }
            }
            MimoMode::Sm2x2 => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                for t in 0..rx.len() {
                    let h = self.estimates(rx, real, t)?;
                    let mut a = Detected::with_capacity(n_data);
                    let mut b = Detected::with_capacity(n_data);
                    for &bin in self.layout.data_bins() {
                        let ch = MimoChannelAtSubcarrier {
                            h: Matrix2::new(
                                h[0][0][bin] * s,
                                h[0][1][bin] * s,
                                h[1][0][bin] * s,
                                h[1][1][bin] * s,
                            ),
                            noise_var: nv,
                        };
                        let y = Vector2::new(rx[t][0].bins[bin], rx[t][1].bins[bin]);
                        let det = mmse_detect(&y, &ch)?;
                        let (sa, va) = det.unbiased(0);
                        let (sb, vb) = det.unbiased(1);
                        a.push(sa, va);
                        b.push(sb, vb);
                    }
                    out.push(a);
                    out.push(b);
                }
            }
        }
        Ok(out)
    }

    /// One channel draw, `blocks_per_trial` FEC blocks through the chain.
    pub fn run_trial<R: Rng + ?Sized>(&self, rng: &mut R, noise_var: f64) -> Result<TrialOutcome> {
        let n_fft = self.layout.fft_size();
        let real = draw_channel(rng, &self.channel, self.mode.n_tx(), self.mode.n_rx(), n_fft);
        let info: Vec<Vec<u8>> = (0..self.blocks_per_trial())
            .map(|_| generate_from(rng, self.info_bits).map(|b| b.into_inner()))
            .collect::<Result<_>>()?;
        let symbols: Vec<Vec<Complex64>> =
            info.iter().map(|b| self.encode_block(b)).collect::<Result<_>>()?;
        let tx = self.build_grids(&symbols)?;
        let rx = self.propagate(&tx, &real, noise_var, rng)?;
        let detected = self.detect(&rx, &real, noise_var)?;
        let blocks = info
            .iter()
            .zip(&detected)
            .map(|(bits, d)| {
                let decoded = self.decode_block(&d.symbols, &d.noise_vars)?;
                Ok(BlockOutcome {
                    bits: bits.len(),
                    bit_errors: count_bit_errors(bits, &decoded)? as usize,
                })
            })
            .collect::<Result<_>>()?;
        Ok(TrialOutcome { blocks })
    }
}

fn average(a: &[Vec<Vec<Complex64>>], b: &[Vec<Vec<Complex64>>]) -> Vec<Vec<Vec<Complex64>>> {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| {
            ra.iter()
                .zip(rb)
                .map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p + q) * 0.5).collect())
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::snr_to_noise_var;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sim(mode: MimoMode, profile: BurstProfile) -> LinkSimulator {
        LinkSimulator::new(&SimConfig::default(), mode, profile).unwrap()
    }

    #[test]
    fn block_encode_decode_round_trip() {
        let s = sim(MimoMode::Siso, BurstProfile::QAM16_3_4);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let info = generate_from(&mut rng, s.info_bits_per_block()).unwrap();
        let sym = s.encode_block(&info).unwrap();
        assert_eq!(sym.len(), 360);
        let out = s.decode_block(&sym, &vec![0.01; sym.len()]).unwrap();
        assert_eq!(out, info.into_inner());
    }

    #[test]
    fn noiseless_trials_are_error_free() {
        for mode in MimoMode::ALL {
            for profile in BurstProfile::ALL {
                let s = sim(mode, profile);
                let mut rng = ChaCha8Rng::seed_from_u64(7);
                let o = s.run_trial(&mut rng, 0.0).unwrap();
                assert_eq!(o.blocks.len(), 2 * mode.stc_rate());
                assert_eq!(o.bit_errors(), 0, "{mode} {profile}");
            }
        }
    }

    #[test]
    fn pilot_csi_noiseless_is_close_to_clean() {
        let cfg = SimConfig {
            csi: CsiMode::Pilot,
            ..SimConfig::default()
        };
        for mode in MimoMode::ALL {
            let s = LinkSimulator::new(&cfg, mode, BurstProfile::QPSK_1_2).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(8);
            let mut errs = 0;
            for _ in 0..5 {
                errs += s.run_trial(&mut rng, snr_to_noise_var(40.0)).unwrap().block_errors();
            }
            assert!(errs <= 1, "{mode}: {errs}");
        }
    }

    #[test]
    fn received_power_is_unit_per_antenna() {
        // average |y|^2 over data bins with noise off; the per-draw channel
        // energy fluctuates, so many draws are needed for a 2% bound
        for mode in MimoMode::ALL {
            let s = sim(mode, BurstProfile::QPSK_1_2);
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            let mut acc = 0.0;
            let mut n = 0usize;
            for _ in 0..20_000 {
                let real = draw_channel(&mut rng, &s.channel, mode.n_tx(), mode.n_rx(), 512);
                let blocks: Vec<Vec<Complex64>> = (0..s.blocks_per_trial())
                    .map(|_| {
                        let b = generate_from(&mut rng, s.info_bits).unwrap();
                        s.encode_block(&b).unwrap()
                    })
                    .collect();
                let tx = s.build_grids(&blocks).unwrap();
                let rx = s.propagate(&tx, &real, 0.0, &mut rng).unwrap();
                for row in &rx {
                    for g in row {
                        for &b in s.layout.data_bins() {
                            acc += g.bins[b].norm_sqr();
                            n += 1;
                        }
                    }
                }
            }
            let p = acc / n as f64;
            assert!((p - 1.0).abs() < 0.02, "{mode}: {p}");
        }
    }

    #[test]
    fn high_snr_qpsk_is_clean() {
        let s = sim(MimoMode::Siso, BurstProfile::QPSK_1_2);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut bits = 0;
        let mut errs = 0;
        for _ in 0..200 {
            let o = s.run_trial(&mut rng, snr_to_noise_var(30.0)).unwrap();
            bits += o.bits();
            errs += o.bit_errors();
        }
        assert!((errs as f64 / bits as f64) < 1e-4, "{errs}/{bits}");
    }
}
