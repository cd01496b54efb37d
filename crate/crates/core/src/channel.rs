//! Quasi-static frequency-selective Rayleigh MIMO channel and AWGN.
//!
//! Taps are i.i.d. circularly-symmetric Gaussian per antenna pair with
//! variances given by the power delay profile, so each pair carries unit
//! average energy. SNR is Es/N0 per receive antenna: with unit-energy
//! symbols, unit channel energy and unit total transmit power the average
//! received signal power per bin is 1 and the noise variance per bin is
//! `10^(-snr/10)`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{check_len, invalid, Result};
use crate::ofdm::FrequencyGrid;

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelConfig {
    /// Tap powers, one per sample delay, summing to 1.
    pub pdp: Vec<f64>,
    /// OFDM symbols over which one realization is held.
    pub block_length_symbols: usize,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        ChannelConfig {
            pdp: exponential_pdp(8, 3.0),
            block_length_symbols: 2,
        }
    }
}

/// `n_taps` taps decaying by `decay_db` per tap, normalized to unit energy.
pub fn exponential_pdp(n_taps: usize, decay_db: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..n_taps)
        .map(|l| 10f64.powf(-decay_db * l as f64 / 10.0))
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|p| p / total).collect()
}

impl ChannelConfig {
    pub fn n_taps(&self) -> usize {
        self.pdp.len()
    }

    pub fn validate(&self, cp_len: usize) -> Result<()> {
        if self.pdp.is_empty() {
            return Err(invalid("power delay profile needs at least one tap"));
        }
        if self.pdp.len() > cp_len {
            return Err(invalid(format!(
                "{} taps exceed the {cp_len}-sample cyclic prefix",
                self.pdp.len()
            )));
        }
        if self.pdp.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(invalid("tap powers must be finite and non-negative"));
        }
        let sum: f64 = self.pdp.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("tap powers sum to {sum}, not 1")));
        }
        if self.block_length_symbols == 0 {
            return Err(invalid("block length must be at least one OFDM symbol"));
        }
        Ok(())
    }
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * s, im * s)
}

/// Tap gains and frequency response for every (rx, tx) antenna pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    n_tx: usize,
    n_rx: usize,
    /// Indexed `rx * n_tx + tx`.
    taps: Vec<Vec<Complex64>>,
    response: Vec<Vec<Complex64>>,
}

impl ChannelRealization {
    /// Builds a realization from explicit taps (`taps[rx][tx]`).
    pub fn from_taps(taps: Vec<Vec<Vec<Complex64>>>, fft_size: usize) -> Result<Self> {
        let n_rx = taps.len();
        let n_tx = taps.first().map_or(0, Vec::len);
        if n_rx == 0 || n_tx == 0 || taps.iter().any(|r| r.len() != n_tx) {
            return Err(invalid("tap array must be a non-empty rx x tx grid"));
        }
        let flat: Vec<Vec<Complex64>> = taps.into_iter().flatten().collect();
        let response = flat.iter().map(|t| frequency_response(t, fft_size)).collect();
        Ok(ChannelRealization {
            n_tx,
            n_rx,
            taps: flat,
            response,
        })
    }

    pub fn n_tx(&self) -> usize {
        self.n_tx
    }

    pub fn n_rx(&self) -> usize {
        self.n_rx
    }

    pub fn taps(&self, rx: usize, tx: usize) -> &[Complex64] {
        &self.taps[rx * self.n_tx + tx]
    }

    /// `H_{rx,tx}(k)` for every FFT bin `k`.
    pub fn response(&self, rx: usize, tx: usize) -> &[Complex64] {
        &self.response[rx * self.n_tx + tx]
    }
}

/// `H(k) = sum_l h_l exp(-j 2 pi k l / N)`.
pub fn frequency_response(taps: &[Complex64], fft_size: usize) -> Vec<Complex64> {
    let w = -2.0 * std::f64::consts::PI / fft_size as f64;
    (0..fft_size)
        .map(|k| {
            taps.iter()
                .enumerate()
                .map(|(l, h)| h * Complex64::from_polar(1.0, w * ((k * l) % fft_size) as f64))
                .sum()
        })
        .collect()
}

pub fn draw_channel<R: Rng + ?Sized>(
    rng: &mut R,
    cfg: &ChannelConfig,
    n_tx: usize,
    n_rx: usize,
    fft_size: usize,
) -> ChannelRealization {
    let taps: Vec<Vec<Vec<Complex64>>> = (0..n_rx)
        .map(|_| {
            (0..n_tx)
                .map(|_| cfg.pdp.iter().map(|&p| complex_gaussian(rng, p)).collect())
                .collect()
        })
        .collect();
    ChannelRealization::from_taps(taps, fft_size).expect("non-empty antenna grid")
}

/// Per-bin mixing `y_r(k) = sum_t H_rt(k) x_t(k) + n_r(k)`.
pub fn apply_channel<R: Rng + ?Sized>(
    tx: &[FrequencyGrid],
    real: &ChannelRealization,
    noise_var: f64,
    rng: &mut R,
) -> Result<Vec<FrequencyGrid>> {
    check_len("transmit antennas", real.n_tx, tx.len())?;
    let n = real.response[0].len();
    for g in tx {
        check_len("transmit grid", n, g.bins.len())?;
    }
    let mut out = Vec::with_capacity(real.n_rx);
    for r in 0..real.n_rx {
        let mut grid = FrequencyGrid::zeros(n);
        for (t, x) in tx.iter().enumerate() {
            for ((y, h), s) in grid.bins.iter_mut().zip(real.response(r, t)).zip(&x.bins) {
                *y += h * s;
            }
        }
        add_awgn(&mut grid, noise_var, rng);
        out.push(grid);
    }
    Ok(out)
}

/// Linear convolution of each transmit stream with its taps, summed per
/// receive antenna; output is truncated to the input length.
pub fn convolve_time(tx: &[Vec<Complex64>], real: &ChannelRealization) -> Result<Vec<Vec<Complex64>>> {
    check_len("transmit antennas", real.n_tx, tx.len())?;
    let len = tx.first().map_or(0, Vec::len);
    let mut out = vec![vec![Complex64::new(0.0, 0.0); len]; real.n_rx];
    for (r, y) in out.iter_mut().enumerate() {
        for (t, x) in tx.iter().enumerate() {
            check_len("transmit stream", len, x.len())?;
            for (l, &h) in real.taps(r, t).iter().enumerate() {
                for (yn, xn) in y[l..].iter_mut().zip(x) {
                    *yn += h * xn;
                }
            }
        }
    }
    Ok(out)
}

pub fn add_awgn<R: Rng + ?Sized>(grid: &mut FrequencyGrid, noise_var: f64, rng: &mut R) {
    if noise_var > 0.0 {
        for y in grid.bins.iter_mut() {
            *y += complex_gaussian(rng, noise_var);
        }
    }
}

/// Noise variance per bin for an Es/N0 per receive antenna in dB.
pub fn snr_to_noise_var(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ofdm::OfdmModem;
    use crate::params::Ratio;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn snr_conversion() {
        assert_eq!(snr_to_noise_var(0.0), 1.0);
        assert!((snr_to_noise_var(20.0) - 0.01).abs() < 1e-15);
        assert!((snr_to_noise_var(3.0103) - 0.5).abs() < 1e-6);
    }

    #[test]
    fn default_pdp_is_normalized() {
        let c = ChannelConfig::default();
        assert_eq!(c.n_taps(), 8);
        assert!(c.validate(64).is_ok());
        assert!(c.validate(4).is_err());
        let bad = ChannelConfig {
            pdp: vec![0.5, 0.4],
            ..c.clone()
        };
        assert!(bad.validate(64).is_err());
        assert!((c.pdp[0] / c.pdp[1] - 10f64.powf(0.3)).abs() < 1e-12);
    }

    #[test]
    fn single_tap_is_flat() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cfg = ChannelConfig {
            pdp: vec![1.0],
            block_length_symbols: 2,
        };
        let real = draw_channel(&mut rng, &cfg, 2, 2, 512);
        for r in 0..2 {
            for t in 0..2 {
                let h = real.response(r, t);
                assert!(h.iter().all(|x| (x - h[0]).norm() < 1e-15));
            }
        }
    }

    #[test]
    fn average_energy_and_pair_independence() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let cfg = ChannelConfig::default();
        let n = 100_000;
        let mut energy = [0.0f64; 2];
        let mut cross = Complex64::new(0.0, 0.0);
        let mut p0 = 0.0;
        let mut p1 = 0.0;
        for _ in 0..n {
            // taps only: skip the 512-bin response for speed
            let a: Vec<Complex64> = cfg.pdp.iter().map(|&p| complex_gaussian(&mut rng, p)).collect();
            let b: Vec<Complex64> = cfg.pdp.iter().map(|&p| complex_gaussian(&mut rng, p)).collect();
            energy[0] += a.iter().map(|h| h.norm_sqr()).sum::<f64>();
            energy[1] += b.iter().map(|h| h.norm_sqr()).sum::<f64>();
            // H(0) of each pair
            let ha: Complex64 = a.iter().sum();
            let hb: Complex64 = b.iter().sum();
            cross += ha * hb.conj();
            p0 += ha.norm_sqr();
            p1 += hb.norm_sqr();
        }
        for e in energy {
            let mean = e / n as f64;
            assert!((0.99..=1.01).contains(&mean), "{mean}");
        }
        let rho = cross.norm() / (p0 * p1).sqrt();
        assert!(rho < 0.02, "{rho}");
    }

    #[test]
    fn flat_noiseless_channel_is_transparent() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let real = ChannelRealization::from_taps(vec![vec![vec![Complex64::new(1.0, 0.0)]]], 512).unwrap();
        let tx = FrequencyGrid {
            bins: (0..512).map(|i| Complex64::new(i as f64, 1.0)).collect(),
        };
        let rx = apply_channel(&[tx.clone()], &real, 0.0, &mut rng).unwrap();
        assert_eq!(rx[0], tx);
    }

    #[test]
    fn frequency_domain_matches_time_domain() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let modem = OfdmModem::new(512, Ratio::new(1, 8)).unwrap();
        let cfg = ChannelConfig {
            pdp: exponential_pdp(3, 3.0),
            block_length_symbols: 2,
        };
        let real = draw_channel(&mut rng, &cfg, 2, 2, 512);
        let grids: Vec<FrequencyGrid> = (0..2)
            .map(|_| FrequencyGrid {
                bins: (0..512).map(|_| complex_gaussian(&mut rng, 1.0)).collect(),
            })
            .collect();
        let signals: Vec<Vec<Complex64>> = grids.iter().map(|g| modem.modulate(g).unwrap()).collect();
        let through = convolve_time(&signals, &real).unwrap();
        let freq = apply_channel(&grids, &real, 0.0, &mut rng).unwrap();
        for r in 0..2 {
            let y = modem.demodulate(&through[r]).unwrap();
            let err = y
                .bins
                .iter()
                .zip(&freq[r].bins)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-10, "{err}");
        }
    }

    #[test]
    fn measured_noise_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut g = FrequencyGrid::zeros(1_000_000);
        add_awgn(&mut g, 0.25, &mut rng);
        let v = g.bins.iter().map(|x| x.norm_sqr()).sum::<f64>() / g.bins.len() as f64;
        assert!((v / 0.25 - 1.0).abs() < 0.01, "{v}");
    }

    #[test]
    fn selectivity_grows_with_taps() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let corr = |l: usize, rng: &mut ChaCha8Rng| {
            let cfg = ChannelConfig {
                pdp: vec![1.0 / l as f64; l],
                block_length_symbols: 2,
            };
            let mut num = Complex64::new(0.0, 0.0);
            let mut den = 0.0;
            for _ in 0..300 {
                let real = draw_channel(rng, &cfg, 1, 1, 512);
                let h = real.response(0, 0);
                for k in 0..511 {
                    num += h[k] * h[k + 1].conj();
                    den += h[k].norm_sqr();
                }
            }
            num.norm() / den
        };
        let c1 = corr(1, &mut rng);
        let c4 = corr(4, &mut rng);
        let c8 = corr(8, &mut rng);
        assert!(c1 > c4 && c4 > c8, "{c1} {c4} {c8}");
    }
}
