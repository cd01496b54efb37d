//! Uncoded QPSK with 2x2 Alamouti over i.i.d. flat Rayleigh fading, both as
//! a Monte-Carlo run of the library's encoder/combiner and as the
//! closed-form four-branch MRC expression.

use rand::Rng;

use crate::channel::{complex_gaussian, snr_to_noise_var};
use crate::error::Result;
use crate::mapping::{demap_hard, map_bits};
use crate::mimo::{stbc_combine, stbc_encode};
use crate::params::Modulation;

/// Bit error probability of QPSK with `branches`-fold maximal-ratio
/// diversity and average per-branch bit SNR `gamma`:
/// `p^L sum_{k<L} C(L-1+k, k) (1-p)^k`, `p = (1 - sqrt(gamma/(1+gamma)))/2`.
pub fn mrc_qpsk_ber(gamma: f64, branches: u32) -> f64 {
    let mu = (gamma / (1.0 + gamma)).sqrt();
    let p = 0.5 * (1.0 - mu);
    let l = branches as i32;
    let mut sum = 0.0;
    let mut binom = 1.0;
    for k in 0..l {
        if k > 0 {
            binom *= (l - 1 + k) as f64 / k as f64;
        }
        sum += binom * (1.0 - p).powi(k);
    }
    p.powi(l) * sum
}

/// Closed-form BER of uncoded Alamouti QPSK with two receive antennas at a
/// per-receive-antenna SNR of `snr_db`. Each transmit antenna carries half
/// the power and a QPSK symbol carries two bits, so the per-branch bit SNR
/// is a quarter of the linear SNR.
pub fn alamouti_2x2_qpsk_ber(snr_db: f64) -> f64 {
    mrc_qpsk_ber(10f64.powf(snr_db / 10.0) / 4.0, 4)
}

/// SNR (dB) at which the closed form reaches `ber`, by bisection.
pub fn alamouti_2x2_qpsk_snr_for_ber(ber: f64) -> f64 {
    let (mut lo, mut hi) = (-30.0f64, 80.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if alamouti_2x2_qpsk_ber(mid) > ber {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Bits and bit errors of `n_pairs` Alamouti symbol pairs, each pair under
/// a fresh flat Rayleigh draw.
pub fn simulate_uncoded_alamouti<R: Rng + ?Sized>(rng: &mut R, snr_db: f64, n_pairs: usize) -> Result<(u64, u64)> {
    let nv = snr_to_noise_var(snr_db);
    let mut errors = 0u64;
    for _ in 0..n_pairs {
        let bits: Vec<u8> = (0..4).map(|_| rng.gen_range(0..2u8)).collect();
        let sym = map_bits(&bits, Modulation::Qpsk)?;
        let tx = stbc_encode(&sym)?;
        let h: Vec<[_; 2]> = (0..2)
            .map(|_| [complex_gaussian(rng, 1.0), complex_gaussian(rng, 1.0)])
            .collect();
        let y: Vec<[_; 2]> = h
            .iter()
            .map(|hr| {
                let mut pair = [hr[0] * tx.streams[0][0] + hr[1] * tx.streams[1][0],
                    hr[0] * tx.streams[0][1] + hr[1] * tx.streams[1][1]];
                for v in &mut pair {
                    *v += complex_gaussian(rng, nv);
                }
                pair
            })
            .collect();
        let est = stbc_combine(&y, &h, nv)?;
        let rx = demap_hard(&est.symbols, Modulation::Qpsk);
        errors += bits.iter().zip(&rx).filter(|(a, b)| a != b).count() as u64;
    }
    Ok((4 * n_pairs as u64, errors))
}
