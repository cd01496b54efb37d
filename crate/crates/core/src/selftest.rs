//! Fast invariant checks behind the `selftest` command.

use nalgebra::{Matrix2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bitsource::{generate, LfsrSeed, Prbs};
use crate::channel::{complex_gaussian, ChannelConfig};
use crate::fec::{cc_encode, depuncture, exhaustive_decode, puncture, CodeConfig, Interleaver, ViterbiDecoder};
use crate::harness::config::{SimConfig, StopRule};
use crate::harness::sweep::run_point;
use crate::mapping::constellation;
use crate::metrics::{link_throughput, normalized_throughput};
use crate::mimo::{mmse_detect, MimoChannelAtSubcarrier};
use crate::ofdm::{FrequencyGrid, OfdmModem};
use crate::params::{info_bits_per_ofdm_symbol, BurstProfile, CodeRate, MimoMode, Modulation, OfdmaParams};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> std::result::Result<String, String>) -> Check {
    match f() {
        Ok(detail) => Check {
            name,
            passed: true,
            detail,
        },
        Err(detail) => Check {
            name,
            passed: false,
            detail,
        },
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

pub fn run_all() -> Vec<Check> {
    vec![
        check("parameters", || {
            let p = OfdmaParams::default();
            ensure(p.validate().is_empty(), || format!("{:?}", p.validate()))?;
            for profile in BurstProfile::ALL {
                for mode in MimoMode::ALL {
                    info_bits_per_ofdm_symbol(&p, profile, mode).map_err(|e| e.to_string())?;
                }
            }
            Ok(format!("T_s = {:.3} us", p.symbol_duration_s() * 1e6))
        }),
        check("prbs period", || {
            let mut g = Prbs::new(LfsrSeed::ALL_ONES);
            let start = g.state();
            let mut n = 0u32;
            loop {
                g.next_bit();
                n += 1;
                if g.state() == start || n > 40_000 {
                    break;
                }
            }
            ensure(n == 32_767, || format!("period {n}"))?;
            Ok("32767".into())
        }),
        check("fec round trip", || {
            for (i, rate) in [CodeRate::Half, CodeRate::TwoThirds, CodeRate::ThreeQuarters].into_iter().enumerate() {
                let cfg = CodeConfig::new(rate);
                let dec = ViterbiDecoder::new(&cfg);
                let info = generate(i as u64, 1440).map_err(|e| e.to_string())?;
                let coded = puncture(&cc_encode(&info, &cfg).map_err(|e| e.to_string())?, rate)
                    .map_err(|e| e.to_string())?;
                let llrs: Vec<f64> = coded.iter().map(|&b| 1.0 - 2.0 * b as f64).collect();
                let soft = depuncture(&llrs, rate).map_err(|e| e.to_string())?;
                let out = dec.decode(&soft.llrs).map_err(|e| e.to_string())?;
                ensure(out == *info, || format!("rate {rate} mismatch"))?;
            }
            Ok("3 rates".into())
        }),
        check("viterbi vs exhaustive search", || {
            let cfg = CodeConfig::default();
            let dec = ViterbiDecoder::new(&cfg);
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            let n = 200;
            let mut agree = 0;
            for _ in 0..n {
                let info: Vec<u8> = (0..12).map(|_| rng.gen_range(0..2u8)).collect();
                let coded = cc_encode(&info, &cfg).map_err(|e| e.to_string())?;
                let llrs: Vec<f64> = coded
                    .iter()
                    .map(|&c| 1.0 - 2.0 * c as f64 + 0.7 * rng.sample::<f64, _>(StandardNormal))
                    .collect();
                let best = exhaustive_decode(&llrs, 12, &cfg).map_err(|e| e.to_string())?.0;
                agree += (dec.decode(&llrs).map_err(|e| e.to_string())? == best) as usize;
            }
            ensure(agree * 100 >= 99 * n, || format!("{agree}/{n}"))?;
            Ok(format!("{agree}/{n} agree"))
        }),
        check("interleaver bijection", || {
            for m in [Modulation::Qpsk, Modulation::Qam16, Modulation::Qam64] {
                let il = Interleaver::new(360 * m.bits_per_symbol(), m.bits_per_symbol()).map_err(|e| e.to_string())?;
                let mut seen = vec![false; il.len()];
                for &j in il.permutation() {
                    seen[j] = true;
                }
                ensure(seen.iter().all(|&s| s), || format!("{m} not a permutation"))?;
            }
            Ok("3 block sizes".into())
        }),
        check("unit-energy constellations", || {
            for m in [Modulation::Qpsk, Modulation::Qam16, Modulation::Qam64] {
                let pts = constellation(m);
                let e = pts.iter().map(|(_, p)| p.norm_sqr()).sum::<f64>() / pts.len() as f64;
                ensure((e - 1.0).abs() < 1e-12, || format!("{m}: {e}"))?;
            }
            Ok("QPSK 16QAM 64QAM".into())
        }),
        check("mmse limits", || {
            let mut rng = ChaCha8Rng::seed_from_u64(6);
            let mut worst = 0.0f64;
            for _ in 0..1000 {
                let h = Matrix2::from_fn(|_, _| complex_gaussian(&mut rng, 1.0));
                let x = Vector2::new(complex_gaussian(&mut rng, 1.0), complex_gaussian(&mut rng, 1.0));
                let y = h * x;
                let out = mmse_detect(&y, &MimoChannelAtSubcarrier { h, noise_var: 1e-12 })
                    .map_err(|e| e.to_string())?;
                if h.determinant().norm() > 1e-2 {
                    worst = worst.max((out.estimates - x).norm() / x.norm());
                }
            }
            ensure(worst < 1e-4, || format!("zero-forcing error {worst:e}"))?;
            Ok(format!("worst ZF error {worst:.1e}"))
        }),
        check("ofdm round trip", || {
            let modem = OfdmModem::from_params(&OfdmaParams::default()).map_err(|e| e.to_string())?;
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            let g = FrequencyGrid {
                bins: (0..512).map(|_| complex_gaussian(&mut rng, 1.0)).collect(),
            };
            let back = modem
                .demodulate(&modem.modulate(&g).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
            let err = g.bins.iter().zip(&back.bins).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            ensure(err < 1e-12, || format!("max error {err:e}"))?;
            Ok(format!("max error {err:.1e}"))
        }),
        check("channel energy", || {
            let cfg = ChannelConfig::default();
            let mut rng = ChaCha8Rng::seed_from_u64(8);
            let n = 20_000;
            let mut e = 0.0;
            for _ in 0..n {
                e += cfg
                    .pdp
                    .iter()
                    .map(|&p| complex_gaussian(&mut rng, p).norm_sqr())
                    .sum::<f64>();
            }
            let mean = e / n as f64;
            ensure((mean - 1.0).abs() < 0.03, || format!("mean energy {mean}"))?;
            Ok(format!("mean energy {mean:.4}"))
        }),
        check("peak rates", || {
            let p = OfdmaParams::default();
            let expect = [1.0, 1.5, 2.0, 3.0, 4.0, 4.5];
            for (profile, want) in BurstProfile::ALL.into_iter().zip(expect) {
                let t = normalized_throughput(profile, MimoMode::Siso, 0.0).map_err(|e| e.to_string())?;
                ensure(t == want, || format!("{profile}: {t}"))?;
                let siso = link_throughput(&p, profile, MimoMode::Siso, 0.0).map_err(|e| e.to_string())?;
                let sm = link_throughput(&p, profile, MimoMode::Sm2x2, 0.0).map_err(|e| e.to_string())?;
                ensure(sm == 2.0 * siso, || format!("{profile}: SM {sm} vs SISO {siso}"))?;
            }
            Ok("eq. peaks exact".into())
        }),
        check("noiseless loopback", || {
            let cfg = SimConfig {
                noise_var_override: Some(0.0),
                stop: StopRule {
                    min_block_errors: 1,
                    max_blocks: 8,
                },
                ..SimConfig::default()
            };
            for mode in MimoMode::ALL {
                for profile in BurstProfile::ALL {
                    let m = run_point(&cfg, mode, profile, 0.0, 11).map_err(|e| e.to_string())?;
                    ensure(m.bit_errors == 0, || format!("{mode} {profile}: {} bit errors", m.bit_errors))?;
                }
            }
            Ok("18 mode/profile pairs".into())
        }),
        check("determinism", || {
            let cfg = SimConfig {
                stop: StopRule {
                    min_block_errors: 5,
                    max_blocks: 20,
                },
                ..SimConfig::default()
            };
            let a = run_point(&cfg, MimoMode::Sm2x2, BurstProfile::QAM16_1_2, 8.0, 12).map_err(|e| e.to_string())?;
            let b = run_point(&cfg, MimoMode::Sm2x2, BurstProfile::QAM16_1_2, 8.0, 12).map_err(|e| e.to_string())?;
            ensure(a == b, || "repeat run differs".into())?;
            Ok("repeat run identical".into())
        }),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        let checks = run_all();
        for c in &checks {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
        assert!(checks.len() >= 10);
    }

    #[test]
    fn failures_are_reported() {
        let c = check("x", || Err("bad".into()));
        assert!(!c.passed);
        assert_eq!(c.detail, "bad");
    }
}
