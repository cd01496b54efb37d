//! OFDMA numerology, burst profiles, MIMO modes and the sizing arithmetic
//! shared by the rest of the chain.
//!
//! Defaults are the 5 MHz / 512-point FFT column of the mobile WiMAX
//! OFDMA parameter set: 360 data, 60 pilot and 92 null subcarriers,
//! 10.94 kHz spacing, 91.4 µs useful symbol time and a 1/8 cyclic prefix.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// A small positive rational `num/den`, kept unreduced as written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ratio {
    pub num: u32,
    pub den: u32,
}

impl Ratio {
    pub const fn new(num: u32, den: u32) -> Self {
        Ratio { num, den }
    }

    pub fn as_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    fn reduced(self) -> (u32, u32) {
        fn gcd(a: u32, b: u32) -> u32 {
            if b == 0 {
                a
            } else {
                gcd(b, a % b)
            }
        }
        let g = gcd(self.num, self.den).max(1);
        (self.num / g, self.den / g)
    }

    pub fn same_value(self, other: Ratio) -> bool {
        self.num as u64 * other.den as u64 == other.num as u64 * self.den as u64
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Ratio {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (n, d) = s
            .trim()
            .split_once('/')
            .ok_or_else(|| invalid(format!("expected a ratio like 1/8, got {s:?}")))?;
        let num = n
            .trim()
            .parse::<u32>()
            .map_err(|_| invalid(format!("bad numerator in {s:?}")))?;
        let den = d
            .trim()
            .parse::<u32>()
            .map_err(|_| invalid(format!("bad denominator in {s:?}")))?;
        if den == 0 {
            return Err(invalid(format!("zero denominator in {s:?}")));
        }
        Ok(Ratio { num, den })
    }
}

/// Cyclic prefix fractions the air interface allows.
pub const ADMISSIBLE_CP: [Ratio; 4] = [
    Ratio::new(1, 4),
    Ratio::new(1, 8),
    Ratio::new(1, 16),
    Ratio::new(1, 32),
];

#[derive(Debug, Clone, PartialEq)]
pub struct OfdmaParams {
    pub fft_size: usize,
    pub n_data: usize,
    pub n_pilot: usize,
    /// Null subcarriers, DC included.
    pub n_guard: usize,
    pub cp_ratio: Ratio,
    pub bandwidth_hz: f64,
    pub subcarrier_spacing_hz: f64,
    pub useful_symbol_time_s: f64,
    /// Recorded for documentation; the quasi-static channel ignores it.
    pub carrier_frequency_hz: f64,
}

impl Default for OfdmaParams {
    fn default() -> Self {
        OfdmaParams {
            fft_size: 512,
            n_data: 360,
            n_pilot: 60,
            n_guard: 92,
            cp_ratio: Ratio::new(1, 8),
            bandwidth_hz: 5.0e6,
            subcarrier_spacing_hz: 10.94e3,
            useful_symbol_time_s: 91.4e-6,
            carrier_frequency_hz: 2.0e9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    SubcarrierSum { sum: usize, fft_size: usize },
    CpNotAdmissible(Ratio),
    CpLengthNotInteger { fft_size: usize, cp_ratio: Ratio },
    SpacingMismatch { product: f64 },
    InterleaverBlock { n_data: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SubcarrierSum { sum, fft_size } => {
                write!(f, "subcarrier sum {sum} != fft size {fft_size}")
            }
            Violation::CpNotAdmissible(r) => {
                write!(f, "cyclic prefix {r} not in {{1/4, 1/8, 1/16, 1/32}}")
            }
            Violation::CpLengthNotInteger { fft_size, cp_ratio } => {
                write!(f, "cp {cp_ratio} of {fft_size} samples is not an integer")
            }
            Violation::SpacingMismatch { product } => write!(
                f,
                "useful symbol time x subcarrier spacing = {product:.5}, expected 1 within 1%"
            ),
            Violation::InterleaverBlock { n_data } => write!(
                f,
                "{n_data} data subcarriers do not give interleaver blocks divisible by 12"
            ),
        }
    }
}

impl OfdmaParams {
    pub fn guard_time_s(&self) -> f64 {
        self.useful_symbol_time_s * self.cp_ratio.as_f64()
    }

    pub fn symbol_duration_s(&self) -> f64 {
        self.useful_symbol_time_s * (1.0 + self.cp_ratio.as_f64())
    }

    /// Cyclic prefix length in samples (`G * N`).
    pub fn cp_len(&self) -> usize {
        self.fft_size * self.cp_ratio.num as usize / self.cp_ratio.den as usize
    }

    pub fn samples_per_symbol(&self) -> usize {
        self.fft_size + self.cp_len()
    }

    /// Every invariant violation; empty when the parameter set is consistent.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let sum = self.n_data + self.n_pilot + self.n_guard;
        if sum != self.fft_size {
            out.push(Violation::SubcarrierSum {
                sum,
                fft_size: self.fft_size,
            });
        }
        if !ADMISSIBLE_CP.iter().any(|r| r.same_value(self.cp_ratio)) {
            out.push(Violation::CpNotAdmissible(self.cp_ratio));
        }
        let (n, d) = self.cp_ratio.reduced();
        if d == 0 || (self.fft_size * n as usize) % d as usize != 0 {
            out.push(Violation::CpLengthNotInteger {
                fft_size: self.fft_size,
                cp_ratio: self.cp_ratio,
            });
        }
        let product = self.useful_symbol_time_s * self.subcarrier_spacing_hz;
        if !(product - 1.0).abs().lt(&0.01) {
            out.push(Violation::SpacingMismatch { product });
        }
        // QPSK blocks carry 2 bits per data subcarrier.
        if (self.n_data * 2) % 12 != 0 {
            out.push(Violation::InterleaverBlock {
                n_data: self.n_data,
            });
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Modulation {
    Qpsk,
    Qam16,
    Qam64,
}

impl Modulation {
    pub fn bits_per_symbol(self) -> usize {
        match self {
            Modulation::Qpsk => 2,
            Modulation::Qam16 => 4,
            Modulation::Qam64 => 6,
        }
    }

    pub fn constellation_points(self) -> usize {
        1 << self.bits_per_symbol()
    }

    pub fn name(self) -> &'static str {
        match self {
            Modulation::Qpsk => "QPSK",
            Modulation::Qam16 => "16QAM",
            Modulation::Qam64 => "64QAM",
        }
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Modulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "qpsk" => Ok(Modulation::Qpsk),
            "16qam" | "qam16" | "16-qam" => Ok(Modulation::Qam16),
            "64qam" | "qam64" | "64-qam" => Ok(Modulation::Qam64),
            other => Err(invalid(format!("unknown modulation {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CodeRate {
    Half,
    TwoThirds,
    ThreeQuarters,
}

impl CodeRate {
    pub fn ratio(self) -> Ratio {
        match self {
            CodeRate::Half => Ratio::new(1, 2),
            CodeRate::TwoThirds => Ratio::new(2, 3),
            CodeRate::ThreeQuarters => Ratio::new(3, 4),
        }
    }

    pub fn as_f64(self) -> f64 {
        self.ratio().as_f64()
    }
}

impl fmt::Display for CodeRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.ratio().fmt(f)
    }
}

impl FromStr for CodeRate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let r: Ratio = s.parse()?;
        [CodeRate::Half, CodeRate::TwoThirds, CodeRate::ThreeQuarters]
            .into_iter()
            .find(|c| c.ratio().same_value(r))
            .ok_or_else(|| invalid(format!("unsupported code rate {s}")))
    }
}

/// One of the six downlink burst profiles (modulation + convolutional code rate).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BurstProfile {
    modulation: Modulation,
    rate: CodeRate,
}

impl BurstProfile {
    pub const QPSK_1_2: BurstProfile = BurstProfile::raw(Modulation::Qpsk, CodeRate::Half);
    pub const QPSK_3_4: BurstProfile = BurstProfile::raw(Modulation::Qpsk, CodeRate::ThreeQuarters);
    pub const QAM16_1_2: BurstProfile = BurstProfile::raw(Modulation::Qam16, CodeRate::Half);
    pub const QAM16_3_4: BurstProfile =
        BurstProfile::raw(Modulation::Qam16, CodeRate::ThreeQuarters);
    pub const QAM64_2_3: BurstProfile = BurstProfile::raw(Modulation::Qam64, CodeRate::TwoThirds);
    pub const QAM64_3_4: BurstProfile =
        BurstProfile::raw(Modulation::Qam64, CodeRate::ThreeQuarters);

    /// All profiles in ascending spectral efficiency.
    pub const ALL: [BurstProfile; 6] = [
        Self::QPSK_1_2,
        Self::QPSK_3_4,
        Self::QAM16_1_2,
        Self::QAM16_3_4,
        Self::QAM64_2_3,
        Self::QAM64_3_4,
    ];

    const fn raw(modulation: Modulation, rate: CodeRate) -> Self {
        BurstProfile { modulation, rate }
    }

    pub fn new(modulation: Modulation, rate: CodeRate) -> Result<Self> {
        let p = BurstProfile { modulation, rate };
        if Self::ALL.contains(&p) {
            Ok(p)
        } else {
            Err(Error::UnsupportedProfile { modulation, rate })
        }
    }

    pub fn modulation(&self) -> Modulation {
        self.modulation
    }

    pub fn fec_rate(&self) -> CodeRate {
        self.rate
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.modulation.bits_per_symbol()
    }

    pub fn constellation_points(&self) -> usize {
        self.modulation.constellation_points()
    }

    /// Position in [`BurstProfile::ALL`].
    pub fn index(&self) -> usize {
        Self::ALL.iter().position(|p| p == self).unwrap()
    }
}

impl fmt::Display for BurstProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.modulation, self.rate)
    }
}

/// Parses `qpsk-1/2`, `16qam-3/4`, ...
impl FromStr for BurstProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (m, r) = s
            .trim()
            .split_once(['-', ':', ' '])
            .ok_or_else(|| invalid(format!("expected <modulation>-<rate>, got {s:?}")))?;
        BurstProfile::new(m.parse()?, r.parse()?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MimoMode {
    Siso,
    Stbc2x2,
    Sm2x2,
}

impl MimoMode {
    pub const ALL: [MimoMode; 3] = [MimoMode::Siso, MimoMode::Stbc2x2, MimoMode::Sm2x2];

    pub fn n_tx(self) -> usize {
        match self {
            MimoMode::Siso => 1,
            _ => 2,
        }
    }

    pub fn n_rx(self) -> usize {
        self.n_tx()
    }

    /// Space-time coding rate: symbols per channel use.
    pub fn stc_rate(self) -> usize {
        match self {
            MimoMode::Sm2x2 => 2,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MimoMode::Siso => "siso",
            MimoMode::Stbc2x2 => "stbc",
            MimoMode::Sm2x2 => "sm",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for MimoMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MimoMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "siso" => Ok(MimoMode::Siso),
            "stbc" | "stbc2x2" => Ok(MimoMode::Stbc2x2),
            "sm" | "sm2x2" => Ok(MimoMode::Sm2x2),
            other => Err(invalid(format!("unknown MIMO mode {other:?}"))),
        }
    }
}

/// Coded bits carried by one OFDM symbol on one spatial stream (`N_D * N_b`).
pub fn coded_bits_per_stream(params: &OfdmaParams, profile: BurstProfile) -> usize {
    params.n_data * profile.bits_per_symbol()
}

/// Information bits per OFDM symbol, `N_D * N_b * R_FEC * R_STC`.
pub fn info_bits_per_ofdm_symbol(
    params: &OfdmaParams,
    profile: BurstProfile,
    mode: MimoMode,
) -> Result<usize> {
    let r = profile.fec_rate().ratio();
    let numer = coded_bits_per_stream(params, profile) * r.num as usize * mode.stc_rate();
    if numer % r.den as usize != 0 {
        return Err(invalid(format!(
            "{numer}/{} information bits per symbol is not an integer",
            r.den
        )));
    }
    Ok(numer / r.den as usize)
}

/// Information bits in one FEC block (one OFDM symbol on one stream).
pub fn info_bits_per_block(params: &OfdmaParams, profile: BurstProfile) -> Result<usize> {
    info_bits_per_ofdm_symbol(params, profile, MimoMode::Siso)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn info_bits_examples() {
        let p = OfdmaParams::default();
        assert_eq!(
            info_bits_per_ofdm_symbol(&p, BurstProfile::QPSK_1_2, MimoMode::Siso).unwrap(),
            360
        );
        assert_eq!(
            info_bits_per_ofdm_symbol(&p, BurstProfile::QAM64_3_4, MimoMode::Siso).unwrap(),
            1620
        );
        assert_eq!(
            info_bits_per_ofdm_symbol(&p, BurstProfile::QAM64_3_4, MimoMode::Sm2x2).unwrap(),
            3240
        );
    }

    #[test]
    fn non_integer_info_bits_rejected() {
        let p = OfdmaParams {
            n_data: 1,
            ..OfdmaParams::default()
        };
        assert!(info_bits_per_ofdm_symbol(&p, BurstProfile::QPSK_3_4, MimoMode::Siso).is_err());
    }

    #[test]
    fn coded_bits_examples() {
        let p = OfdmaParams::default();
        assert_eq!(coded_bits_per_stream(&p, BurstProfile::QPSK_1_2), 720);
        assert_eq!(coded_bits_per_stream(&p, BurstProfile::QAM16_3_4), 1440);
        assert_eq!(coded_bits_per_stream(&p, BurstProfile::QAM64_2_3), 2160);
    }

    #[test]
    fn info_bits_consistent_for_all_profiles_and_modes() {
        let p = OfdmaParams::default();
        for profile in BurstProfile::ALL {
            for mode in MimoMode::ALL {
                let bits = info_bits_per_ofdm_symbol(&p, profile, mode).unwrap();
                assert!(bits > 0);
                let r = profile.fec_rate().ratio();
                assert_eq!(
                    bits * r.den as usize,
                    coded_bits_per_stream(&p, profile) * r.num as usize * mode.stc_rate()
                );
            }
        }
    }

    #[test]
    fn default_params_are_valid() {
        let p = OfdmaParams::default();
        assert!(p.validate().is_empty(), "{:?}", p.validate());
        assert!((p.symbol_duration_s() - 102.9e-6).abs() <= 0.1e-6);
        assert_eq!(p.symbol_duration_s() / p.useful_symbol_time_s, 1.125);
        assert_eq!(p.cp_len(), 64);
        assert_eq!(p.samples_per_symbol(), 576);
    }

    #[test]
    fn subcarrier_sum_violation() {
        let p = OfdmaParams {
            n_data: 361,
            ..OfdmaParams::default()
        };
        let v = p.validate();
        assert!(v.contains(&Violation::SubcarrierSum {
            sum: 513,
            fft_size: 512
        }));
    }

    #[test]
    fn cp_violation() {
        let p = OfdmaParams {
            cp_ratio: Ratio::new(1, 3),
            ..OfdmaParams::default()
        };
        assert!(p
            .validate()
            .contains(&Violation::CpNotAdmissible(Ratio::new(1, 3))));
    }

    #[test]
    fn profile_set_is_closed() {
        let mut admitted = 0;
        for m in [Modulation::Qpsk, Modulation::Qam16, Modulation::Qam64] {
            for r in [CodeRate::Half, CodeRate::TwoThirds, CodeRate::ThreeQuarters] {
                if BurstProfile::new(m, r).is_ok() {
                    admitted += 1;
                }
            }
        }
        assert_eq!(admitted, 6);
        assert!(BurstProfile::new(Modulation::Qpsk, CodeRate::TwoThirds).is_err());
        assert!(BurstProfile::new(Modulation::Qam16, CodeRate::TwoThirds).is_err());
        assert!(BurstProfile::new(Modulation::Qam64, CodeRate::Half).is_err());
    }

    #[test]
    fn parse_profiles_and_modes() {
        assert_eq!(
            "64qam-3/4".parse::<BurstProfile>().unwrap(),
            BurstProfile::QAM64_3_4
        );
        assert_eq!(
            "qpsk:1/2".parse::<BurstProfile>().unwrap(),
            BurstProfile::QPSK_1_2
        );
        assert!("qpsk-2/3".parse::<BurstProfile>().is_err());
        assert_eq!("SM".parse::<MimoMode>().unwrap(), MimoMode::Sm2x2);
    }

    #[test]
    fn mode_shapes() {
        let shape = |m: MimoMode| (m.n_tx(), m.n_rx(), m.stc_rate());
        assert_eq!(shape(MimoMode::Siso), (1, 1, 1));
        assert_eq!(shape(MimoMode::Stbc2x2), (2, 2, 1));
        assert_eq!(shape(MimoMode::Sm2x2), (2, 2, 2));
    }
}
