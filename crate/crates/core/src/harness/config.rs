//! Simulation configuration: a flat TOML file of documented keys, every key
//! optional, defaults taken from the 512-FFT parameter set.
//!
//! ```toml
//! fft_size = 512
//! n_data = 360
//! n_pilot = 60
//! n_guard = 92
//! cp_ratio = "1/8"
//! bandwidth_hz = 5e6
//! subcarrier_spacing_hz = 10940.0
//! useful_symbol_time_s = 9.14e-5
//! carrier_frequency_hz = 2e9
//! n_taps = 8                 # exponential profile, ignored when pdp is set
//! pdp_decay_db = 3.0
//! pdp = [0.5, 0.3, 0.2]      # explicit tap powers, must sum to 1
//! block_length_symbols = 2
//! modes = ["siso", "stbc", "sm"]
//! profiles = ["qpsk-1/2", "qpsk-3/4", "16qam-1/2", "16qam-3/4", "64qam-2/3", "64qam-3/4"]
//! snr_start_db = 0.0
//! snr_step_db = 2.0
//! snr_stop_db = 36.0
//! min_block_errors = 100
//! max_blocks = 200000
//! master_seed = 1
//! csi = "perfect"            # or "pilot"
//! scrambler_seed = 32767
//! noise_var_override = 0.0   # test hook: fixed noise variance for every point
//! out_dir = "out"
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bitsource::LfsrSeed;
use crate::channel::{exponential_pdp, ChannelConfig};
use crate::error::{invalid, Error, Result};
use crate::params::{BurstProfile, MimoMode, OfdmaParams, Ratio};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CsiMode {
    #[default]
    Perfect,
    Pilot,
}

impl CsiMode {
    pub fn name(self) -> &'static str {
        match self {
            CsiMode::Perfect => "perfect",
            CsiMode::Pilot => "pilot",
        }
    }
}

impl fmt::Display for CsiMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CsiMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "perfect" => Ok(CsiMode::Perfect),
            "pilot" | "pilot_ls" | "pilot-ls" => Ok(CsiMode::Pilot),
            other => Err(invalid(format!("unknown CSI mode {other:?}"))),
        }
    }
}

/// Evenly spaced SNR values `start, start + step, ..., stop`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrGrid {
    pub start_db: f64,
    pub step_db: f64,
    pub stop_db: f64,
}

impl SnrGrid {
    pub fn new(start_db: f64, step_db: f64, stop_db: f64) -> Result<Self> {
        let g = SnrGrid {
            start_db,
            step_db,
            stop_db,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn single(snr_db: f64) -> Self {
        SnrGrid {
            start_db: snr_db,
            step_db: 1.0,
            stop_db: snr_db,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.start_db.is_finite() && self.stop_db.is_finite() && self.step_db.is_finite()) {
            return Err(Error::Config("SNR grid values must be finite".into()));
        }
        if !(self.step_db > 0.0) {
            return Err(Error::Config("SNR step must be positive".into()));
        }
        if self.stop_db < self.start_db {
            return Err(Error::Config("SNR stop is below start".into()));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop_db - self.start_db) / self.step_db + 1e-9).floor() as usize + 1;
        (0..n)
            .map(|i| {
                let v = self.start_db + i as f64 * self.step_db;
                // keep grid values free of accumulated binary noise
                (v * 1e9).round() / 1e9
            })
            .collect()
    }
}

impl FromStr for SnrGrid {
    type Err = Error;

    /// `start:step:stop` in dB.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let num = |t: &str| {
            t.parse::<f64>()
                .map_err(|_| Error::Config(format!("bad SNR value {t:?} in {s:?}")))
        };
        match parts.as_slice() {
            [a] => Ok(SnrGrid::single(num(a)?)),
            [a, b, c] => SnrGrid::new(num(a)?, num(b)?, num(c)?),
            _ => Err(Error::Config(format!("expected start:step:stop, got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StopRule {
    pub min_block_errors: u64,
    pub max_blocks: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule {
            min_block_errors: 100,
            max_blocks: 200_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub params: OfdmaParams,
    pub channel: ChannelConfig,
    pub modes: Vec<MimoMode>,
    pub profiles: Vec<BurstProfile>,
    pub snr: SnrGrid,
    pub stop: StopRule,
    pub master_seed: u64,
    pub csi: CsiMode,
    pub scrambler_seed: LfsrSeed,
    /// Replaces the SNR-derived noise variance at every point when set.
    pub noise_var_override: Option<f64>,
    pub out_dir: PathBuf,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            params: OfdmaParams::default(),
            channel: ChannelConfig::default(),
            modes: MimoMode::ALL.to_vec(),
            profiles: BurstProfile::ALL.to_vec(),
            snr: SnrGrid {
                start_db: 0.0,
                step_db: 2.0,
                stop_db: 36.0,
            },
            stop: StopRule::default(),
            master_seed: 1,
            csi: CsiMode::Perfect,
            scrambler_seed: LfsrSeed::ALL_ONES,
            noise_var_override: None,
            out_dir: PathBuf::from("out"),
        }
    }
}

/// On-disk form; every key optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    fft_size: Option<usize>,
    n_data: Option<usize>,
    n_pilot: Option<usize>,
    n_guard: Option<usize>,
    cp_ratio: Option<String>,
    bandwidth_hz: Option<f64>,
    subcarrier_spacing_hz: Option<f64>,
    useful_symbol_time_s: Option<f64>,
    carrier_frequency_hz: Option<f64>,
    n_taps: Option<usize>,
    pdp_decay_db: Option<f64>,
    pdp: Option<Vec<f64>>,
    block_length_symbols: Option<usize>,
    modes: Option<Vec<String>>,
    profiles: Option<Vec<String>>,
    snr_start_db: Option<f64>,
    snr_step_db: Option<f64>,
    snr_stop_db: Option<f64>,
    min_block_errors: Option<u64>,
    max_blocks: Option<u64>,
    master_seed: Option<u64>,
    csi: Option<String>,
    scrambler_seed: Option<u16>,
    noise_var_override: Option<f64>,
    out_dir: Option<String>,
}

fn cfg_err(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

impl SimConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut c = SimConfig::default();
        let p = &mut c.params;
        if let Some(v) = file.fft_size {
            p.fft_size = v;
        }
        if let Some(v) = file.n_data {
            p.n_data = v;
        }
        if let Some(v) = file.n_pilot {
            p.n_pilot = v;
        }
        if let Some(v) = file.n_guard {
            p.n_guard = v;
        }
        if let Some(v) = &file.cp_ratio {
            p.cp_ratio = v.parse::<Ratio>().map_err(cfg_err)?;
        }
        if let Some(v) = file.bandwidth_hz {
            p.bandwidth_hz = v;
        }
        if let Some(v) = file.subcarrier_spacing_hz {
            p.subcarrier_spacing_hz = v;
        }
        if let Some(v) = file.useful_symbol_time_s {
            p.useful_symbol_time_s = v;
        }
        if let Some(v) = file.carrier_frequency_hz {
            p.carrier_frequency_hz = v;
        }
        c.channel.pdp = match (&file.pdp, file.n_taps, file.pdp_decay_db) {
            (Some(pdp), n, _) => {
                if n.is_some_and(|n| n != pdp.len()) {
                    return Err(Error::Config("n_taps disagrees with the pdp list".into()));
                }
                pdp.clone()
            }
            (None, n, d) => exponential_pdp(n.unwrap_or(8), d.unwrap_or(3.0)),
        };
        if let Some(v) = file.block_length_symbols {
            c.channel.block_length_symbols = v;
        }
        if let Some(v) = &file.modes {
            c.modes = v.iter().map(|m| m.parse()).collect::<Result<_>>().map_err(cfg_err)?;
        }
        if let Some(v) = &file.profiles {
            c.profiles = v.iter().map(|m| m.parse()).collect::<Result<_>>().map_err(cfg_err)?;
        }
        c.snr = SnrGrid {
            start_db: file.snr_start_db.unwrap_or(c.snr.start_db),
            step_db: file.snr_step_db.unwrap_or(c.snr.step_db),
            stop_db: file.snr_stop_db.unwrap_or(c.snr.stop_db),
        };
        if let Some(v) = file.min_block_errors {
            c.stop.min_block_errors = v;
        }
        if let Some(v) = file.max_blocks {
            c.stop.max_blocks = v;
        }
        if let Some(v) = file.master_seed {
            c.master_seed = v;
        }
        if let Some(v) = &file.csi {
            c.csi = v.parse().map_err(cfg_err)?;
        }
        if let Some(v) = file.scrambler_seed {
            c.scrambler_seed = LfsrSeed::new(v).map_err(cfg_err)?;
        }
        c.noise_var_override = file.noise_var_override;
        if let Some(v) = file.out_dir {
            c.out_dir = PathBuf::from(v);
        }
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let violations = self.params.validate();
        if !violations.is_empty() {
            let msgs: Vec<String> = violations.iter().map(ToString::to_string).collect();
            return Err(Error::Config(msgs.join("; ")));
        }
        self.channel.validate(self.params.cp_len()).map_err(cfg_err)?;
        if self.modes.is_empty() || self.profiles.is_empty() {
            return Err(Error::Config("mode and profile lists must be non-empty".into()));
        }
        if self.modes.contains(&MimoMode::Stbc2x2) && self.channel.block_length_symbols % 2 != 0 {
            return Err(Error::Config(
                "STBC needs an even block_length_symbols so symbol pairs share a channel".into(),
            ));
        }
        self.snr.validate()?;
        if self.stop.min_block_errors < 1 {
            return Err(Error::Config("min_block_errors must be at least 1".into()));
        }
        if self.stop.max_blocks < self.stop.min_block_errors {
            return Err(Error::Config("max_blocks is below min_block_errors".into()));
        }
        if let Some(v) = self.noise_var_override {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("noise_var_override {v} must be >= 0")));
            }
        }
        Ok(())
    }

    fn to_file(&self, with_out_dir: bool) -> ConfigFile {
        let p = &self.params;
        ConfigFile {
            fft_size: Some(p.fft_size),
            n_data: Some(p.n_data),
            n_pilot: Some(p.n_pilot),
            n_guard: Some(p.n_guard),
            cp_ratio: Some(p.cp_ratio.to_string()),
            bandwidth_hz: Some(p.bandwidth_hz),
            subcarrier_spacing_hz: Some(p.subcarrier_spacing_hz),
            useful_symbol_time_s: Some(p.useful_symbol_time_s),
            carrier_frequency_hz: Some(p.carrier_frequency_hz),
            n_taps: Some(self.channel.n_taps()),
            pdp_decay_db: None,
            pdp: Some(self.channel.pdp.clone()),
            block_length_symbols: Some(self.channel.block_length_symbols),
            modes: Some(self.modes.iter().map(|m| m.name().to_string()).collect()),
            profiles: Some(self.profiles.iter().map(ToString::to_string).collect()),
            snr_start_db: Some(self.snr.start_db),
            snr_step_db: Some(self.snr.step_db),
            snr_stop_db: Some(self.snr.stop_db),
            min_block_errors: Some(self.stop.min_block_errors),
            max_blocks: Some(self.stop.max_blocks),
            master_seed: Some(self.master_seed),
            csi: Some(self.csi.name().to_string()),
            scrambler_seed: Some(self.scrambler_seed.value()),
            noise_var_override: self.noise_var_override,
            out_dir: with_out_dir.then(|| self.out_dir.display().to_string()),
        }
    }

    /// Fully resolved config as TOML, every key spelled out.
    pub fn to_toml_string(&self) -> String {
        toml::to_string(&self.to_file(true)).expect("flat config serializes")
    }

    /// SHA-256 (hex) of the resolved config without the output directory.
    pub fn fingerprint(&self) -> String {
        let text = toml::to_string(&self.to_file(false)).expect("flat config serializes");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = SimConfig::from_toml_str("").unwrap();
        assert_eq!(c, SimConfig::default());
        assert_eq!(c.snr.points().len(), 19);
        assert_eq!(c.snr.points()[18], 36.0);
    }

    #[test]
    fn resolved_toml_round_trips() {
        let c = SimConfig::from_toml_str(
            "modes = [\"stbc\", \"sm\"]\nprofiles = [\"64qam-3/4\"]\nsnr_step_db = 0.5\ncsi = \"pilot\"\npdp = [0.75, 0.25]\nmaster_seed = 99",
        )
        .unwrap();
        assert_eq!(c.modes, vec![MimoMode::Stbc2x2, MimoMode::Sm2x2]);
        assert_eq!(c.profiles, vec![BurstProfile::QAM64_3_4]);
        assert_eq!(c.csi, CsiMode::Pilot);
        let again = SimConfig::from_toml_str(&c.to_toml_string()).unwrap();
        assert_eq!(again, c);
        assert_eq!(again.fingerprint(), c.fingerprint());
        assert_ne!(SimConfig::default().fingerprint(), c.fingerprint());
        assert_eq!(c.fingerprint().len(), 64);
    }

    #[test]
    fn out_dir_does_not_change_fingerprint() {
        let mut c = SimConfig::default();
        let fp = c.fingerprint();
        c.out_dir = PathBuf::from("elsewhere");
        assert_eq!(c.fingerprint(), fp);
        c.master_seed = 2;
        assert_ne!(c.fingerprint(), fp);
    }

    #[test]
    fn rejects_bad_configs() {
        for bad in [
            "unknown_key = 1",
            "n_data = 361",
            "cp_ratio = \"1/3\"",
            "pdp = [0.5, 0.4]",
            "n_taps = 80",
            "min_block_errors = 0",
            "min_block_errors = 10\nmax_blocks = 5",
            "snr_step_db = 0.0",
            "snr_start_db = 10.0\nsnr_stop_db = 0.0",
            "modes = [\"mimo\"]",
            "profiles = [\"qpsk-2/3\"]",
            "block_length_symbols = 3",
            "csi = \"blind\"",
            "scrambler_seed = 0",
            "n_taps = 4\npdp = [1.0]",
        ] {
            assert!(matches!(SimConfig::from_toml_str(bad), Err(Error::Config(_))), "{bad}");
        }
        // odd block length is fine without STBC
        assert!(SimConfig::from_toml_str("block_length_symbols = 3\nmodes = [\"siso\", \"sm\"]").is_ok());
    }

    #[test]
    fn snr_grid_parsing() {
        let g: SnrGrid = "0:2:36".parse().unwrap();
        assert_eq!(g.points().len(), 19);
        let g: SnrGrid = "0:0.1:1".parse().unwrap();
        assert_eq!(g.points().len(), 11);
        assert_eq!(g.points()[3], 0.3);
        let g: SnrGrid = "12".parse().unwrap();
        assert_eq!(g.points(), vec![12.0]);
        assert!("1:2".parse::<SnrGrid>().is_err());
        assert!("a:1:2".parse::<SnrGrid>().is_err());
        assert!("5:-1:0".parse::<SnrGrid>().is_err());
    }
}
