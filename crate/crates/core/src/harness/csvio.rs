//! Sweep CSV (one row per point, LF line endings) and its metadata sidecar.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use super::config::{SimConfig, StopRule};
use crate::error::{Error, Result};
use crate::metrics::{LinkMetrics, SweepResult};
use crate::params::{BurstProfile, MimoMode};

pub const HEADER: [&str; 13] = [
    "snr_db",
    "mode",
    "modulation",
    "fec_rate",
    "bits_tested",
    "bit_errors",
    "blocks_tested",
    "block_errors",
    "ber",
    "bler",
    "throughput_bps",
    "normalized_bpshz",
    "seed",
];

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

pub fn write_csv<W: Write>(result: &SweepResult, out: W) -> Result<()> {
    if result.is_empty() {
        return Err(Error::IncompleteSweep("nothing to write".into()));
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(HEADER).map_err(csv_err)?;
    for p in result.points() {
        w.write_record([
            p.snr_db.to_string(),
            p.mode.name().to_string(),
            p.profile.modulation().name().to_string(),
            p.profile.fec_rate().to_string(),
            p.bits_tested.to_string(),
            p.bit_errors.to_string(),
            p.blocks_tested.to_string(),
            p.block_errors.to_string(),
            p.ber.to_string(),
            p.bler.to_string(),
            p.throughput_bps.to_string(),
            p.normalized_bpshz.to_string(),
            p.seed.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(result: &SweepResult, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    write_csv(result, std::io::BufWriter::new(f))
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, line: u64) -> Result<T> {
    let raw = rec.get(i).unwrap_or("");
    raw.parse()
        .map_err(|_| Error::InvalidInput(format!("line {line}: bad {} value {raw:?}", HEADER[i])))
}

/// Reads rows back. Fingerprint and master seed are not CSV columns; pass
/// them from the sidecar.
pub fn parse_csv<R: Read>(input: R, fingerprint: String, master_seed: u64) -> Result<SweepResult> {
    let mut r = csv::ReaderBuilder::new().from_reader(input);
    let header = r.headers().map_err(csv_err)?.clone();
    if header.iter().collect::<Vec<_>>() != HEADER {
        return Err(Error::InvalidInput(format!(
            "unexpected CSV header {:?}",
            header.iter().collect::<Vec<_>>()
        )));
    }
    let mut points = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        let mode: MimoMode = field(&rec, 1, line)?;
        let profile = BurstProfile::new(field(&rec, 2, line)?, field(&rec, 3, line)?)?;
        points.push(LinkMetrics {
            snr_db: field(&rec, 0, line)?,
            mode,
            profile,
            bits_tested: field(&rec, 4, line)?,
            bit_errors: field(&rec, 5, line)?,
            blocks_tested: field(&rec, 6, line)?,
            block_errors: field(&rec, 7, line)?,
            ber: field(&rec, 8, line)?,
            bler: field(&rec, 9, line)?,
            throughput_bps: field(&rec, 10, line)?,
            normalized_bpshz: field(&rec, 11, line)?,
            seed: field(&rec, 12, line)?,
        });
    }
    if points.is_empty() {
        return Err(Error::IncompleteSweep("CSV has no data rows".into()));
    }
    SweepResult::new(points, fingerprint, master_seed)
}

pub fn read_csv(path: &Path, fingerprint: String, master_seed: u64) -> Result<SweepResult> {
    let f = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_csv(std::io::BufReader::new(f), fingerprint, master_seed)
}

/// Sidecar `key=value` lines describing how a sweep CSV was produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepMeta {
    pub fingerprint: String,
    pub master_seed: u64,
    pub stop: StopRule,
    pub csi: String,
}

impl SweepMeta {
    pub fn from_config(cfg: &SimConfig) -> Self {
        SweepMeta {
            fingerprint: cfg.fingerprint(),
            master_seed: cfg.master_seed,
            stop: cfg.stop,
            csi: cfg.csi.name().to_string(),
        }
    }

    pub fn render(&self) -> String {
        format!(
            "fingerprint={}\nmaster_seed={}\nmin_block_errors={}\nmax_blocks={}\ncsi={}\n",
            self.fingerprint, self.master_seed, self.stop.min_block_errors, self.stop.max_blocks, self.csi
        )
    }

    pub fn parse(text: &str) -> Result<Self> {
        let kv: BTreeMap<&str, &str> = text
            .lines()
            .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
            .filter_map(|l| l.split_once('='))
            .map(|(k, v)| (k.trim(), v.trim()))
            .collect();
        let get = |k: &str| {
            kv.get(k)
                .copied()
                .ok_or_else(|| Error::InvalidInput(format!("sweep metadata lacks {k}")))
        };
        let num = |k: &str| -> Result<u64> {
            get(k)?
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad {k} in sweep metadata")))
        };
        Ok(SweepMeta {
            fingerprint: get("fingerprint")?.to_string(),
            master_seed: num("master_seed")?,
            stop: StopRule {
                min_block_errors: num("min_block_errors")?,
                max_blocks: num("max_blocks")?,
            },
            csi: get("csi")?.to_string(),
        })
    }
}
