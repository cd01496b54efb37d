//! AMC envelopes and the STBC/SM switching point of a finished sweep.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::plots::emit_plots;
use crate::error::{Error, Result};
use crate::metrics::{amc_envelope, ams_switching_point, crossing_count, Envelope, SweepResult};
use crate::params::MimoMode;

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub envelopes: Vec<Envelope>,
    /// Present only when both STBC and SM were swept.
    pub switching_point: Option<Result<f64>>,
    /// Sign changes of the smoothed SM - STBC envelope difference.
    pub crossings: Option<usize>,
}

impl Analysis {
    pub fn envelope(&self, mode: MimoMode) -> Option<&Envelope> {
        self.envelopes.iter().find(|e| e.mode == mode)
    }

    pub fn switching_point_db(&self) -> Option<f64> {
        self.switching_point.as_ref().and_then(|r| r.as_ref().ok().copied())
    }

    pub fn envelope_csv(&self) -> String {
        let mut s = String::from("snr_db,mode,best_profile,throughput_bps,normalized_bpshz,smoothed_bpshz\n");
        for e in &self.envelopes {
            for i in 0..e.snr_db.len() {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{}",
                    e.snr_db[i],
                    e.mode.name(),
                    e.best[i],
                    e.throughput_bps[i],
                    e.normalized_bpshz[i],
                    e.smoothed_bpshz[i]
                );
            }
        }
        s
    }

    pub fn summary(&self) -> String {
        match (&self.switching_point, self.crossings) {
            (Some(Ok(x)), Some(n)) => format!("switching_point_db={x}\ncrossings={n}\n"),
            (Some(Err(e)), Some(n)) => format!("switching_point_db=none\nreason={e}\ncrossings={n}\n"),
            _ => "switching_point_db=none\nreason=sweep lacks STBC or SM\n".to_string(),
        }
    }
}

pub fn analyze(sweep: &SweepResult) -> Result<Analysis> {
    if sweep.is_empty() {
        return Err(Error::IncompleteSweep("empty sweep".into()));
    }
    let envelopes = sweep
        .modes()
        .into_iter()
        .map(|m| amc_envelope(sweep, m))
        .collect::<Result<Vec<_>>>()?;
    let find = |m| envelopes.iter().find(|e: &&Envelope| e.mode == m);
    let (switching_point, crossings) = match (find(MimoMode::Stbc2x2), find(MimoMode::Sm2x2)) {
        (Some(stbc), Some(sm)) => {
            if stbc.snr_db != sm.snr_db {
                return Err(Error::IncompleteSweep("STBC and SM grids differ".into()));
            }
            (
                Some(ams_switching_point(&stbc.snr_db, &stbc.smoothed_bpshz, &sm.smoothed_bpshz)),
                Some(crossing_count(&stbc.smoothed_bpshz, &sm.smoothed_bpshz)),
            )
        }
        _ => (None, None),
    };
    Ok(Analysis {
        envelopes,
        switching_point,
        crossings,
    })
}

/// Writes `envelopes.csv`, `switching_point.txt` and the figures.
pub fn write_analysis(sweep: &SweepResult, analysis: &Analysis, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let mut written = Vec::new();
    for (name, body) in [
        ("envelopes.csv", analysis.envelope_csv()),
        ("switching_point.txt", analysis.summary()),
    ] {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        written.push(path);
    }
    written.extend(emit_plots(sweep, &analysis.envelopes, analysis.switching_point_db(), dir)?);
    Ok(written)
}
