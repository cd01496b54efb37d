//! Subcarrier layout, OFDM modulation with cyclic prefix, and the receiver
//! side: demodulation, channel estimation and single-antenna equalization.
//!
//! The inverse transform carries the `1/N` factor,
//! `x(n) = 1/N sum_k X(k) exp(j 2 pi k n / N)`, and the forward transform is
//! the plain DFT, so a round trip is exact and a data symbol comes out of the
//! FFT with the energy it went in with.
//!
//! Layout (centered subcarrier index `c` in `[-N/2, N/2)`, FFT bin `c mod N`):
//! the lowest `(G-1)/2` and highest `G-1-(G-1)/2` indices are guard bands
//! (45 and 46 for the 512-point grid), `c = 0` is the DC null, and the
//! remaining used subcarriers carry evenly spaced pilots with data in
//! between. Data symbols fill data subcarriers in ascending `c`.

use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{check_len, invalid, Result};
use crate::params::{OfdmaParams, Ratio, ADMISSIBLE_CP};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinRole {
    Data,
    Pilot,
    Guard,
    Dc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridLayout {
    fft_size: usize,
    /// Role of each FFT bin.
    roles: Vec<BinRole>,
    /// FFT bins carrying data, ascending centered index.
    data_bins: Vec<usize>,
    /// FFT bins carrying pilots, ascending centered index.
    pilot_bins: Vec<usize>,
}

impl GridLayout {
    pub fn new(params: &OfdmaParams) -> Result<Self> {
        let n = params.fft_size;
        if params.n_data + params.n_pilot + params.n_guard != n || params.n_guard == 0 {
            return Err(invalid("subcarrier counts do not partition the FFT"));
        }
        if params.n_pilot == 0 {
            return Err(invalid("layout needs at least one pilot"));
        }
        let low = (params.n_guard - 1) / 2;
        let high = params.n_guard - 1 - low;
        let half = (n / 2) as i64;
        let bin_of = |c: i64| c.rem_euclid(n as i64) as usize;

        let mut roles = vec![BinRole::Guard; n];
        roles[0] = BinRole::Dc;
        let used: Vec<i64> = (-half + low as i64..half - high as i64)
            .filter(|&c| c != 0)
            .collect();
        let n_used = used.len();
        let pilot_slots: Vec<usize> = (0..params.n_pilot)
            .map(|i| (i * n_used + n_used / 2) / params.n_pilot)
            .collect();
        let mut data_bins = Vec::with_capacity(params.n_data);
        let mut pilot_bins = Vec::with_capacity(params.n_pilot);
        let mut next_pilot = 0;
        for (u, &c) in used.iter().enumerate() {
            let bin = bin_of(c);
            if next_pilot < pilot_slots.len() && pilot_slots[next_pilot] == u {
                roles[bin] = BinRole::Pilot;
                pilot_bins.push(bin);
                next_pilot += 1;
            } else {
                roles[bin] = BinRole::Data;
                data_bins.push(bin);
            }
        }
        Ok(GridLayout {
            fft_size: n,
            roles,
            data_bins,
            pilot_bins,
        })
    }

    pub fn fft_size(&self) -> usize {
        self.fft_size
    }

    pub fn roles(&self) -> &[BinRole] {
        &self.roles
    }

    pub fn data_bins(&self) -> &[usize] {
        &self.data_bins
    }

    pub fn pilot_bins(&self) -> &[usize] {
        &self.pilot_bins
    }

    pub fn centered(&self, bin: usize) -> i64 {
        let n = self.fft_size as i64;
        let b = bin as i64;
        if b >= n / 2 {
            b - n
        } else {
            b
        }
    }

    /// Pilots sent by one antenna: every `n_tx`-th pilot starting at `antenna`,
    /// so antennas never share a pilot bin.
    pub fn pilots_for(&self, antenna: usize, n_tx: usize) -> PilotAssignment {
        PilotAssignment {
            bins: self
                .pilot_bins
                .iter()
                .enumerate()
                .filter(|(i, _)| i % n_tx == antenna)
                .map(|(_, &b)| b)
                .collect(),
            value: Complex64::new(1.0, 0.0),
        }
    }

    /// Text dump `bin centered role`, one line per FFT bin.
    pub fn dump(&self) -> String {
        let mut s = String::from("# bin\tcentered\trole\n");
        for (bin, role) in self.roles.iter().enumerate() {
            let name = match role {
                BinRole::Data => "data",
                BinRole::Pilot => "pilot",
                BinRole::Guard => "guard",
                BinRole::Dc => "dc",
            };
            let _ = writeln!(s, "{bin}\t{}\t{name}", self.centered(bin));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PilotAssignment {
    pub bins: Vec<usize>,
    pub value: Complex64,
}

/// One OFDM symbol in the frequency domain, indexed by FFT bin.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    pub bins: Vec<Complex64>,
}

impl FrequencyGrid {
    pub fn zeros(n: usize) -> Self {
        FrequencyGrid {
            bins: vec![Complex64::new(0.0, 0.0); n],
        }
    }
}

pub fn subcarrier_map(
    data: &[Complex64],
    pilots: &PilotAssignment,
    layout: &GridLayout,
) -> Result<FrequencyGrid> {
    check_len("data symbols per OFDM symbol", layout.data_bins.len(), data.len())?;
    let mut grid = FrequencyGrid::zeros(layout.fft_size);
    for (&bin, &s) in layout.data_bins.iter().zip(data) {
        grid.bins[bin] = s;
    }
    for &bin in &pilots.bins {
        if layout.roles[bin] != BinRole::Pilot {
            return Err(invalid(format!("bin {bin} is not a pilot subcarrier")));
        }
        grid.bins[bin] = pilots.value;
    }
    Ok(grid)
}

pub fn subcarrier_demap(grid: &FrequencyGrid, layout: &GridLayout) -> Vec<Complex64> {
    layout.data_bins.iter().map(|&b| grid.bins[b]).collect()
}

fn cp_samples(n: usize, cp: Ratio) -> Result<usize> {
    if !ADMISSIBLE_CP.iter().any(|r| r.same_value(cp)) {
        return Err(invalid(format!("cyclic prefix {cp} is not admissible")));
    }
    Ok(n * cp.num as usize / cp.den as usize)
}

/// IFFT/FFT pair with cached plans for one FFT size and prefix length.
#[derive(Clone)]
pub struct OfdmModem {
    n: usize,
    cp: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for OfdmModem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OfdmModem")
            .field("n", &self.n)
            .field("cp", &self.cp)
            .finish()
    }
}

impl OfdmModem {
    pub fn new(fft_size: usize, cp_ratio: Ratio) -> Result<Self> {
        let cp = cp_samples(fft_size, cp_ratio)?;
        let mut planner = FftPlanner::new();
        Ok(OfdmModem {
            n: fft_size,
            cp,
            forward: planner.plan_fft_forward(fft_size),
            inverse: planner.plan_fft_inverse(fft_size),
        })
    }

    pub fn from_params(params: &OfdmaParams) -> Result<Self> {
        Self::new(params.fft_size, params.cp_ratio)
    }

    pub fn cp_len(&self) -> usize {
        self.cp
    }

    pub fn samples_per_symbol(&self) -> usize {
        self.n + self.cp
    }

    /// `1/N`-scaled IDFT followed by the cyclic prefix.
    pub fn modulate(&self, grid: &FrequencyGrid) -> Result<Vec<Complex64>> {
        check_len("frequency grid", self.n, grid.bins.len())?;
        let mut useful = grid.bins.clone();
        self.inverse.process(&mut useful);
        let scale = 1.0 / self.n as f64;
        useful.iter_mut().for_each(|x| *x *= scale);
        let mut out = Vec::with_capacity(self.n + self.cp);
        out.extend_from_slice(&useful[self.n - self.cp..]);
        out.extend_from_slice(&useful);
        Ok(out)
    }

    /// Drops the prefix and applies the DFT.
    pub fn demodulate(&self, samples: &[Complex64]) -> Result<FrequencyGrid> {
        check_len("OFDM symbol samples", self.n + self.cp, samples.len())?;
        let mut bins = samples[self.cp..].to_vec();
        self.forward.process(&mut bins);
        Ok(FrequencyGrid { bins })
    }
}

pub fn ofdm_modulate(grid: &FrequencyGrid, cp_ratio: Ratio) -> Result<Vec<Complex64>> {
    OfdmModem::new(grid.bins.len(), cp_ratio)?.modulate(grid)
}

pub fn ofdm_demodulate(samples: &[Complex64], fft_size: usize, cp_ratio: Ratio) -> Result<FrequencyGrid> {
    OfdmModem::new(fft_size, cp_ratio)?.demodulate(samples)
}

/// Where the receiver's channel knowledge comes from.
#[derive(Debug, Clone, Copy)]
pub enum EstimateSource<'a> {
    /// True per-bin response handed over by the simulator.
    Perfect(&'a [Complex64]),
    /// Least squares at these pilots, linear interpolation in between.
    PilotLs(&'a PilotAssignment),
}

pub fn estimate_channel(
    rx: &FrequencyGrid,
    source: EstimateSource<'_>,
    layout: &GridLayout,
) -> Result<Vec<Complex64>> {
    match source {
        EstimateSource::Perfect(h) => {
            check_len("true channel response", layout.fft_size, h.len())?;
            Ok(h.to_vec())
        }
        EstimateSource::PilotLs(pilots) => estimate_pilot_ls(rx, pilots, layout),
    }
}

fn estimate_pilot_ls(
    rx: &FrequencyGrid,
    pilots: &PilotAssignment,
    layout: &GridLayout,
) -> Result<Vec<Complex64>> {
    check_len("received grid", layout.fft_size, rx.bins.len())?;
    if pilots.value.norm_sqr() == 0.0 {
        return Err(invalid("pilot amplitude is zero"));
    }
    if pilots.bins.is_empty() {
        return Err(invalid("no pilots to estimate from"));
    }
    let mut anchors: Vec<(i64, Complex64)> = pilots
        .bins
        .iter()
        .map(|&b| (layout.centered(b), rx.bins[b] / pilots.value))
        .collect();
    anchors.sort_by_key(|a| a.0);

    let mut est = vec![Complex64::new(0.0, 0.0); layout.fft_size];
    for (bin, role) in layout.roles.iter().enumerate() {
        if !matches!(role, BinRole::Data | BinRole::Pilot) {
            continue;
        }
        let c = layout.centered(bin);
        let first = anchors[0];
        let last = anchors[anchors.len() - 1];
        est[bin] = if c <= first.0 {
            first.1
        } else if c >= last.0 {
            last.1
        } else {
            let i = anchors.partition_point(|a| a.0 <= c);
            let (c0, h0) = anchors[i - 1];
            let (c1, h1) = anchors[i];
            let t = (c - c0) as f64 / (c1 - c0) as f64;
            h0 + (h1 - h0) * t
        };
    }
    Ok(est)
}

/// Equalized data symbols with their post-equalization noise variances.
#[derive(Debug, Clone, PartialEq)]
pub struct Equalized {
    pub symbols: Vec<Complex64>,
    pub noise_vars: Vec<f64>,
}

/// Zero-forcing per data bin. Bins with a zero estimate come out as zero with
/// infinite noise variance.
pub fn equalize_siso(
    rx: &FrequencyGrid,
    estimates: &[Complex64],
    noise_var: f64,
    layout: &GridLayout,
) -> Result<Equalized> {
    check_len("received grid", layout.fft_size, rx.bins.len())?;
    check_len("channel estimates", layout.fft_size, estimates.len())?;
    let mut symbols = Vec::with_capacity(layout.data_bins.len());
    let mut noise_vars = Vec::with_capacity(layout.data_bins.len());
    for &b in &layout.data_bins {
        let h = estimates[b];
        let g = h.norm_sqr();
        if g > 0.0 {
            symbols.push(rx.bins[b] / h);
            noise_vars.push(noise_var / g);
        } else {
            symbols.push(Complex64::new(0.0, 0.0));
            noise_vars.push(f64::INFINITY);
        }
    }
    Ok(Equalized {
        symbols,
        noise_vars,
    })
}
