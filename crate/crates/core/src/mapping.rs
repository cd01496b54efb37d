//! Gray-coded QPSK / 16-QAM / 64-QAM mapping and max-log soft demapping.
//!
//! Each symbol's first `N_b / 2` bits select the in-phase level and the last
//! `N_b / 2` the quadrature level. Per axis the levels are labelled with the
//! reflected binary Gray code counted from the most positive level, so the
//! MSB is the sign bit (0 = positive). Scaling gives unit average energy.

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::params::Modulation;

/// Per-axis amplitude table of one square constellation.
#[derive(Debug, Clone)]
pub struct AxisTable {
    bits: usize,
    /// `levels[i]` is the amplitude labelled `gray(i)`, most positive first.
    levels: Vec<f64>,
    /// Amplitude indexed by axis label.
    by_label: Vec<f64>,
}

impl AxisTable {
    pub fn new(modulation: Modulation) -> Self {
        let bits = modulation.bits_per_symbol() / 2;
        let count = 1usize << bits;
        let scale = match modulation {
            Modulation::Qpsk => 1.0 / 2f64.sqrt(),
            Modulation::Qam16 => 1.0 / 10f64.sqrt(),
            Modulation::Qam64 => 1.0 / 42f64.sqrt(),
        };
        let levels: Vec<f64> = (0..count)
            .map(|i| (count as f64 - 1.0 - 2.0 * i as f64) * scale)
            .collect();
        let mut by_label = vec![0.0; count];
        for (i, &a) in levels.iter().enumerate() {
            by_label[i ^ (i >> 1)] = a;
        }
        AxisTable {
            bits,
            levels,
            by_label,
        }
    }

    fn label_at(&self, i: usize) -> usize {
        i ^ (i >> 1)
    }

    fn nearest(&self, y: f64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, &a) in self.levels.iter().enumerate() {
            let d = (y - a).abs();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        self.label_at(best)
    }

    /// Max-log distance differences `min_{b=1} - min_{b=0}` for this axis.
    fn llr_numerators(&self, y: f64, out: &mut [f64]) {
        for (bit, slot) in out.iter_mut().enumerate().take(self.bits) {
            let shift = self.bits - 1 - bit;
            let mut d0 = f64::INFINITY;
            let mut d1 = f64::INFINITY;
            for (i, &a) in self.levels.iter().enumerate() {
                let d = (y - a) * (y - a);
                if (self.label_at(i) >> shift) & 1 == 0 {
                    d0 = d0.min(d);
                } else {
                    d1 = d1.min(d);
                }
            }
            *slot = d1 - d0;
        }
    }
}

/// Full constellation as (label, point) pairs, label MSB-first.
pub fn constellation(modulation: Modulation) -> Vec<(usize, Complex64)> {
    let t = AxisTable::new(modulation);
    let n = t.by_label.len();
    (0..n * n)
        .map(|label| {
            let i = label >> t.bits;
            let q = label & (n - 1);
            (label, Complex64::new(t.by_label[i], t.by_label[q]))
        })
        .collect()
}

pub fn map_bits(bits: &[u8], modulation: Modulation) -> Result<Vec<Complex64>> {
    let nb = modulation.bits_per_symbol();
    if bits.len() % nb != 0 {
        return Err(invalid(format!(
            "{} bits do not fill whole {modulation} symbols",
            bits.len()
        )));
    }
    let t = AxisTable::new(modulation);
    let half = nb / 2;
    let value = |b: &[u8]| b.iter().fold(0usize, |acc, &x| (acc << 1) | (x & 1) as usize);
    Ok(bits
        .chunks_exact(nb)
        .map(|c| Complex64::new(t.by_label[value(&c[..half])], t.by_label[value(&c[half..])]))
        .collect())
}

pub fn demap_hard(symbols: &[Complex64], modulation: Modulation) -> Vec<u8> {
    let t = AxisTable::new(modulation);
    let mut out = Vec::with_capacity(symbols.len() * modulation.bits_per_symbol());
    for y in symbols {
        for label in [t.nearest(y.re), t.nearest(y.im)] {
            for shift in (0..t.bits).rev() {
                out.push(((label >> shift) & 1) as u8);
            }
        }
    }
    out
}

/// Max-log LLRs (positive favours 0) with one noise variance for all symbols.
pub fn demap_soft(symbols: &[Complex64], noise_var: f64, modulation: Modulation) -> Result<Vec<f64>> {
    if !(noise_var > 0.0) {
        return Err(invalid(format!("noise variance must be positive, got {noise_var}")));
    }
    let mut out = Vec::with_capacity(symbols.len() * modulation.bits_per_symbol());
    demap_into(symbols, |_| noise_var, modulation, &mut out);
    Ok(out)
}

/// Max-log LLRs with a per-symbol noise variance (post-equalization).
pub fn demap_soft_each(
    symbols: &[Complex64],
    noise_vars: &[f64],
    modulation: Modulation,
) -> Result<Vec<f64>> {
    if symbols.len() != noise_vars.len() {
        return Err(invalid("one noise variance per symbol required"));
    }
    if let Some(v) = noise_vars.iter().find(|&&v| !(v > 0.0)) {
        return Err(invalid(format!("noise variance must be positive, got {v}")));
    }
    let mut out = Vec::with_capacity(symbols.len() * modulation.bits_per_symbol());
    demap_into(symbols, |i| noise_vars[i], modulation, &mut out);
    Ok(out)
}

fn demap_into(
    symbols: &[Complex64],
    noise_var: impl Fn(usize) -> f64,
    modulation: Modulation,
    out: &mut Vec<f64>,
) {
    let t = AxisTable::new(modulation);
    let mut buf = [0.0f64; 3];
    for (i, y) in symbols.iter().enumerate() {
        let nv = noise_var(i);
        for axis in [y.re, y.im] {
            t.llr_numerators(axis, &mut buf[..t.bits]);
            out.extend(buf[..t.bits].iter().map(|d| d / nv));
        }
    }
}
