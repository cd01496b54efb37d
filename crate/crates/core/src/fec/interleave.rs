//! Two-step block interleaver over the coded bits of one OFDM symbol.
//!
//! Step one writes row-wise into 12 columns so adjacent coded bits land on
//! non-adjacent subcarriers; step two rotates bits within groups of
//! `s = max(n_cpc / 2, 1)` so adjacent bits alternate between more and less
//! reliable constellation bit positions.

use crate::error::{check_len, invalid, Result};

const COLUMNS: usize = 12;

#[derive(Debug, Clone)]
pub struct Interleaver {
    /// `forward[k]` = output index of input bit `k`.
    forward: Vec<usize>,
}

impl Interleaver {
    pub fn new(n_cbps: usize, n_cpc: usize) -> Result<Self> {
        if n_cbps == 0 || n_cbps % COLUMNS != 0 {
            return Err(invalid(format!(
                "interleaver block {n_cbps} is not a positive multiple of {COLUMNS}"
            )));
        }
        if n_cpc == 0 || n_cbps % n_cpc != 0 {
            return Err(invalid(format!(
                "interleaver block {n_cbps} does not hold whole {n_cpc}-bit symbols"
            )));
        }
        let s = (n_cpc / 2).max(1);
        let forward = (0..n_cbps)
            .map(|k| {
                let m = (n_cbps / COLUMNS) * (k % COLUMNS) + k / COLUMNS;
                s * (m / s) + (m + n_cbps - (COLUMNS * m) / n_cbps) % s
            })
            .collect();
        Ok(Interleaver { forward })
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn permutation(&self) -> &[usize] {
        &self.forward
    }

    pub fn interleave<T: Copy + Default>(&self, input: &[T]) -> Result<Vec<T>> {
        check_len("interleaver input", self.len(), input.len())?;
        let mut out = vec![T::default(); input.len()];
        for (k, &j) in self.forward.iter().enumerate() {
            out[j] = input[k];
        }
        Ok(out)
    }

    pub fn deinterleave<T: Copy + Default>(&self, input: &[T]) -> Result<Vec<T>> {
        check_len("deinterleaver input", self.len(), input.len())?;
        Ok(self.forward.iter().map(|&j| input[j]).collect())
    }
}

pub fn interleave<T: Copy + Default>(coded: &[T], n_cbps: usize, n_cpc: usize) -> Result<Vec<T>> {
    Interleaver::new(n_cbps, n_cpc)?.interleave(coded)
}

pub fn deinterleave<T: Copy + Default>(
    received: &[T],
    n_cbps: usize,
    n_cpc: usize,
) -> Result<Vec<T>> {
    Interleaver::new(n_cbps, n_cpc)?.deinterleave(received)
}
