//! Wrap-around Viterbi decoding for tail-biting blocks.
//!
//! The trellis is run over the circular block extended by `overlap` steps
//! on each side (positions `L-D .. L-1, 0 .. L-1, 0 .. D-1`) starting from
//! equal metrics in every state. Traceback starts from the best state at the
//! end of the extension and the decisions of the middle `L` steps are
//! returned. With `D >= L` this is the classic two-pass scheme with an extra
//! traceback margin. When the decoded window does not start and end in the
//! same state it is not a tail-biting codeword; the decoder then falls back
//! to the best of the 64 fixed-state tail-biting paths, which is the
//! maximum-likelihood codeword.

use super::conv::{cc_encode, CodeConfig, MEMORY, NUM_STATES};
use super::puncture::SoftBlock;
use crate::error::{invalid, Result};

/// Default extension on each side of the circular block.
pub const DEFAULT_OVERLAP: usize = 96;

#[derive(Debug, Clone)]
pub struct ViterbiDecoder {
    /// Output index `2x + y` for each (next state, oldest predecessor bit).
    branch_out: [[u8; 2]; NUM_STATES],
    overlap: usize,
    /// Search every start state when the wrapped path does not bite its tail.
    exact_fallback: bool,
}

impl ViterbiDecoder {
    pub fn new(cfg: &CodeConfig) -> Self {
        Self::with_overlap(cfg, DEFAULT_OVERLAP)
    }

    pub fn with_overlap(cfg: &CodeConfig, overlap: usize) -> Self {
        let mut branch_out = [[0u8; 2]; NUM_STATES];
        for (next, row) in branch_out.iter_mut().enumerate() {
            for b in 0..2 {
                let reg = ((next << 1) | b) as u8;
                let (x, y) = cfg.outputs(reg);
                row[b] = (x << 1) | y;
            }
        }
        ViterbiDecoder {
            branch_out,
            overlap,
            exact_fallback: true,
        }
    }

    /// Plain wrap-around decoding, returning the wrapped path even when its
    /// start and end states differ.
    pub fn without_fallback(mut self) -> Self {
        self.exact_fallback = false;
        self
    }

    /// One add-compare-select step; returns the decision bit of each state.
    #[inline]
    fn acs(&self, metric: &[f64; NUM_STATES], lx: f64, ly: f64, next_metric: &mut [f64; NUM_STATES]) -> u64 {
        // indexed by 2x + y
        let bm = [lx + ly, lx - ly, -lx + ly, -lx - ly];
        let mut dec = 0u64;
        for (next, outs) in self.branch_out.iter().enumerate() {
            let base = (next << 1) & (NUM_STATES - 1);
            let m0 = metric[base] + bm[outs[0] as usize];
            let m1 = metric[base | 1] + bm[outs[1] as usize];
            if m1 > m0 {
                next_metric[next] = m1;
                dec |= 1 << next;
            } else {
                next_metric[next] = m0;
            }
        }
        dec
    }

    /// Best path that starts and ends in `state`, with its exact metric.
    fn decode_from_state(&self, llrs: &[f64], state: usize) -> (Vec<u8>, f64) {
        let n = llrs.len() / 2;
        let mut metric = [f64::NEG_INFINITY; NUM_STATES];
        metric[state] = 0.0;
        let mut next_metric = [0.0f64; NUM_STATES];
        let mut decisions = Vec::with_capacity(n);
        for pos in 0..n {
            decisions.push(self.acs(&metric, llrs[2 * pos], llrs[2 * pos + 1], &mut next_metric));
            metric = next_metric;
        }
        let mut s = state;
        let mut out = vec![0u8; n];
        for j in (0..n).rev() {
            out[j] = (s >> (MEMORY - 1)) as u8 & 1;
            let b = ((decisions[j] >> s) & 1) as usize;
            s = ((s << 1) | b) & (NUM_STATES - 1);
        }
        (out, metric[state])
    }

    /// Decodes `2L` native-rate LLRs (positive favours 0) into `L` bits.
    pub fn decode(&self, llrs: &[f64]) -> Result<Vec<u8>> {
        if llrs.len() % 2 != 0 || llrs.len() < 2 * MEMORY {
            return Err(invalid(format!(
                "native soft block of {} values does not match a rate-1/2 trellis",
                llrs.len()
            )));
        }
        let n = llrs.len() / 2;
        let d = self.overlap;
        let steps = n + 2 * d;
        let start = (n - d % n) % n;

        let mut metric = [0.0f64; NUM_STATES];
        let mut next_metric = [0.0f64; NUM_STATES];
        let mut decisions: Vec<u64> = Vec::with_capacity(steps);

        for j in 0..steps {
            let pos = (start + j) % n;
            decisions.push(self.acs(&metric, llrs[2 * pos], llrs[2 * pos + 1], &mut next_metric));
            // Keep metrics near zero; only differences matter.
            let top = next_metric[0];
            for (m, nm) in metric.iter_mut().zip(next_metric.iter()) {
                *m = nm - top;
            }
        }

        let mut state = metric
            .iter()
            .enumerate()
            .fold((0usize, f64::NEG_INFINITY), |best, (s, &m)| {
                if m > best.1 {
                    (s, m)
                } else {
                    best
                }
            })
            .0;

        let mut out = vec![0u8; n];
        let mut window_end = 0;
        for j in (d..steps).rev() {
            if j == d + n - 1 {
                window_end = state;
            }
            if j < d + n {
                out[j - d] = (state >> (MEMORY - 1)) as u8 & 1;
            }
            let b = ((decisions[j] >> state) & 1) as usize;
            state = ((state << 1) | b) & (NUM_STATES - 1);
        }
        if state == window_end || !self.exact_fallback {
            return Ok(out);
        }
        // Not a tail-biting codeword: take the best path over every
        // (start = end) state instead.
        let mut best = (out, f64::NEG_INFINITY);
        for c in 0..NUM_STATES {
            let (bits, m) = self.decode_from_state(llrs, c);
            if m > best.1 {
                best = (bits, m);
            }
        }
        Ok(best.0)
    }
}

pub fn viterbi_decode(soft: &SoftBlock, cfg: &CodeConfig) -> Result<Vec<u8>> {
    if soft.erased.len() != soft.llrs.len() {
        return Err(invalid("erasure mask length differs from LLR length"));
    }
    ViterbiDecoder::new(cfg).decode(&soft.llrs)
}

/// Correlation metric `sum llr * (1 - 2c)` of a native-rate codeword.
pub fn codeword_metric(llrs: &[f64], codeword: &[u8]) -> f64 {
    llrs.iter()
        .zip(codeword)
        .map(|(&l, &c)| if c == 0 { l } else { -l })
        .sum()
}

/// Maximum-metric tail-biting codeword by enumerating every information
/// word of length `info_len` (at most 20 bits).
pub fn exhaustive_decode(llrs: &[f64], info_len: usize, cfg: &CodeConfig) -> Result<(Vec<u8>, f64)> {
    if info_len == 0 || info_len > 20 {
        return Err(invalid(format!("exhaustive search over {info_len} bits is not supported")));
    }
    if llrs.len() != 2 * info_len {
        return Err(invalid("exhaustive search needs a native rate-1/2 soft block"));
    }
    let mut best = (Vec::new(), f64::NEG_INFINITY);
    let mut word = vec![0u8; info_len];
    for w in 0u32..(1 << info_len) {
        for (i, b) in word.iter_mut().enumerate() {
            *b = ((w >> i) & 1) as u8;
        }
        let cw = cc_encode(&word, cfg)?;
        let m = codeword_metric(llrs, &cw);
        if m > best.1 {
            best = (word.clone(), m);
        }
    }
    Ok(best)
}
