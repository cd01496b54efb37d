use crate::error::{invalid, Result};
use crate::params::CodeRate;

pub const CONSTRAINT_LENGTH: usize = 7;
pub const MEMORY: usize = CONSTRAINT_LENGTH - 1;
pub const NUM_STATES: usize = 1 << MEMORY;

/// Rate-1/2, K = 7 convolutional code plus the puncturing applied on top.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodeConfig {
    /// Tap masks, MSB = current input. Default 171/133 octal.
    pub generators: [u8; 2],
    pub puncture_rate: CodeRate,
}

impl CodeConfig {
    pub const G1: u8 = 0o171;
    pub const G2: u8 = 0o133;

    pub fn new(puncture_rate: CodeRate) -> Self {
        CodeConfig {
            generators: [Self::G1, Self::G2],
            puncture_rate,
        }
    }

    /// Output pair (X, Y) for a 7-bit register `u_n u_{n-1} ... u_{n-6}`.
    #[inline]
    pub(crate) fn outputs(&self, register: u8) -> (u8, u8) {
        let x = (register & self.generators[0]).count_ones() as u8 & 1;
        let y = (register & self.generators[1]).count_ones() as u8 & 1;
        (x, y)
    }
}

impl Default for CodeConfig {
    fn default() -> Self {
        CodeConfig::new(CodeRate::Half)
    }
}

/// Encoder state (`u_{n-1}` in bit 5 down to `u_{n-6}` in bit 0) preloaded
/// with the last six information bits.
pub fn tail_biting_state(info: &[u8]) -> Result<u8> {
    if info.len() < MEMORY {
        return Err(invalid(format!(
            "tail-biting block needs at least {MEMORY} bits, got {}",
            info.len()
        )));
    }
    let tail = &info[info.len() - MEMORY..];
    // tail[MEMORY-1] is the most recent bit.
    Ok(tail
        .iter()
        .enumerate()
        .fold(0u8, |s, (i, &b)| s | ((b & 1) << i)))
}

/// Runs the shift register from `state` over `info`, returning native-rate
/// output (X0 Y0 X1 Y1 ...) and the final state.
pub fn encode_from_state(info: &[u8], state: u8, cfg: &CodeConfig) -> (Vec<u8>, u8) {
    let mut out = Vec::with_capacity(info.len() * 2);
    let mut s = state;
    for &b in info {
        let reg = ((b & 1) << MEMORY) | s;
        let (x, y) = cfg.outputs(reg);
        out.push(x);
        out.push(y);
        s = reg >> 1;
    }
    (out, s)
}

/// Tail-biting encode at the native rate 1/2.
pub fn cc_encode(info: &[u8], cfg: &CodeConfig) -> Result<Vec<u8>> {
    let start = tail_biting_state(info)?;
    Ok(encode_from_state(info, start, cfg).0)
}
