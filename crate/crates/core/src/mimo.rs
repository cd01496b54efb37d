//! Space-time encoding and detection for the three antenna configurations.
//!
//! Both 2x2 schemes transmit with per-antenna power 1/2 so the total
//! radiated power per channel use matches SISO.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

const INV_SQRT2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Per-antenna symbol streams indexed by channel use.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamGrid {
    pub streams: Vec<Vec<Complex64>>,
}

impl StreamGrid {
    pub fn n_tx(&self) -> usize {
        self.streams.len()
    }

    pub fn channel_uses(&self) -> usize {
        self.streams.first().map_or(0, Vec::len)
    }
}

fn require_even(n: usize, what: &str) -> Result<()> {
    if n % 2 != 0 {
        Err(invalid(format!("{what} needs an even symbol count, got {n}")))
    } else {
        Ok(())
    }
}

/// Alamouti encoding: for each pair `(s1, s2)` antenna 1 sends `(s1, -s2*)`
/// and antenna 2 sends `(s2, s1*)` over two channel uses, scaled by 1/sqrt(2).
pub fn stbc_encode(symbols: &[Complex64]) -> Result<StreamGrid> {
    require_even(symbols.len(), "Alamouti encoding")?;
    let mut a1 = Vec::with_capacity(symbols.len());
    let mut a2 = Vec::with_capacity(symbols.len());
    for pair in symbols.chunks_exact(2) {
        let (s1, s2) = (pair[0], pair[1]);
        a1.push(s1 * INV_SQRT2);
        a1.push(-s2.conj() * INV_SQRT2);
        a2.push(s2 * INV_SQRT2);
        a2.push(s1.conj() * INV_SQRT2);
    }
    Ok(StreamGrid {
        streams: vec![a1, a2],
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlamoutiEstimate {
    /// Rescaled so that the noiseless estimate equals the transmitted pair.
    pub symbols: [Complex64; 2],
    /// `sum |h_rt|^2` over all paths.
    pub effective_gain: f64,
    /// Noise variance of each rescaled estimate.
    pub noise_var: f64,
    /// False when every path is in a null; estimates are then zero.
    pub reliable: bool,
}

/// Alamouti combining summed over receive antennas.
///
/// `y[r] = [y_r(t1), y_r(t2)]`, `h[r] = [h_r1, h_r2]`, channel constant over
/// both channel uses.
pub fn stbc_combine(
    y: &[[Complex64; 2]],
    h: &[[Complex64; 2]],
    noise_var: f64,
) -> Result<AlamoutiEstimate> {
    if y.len() != h.len() || y.is_empty() {
        return Err(invalid("one received pair and one channel row per receive antenna"));
    }
    let mut s1 = Complex64::new(0.0, 0.0);
    let mut s2 = Complex64::new(0.0, 0.0);
    let mut gain = 0.0;
    for (yr, hr) in y.iter().zip(h) {
        s1 += hr[0].conj() * yr[0] + hr[1] * yr[1].conj();
        s2 += hr[1].conj() * yr[0] - hr[0] * yr[1].conj();
        gain += hr[0].norm_sqr() + hr[1].norm_sqr();
    }
    if !(gain > 0.0) {
        return Ok(AlamoutiEstimate {
            symbols: [Complex64::new(0.0, 0.0); 2],
            effective_gain: 0.0,
            noise_var: f64::INFINITY,
            reliable: false,
        });
    }
    // noiseless s_i^ = gain * s_i / sqrt(2)
    let scale = std::f64::consts::SQRT_2 / gain;
    Ok(AlamoutiEstimate {
        symbols: [s1 * scale, s2 * scale],
        effective_gain: gain,
        noise_var: 2.0 * noise_var / gain,
        reliable: true,
    })
}

/// Spatial multiplexing: even-indexed symbols on antenna 1, odd on antenna 2.
pub fn sm_encode(symbols: &[Complex64]) -> Result<StreamGrid> {
    require_even(symbols.len(), "spatial multiplexing")?;
    let (a1, a2): (Vec<_>, Vec<_>) = symbols
        .chunks_exact(2)
        .map(|p| (p[0] * INV_SQRT2, p[1] * INV_SQRT2))
        .unzip();
    Ok(StreamGrid {
        streams: vec![a1, a2],
    })
}

/// 2x2 channel at one subcarrier, including the transmit power scaling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MimoChannelAtSubcarrier {
    pub h: Matrix2<Complex64>,
    pub noise_var: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmseOutput {
    pub estimates: Vector2<Complex64>,
    /// Per-stream MSE, `noise_var * [(H^H H + noise_var I)^-1]_ii`.
    pub mse: [f64; 2],
}

impl MmseOutput {
    /// Post-detection SINR `1/mse - 1` (infinite in the zero-forcing limit).
    pub fn post_snr(&self, stream: usize) -> f64 {
        1.0 / self.mse[stream] - 1.0
    }

    /// Bias-removed estimate and its residual variance for soft demapping.
    pub fn unbiased(&self, stream: usize) -> (Complex64, f64) {
        let bias = 1.0 - self.mse[stream];
        if !(bias > 0.0) {
            return (Complex64::new(0.0, 0.0), f64::INFINITY);
        }
        (self.estimates[stream] / bias, self.mse[stream] / bias)
    }
}

/// Linear MMSE detection `(H^H H + s2 I)^-1 H^H y`; zero forcing when `s2 = 0`.
pub fn mmse_detect(y: &Vector2<Complex64>, ch: &MimoChannelAtSubcarrier) -> Result<MmseOutput> {
    if !(ch.noise_var >= 0.0) || !ch.noise_var.is_finite() {
        return Err(invalid(format!("bad noise variance {}", ch.noise_var)));
    }
    let hh = ch.h.adjoint();
    let gram = hh * ch.h + Matrix2::identity() * Complex64::new(ch.noise_var, 0.0);
    let inv = gram.try_inverse().ok_or(Error::SingularChannel)?;
    let det = (ch.h.determinant()).norm_sqr();
    if ch.noise_var == 0.0 && !(det > 0.0) {
        return Err(Error::SingularChannel);
    }
    let estimates = inv * (hh * y);
    let mse = [
        (ch.noise_var * inv[(0, 0)].re).clamp(0.0, 1.0),
        (ch.noise_var * inv[(1, 1)].re).clamp(0.0, 1.0),
    ];
    Ok(MmseOutput { estimates, mse })
}
