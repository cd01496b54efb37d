//! Channel coding: tail-biting K = 7 convolutional code, puncturing,
//! interleaving and soft-input Viterbi decoding.

pub mod conv;
pub mod interleave;
pub mod puncture;
pub mod viterbi;

pub use conv::{cc_encode, CodeConfig};
pub use interleave::{deinterleave, interleave, Interleaver};
pub use puncture::{depuncture, puncture, SoftBlock};
pub use viterbi::{codeword_metric, exhaustive_decode, viterbi_decode, ViterbiDecoder};
