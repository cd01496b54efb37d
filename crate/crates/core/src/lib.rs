//! Link-level simulator for an OFDMA downlink with SISO, Alamouti STBC and
//! spatial multiplexing transmission.

pub mod bitsource;
pub mod channel;
pub mod error;
pub mod fec;
pub mod harness;
pub mod mapping;
pub mod metrics;
pub mod mimo;
pub mod ofdm;
pub mod params;
pub mod selftest;

pub use error::{Error, Result};
