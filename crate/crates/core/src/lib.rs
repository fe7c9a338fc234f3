//! Link-level building blocks for the downlink of a single-user massive-MIMO
//! OFDM system whose per-antenna power amplifiers clip.
//!
//! The crate is `no_std` (it needs `alloc`) and free of IO. It covers the
//! whole signal chain:
//!
//! - [`numerics`]: unitary radix-2 FFT and seeded complex Gaussian streams
//! - [`modem`]: Gray-coded square QAM, OFDM (de)modulation, hard detection
//! - [`precoding`]: MRT and equal-magnitude phase-only precoders
//! - [`frontend`]: soft-limiter amplifier, IBO bookkeeping, Bussgang gains
//! - [`channel`]: LOS, two-path and IID Rayleigh MISO channels, AWGN, CSI errors
//! - [`link`]: the transmit chain shared by the simulator and the MCNC receiver
//! - [`receiver`]: ZF detection and the CNC / MCNC iterative receivers
//! - [`analysis`]: SNR, Eb/N0, SDR, BER and the operation-count model
//!
//! The harness, file formats and CLI live in the `mimo-cnc-sim` crate.

#![no_std]
#![deny(rust_2018_idioms)]
// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod channel;
mod error;
pub mod frontend;
mod grid;
pub mod link;
pub mod modem;
pub mod numerics;
pub mod precoding;
pub mod receiver;

pub use error::{Error, Result};
pub use grid::FrequencyGrid;
pub use num_complex::Complex64;

/// Complex baseband sample or symbol.
pub type C64 = Complex64;
