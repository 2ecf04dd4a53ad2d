//! Zak-OTFS link-level simulation.
//!
//! The crate models one Zak-OTFS frame end to end: information symbols on the
//! delay-Doppler (DD) information lattice, pulse shaping, a doubly-spread
//! multipath channel, model-free acquisition of the effective channel from a
//! single pilot, MMSE equalization, and a rate-1/2 quasi-cyclic LDPC code
//! whose information and parity symbols can be steered onto the more or less
//! reliable DD bins. A multicarrier OTFS modem is included for comparison.
//!
//! Module map:
//!
//! - [`lattice`]: frame geometry shared by everything else.
//! - [`dd`]: quasi-periodic DD signals, sparse tap sets, discrete twisted
//!   convolution and vectorization.
//! - [`zak`]: discrete Zak transform and its inverse.
//! - [`filters`]: sinc and root-raised-cosine DD pulse shaping filters.
//! - [`channel`]: Veh-A channel draws, effective channel computation, the
//!   time-domain simulation path and AWGN.
//! - [`acquisition`]: pilot read-off, channel matrix construction, relative
//!   prediction error maps.
//! - [`equalizer`]: MMSE equalization and 4-QAM soft demapping.
//! - [`ldpc`]: code construction, systematic encoding, layered BP decoding,
//!   alist interchange.
//! - [`allocation`]: standard, strip and RPE symbol placement.
//! - [`mcotfs`]: multicarrier OTFS modem.
//! - [`harness`]: experiment configuration, Monte Carlo engine, CSV output.

pub mod acquisition;
pub mod allocation;
pub mod channel;
pub mod dd;
pub mod equalizer;
pub mod error;
pub mod filters;
pub mod harness;
pub mod lattice;
pub mod ldpc;
pub mod mcotfs;
pub mod zak;

pub use error::{Error, Result};
pub use lattice::LatticeParams;

/// Complex sample type used throughout the crate.
pub type Complex = num_complex::Complex<f64>;
