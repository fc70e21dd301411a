//! Read-threshold design workbench for MLC NAND flash.
//!
//! The crate models the flash threshold-voltage channel, trains a small
//! stacked GRU detector on labeled readback voltages, derives hard and soft
//! read thresholds from the detector's decisions by dynamic programming, and
//! evaluates uncoded and LDPC-coded error rates against full-knowledge
//! baselines.
//!
//! Module map:
//! - [`channel`]: voltage channel, state moments, page sampling.
//! - [`detector`]: GRU detector, training and inference.
//! - [`thresholds`]: count tables, DP threshold search, optimum-SEP baseline.
//! - [`soft`]: soft boundaries, integer reliabilities, exact LLRs, MI and MMI.
//! - [`ldpc`]: PEG construction, GF(2) encoder, normalized min-sum decoder.
//! - [`dde`]: discrete density evolution and differential-evolution width search.
//! - [`harness`]: experiment specs, sweeps and CSV output.

pub mod channel;
pub mod dde;
pub mod detector;
pub mod error;
pub mod harness;
pub mod ldpc;
pub mod math;
pub mod rng;
pub mod soft;
pub mod thresholds;

pub use channel::{ChannelParams, StateMoments, SymbolPage, VoltagePage};
pub use error::{Error, Result};
