//! Link-level simulation of finite-length polar codes under belief-propagation
//! decoding in an IDMA-style multi-user receiver for the Gaussian multiple
//! access channel.
//!
//! The crate is organised bottom-up:
//!
//! - [`polar`]: code construction, encoding, CRC and the repetition-equivalent
//!   code.
//! - [`bp`]: iterative BP decoding on the polar factor graph, multi-trellis
//!   schedules and stopping criteria.
//! - [`user`]: per-user transmit/receive chain (repetition, interleaving,
//!   BPSK, phase scrambling, soft demapping).
//! - [`channel`]: superposition of users plus complex AWGN.
//! - [`receiver`]: soft interference cancellation loop around the per-user
//!   BP decoders.
//! - [`sim`]: Monte Carlo sweeps, CSV output, frozen channel charts and the
//!   equivalence checker.
//!
//! Bits are `u8` values restricted to `0` and `1`. LLRs follow the convention
//! `L = ln p(0) / p(1)` and BPSK maps bit 0 to `+1`.

pub mod bp;
pub mod channel;
mod error;
pub mod polar;
pub mod receiver;
pub mod sim;
pub mod user;

pub use error::{Error, Result};

/// A hard bit, always `0` or `1`.
pub type Bit = u8;
