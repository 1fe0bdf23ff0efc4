//! Security analysis for sharding-based proof-of-stake blockchains running
//! pBFT committees.
//!
//! The crate computes the probability that a faulty block gets committed
//! through a shard committee, a two-thirds majority of all shard committees
//! and the beacon committee, and turns it into an expected years-to-fail
//! figure. Three independent engines are provided:
//!
//! * [`analytic`]: log-domain closed forms, usable at any scale.
//! * [`oracle`]: exact rationals over arbitrary-precision integers, plus
//!   exhaustive committee enumeration for tiny instances.
//! * [`sim`]: a seeded, deterministic Monte Carlo simulation of the
//!   epoch-by-epoch committee shuffle.
//!
//! With the default `parallel` feature, Monte Carlo batches and committee
//! enumeration are spread over a rayon pool. Without it every executor runs
//! sequentially and produces the same results bit for bit.

pub mod analytic;
pub mod error;
pub mod oracle;
pub mod params;
pub mod sim;

pub use analytic::{LogProb, Mode, SecurityReport};
pub use error::Error;
pub use params::{NetworkConfig, Pool};
