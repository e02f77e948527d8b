//! Arbitrage detection, price deflators, pricing and hedging for markets with
//! finitely many outcomes per period.
//!
//! - [`cone_ftap`]: one-period markets. Project the prices onto the cone of
//!   payoffs, then either read off a deflator or an arbitrage position.
//! - [`one_period`]: pricing and least-squares hedging with a deflator,
//!   binomial replication, put-call parity and cost of carry.
//! - [`filtration`]: partitions of a finite sample space, simple functions and
//!   finitely additive measures on them.
//! - [`multi_period`]: price/cash-flow panels on a tree, self-financing
//!   strategies, deflator sequences built node by node, replication.
//! - [`rates`]: short-rate trees, zero-coupon bonds, forward rates, par
//!   coupons, swaps, futures and the Ho-Lee model.
//! - [`analytic_models`]: normal and lognormal option models, infinitely
//!   divisible laws and transform-based put pricing.
//! - [`cli`]: the `deflator` command-line tool.
//!
//! The `examples/` directory has one program per area, e.g.
//! `cargo run --example detect_arbitrage`.

// `!(a > b)` is used on purpose so that NaN inputs fail validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic_models;
pub mod cli;
pub mod cone_ftap;
pub mod error;
pub mod filtration;
mod linalg;
pub mod multi_period;
pub mod nnls;
pub mod numerics;
pub mod one_period;
pub mod rates;

pub use error::{Error, Result};
