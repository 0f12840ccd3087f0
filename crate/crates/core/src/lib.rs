//! Solvers and numerical oracles for the signaling game between a central
//! bank and `N` strategic systemic investors.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is pure and
//! deterministic; file formats, the command line and parallel drivers live in
//! the `cbgame` crate.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod banker;
pub mod cheap_talk;
pub mod error;
pub mod model;
pub mod montecarlo;
pub mod optimize;
pub mod oracle;
pub mod repeated;
pub mod static_game;
pub mod welfare;

pub use error::{Error, Result};
pub use model::{BankerWeight, GameParams, MarketState, ShockPair};
