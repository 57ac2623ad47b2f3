//! Intrinsically sparse multilayer perceptrons trained with sparse
//! evolutionary rewiring, optionally combined with scheduled pruning of
//! the least-connected hidden neurons.
//!
//! The crate is organised bottom-up:
//!
//! * [`sparse`] holds the bipartite layer storage (COO sparse and dense) and
//!   the forward, backward and SGD kernels.
//! * [`network`] assembles the two-hidden-layer MLP and its training loop.
//! * [`evolution`] implements per-epoch magnitude removal and random regrowth.
//! * [`pruning`] removes low-degree hidden neurons on a schedule.
//! * [`data`] loads CSV datasets, splits and standardizes them.
//! * [`harness`] runs whole experiments, exports metrics and checkpoints.

pub mod cli;
pub mod data;
pub mod error;
pub mod evolution;
pub mod harness;
pub mod network;
pub mod pruning;
pub mod rng;
pub mod sparse;

pub use error::{Error, Result};
