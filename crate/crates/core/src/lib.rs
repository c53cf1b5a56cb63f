//! Core of the tabular GAN synthesizer.
//!
//! Everything here is `no_std` with `alloc`: dense float64 kernels and the
//! two-layer MLP, typed tables and their preparation pipelines, the
//! normalization/one-hot codec, the GAN engine with its train-with-generation
//! scheduler, and the fidelity metrics. File formats, CSV, and the command
//! line live in the `tabgen` crate.

#![no_std]
// `!(x > 0.0)` is the intended NaN-rejecting form
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod codec;
mod error;
pub mod gan;
pub mod kernel;
pub mod metrics;
pub mod prep;
pub mod table;

pub use error::{Error, Result};
