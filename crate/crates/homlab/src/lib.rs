//! Two-photon interference lab bench.
//!
//! Everything needed to stage the argument that a coincidence dip alone
//! does not certify quantum interference: classical pulse ensembles whose
//! phase statistics produce arbitrarily deep dips, a two-mode Fock engine
//! for the genuine two-photon state, and the shared correlation, fitting,
//! and bootstrap machinery that treats both on equal footing.

// Validation guards are written `!(x > 0.0)` on purpose: the negated
// form rejects NaN, which `x <= 0.0` would wave through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod correlator;
pub mod error;
pub mod experiments;
pub mod fit;
pub mod fock;
pub mod io;
pub mod math;
pub mod rng;
pub mod signals;
pub mod splitter;
pub mod stats;

pub use error::{Error, Result};
