//! Contextual probability tools for EPRB (Bohm spin) experiments.
//!
//! The crate covers two worlds that are usually conflated:
//!
//! * empirical data tables where every run measures one setting per side and
//!   leaves the other two cells unknown ([`table`], [`dempster_shafer`]);
//! * the continuum description of a hidden variable on the circle, both in
//!   the single-space form ([`hv`]) and as a contextual local spin model
//!   ([`model`]) that reproduces the singlet statistics.
//!
//! [`chsh`] evaluates the CHSH functional for either semantics, and
//! [`simulate`] / [`analyze`] glue everything into a seeded Monte Carlo
//! pipeline used by the `eprb` binary.

pub mod analyze;
pub mod chsh;
pub mod dempster_shafer;
pub mod error;
pub mod hv;
pub mod model;
pub mod simulate;
pub mod table;

pub use error::{Error, Result};
