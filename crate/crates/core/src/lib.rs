//! Exact finite-ring phase calculus: rings, characters, free modules,
//! additive difference calculus, the phase/translation operator group and
//! the extraction engine built on top of them.

pub mod cache;
pub mod calculus;
pub mod chars;
pub mod engine;
pub mod error;
pub mod group;
pub mod module;
pub mod phase;
pub mod report;
pub mod ring;

pub use error::{Error, Result};
