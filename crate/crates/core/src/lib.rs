//! Cellular automata whose mu-limit set is the closure of a union of
//! generable subshifts, with the exact and Monte-Carlo machinery needed to
//! check their density behaviour on finite cyclic windows.

pub mod analyzer;
pub mod construction;
pub mod engine;
pub mod error;
pub mod generators;
pub mod symbolic;

pub use error::{Error, Result};
