//! Additive representation functions, regular-variation diagnostics and
//! random sequence spaces.

pub mod conv;
pub mod error;
pub mod generate;
pub mod grid;
pub mod mainthm;
pub mod oracle;
pub mod par;
pub mod prob;
pub mod regvar;
pub mod repfn;
pub mod report;
pub mod rng;
pub mod schnirelmann;
pub mod selftest;
pub mod seq;

pub use error::{Error, Result};
pub use generate::{generate, GeneratorKind, GeneratorSpec};
pub use seq::Sequence;
