//! Entropy production of quantum Markov semigroups from two-point Choi states.

pub mod channels;
pub mod choi;
pub mod circulant;
pub mod cli;
pub mod epr;
pub mod error;
pub mod linalg;
pub mod random;
pub mod states;

pub use error::{Error, Result};
