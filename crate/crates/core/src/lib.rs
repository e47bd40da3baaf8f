pub mod error;
pub mod baselines;
pub mod cli;
pub mod extract;
pub mod harness;
pub mod logic;
pub mod mln;
pub mod psl;
pub mod semantics;
pub mod social;

pub use error::{Error, Result};
