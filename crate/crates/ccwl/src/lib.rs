//! Cellular Weisfeiler-Leman refinement on attributed cell complexes.

pub mod acc;
pub mod corpus;
pub mod error;
pub mod game;
pub mod logic;
pub mod oracles;
pub mod refine;
pub mod triad;

pub use error::{Error, Result};
