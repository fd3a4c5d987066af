pub mod cli;
pub mod comparison;
pub mod equilibria;
pub mod error;
pub mod evolution;
pub mod io;
pub mod pullback;
pub mod regions;
pub mod spatial;

pub use error::{Error, Result};
