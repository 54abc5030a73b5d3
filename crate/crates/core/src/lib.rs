pub mod cli;
pub mod compound;
pub mod error;
pub mod matcore;
pub mod problems;
pub mod projections;
pub mod solver;

pub use error::{Error, Result};
pub use matcore::Matrix;
