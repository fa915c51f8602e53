pub mod ansatz;
pub mod cli;
pub mod drivers;
pub mod error;
pub mod numerics;
pub mod objectives;
pub mod optical;
pub mod optimizer;
pub mod simulator;
pub mod swaptest;

pub use error::{Error, Result};
