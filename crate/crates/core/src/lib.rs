pub mod cli;
pub mod config;
pub mod dielectric;
pub mod eigen3;
pub mod error;
pub mod fabry_perot;
pub mod fitting;
pub mod io;
pub mod peaks;
pub mod polariton;
pub mod pump_probe;
pub mod quantum;
pub mod spectrum;
pub mod transfer_matrix;

pub use error::{Error, Result};
