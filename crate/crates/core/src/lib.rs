pub mod circuit;
pub mod config;
pub mod cost;
pub mod cutter;
pub mod epr;
pub mod error;
pub mod par;
pub mod pipeline;
pub mod reconstruct;
pub mod scheduler;
pub mod sim;

pub use error::{Error, Result, Stage};
