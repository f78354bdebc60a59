//! Synthetic patient encounters: declarative patient profiles driven through
//! a transcribe → dialogue → speech → lip-sync pipeline, one turn at a time.

pub mod digest;
pub mod persona;
pub mod assets;
pub mod providers;
pub mod pipeline;
pub mod session;
pub mod gateway;
pub mod cli;
