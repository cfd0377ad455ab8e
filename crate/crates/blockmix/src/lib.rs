//! File formats, parallel drivers and the `blockmix` command line on top of
//! [`blockmix_core`].

pub mod cli;
pub mod config;
pub mod edgelist;
mod error;
pub mod formats;
pub mod io;
pub mod manifest;
pub mod parallel;

pub use error::{exit, Error, Result};
