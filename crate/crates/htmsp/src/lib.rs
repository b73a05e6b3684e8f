//! File formats, datasets, the benchmark harness and the `htmsp` command
//! line on top of [`htmsp_core`].

pub mod bench;
pub mod cli;
pub mod config;
pub mod error;
pub mod image_io;
pub mod store;

pub use error::{Error, Result};
pub use htmsp_core as core;
