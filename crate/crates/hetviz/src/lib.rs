//! File formats, the command-line tool and the HTTP service around
//! `hetviz-core`.

pub mod api;
pub mod cli;
pub mod csvio;
pub mod dsfile;
pub mod engine;
pub mod error;
pub mod schemefile;
pub mod session;

pub use error::{HetvizError, Result};
