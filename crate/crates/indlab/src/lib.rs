//! File formats, reports and the `indlab` command line on top of
//! [`indlab_core`].

#![forbid(unsafe_code)]

pub mod bellio;
pub mod cli;
pub mod data;
pub mod entropy;
pub mod error;
pub mod hvfile;
pub mod manifest;
pub mod matrix;
pub mod rays;
pub mod report;
pub mod seqfile;

pub use error::{Error, Result};
