//! Files, formats and the command line around `jointparse-core`.
//!
//! * [`formats`]: PTB and RST readers, joint-tree text, token and EDU files.
//! * [`convert`]: PTB + RST document pairs to joint trees.
//! * [`checkpoint`], [`config`], [`report`]: JSON artifacts.
//! * [`cli`]: the `jointparse` subcommands.

pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod convert;
pub mod formats;
pub mod report;
