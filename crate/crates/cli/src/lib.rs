//! Configuration, presets, drivers and file formats of the `bne` command.

pub mod cache;
pub mod config;
pub mod output;
pub mod presets;
pub mod run;
