//! File formats, archives, sample content, the terminal player, the command
//! line and the HTTP service, on top of `warehouse-core`.

pub mod archive;
pub mod cli;
pub mod generate;
pub mod play;
pub mod render;
pub mod samples;
pub mod service;
