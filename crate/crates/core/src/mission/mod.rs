//! Measurement files, frames, synthetic missions and result export.

pub mod frame;
pub mod io;
pub mod path;
pub mod synth;
pub mod export;
