//! Construction and verification toolkit for S-machines and the groups they present.

pub mod cli;
pub mod embedding;
pub mod groups;
pub mod machines;
pub mod params;
pub mod smachine;
pub mod words;
