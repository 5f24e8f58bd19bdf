//! File formats, verification campaigns and sweeps behind the `moi` binary.

pub mod campaign;
pub mod cli;
pub mod json;
pub mod sweep;
