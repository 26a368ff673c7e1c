pub mod error;
pub mod grid;
pub mod kernel;
pub mod par;
pub mod spectral;
pub mod solver;
pub mod peakon;
pub mod characteristics;
pub mod diagnostics;
pub mod initial;
pub mod config;
pub mod scenario;
