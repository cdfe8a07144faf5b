//! Batch front end for the stage-wise TV restoration library: grayscale
//! image I/O, trace CSVs and the `stagetv` command line.

pub mod app;
pub mod io;
pub mod trace;

pub use app::run;
