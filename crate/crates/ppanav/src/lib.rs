//! Closed-loop harness around the vision-chip emulator: simulated runs,
//! calibration, corpus detection, benchmarks and plots.

pub mod bench;
pub mod config;
pub mod detect;
pub mod harness;
pub mod plot;
pub mod pnm;
pub mod trajectory;
