//! Software emulation of a 256×256 pixel processor array together with the
//! on-sensor gate-marker pipeline, the dual-PID reactive steering law and a
//! small closed-loop world (car-like rover, pinhole camera, gate courses).
//!
//! The crate is `no_std` and only needs `alloc`. Anything that touches the
//! file system, the wall clock or the command line lives in the `ppanav`
//! companion crate.
//!
//! Module map:
//!
//! * [`ppa`]: binary and grey image registers with whole-plane operations
//!   (threshold, logic, shifts, flooding, scans, component counting).
//! * [`marker`]: background elimination by iterated flooding, cross-erosion
//!   denoising, centroid extraction, fallback point tracking and the slalom
//!   marker decoder.
//! * [`guidance`]: quadrant correspondence, error terms, PID steering,
//!   target-loss policy and the slalom turn scheduler.
//! * [`sim`]: kinematic bicycle vehicle, courses, renderer and pass/collision
//!   tests.
#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod guidance;
pub mod marker;
pub mod ppa;
pub mod sim;

mod math;
