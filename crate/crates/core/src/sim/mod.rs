//! Closed-loop simulation: vehicle, arena and camera.

pub mod course;
pub mod pattern;
pub mod render;
pub mod vehicle;

pub use course::{collision, gate_passed, Board, Bounds, Course, CourseError, GatePose};
pub use render::{render, BoardTruth, CameraModel, Frame, RenderOptions, SpotNoise};
pub use vehicle::{step_vehicle, VehicleParams, VehicleState};
