//! On-sensor gate-marker extraction.
//!
//! The gate marker is four black disks inside two concentric black square
//! outlines. Each round of [`eliminate_background`] floods from the frame
//! border and strips one nesting level, so after enough rounds only the
//! disks remain. [`denoise`] then erodes with a four-direction shift-AND and
//! [`extract_centroids`] peels the disks off one at a time.
//!
//! When the outlines are broken (occlusion, partly out of view) the
//! elimination leaves nothing; [`DiskDetector`] then floods the inverted
//! frame from last frame's disk centres instead.

mod background;
mod centroid;
mod denoise;
mod detect;
mod slalom;

pub use background::{eliminate_background, eliminate_background_traced};
pub use centroid::{extract_centroids, Underflow};
pub use denoise::denoise;
pub use detect::{detect_disks, DiskDetector, NoClock, StageClock, StageTimings};
pub use slalom::{decode_slalom, slalom_sightings, slalom_sightings_timed, SlalomCommand, SlalomSighting};

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ppa::PixelCoord;

/// Tunables of the detection pipeline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// Grey level at or above which a pixel is white.
    pub threshold_level: u8,
    /// Flood-and-strip rounds of background elimination.
    pub flood_steps: usize,
    /// Number of disks on the marker.
    pub disc_num: usize,
    /// Shift distance of the denoise filter.
    pub p_step: usize,
    /// Blobs smaller than this (pixels) after denoising are ignored.
    pub min_disk_area: u32,
    /// Frames a lost target keeps its last known points.
    pub loss_patience: u32,
    pub slalom: SlalomDecoderConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            threshold_level: 128,
            flood_steps: 4,
            disc_num: 4,
            p_step: 2,
            min_disk_area: 4,
            loss_patience: 10,
            slalom: SlalomDecoderConfig::default(),
        }
    }
}

/// Slalom-marker decoding parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SlalomDecoderConfig {
    /// Focal length of the camera in pixels, for range estimation.
    pub focal_px: f64,
    /// Physical side of the marker's white interior in metres.
    pub interior_m: f64,
    /// Denoise shift used on the disk plane; the small disks are thin.
    pub p_step: usize,
    /// The anchor must be at least this many times larger than any small disk.
    pub anchor_ratio: f64,
}

impl Default for SlalomDecoderConfig {
    fn default() -> Self {
        Self { focal_px: 220.0, interior_m: 0.432, p_step: 1, anchor_ratio: 2.0 }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("flood_steps must be at least 1")]
    FloodSteps,
    #[error("disc_num must be at least 1")]
    DiscNum,
    #[error("p_step must be at least 1")]
    PStep,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.flood_steps < 1 {
            return Err(ConfigError::FloodSteps);
        }
        if self.disc_num < 1 {
            return Err(ConfigError::DiscNum);
        }
        if self.p_step < 1 || self.slalom.p_step < 1 {
            return Err(ConfigError::PStep);
        }
        Ok(())
    }
}

/// Where the disk centres of a frame came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectionMode {
    /// Background elimination isolated exactly `disc_num` disks.
    Direct,
    /// Disks re-found by flooding from the previous frame's centres.
    Fallback,
}

/// Disk centres found in one frame.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkerObservation {
    /// Quadrant order (top-left, top-right, bottom-left, bottom-right) when
    /// there are four disks, row-major order otherwise.
    pub points: Vec<PixelCoord>,
    /// Per-axis floor of the mean of `points`.
    pub centroid: PixelCoord,
    pub mode: DetectionMode,
    pub frame_id: u64,
}

/// Memory carried between frames of one camera stream.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TrackerState {
    pub previous_points: Option<Vec<PixelCoord>>,
    pub frames_since_lock: u32,
    /// Id given to the next frame processed with this state.
    pub next_frame_id: u64,
}

impl TrackerState {
    pub fn locked(&mut self, points: &[PixelCoord]) {
        self.previous_points = Some(points.to_vec());
        self.frames_since_lock = 0;
    }

    /// Records a frame without a target; forgets the points once
    /// `patience` frames have been missed.
    pub fn missed(&mut self, patience: u32) {
        self.frames_since_lock = self.frames_since_lock.saturating_add(1);
        if self.frames_since_lock > patience {
            self.previous_points = None;
        }
    }
}

#[derive(Clone, Copy, Debug, Error, PartialEq, Eq)]
pub enum DetectError {
    #[error("no target in this frame")]
    NoTarget,
    #[error("disk centres do not form a quadrangle around their centroid")]
    DegenerateQuadrangle,
}

pub(crate) fn mean_floor(points: &[PixelCoord]) -> PixelCoord {
    let n = points.len().max(1) as u32;
    let r: u32 = points.iter().map(|p| u32::from(p.row)).sum();
    let c: u32 = points.iter().map(|p| u32::from(p.col)).sum();
    PixelCoord::new((r / n) as u8, (c / n) as u8)
}
