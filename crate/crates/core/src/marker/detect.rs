use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::background::eliminate_in_place;
use super::centroid::extract_in_place;
use super::denoise::denoise_into;
use super::{mean_floor, DetectError, DetectionMode, MarkerObservation, PipelineConfig, TrackerState};
use crate::guidance::order_by_quadrant;
use crate::ppa::{components, flood_into, scan_boundingbox, GreyImage, PixelCoord, RegisterFile, RegisterUsage, SeedSpec};

/// Monotonic time source for per-stage timings.
pub trait StageClock {
    fn now_ns(&mut self) -> u64;
}

/// Clock that always reads zero; timings come out as zeros.
#[derive(Clone, Copy, Debug, Default)]
pub struct NoClock;

impl StageClock for NoClock {
    fn now_ns(&mut self) -> u64 {
        0
    }
}

/// Wall time spent in each stage of the last frame.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageTimings {
    pub threshold_ns: u64,
    /// Background elimination.
    pub flooding_ns: u64,
    pub denoise_ns: u64,
    /// Counting, centroid extraction and the fallback search.
    pub centroid_ns: u64,
}

impl StageTimings {
    pub fn total_ns(&self) -> u64 {
        self.threshold_ns + self.flooding_ns + self.denoise_ns + self.centroid_ns
    }
}

// Register map. One analogue plane holds the frame; the digital planes are
// the thresholded frame, the elimination work plane and its flood scratch,
// the disk plane, a shift scratch, a blob plane and the fallback mask.
const A_FRAME: usize = 0;
const D_BIN: usize = 0;
const D_WORK: usize = 1;
const D_FLOOD: usize = 2;
const D_DISKS: usize = 3;
const D_TMP: usize = 4;
const D_BLOB: usize = 5;
const D_MASK: usize = 6;

/// Gate-marker detector for one camera stream.
pub struct DiskDetector<C = NoClock> {
    pub cfg: PipelineConfig,
    pub tracker: TrackerState,
    regs: RegisterFile,
    clock: C,
    timings: StageTimings,
}

impl DiskDetector<NoClock> {
    pub fn new(cfg: PipelineConfig) -> Self {
        Self::with_clock(cfg, NoClock)
    }
}

impl<C: StageClock> DiskDetector<C> {
    pub fn with_clock(cfg: PipelineConfig, clock: C) -> Self {
        Self { cfg, tracker: TrackerState::default(), regs: RegisterFile::new(), clock, timings: StageTimings::default() }
    }

    /// Stage timings of the most recent [`DiskDetector::detect`] call.
    pub fn timings(&self) -> StageTimings {
        self.timings
    }

    /// Registers written during the most recent call.
    pub fn register_usage(&self) -> RegisterUsage {
        self.regs.usage()
    }

    pub fn clock_mut(&mut self) -> &mut C {
        &mut self.clock
    }

    /// Runs the pipeline on one frame and updates the tracker.
    pub fn detect(&mut self, frame: &GreyImage) -> Result<MarkerObservation, DetectError> {
        let id = self.tracker.next_frame_id;
        self.tracker.next_frame_id += 1;
        self.regs.reset_usage();
        self.timings = StageTimings::default();
        let out = self.run(frame, id);
        match &out {
            Ok(obs) => self.tracker.locked(&obs.points),
            Err(_) => self.tracker.missed(self.cfg.loss_patience),
        }
        out
    }

    fn run(&mut self, frame: &GreyImage, id: u64) -> Result<MarkerObservation, DetectError> {
        let cfg = &self.cfg;
        let t0 = self.clock.now_ns();
        self.regs.a_load(A_FRAME, frame);
        self.regs.threshold(D_BIN, A_FRAME, cfg.threshold_level);
        let t1 = self.clock.now_ns();
        {
            let [bin, work, flooded] = self.regs.d_many([D_BIN, D_WORK, D_FLOOD]);
            work.copy_from(bin);
            eliminate_in_place(work, flooded, cfg.flood_steps, |_, _, _| {});
        }
        let t2 = self.clock.now_ns();
        {
            let [work, disks, tmp] = self.regs.d_many([D_WORK, D_DISKS, D_TMP]);
            denoise_into(work, cfg.p_step, disks, tmp);
        }
        let t3 = self.clock.now_ns();

        let comps = components(self.regs.d(D_DISKS));
        let big = comps.iter().filter(|c| c.area >= cfg.min_disk_area).count();
        let out = if big == cfg.disc_num {
            let [disks, blob] = self.regs.d_many([D_DISKS, D_BLOB]);
            for c in comps.iter().filter(|c| c.area < cfg.min_disk_area) {
                flood_into(disks, &SeedSpec::point(c.first), blob);
                disks.and_not_assign(blob);
            }
            let pts = extract_in_place(disks, blob, cfg.disc_num).map_err(|_| DetectError::NoTarget)?;
            finish(pts, DetectionMode::Direct, id)
        } else if let Some(prev) = self.tracker.previous_points.clone() {
            self.fallback(&prev).and_then(|pts| finish(pts, DetectionMode::Fallback, id))
        } else {
            Err(DetectError::NoTarget)
        };
        let t4 = self.clock.now_ns();
        self.timings = StageTimings {
            threshold_ns: t1 - t0,
            flooding_ns: t2 - t1,
            denoise_ns: t3 - t2,
            centroid_ns: t4 - t3,
        };
        out
    }

    /// Re-finds each disk by flooding the dark regions of the frame from
    /// where it was last seen.
    fn fallback(&mut self, prev: &[PixelCoord]) -> Result<Vec<PixelCoord>, DetectError> {
        let cfg = &self.cfg;
        {
            let [bin, work, mask, tmp] = self.regs.d_many([D_BIN, D_WORK, D_MASK, D_TMP]);
            work.copy_from(bin);
            work.invert();
            // erode the dark plane so disks come loose from nearby outlines
            denoise_into(work, cfg.p_step, mask, tmp);
        }
        let mut pts = Vec::with_capacity(prev.len());
        for (i, &q) in prev.iter().enumerate() {
            let [mask, blob] = self.regs.d_many([D_MASK, D_BLOB]);
            if !mask.at(q) {
                return Err(DetectError::NoTarget);
            }
            flood_into(mask, &SeedSpec::point(q), blob);
            let bbox = scan_boundingbox(blob).ok_or(DetectError::NoTarget)?;
            let swallows_other = prev.iter().enumerate().any(|(j, &o)| j != i && bbox.contains(o));
            if swallows_other || blob.count_ones() < cfg.min_disk_area {
                return Err(DetectError::NoTarget);
            }
            pts.push(bbox.centre);
            *mask ^= &*blob;
        }
        Ok(pts)
    }
}

fn finish(mut pts: Vec<PixelCoord>, mode: DetectionMode, frame_id: u64) -> Result<MarkerObservation, DetectError> {
    if let Ok(four) = <[PixelCoord; 4]>::try_from(pts.as_slice()) {
        let q = order_by_quadrant(&four).map_err(|_| DetectError::DegenerateQuadrangle)?;
        pts.copy_from_slice(&q.points);
    } else {
        pts.sort_unstable();
    }
    let centroid = mean_floor(&pts);
    Ok(MarkerObservation { points: pts, centroid, mode, frame_id })
}

/// One-shot detection with caller-held tracker state.
pub fn detect_disks(
    frame: &GreyImage,
    cfg: &PipelineConfig,
    tracker: &mut TrackerState,
) -> Result<MarkerObservation, DetectError> {
    let mut det = DiskDetector::new(cfg.clone());
    det.tracker = core::mem::take(tracker);
    let out = det.detect(frame);
    *tracker = det.tracker;
    out
}
