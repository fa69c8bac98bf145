//! Slalom-marker decoding.
//!
//! A slalom board reuses the double outline of the gate marker. Its interior
//! holds one large anchor disk on the side of the commanded turn and `k`
//! small disks on the other side; the turn angle is `k * 15` degrees.
//!
//! Decoding runs background elimination like the gate pipeline, but also
//! keeps the white interior left over after the second-to-last round. Its
//! bounding-box height gives the range through the pinhole relation and its
//! box says which disks belong to which board.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::background::eliminate_background_traced;
use super::{denoise, DetectError, PipelineConfig, StageClock, StageTimings, TrackerState};
use crate::ppa::{components, threshold, BoundingBox, Component, GreyImage, PixelCoord};
use crate::sim::pattern::{TurnDirection, SLALOM_DEGREES_PER_DISK, SLALOM_MAX_DISKS};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlalomCommand {
    pub direction: TurnDirection,
    /// Turn angle in degrees.
    pub angle_deg: f64,
    /// Estimated distance to the board in metres.
    pub range_m: f64,
}

/// A board interior seen in the frame, decoded or not.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlalomSighting {
    /// Bounding box of the white interior.
    pub interior: BoundingBox,
    pub range_m: f64,
    /// `None` when the disks inside do not spell a valid command.
    pub command: Option<SlalomCommand>,
}

impl SlalomSighting {
    pub fn centre(&self) -> PixelCoord {
        self.interior.centre
    }
}

/// Every plausible board interior in the frame, nearest first.
pub fn slalom_sightings(frame: &GreyImage, cfg: &PipelineConfig) -> Vec<SlalomSighting> {
    slalom_sightings_timed(frame, cfg, &mut super::NoClock).0
}

/// [`slalom_sightings`] with per-stage timings.
pub fn slalom_sightings_timed(
    frame: &GreyImage,
    cfg: &PipelineConfig,
    clock: &mut impl StageClock,
) -> (Vec<SlalomSighting>, StageTimings) {
    let t0 = clock.now_ns();
    let bin = threshold(frame, cfg.threshold_level);
    let t1 = clock.now_ns();
    let steps = cfg.flood_steps.max(2);
    let mut interiors = None;
    let disks = eliminate_background_traced(&bin, steps, |round, remaining, _| {
        if round + 1 == steps {
            interiors = Some(remaining.clone());
        }
    });
    let t2 = clock.now_ns();
    let disks = denoise(&disks, cfg.slalom.p_step);
    let t3 = clock.now_ns();

    let blobs: Vec<Component> = components(&disks).into_iter().filter(|c| c.area >= cfg.min_disk_area).collect();
    let mut out: Vec<SlalomSighting> = components(&interiors.expect("at least two rounds"))
        .iter()
        .filter(|c| plausible_interior(c))
        .map(|c| {
            let range_m = cfg.slalom.focal_px * cfg.slalom.interior_m / f64::from(c.bbox.height());
            let inside: Vec<&Component> = blobs.iter().filter(|b| c.bbox.contains(b.bbox.centre)).collect();
            SlalomSighting { interior: c.bbox, range_m, command: decode_disks(&inside, range_m, cfg) }
        })
        .collect();
    out.sort_by(|a, b| b.interior.height().cmp(&a.interior.height()).then(a.interior.min.cmp(&b.interior.min)));
    let t4 = clock.now_ns();
    let timings = StageTimings { threshold_ns: t1 - t0, flooding_ns: t2 - t1, denoise_ns: t3 - t2, centroid_ns: t4 - t3 };
    (out, timings)
}

fn plausible_interior(c: &Component) -> bool {
    let (h, w) = (c.bbox.height(), c.bbox.width());
    let on_edge = c.bbox.min.row == 0 || c.bbox.min.col == 0 || c.bbox.max.row == 255 || c.bbox.max.col == 255;
    // yaw narrows the board, so only the width may shrink much
    !on_edge && h >= 6 && w * 4 >= h && w <= h * 3 / 2 + 2 && c.area * 2 >= h * w
}

fn decode_disks(inside: &[&Component], range_m: f64, cfg: &PipelineConfig) -> Option<SlalomCommand> {
    if inside.len() < 2 {
        return None;
    }
    let mut sorted = inside.to_vec();
    sorted.sort_by(|a, b| b.area.cmp(&a.area).then(a.first.cmp(&b.first)));
    let anchor = sorted[0];
    let biggest_small = sorted[1].area;
    if f64::from(anchor.area) < cfg.slalom.anchor_ratio * f64::from(biggest_small) {
        return None;
    }
    // residue of a partly eroded disk is far smaller than a real small disk
    let smalls: Vec<&Component> = sorted[1..].iter().copied().filter(|b| b.area * 10 >= biggest_small * 3).collect();
    let k = smalls.len();
    if k == 0 || k > usize::from(SLALOM_MAX_DISKS) {
        return None;
    }
    let small_col = smalls.iter().map(|b| f64::from(b.bbox.centre.col)).sum::<f64>() / k as f64;
    let direction = if f64::from(anchor.bbox.centre.col) < small_col { TurnDirection::Left } else { TurnDirection::Right };
    Some(SlalomCommand { direction, angle_deg: k as f64 * SLALOM_DEGREES_PER_DISK, range_m })
}

/// Nearest decodable slalom command in the frame.
pub fn decode_slalom(
    frame: &GreyImage,
    cfg: &PipelineConfig,
    tracker: &mut TrackerState,
) -> Result<SlalomCommand, DetectError> {
    tracker.next_frame_id += 1;
    let found = slalom_sightings(frame, cfg).into_iter().find_map(|s| s.command.map(|c| (s.centre(), c)));
    match found {
        Some((centre, cmd)) => {
            tracker.locked(&[centre]);
            Ok(cmd)
        }
        None => {
            tracker.missed(cfg.loss_patience);
            Err(DetectError::NoTarget)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::pattern::{draw_front, InkLevels, PatternLayout};

    fn board(layout: PatternLayout, range: f64) -> GreyImage {
        let mut img = GreyImage::filled(170);
        draw_front(&mut img, &layout, (127.5, 127.5), 220.0 / range, InkLevels::default());
        img
    }

    #[test]
    fn decodes_direction_count_and_range() {
        let cfg = PipelineConfig::default();
        for dir in [TurnDirection::Left, TurnDirection::Right] {
            for k in 1..=SLALOM_MAX_DISKS {
                for range in [1.0, 2.0, 3.0] {
                    let mut t = TrackerState::default();
                    let cmd = decode_slalom(&board(PatternLayout::slalom(dir, k), range), &cfg, &mut t).unwrap();
                    assert_eq!(cmd.direction, dir, "k={k} range={range}");
                    assert_eq!(cmd.angle_deg, f64::from(k) * 15.0, "{dir:?} range={range}");
                    assert!((cmd.range_m - range).abs() <= 0.1 * range, "{cmd:?} at {range}");
                }
            }
        }
    }

    #[test]
    fn gate_board_is_not_a_command() {
        let mut t = TrackerState::default();
        let r = decode_slalom(&board(PatternLayout::gate(), 1.0), &PipelineConfig::default(), &mut t);
        assert_eq!(r, Err(DetectError::NoTarget));
    }
}
