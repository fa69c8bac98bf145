//! Pinhole ray casting of the arena's boards into a 256x256 grey frame.

use alloc::vec::Vec;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::course::{Board, Course};
use super::pattern::{Ink, InkLevels};
use super::vehicle::VehicleState;
use crate::math;
use crate::ppa::{GreyImage, SIZE};

/// Forward-looking pinhole camera fixed to the vehicle, optical axis level
/// and along the heading.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CameraModel {
    pub focal_px: f64,
    /// Distance of the optical centre ahead of the rear axle.
    pub mount_offset: f64,
    /// Height of the optical centre above the floor.
    pub height: f64,
}

impl Default for CameraModel {
    fn default() -> Self {
        Self { focal_px: 220.0, mount_offset: 0.25, height: super::course::DEFAULT_MOUNT_HEIGHT }
    }
}

/// Image coordinate of the optical axis, for both rows and columns.
pub const PRINCIPAL: f64 = (SIZE as f64 - 1.0) / 2.0;

/// Camera placement for one vehicle state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CameraPose {
    pub origin: [f64; 3],
    pub forward: [f64; 2],
    pub right: [f64; 2],
}

impl CameraModel {
    pub fn pose(&self, v: &VehicleState) -> CameraPose {
        let f = v.forward();
        CameraPose {
            origin: [v.x + self.mount_offset * f[0], v.y + self.mount_offset * f[1], self.height],
            forward: f,
            right: [f[1], -f[0]],
        }
    }

    /// Continuous `(row, col)` of a world point, `None` when it is not in
    /// front of the camera.
    pub fn project(&self, v: &VehicleState, p: [f64; 3]) -> Option<(f64, f64)> {
        let pose = self.pose(v);
        let d = [p[0] - pose.origin[0], p[1] - pose.origin[1], p[2] - pose.origin[2]];
        let depth = d[0] * pose.forward[0] + d[1] * pose.forward[1];
        if depth <= 1e-6 {
            return None;
        }
        let x = d[0] * pose.right[0] + d[1] * pose.right[1];
        Some((PRINCIPAL - self.focal_px * d[2] / depth, PRINCIPAL + self.focal_px * x / depth))
    }
}

/// Overexposed elliptical blotches.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpotNoise {
    pub count: u32,
    pub radius_min: f64,
    pub radius_max: f64,
    pub level: u8,
}

impl Default for SpotNoise {
    fn default() -> Self {
        Self { count: 0, radius_min: 1.0, radius_max: 4.0, level: 250 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderOptions {
    pub background: u8,
    pub ink: InkLevels,
    /// Level of the unprinted back of a board.
    pub board_back: u8,
    pub spots: SpotNoise,
    /// Standard deviation of additive per-pixel noise, grey levels.
    pub sigma: f64,
    pub seed: u64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self { background: 170, ink: InkLevels::default(), board_back: 200, spots: SpotNoise::default(), sigma: 0.0, seed: 0 }
    }
}

/// Ground truth for one board that put pixels into the frame.
#[derive(Clone, Debug, PartialEq)]
pub struct BoardTruth {
    /// Index into [`Course::boards`].
    pub board: usize,
    /// Pinhole projection of each disk centre.
    pub projected: Vec<Option<(f64, f64)>>,
    /// Mean `(row, col)` of the pixels painted for each disk.
    pub pixel_centroid: Vec<Option<(f64, f64)>>,
    pub pixel_count: Vec<u32>,
}

#[derive(Clone, Debug)]
pub struct Frame {
    pub image: GreyImage,
    /// Visible boards, in [`Course::boards`] order.
    pub truth: Vec<BoardTruth>,
}

/// Renders the view from `vehicle`. Boards nearer along a ray hide those
/// behind; floor and walls are a uniform background.
pub fn render(course: &Course, vehicle: &VehicleState, camera: &CameraModel, opts: &RenderOptions, rng: &mut impl Rng) -> Frame {
    let boards: Vec<Board> = course.boards().collect();
    let pose = camera.pose(vehicle);
    let mut img = GreyImage::filled(opts.background);
    let mut depth = alloc::vec![f64::INFINITY; SIZE * SIZE];
    // 0 = no disk, else board * 8 + disk + 1
    let mut owner = alloc::vec![0u16; SIZE * SIZE];
    let f = camera.focal_px;

    for (bi, board) in boards.iter().enumerate() {
        let Some((r0, r1, c0, c1)) = screen_box(camera, vehicle, board) else { continue };
        let n = board.facing_vec();
        let rb = board.right_vec();
        let rel = [board.centre[0] - pose.origin[0], board.centre[1] - pose.origin[1]];
        let num = rel[0] * n[0] + rel[1] * n[1];
        let disks = board.layout.disks();
        let half = board.layout.half();
        for r in r0..=r1 {
            let up = -(r as f64 - PRINCIPAL) / f;
            for c in c0..=c1 {
                let side = (c as f64 - PRINCIPAL) / f;
                let d = [pose.forward[0] + side * pose.right[0], pose.forward[1] + side * pose.right[1]];
                let den = d[0] * n[0] + d[1] * n[1];
                if den.abs() < 1e-12 {
                    continue;
                }
                let t = num / den;
                let k = r * SIZE + c;
                if t <= 0.0 || t >= depth[k] {
                    continue;
                }
                let p = [t * d[0] - rel[0], t * d[1] - rel[1]];
                let u = p[0] * rb[0] + p[1] * rb[1];
                let v = pose.origin[2] + t * up - board.height;
                if u.abs() > half || v.abs() > half {
                    continue;
                }
                depth[k] = t;
                if den < 0.0 {
                    // looking at the back of the board
                    img.set(r, c, opts.board_back);
                    owner[k] = 0;
                    continue;
                }
                let ink = board.layout.ink(u, v).unwrap_or(Ink::White);
                img.set(r, c, if ink == Ink::Black { opts.ink.black } else { opts.ink.white });
                owner[k] = match ink {
                    Ink::Black => disks.iter().position(|dk| dk.contains(u, v)).map_or(0, |di| (bi * 8 + di + 1) as u16),
                    Ink::White => 0,
                };
            }
        }
    }

    let truth = collect_truth(&boards, &owner, camera, vehicle);
    add_noise(&mut img, opts, rng);
    Frame { image: img, truth }
}

/// Pixel rectangle covering the board's projection, or `None` when the
/// board is entirely behind the camera or off-frame.
fn screen_box(camera: &CameraModel, vehicle: &VehicleState, board: &Board) -> Option<(usize, usize, usize, usize)> {
    let rb = board.right_vec();
    let h = board.layout.half();
    let mut pts = Vec::with_capacity(4);
    let mut behind = 0;
    for (su, sv) in [(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)] {
        let w = [board.centre[0] + su * h * rb[0], board.centre[1] + su * h * rb[1], board.height + sv * h];
        match camera.project(vehicle, w) {
            Some(p) => pts.push(p),
            None => behind += 1,
        }
    }
    if behind == 4 {
        return None;
    }
    let last = (SIZE - 1) as f64;
    if behind > 0 {
        // the board straddles the image plane; scan the whole frame
        return Some((0, SIZE - 1, 0, SIZE - 1));
    }
    let (mut rmin, mut rmax, mut cmin, mut cmax) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (r, c) in pts {
        rmin = rmin.min(r);
        rmax = rmax.max(r);
        cmin = cmin.min(c);
        cmax = cmax.max(c);
    }
    if rmax < 0.0 || cmax < 0.0 || rmin > last || cmin > last {
        return None;
    }
    let lo = |x: f64| math::floor(x - 1.0).clamp(0.0, last) as usize;
    let hi = |x: f64| math::floor(x + 2.0).clamp(0.0, last) as usize;
    Some((lo(rmin), hi(rmax), lo(cmin), hi(cmax)))
}

fn collect_truth(boards: &[Board], owner: &[u16], camera: &CameraModel, vehicle: &VehicleState) -> Vec<BoardTruth> {
    let mut sums: Vec<[f64; 3]> = alloc::vec![[0.0; 3]; boards.len() * 8];
    for (k, &o) in owner.iter().enumerate() {
        if o > 0 {
            let s = &mut sums[usize::from(o) - 1];
            s[0] += (k / SIZE) as f64;
            s[1] += (k % SIZE) as f64;
            s[2] += 1.0;
        }
    }
    let mut out = Vec::new();
    for (bi, board) in boards.iter().enumerate() {
        let disks = board.layout.disks();
        let counts: Vec<u32> = (0..disks.len()).map(|di| sums[bi * 8 + di][2] as u32).collect();
        if counts.iter().all(|&c| c == 0) {
            continue;
        }
        let rb = board.right_vec();
        let projected = disks
            .iter()
            .map(|d| camera.project(vehicle, [board.centre[0] + d.u * rb[0], board.centre[1] + d.u * rb[1], board.height + d.v]))
            .collect();
        let pixel_centroid = (0..disks.len())
            .map(|di| {
                let s = sums[bi * 8 + di];
                (s[2] > 0.0).then(|| (s[0] / s[2], s[1] / s[2]))
            })
            .collect();
        out.push(BoardTruth { board: bi, projected, pixel_centroid, pixel_count: counts });
    }
    out
}

fn add_noise(img: &mut GreyImage, opts: &RenderOptions, rng: &mut impl Rng) {
    let spots = &opts.spots;
    for _ in 0..spots.count {
        let (rc, cc) = (rng.random_range(0.0..SIZE as f64), rng.random_range(0.0..SIZE as f64));
        let (lo, hi) = (spots.radius_min.min(spots.radius_max), spots.radius_min.max(spots.radius_max));
        let ra = if hi > lo { rng.random_range(lo..=hi) } else { lo };
        let rb = if hi > lo { rng.random_range(lo..=hi) } else { lo };
        let r0 = math::floor(rc - ra).max(0.0) as usize;
        let r1 = math::floor(rc + ra).min((SIZE - 1) as f64) as usize;
        let c0 = math::floor(cc - rb).max(0.0) as usize;
        let c1 = math::floor(cc + rb).min((SIZE - 1) as f64) as usize;
        for r in r0..=r1 {
            for c in c0..=c1 {
                let (dr, dc) = ((r as f64 - rc) / ra.max(1e-9), (c as f64 - cc) / rb.max(1e-9));
                if dr * dr + dc * dc <= 1.0 {
                    img.set(r, c, spots.level);
                }
            }
        }
    }
    if opts.sigma > 0.0 {
        let normal = Normal::new(0.0, opts.sigma).expect("finite sigma");
        for px in img.as_raw_mut() {
            let v = f64::from(*px) + normal.sample(rng);
            *px = math::round(v).clamp(0.0, 255.0) as u8;
        }
    }
}
