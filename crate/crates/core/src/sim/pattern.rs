//! Physical layout of the printed boards.
//!
//! All layouts are square and described in board coordinates `(u, v)`
//! measured in metres from the board centre, `u` to the right and `v` up as
//! seen by a viewer facing the printed side.
//!
//! * Gate marker: two concentric square outlines around four equal disks.
//! * Slalom marker: the same two outlines around one large anchor disk and
//!   `k` small disks. The anchor sits on the side of the commanded turn, the
//!   small disks on the other; `k` encodes the turn angle as `k * 15` degrees.
//! * Distractors: a single-outline board with four disks, and a board with
//!   scattered disks and no outline.

use alloc::vec::Vec;
use arrayvec::ArrayVec;
use serde::{Deserialize, Serialize};

use crate::ppa::{GreyImage, SIZE};

/// Turn direction carried by a slalom marker.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TurnDirection {
    Left,
    Right,
}

impl TurnDirection {
    /// +1 for left (counter-clockwise), -1 for right.
    pub fn sign(self) -> f64 {
        match self {
            TurnDirection::Left => 1.0,
            TurnDirection::Right => -1.0,
        }
    }
}

/// Degrees encoded by each small disk on a slalom marker.
pub const SLALOM_DEGREES_PER_DISK: f64 = 15.0;
/// Largest small-disk count a slalom marker can carry.
pub const SLALOM_MAX_DISKS: u8 = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PatternKind {
    Gate,
    Slalom { direction: TurnDirection, count: u8 },
    SingleOutline,
    Scatter,
}

/// Printed colour of a board point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ink {
    Black,
    White,
}

/// Disks of one board; never more than six.
pub type DiskSet = ArrayVec<Disk, 6>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Disk {
    pub u: f64,
    pub v: f64,
    pub radius: f64,
}

impl Disk {
    pub fn contains(&self, u: f64, v: f64) -> bool {
        let (du, dv) = (u - self.u, v - self.v);
        du * du + dv * dv <= self.radius * self.radius
    }
}

// Band edges as fractions of the side length, measured as Chebyshev distance
// from the centre: outer outline, gap, inner outline, interior.
const OUTER_IN: f64 = 0.4333;
const GAP_IN: f64 = 0.3733;
const INNER_IN: f64 = 0.3133;

const SLALOM_OUTER_IN: f64 = 0.45;
const SLALOM_GAP_IN: f64 = 0.41;
const SLALOM_INNER_IN: f64 = 0.36;

/// A board of a given kind and side length.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternLayout {
    #[serde(flatten)]
    pub kind: PatternKind,
    /// Side length of the square board in metres.
    pub side: f64,
}

impl PatternLayout {
    pub const DEFAULT_GATE_SIDE: f64 = 0.36;
    pub const DEFAULT_SLALOM_SIDE: f64 = 0.60;

    pub fn gate() -> Self {
        Self { kind: PatternKind::Gate, side: Self::DEFAULT_GATE_SIDE }
    }

    pub fn slalom(direction: TurnDirection, count: u8) -> Self {
        Self { kind: PatternKind::Slalom { direction, count }, side: Self::DEFAULT_SLALOM_SIDE }
    }

    pub fn half(&self) -> f64 {
        self.side / 2.0
    }

    /// Side length of the white interior inside the inner outline.
    pub fn interior_side(&self) -> f64 {
        match self.kind {
            PatternKind::Slalom { .. } => 2.0 * SLALOM_INNER_IN * self.side,
            _ => 2.0 * INNER_IN * self.side,
        }
    }

    /// Black disks printed on the board.
    pub fn disks(&self) -> DiskSet {
        let s = self.side;
        match self.kind {
            PatternKind::Gate | PatternKind::SingleOutline => {
                let (o, r) = (0.1567 * s, 0.10 * s);
                // quadrant order: top-left, top-right, bottom-left, bottom-right
                [(-o, o), (o, o), (-o, -o), (o, -o)]
                    .into_iter()
                    .map(|(u, v)| Disk { u, v, radius: r })
                    .collect()
            }
            PatternKind::Slalom { direction, count } => {
                // anchor on the turn side, small disks mirrored on the other
                let side = direction.sign();
                let mut out = DiskSet::new();
                out.push(Disk { u: -side * 0.18 * s, v: 0.0, radius: 0.11 * s });
                let grid = [(0.11, 0.16), (0.27, 0.16), (0.11, 0.0), (0.27, 0.0), (0.11, -0.16)];
                let n = usize::from(count.clamp(1, SLALOM_MAX_DISKS));
                out.extend(grid[..n].iter().map(|&(u, v)| Disk { u: side * u * s, v: v * s, radius: 0.06 * s }));
                out
            }
            PatternKind::Scatter => [(-0.31, 0.27, 0.09), (0.05, 0.33, 0.07), (0.28, 0.12, 0.1), (-0.12, -0.05, 0.08), (0.2, -0.3, 0.09), (-0.33, -0.31, 0.06)]
                .into_iter()
                .map(|(u, v, r)| Disk { u: u * s, v: v * s, radius: r * s })
                .collect(),
        }
    }

    /// Ink at board point `(u, v)`, `None` when off the board.
    pub fn ink(&self, u: f64, v: f64) -> Option<Ink> {
        let h = self.half();
        let m = u.abs().max(v.abs());
        if m > h {
            return None;
        }
        let m = m / self.side;
        let bands = match self.kind {
            PatternKind::Gate => [OUTER_IN, GAP_IN, INNER_IN],
            PatternKind::Slalom { .. } => [SLALOM_OUTER_IN, SLALOM_GAP_IN, SLALOM_INNER_IN],
            // one outline only: the interior starts right after the outer band
            PatternKind::SingleOutline => [OUTER_IN, OUTER_IN, OUTER_IN],
            PatternKind::Scatter => [0.5; 3],
        };
        let [outer, gap, inner] = bands;
        if m > outer {
            return Some(Ink::Black);
        }
        if m > gap {
            return Some(Ink::White);
        }
        if m > inner {
            return Some(Ink::Black);
        }
        if self.disks().iter().any(|d| d.contains(u, v)) {
            Some(Ink::Black)
        } else {
            Some(Ink::White)
        }
    }
}

/// Grey levels used when painting boards.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InkLevels {
    pub black: u8,
    pub white: u8,
}

impl Default for InkLevels {
    fn default() -> Self {
        Self { black: 25, white: 235 }
    }
}

/// Ground truth for a board painted with [`draw_front`].
#[derive(Clone, Debug, PartialEq)]
pub struct FrontTruth {
    /// Disk centres in continuous pixel coordinates `(row, col)`.
    pub disk_centres: Vec<(f64, f64)>,
    /// Pixels painted for each disk, in [`PatternLayout::disks`] order.
    pub disk_pixels: Vec<Vec<(usize, usize)>>,
}

/// Paints a fronto-parallel board centred at `centre` (row, col) with
/// `px_per_m` pixels per metre. Pixel `(r, c)` samples the board at its
/// centre point `(r, c)`.
pub fn draw_front(
    img: &mut GreyImage,
    layout: &PatternLayout,
    centre: (f64, f64),
    px_per_m: f64,
    levels: InkLevels,
) -> FrontTruth {
    let disks = layout.disks();
    let mut disk_pixels = alloc::vec![Vec::new(); disks.len()];
    for r in 0..SIZE {
        let v = (centre.0 - r as f64) / px_per_m;
        for c in 0..SIZE {
            let u = (c as f64 - centre.1) / px_per_m;
            let Some(ink) = layout.ink(u, v) else { continue };
            img.set(r, c, if ink == Ink::Black { levels.black } else { levels.white });
            if ink == Ink::Black {
                if let Some(k) = disks.iter().position(|d| d.contains(u, v)) {
                    disk_pixels[k].push((r, c));
                }
            }
        }
    }
    FrontTruth {
        disk_centres: disks.iter().map(|d| (centre.0 - d.v * px_per_m, centre.1 + d.u * px_per_m)).collect(),
        disk_pixels,
    }
}
