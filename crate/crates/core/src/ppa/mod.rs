//! Emulated processing-element array.
//!
//! Every operation works on a whole 256×256 plane at once, as the real array
//! would. Binary planes ([`BitImage`]) stand in for the digital registers and
//! are stored bit-packed, 64 pixels per word, so logic, shifts and flooding
//! run word-at-a-time. Grey planes ([`GreyImage`]) stand in for the analogue
//! registers.
//!
//! Conventions used everywhere in this crate:
//!
//! * rows grow downwards (row 0 is the top), columns grow to the right;
//! * after [`threshold`] a bright pixel is `1` ("white");
//! * connectivity for flooding and labeling is 4-neighbour (N, S, E, W).

mod bits;
mod flood;
mod grey;
mod label;
mod regs;

pub use bits::{
    bit_and, bit_not, bit_or, bit_xor, global_or, load_point, scan_boundingbox, scan_event,
    shift, threshold, BitImage,
};
pub use flood::{flood, flood_into};
pub use grey::GreyImage;
pub use label::{components, count_components, Component};
pub use regs::{RegisterFile, RegisterUsage, AREG_COUNT, DREG_COUNT};

use serde::{Deserialize, Serialize};

/// Side length of the array in pixels.
pub const SIZE: usize = 256;

/// Number of 64-bit words that hold one packed row.
pub const WORDS_PER_ROW: usize = SIZE / 64;

/// Location of a processing element.
///
/// Both components are `u8`, so a coordinate can never leave the array.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PixelCoord {
    pub row: u8,
    pub col: u8,
}

impl PixelCoord {
    pub const fn new(row: u8, col: u8) -> Self {
        Self { row, col }
    }

    /// Builds a coordinate from signed values, `None` when out of the array.
    pub fn checked(row: i64, col: i64) -> Option<Self> {
        let r = u8::try_from(row).ok()?;
        let c = u8::try_from(col).ok()?;
        Some(Self::new(r, c))
    }
}

/// Tight box around a set of pixels, inclusive on both ends.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min: PixelCoord,
    pub max: PixelCoord,
    pub centre: PixelCoord,
}

impl BoundingBox {
    /// Creates a box; the centre is the per-axis floor of the midpoint.
    ///
    /// # Panics
    ///
    /// If `min` is not component-wise `<=` `max`.
    pub fn new(min: PixelCoord, max: PixelCoord) -> Self {
        assert!(min.row <= max.row && min.col <= max.col, "inverted bounding box");
        let mid = |a: u8, b: u8| ((u16::from(a) + u16::from(b)) / 2) as u8;
        Self {
            min,
            max,
            centre: PixelCoord::new(mid(min.row, max.row), mid(min.col, max.col)),
        }
    }

    pub fn height(&self) -> u32 {
        u32::from(self.max.row - self.min.row) + 1
    }

    pub fn width(&self) -> u32 {
        u32::from(self.max.col - self.min.col) + 1
    }

    pub fn contains(&self, p: PixelCoord) -> bool {
        (self.min.row..=self.max.row).contains(&p.row)
            && (self.min.col..=self.max.col).contains(&p.col)
    }

    /// Smallest box holding both `self` and `other`.
    pub fn union(&self, other: &BoundingBox) -> BoundingBox {
        BoundingBox::new(
            PixelCoord::new(self.min.row.min(other.min.row), self.min.col.min(other.min.col)),
            PixelCoord::new(self.max.row.max(other.max.row), self.max.col.max(other.max.col)),
        )
    }
}

/// Where a flood starts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SeedSpec {
    /// Every pixel on the outer edge of the array (1020 of them).
    Border,
    /// Explicit seed pixels. An empty list floods nothing.
    Points(alloc::vec::Vec<PixelCoord>),
}

impl SeedSpec {
    pub fn point(p: PixelCoord) -> Self {
        SeedSpec::Points(alloc::vec![p])
    }
}

/// Shift direction. North is towards row 0, east towards column 255.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    North,
    South,
    East,
    West,
}

impl Direction {
    pub const ALL: [Direction; 4] =
        [Direction::North, Direction::South, Direction::East, Direction::West];

    pub fn opposite(self) -> Direction {
        match self {
            Direction::North => Direction::South,
            Direction::South => Direction::North,
            Direction::East => Direction::West,
            Direction::West => Direction::East,
        }
    }
}
