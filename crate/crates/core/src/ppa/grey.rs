use alloc::boxed::Box;
use alloc::vec;

use super::SIZE;

/// 256×256 grey plane, one `u8` per pixel, row-major.
///
/// Stands in for an analogue register. Values are clamped to `[0, 255]` by
/// the storage type.
#[derive(Clone, PartialEq, Eq)]
pub struct GreyImage {
    px: Box<[u8]>,
}

impl core::fmt::Debug for GreyImage {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("GreyImage").finish_non_exhaustive()
    }
}

impl Default for GreyImage {
    fn default() -> Self {
        Self::filled(0)
    }
}

impl GreyImage {
    pub fn filled(level: u8) -> Self {
        Self { px: vec![level; SIZE * SIZE].into_boxed_slice() }
    }

    /// Wraps a row-major buffer, `None` unless it holds exactly 65536 bytes.
    pub fn from_raw(data: &[u8]) -> Option<Self> {
        (data.len() == SIZE * SIZE).then(|| Self { px: data.into() })
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut img = Self::filled(0);
        for r in 0..SIZE {
            for c in 0..SIZE {
                img.px[r * SIZE + c] = f(r, c);
            }
        }
        img
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.px[row * SIZE + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: u8) {
        self.px[row * SIZE + col] = v;
    }

    #[inline]
    pub fn row(&self, row: usize) -> &[u8] {
        &self.px[row * SIZE..(row + 1) * SIZE]
    }

    #[inline]
    pub fn row_mut(&mut self, row: usize) -> &mut [u8] {
        &mut self.px[row * SIZE..(row + 1) * SIZE]
    }

    pub fn as_raw(&self) -> &[u8] {
        &self.px
    }

    pub fn as_raw_mut(&mut self) -> &mut [u8] {
        &mut self.px
    }

    pub fn fill(&mut self, level: u8) {
        self.px.fill(level);
    }
}
