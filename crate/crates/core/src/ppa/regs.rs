use alloc::vec::Vec;

use super::{BitImage, GreyImage};

/// Digital registers per processing element on the emulated chip.
pub const DREG_COUNT: usize = 13;
/// Analogue registers per processing element on the emulated chip.
pub const AREG_COUNT: usize = 7;

/// Fixed bank of image registers, sized like the real array.
///
/// Pipelines that run "on sensor" work exclusively through a bank, so the
/// number of planes they hold at once can never exceed the hardware budget.
/// The bank records which registers were written since the last
/// [`RegisterFile::reset_usage`].
pub struct RegisterFile {
    dreg: Vec<BitImage>,
    areg: Vec<Option<GreyImage>>,
    usage: RegisterUsage,
}

/// Registers touched since the last reset.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RegisterUsage {
    dreg: u16,
    areg: u8,
}

impl RegisterUsage {
    pub fn digital(&self) -> u32 {
        self.dreg.count_ones()
    }

    pub fn analogue(&self) -> u32 {
        self.areg.count_ones()
    }
}

impl Default for RegisterFile {
    fn default() -> Self {
        Self::new()
    }
}

impl RegisterFile {
    pub fn new() -> Self {
        Self {
            dreg: (0..DREG_COUNT).map(|_| BitImage::zeros()).collect(),
            // grey planes are 64 KiB each, allocated on first write
            areg: (0..AREG_COUNT).map(|_| None).collect(),
            usage: RegisterUsage::default(),
        }
    }

    pub fn usage(&self) -> RegisterUsage {
        self.usage
    }

    pub fn reset_usage(&mut self) {
        self.usage = RegisterUsage::default();
    }

    pub fn d(&self, i: usize) -> &BitImage {
        &self.dreg[i]
    }

    pub fn d_mut(&mut self, i: usize) -> &mut BitImage {
        self.usage.dreg |= 1 << i;
        &mut self.dreg[i]
    }

    /// Disjoint access: `dst` for writing, `srcs` for reading.
    ///
    /// # Panics
    ///
    /// If any index repeats or is out of range.
    pub fn d_split<const N: usize>(&mut self, dst: usize, srcs: [usize; N]) -> (&mut BitImage, [&BitImage; N]) {
        self.usage.dreg |= 1 << dst;
        let mut idx = [dst; 16];
        idx[1..=N].copy_from_slice(&srcs);
        assert!(N < 16);
        for (k, &i) in idx[..=N].iter().enumerate() {
            assert!(i < DREG_COUNT && !idx[..k].contains(&i), "register aliasing");
        }
        let mut slots: Vec<Option<&mut BitImage>> = self.dreg.iter_mut().map(Some).collect();
        let out = slots[dst].take().expect("checked above");
        let ins = srcs.map(|i| &*slots[i].take().expect("checked above"));
        (out, ins)
    }

    /// Several registers for writing at once.
    ///
    /// # Panics
    ///
    /// If any index repeats or is out of range.
    pub fn d_many<const N: usize>(&mut self, idx: [usize; N]) -> [&mut BitImage; N] {
        for &i in &idx {
            self.usage.dreg |= 1 << i;
        }
        self.dreg.get_disjoint_mut(idx).expect("register aliasing")
    }

    /// Thresholds analogue register `src` into digital register `dst`.
    /// An analogue register never written reads as all zeros.
    pub fn threshold(&mut self, dst: usize, src: usize, level: u8) {
        self.usage.dreg |= 1 << dst;
        match &self.areg[src] {
            Some(img) => self.dreg[dst].threshold_from(img, level),
            None => {
                // every pixel reads 0, which passes only a zero threshold
                self.dreg[dst].clear();
                if level == 0 {
                    self.dreg[dst].invert();
                }
            }
        }
    }

    pub fn a(&self, i: usize) -> Option<&GreyImage> {
        self.areg[i].as_ref()
    }

    pub fn a_mut(&mut self, i: usize) -> &mut GreyImage {
        self.usage.areg |= 1 << i;
        self.areg[i].get_or_insert_with(GreyImage::default)
    }

    /// Copies `img` into analogue register `dst`.
    pub fn a_load(&mut self, dst: usize, img: &GreyImage) {
        self.a_mut(dst).as_raw_mut().copy_from_slice(img.as_raw());
    }
}
