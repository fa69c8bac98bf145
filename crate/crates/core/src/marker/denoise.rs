use crate::ppa::{BitImage, Direction};

/// Four-direction shift-AND erosion.
///
/// `out[p]` is set iff the pixels `p_step` away to the north, south, east and
/// west are all set (out-of-frame counts as unset). The centre pixel itself
/// is not consulted.
pub fn denoise(bin: &BitImage, p_step: usize) -> BitImage {
    let mut out = BitImage::zeros();
    let mut tmp = BitImage::zeros();
    denoise_into(bin, p_step, &mut out, &mut tmp);
    out
}

pub(crate) fn denoise_into(bin: &BitImage, p_step: usize, out: &mut BitImage, tmp: &mut BitImage) {
    out.shift_from(bin, Direction::North, p_step);
    for dir in [Direction::South, Direction::East, Direction::West] {
        tmp.shift_from(bin, dir, p_step);
        *out &= &*tmp;
    }
}
