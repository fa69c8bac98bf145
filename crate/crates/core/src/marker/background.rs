use crate::ppa::{flood_into, BitImage, SeedSpec};

/// Repeated border flooding that peels nested black/white regions.
///
/// Round `k` floods the white pixels reachable from the frame border, removes
/// them, and (except on the last round) inverts what is left so the next
/// nesting level becomes white. With a double-outline marker, four rounds
/// strip background, outer outline, gap and inner outline, leaving the disks
/// white on black.
pub fn eliminate_background(bin: &BitImage, flood_steps: usize) -> BitImage {
    eliminate_background_traced(bin, flood_steps, |_, _, _| {})
}

/// [`eliminate_background`] calling `observe(round, remaining, flooded)`
/// after the removal of each round and before its inversion.
pub fn eliminate_background_traced(
    bin: &BitImage,
    flood_steps: usize,
    observe: impl FnMut(usize, &BitImage, &BitImage),
) -> BitImage {
    let mut work = bin.clone();
    let mut flooded = BitImage::zeros();
    eliminate_in_place(&mut work, &mut flooded, flood_steps, observe);
    work
}

pub(crate) fn eliminate_in_place(
    work: &mut BitImage,
    flooded: &mut BitImage,
    flood_steps: usize,
    mut observe: impl FnMut(usize, &BitImage, &BitImage),
) {
    for round in 1..=flood_steps {
        flood_into(work, &SeedSpec::Border, flooded);
        work.and_not_assign(flooded);
        observe(round, work, flooded);
        if round < flood_steps {
            work.invert();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ppa::{components, count_components, threshold, GreyImage, PixelCoord};
    use crate::sim::pattern::{draw_front, InkLevels, PatternLayout};
    use alloc::vec::Vec;

    fn gate_frame(px_per_m: f64) -> (BitImage, Vec<Vec<(usize, usize)>>) {
        let mut img = GreyImage::filled(170);
        let truth = draw_front(&mut img, &PatternLayout::gate(), (120.3, 131.6), px_per_m, InkLevels::default());
        (threshold(&img, 128), truth.disk_pixels)
    }

    #[test]
    fn all_white_frame_vanishes() {
        for steps in 1..6 {
            assert!(eliminate_background(&BitImage::ones(), steps).is_empty());
        }
    }

    #[test]
    fn four_rounds_leave_exactly_the_disks() {
        for scale in [250.0, 400.0, 600.0] {
            let (bin, disks) = gate_frame(scale);
            let out = eliminate_background(&bin, 4);
            let mut want = BitImage::zeros();
            for px in disks.iter().flatten() {
                want.set(PixelCoord::new(px.0 as u8, px.1 as u8), true);
            }
            assert_eq!(count_components(&out), 4);
            assert_eq!(out, want, "scale {scale}");
            let areas: Vec<u32> = components(&out).iter().map(|c| c.area).collect();
            assert_eq!(areas.iter().sum::<u32>(), disks.iter().map(|d| d.len() as u32).sum());
        }
    }

    #[test]
    fn flooded_and_remaining_are_disjoint_each_round() {
        let (bin, _) = gate_frame(400.0);
        let mut rounds = 0;
        eliminate_background_traced(&bin, 4, |_, b, f| {
            rounds += 1;
            assert!((b & f).is_empty());
        });
        assert_eq!(rounds, 4);
    }

    #[test]
    fn broken_outlines_leave_nothing() {
        let mut img = GreyImage::filled(170);
        draw_front(&mut img, &PatternLayout::gate(), (127.5, 127.5), 500.0, InkLevels::default());
        // erase the right-hand side of both outlines
        for r in 0..256 {
            for c in 175..215 {
                if img.get(r, c) < 128 && !(95..160).contains(&r) {
                    img.set(r, c, 235);
                }
            }
        }
        for r in 40..215 {
            for c in 175..215 {
                if img.get(r, c) < 128 && c > 190 {
                    img.set(r, c, 235);
                }
            }
        }
        let out = eliminate_background(&threshold(&img, 128), 4);
        assert_eq!(count_components(&out), 0);
    }
}
