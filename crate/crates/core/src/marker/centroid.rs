use alloc::vec::Vec;
use thiserror::Error;

use crate::ppa::{flood_into, scan_boundingbox, scan_event, BitImage, PixelCoord, SeedSpec};

/// Fewer blobs were present than the caller said there would be.
#[derive(Clone, Copy, Debug, Error, PartialEq, Eq)]
#[error("only {found} of {expected} blobs present")]
pub struct Underflow {
    pub found: usize,
    pub expected: usize,
}

/// Bounding-box centres of the first `expected` blobs, peeled off in scan
/// order: find the first set pixel, flood its blob, record the blob's box
/// centre, erase the blob.
pub fn extract_centroids(bin: &BitImage, expected: usize) -> Result<Vec<PixelCoord>, Underflow> {
    let mut work = bin.clone();
    let mut blob = BitImage::zeros();
    extract_in_place(&mut work, &mut blob, expected)
}

/// Destroys `work`; `blob` is scratch.
pub(crate) fn extract_in_place(
    work: &mut BitImage,
    blob: &mut BitImage,
    expected: usize,
) -> Result<Vec<PixelCoord>, Underflow> {
    let mut out = Vec::with_capacity(expected);
    while out.len() < expected {
        let Some(p) = scan_event(work) else {
            return Err(Underflow { found: out.len(), expected });
        };
        flood_into(work, &SeedSpec::point(p), blob);
        let bbox = scan_boundingbox(blob).expect("seed pixel is set");
        out.push(bbox.centre);
        work.and_not_assign(blob);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ppa::{components, BoundingBox};
    use rand::{Rng, SeedableRng};

    #[test]
    fn four_squares() {
        let corners = [(10usize, 10usize), (10, 200), (180, 30), (240, 240)];
        let img = BitImage::from_fn(|r, c| corners.iter().any(|&(r0, c0)| (r0..r0 + 3).contains(&r) && (c0..c0 + 3).contains(&c)));
        let got = extract_centroids(&img, 4).unwrap();
        let want: Vec<PixelCoord> = corners.iter().map(|&(r, c)| PixelCoord::new(r as u8 + 1, c as u8 + 1)).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn single_disk_and_underflow() {
        let img = BitImage::from_fn(|r, c| {
            let (dr, dc) = (r as f64 - 50.0, c as f64 - 61.0);
            dr * dr + dc * dc <= 30.0
        });
        assert_eq!(extract_centroids(&img, 1).unwrap(), [PixelCoord::new(50, 61)]);
        assert_eq!(extract_centroids(&img, 2), Err(Underflow { found: 1, expected: 2 }));
    }

    #[test]
    fn matches_component_boxes() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for _ in 0..30 {
            // random non-touching rectangles on a coarse grid
            let mut boxes = Vec::new();
            for gr in 0..8 {
                for gc in 0..8 {
                    if rng.random_bool(0.3) {
                        let (r0, c0) = (gr * 32 + 1, gc * 32 + 1);
                        let (h, w) = (rng.random_range(1..30), rng.random_range(1..30));
                        boxes.push(BoundingBox::new(PixelCoord::new(r0 as u8, c0 as u8), PixelCoord::new((r0 + h - 1) as u8, (c0 + w - 1) as u8)));
                    }
                }
            }
            let img = BitImage::from_fn(|r, c| boxes.iter().any(|b| b.contains(PixelCoord::new(r as u8, c as u8))));
            let comps = components(&img);
            let mut got = extract_centroids(&img, comps.len()).unwrap();
            let mut want: Vec<PixelCoord> = comps.iter().map(|c| c.bbox.centre).collect();
            got.sort_unstable();
            want.sort_unstable();
            assert_eq!(got, want);
        }
    }
}
