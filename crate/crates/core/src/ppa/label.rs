//! Connected components (4-connectivity) over run-length encoded rows.

use alloc::vec::Vec;

use super::bits::Row;
use super::{BitImage, BoundingBox, PixelCoord, SIZE};

/// One 4-connected blob of set pixels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Component {
    /// Pixel count.
    pub area: u32,
    pub bbox: BoundingBox,
    /// First pixel of the blob in row-major order.
    pub first: PixelCoord,
}

#[derive(Clone, Copy)]
struct Run {
    row: u16,
    start: u16,
    // inclusive
    end: u16,
}

fn push_runs(r: usize, row: &Row, runs: &mut Vec<Run>) {
    let mut c = 0usize;
    while c < SIZE {
        let (w, b) = (c / 64, c % 64);
        let word = row[w] >> b;
        if word == 0 {
            c = (w + 1) * 64;
            continue;
        }
        let start = c + word.trailing_zeros() as usize;
        // walk over the run of ones starting at `start`
        let mut end = start;
        loop {
            let (w, b) = (end / 64, end % 64);
            let ones = (!(row[w] >> b)).trailing_zeros() as usize;
            let ones = ones.min(64 - b);
            end += ones;
            if ones < 64 - b || end >= SIZE {
                break;
            }
        }
        runs.push(Run { row: r as u16, start: start as u16, end: (end - 1) as u16 });
        c = end;
    }
}

fn find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        let p = parent[x as usize];
        parent[x as usize] = parent[p as usize];
        x = p;
    }
    x
}

fn union(parent: &mut [u32], a: u32, b: u32) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        // keep the earlier run as root so labels follow scan order
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        parent[hi as usize] = lo;
    }
}

/// All 4-connected components, ordered by their first pixel in row-major order.
pub fn components(img: &BitImage) -> Vec<Component> {
    let mut runs: Vec<Run> = Vec::new();
    let mut row_start = [0usize; SIZE + 1];
    for (r, row) in img.rows().iter().enumerate() {
        row_start[r] = runs.len();
        push_runs(r, row, &mut runs);
    }
    row_start[SIZE] = runs.len();

    let mut parent: Vec<u32> = (0..runs.len() as u32).collect();
    for r in 1..SIZE {
        let (mut i, i_end) = (row_start[r - 1], row_start[r]);
        let (mut j, j_end) = (row_start[r], row_start[r + 1]);
        while i < i_end && j < j_end {
            let (a, b) = (runs[i], runs[j]);
            if a.start <= b.end && b.start <= a.end {
                union(&mut parent, i as u32, j as u32);
            }
            if a.end < b.end {
                i += 1;
            } else {
                j += 1;
            }
        }
    }

    let mut slot = alloc::vec![u32::MAX; runs.len()];
    let mut out: Vec<Component> = Vec::new();
    for (k, run) in runs.iter().enumerate() {
        let root = find(&mut parent, k as u32) as usize;
        let lo = PixelCoord::new(run.row as u8, run.start as u8);
        let hi = PixelCoord::new(run.row as u8, run.end as u8);
        let len = u32::from(run.end - run.start) + 1;
        if slot[root] == u32::MAX {
            slot[root] = out.len() as u32;
            out.push(Component { area: len, bbox: BoundingBox::new(lo, hi), first: lo });
        } else {
            let c = &mut out[slot[root] as usize];
            c.area += len;
            c.bbox = c.bbox.union(&BoundingBox::new(lo, hi));
        }
    }
    // roots are the earliest run of each blob, so `out` is already in scan order
    debug_assert!(out.windows(2).all(|w| w[0].first < w[1].first));
    out
}

/// Number of 4-connected components of set pixels.
pub fn count_components(img: &BitImage) -> usize {
    components(img).len()
}
