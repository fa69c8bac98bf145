//! Word-parallel flooding.
//!
//! A flood grows the seed set through 4-connected `1` pixels of the mask.
//! Within a row a whole run of mask bits is filled in one go with the carry
//! trick (`mask + seed` ripples through the run above each seed); between
//! rows the fill is pulled down and up in alternating sweeps. Serpentine
//! masks that keep reversing direction would need many sweeps, so after a
//! few sweep pairs the remaining work goes through a row worklist instead.

use alloc::vec::Vec;

use super::bits::{row_is_zero, Row, EMPTY_ROW};
use super::{BitImage, SeedSpec, SIZE, WORDS_PER_ROW};

const SWEEP_PAIRS: usize = 6;

/// Pixels of `mask` 4-connected to a seed through `mask` pixels.
///
/// The result is always a subset of `mask`. Seeds that fall on a `0` of the
/// mask contribute nothing.
pub fn flood(mask: &BitImage, seeds: &SeedSpec) -> BitImage {
    let mut out = BitImage::zeros();
    flood_into(mask, seeds, &mut out);
    out
}

/// [`flood`] writing into an existing plane.
pub fn flood_into(mask: &BitImage, seeds: &SeedSpec, out: &mut BitImage) {
    out.clear();
    let m = mask.rows();
    let o = out.rows_mut();
    match seeds {
        SeedSpec::Border => {
            let edge_cols: Row = {
                let mut r = EMPTY_ROW;
                r[0] = 1;
                r[WORDS_PER_ROW - 1] = 1 << 63;
                r
            };
            for (r, row) in o.iter_mut().enumerate() {
                let seed = if r == 0 || r == SIZE - 1 { [u64::MAX; WORDS_PER_ROW] } else { edge_cols };
                *row = and(&seed, &m[r]);
            }
        }
        SeedSpec::Points(points) => {
            for p in points {
                let (r, c) = (usize::from(p.row), usize::from(p.col));
                o[r][c / 64] |= m[r][c / 64] & (1 << (c % 64));
            }
        }
    }
    for (row, mrow) in o.iter_mut().zip(m.iter()) {
        if !row_is_zero(row) {
            *row = fill_runs(row, mrow);
        }
    }

    for _ in 0..SWEEP_PAIRS {
        let mut changed = false;
        for r in 1..SIZE {
            changed |= pull(o, m, r, r - 1);
        }
        for r in (0..SIZE - 1).rev() {
            changed |= pull(o, m, r, r + 1);
        }
        if !changed {
            return;
        }
    }
    worklist(o, m);
}

/// Grows row `dst` from the filled row `src`; true if anything was added.
#[inline]
fn pull(o: &mut [Row; SIZE], m: &[Row; SIZE], dst: usize, src: usize) -> bool {
    let mut fresh = EMPTY_ROW;
    let mut any = 0;
    for w in 0..WORDS_PER_ROW {
        fresh[w] = o[src][w] & m[dst][w] & !o[dst][w];
        any |= fresh[w];
    }
    if any == 0 {
        return false;
    }
    let grown = fill_runs(&fresh, &m[dst]);
    for w in 0..WORDS_PER_ROW {
        o[dst][w] |= grown[w];
    }
    true
}

fn worklist(o: &mut [Row; SIZE], m: &[Row; SIZE]) {
    let mut queued = [false; SIZE];
    let mut stack: Vec<usize> = (0..SIZE).filter(|&r| !row_is_zero(&o[r])).collect();
    for &r in &stack {
        queued[r] = true;
    }
    while let Some(r) = stack.pop() {
        queued[r] = false;
        for n in [r.wrapping_sub(1), r + 1] {
            if n < SIZE && pull(o, m, n, r) && !queued[n] {
                queued[n] = true;
                stack.push(n);
            }
        }
    }
}

#[inline]
fn and(a: &Row, b: &Row) -> Row {
    core::array::from_fn(|w| a[w] & b[w])
}

/// 256-bit addition, word 0 least significant, carry out of the row dropped.
#[inline]
fn add(a: &Row, b: &Row) -> Row {
    let mut out = EMPTY_ROW;
    let mut carry = false;
    for w in 0..WORDS_PER_ROW {
        let (s1, c1) = a[w].overflowing_add(b[w]);
        let (s2, c2) = s1.overflowing_add(u64::from(carry));
        out[w] = s2;
        carry = c1 | c2;
    }
    out
}

#[inline]
fn reverse(row: &Row) -> Row {
    core::array::from_fn(|w| row[WORDS_PER_ROW - 1 - w].reverse_bits())
}

/// Seeds extended towards higher columns to the end of their mask run.
#[inline]
fn fill_up(seed: &Row, mask: &Row) -> Row {
    let t = add(mask, seed);
    core::array::from_fn(|w| ((t[w] ^ mask[w]) & mask[w]) | seed[w])
}

/// Every run of `mask` bits that contains a bit of `seed`.
#[inline]
pub(crate) fn fill_runs(seed: &Row, mask: &Row) -> Row {
    let s = and(seed, mask);
    if row_is_zero(&s) {
        return EMPTY_ROW;
    }
    let up = fill_up(&s, mask);
    let down = reverse(&fill_up(&reverse(&s), &reverse(mask)));
    core::array::from_fn(|w| up[w] | down[w])
}
