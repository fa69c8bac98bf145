use alloc::boxed::Box;
use core::ops::{BitAnd, BitAndAssign, BitOr, BitOrAssign, BitXor, BitXorAssign, Not};

use super::{BoundingBox, Direction, GreyImage, PixelCoord, SIZE, WORDS_PER_ROW};

/// One packed row: column `c` is bit `c % 64` of word `c / 64`.
pub(crate) type Row = [u64; WORDS_PER_ROW];

pub(crate) const EMPTY_ROW: Row = [0; WORDS_PER_ROW];
pub(crate) const FULL_ROW: Row = [u64::MAX; WORDS_PER_ROW];

/// 256×256 binary plane, bit-packed row-major.
///
/// Stands in for a digital register. A row is exactly four 64-bit words, so
/// the packed storage has no padding bits at all; every bit is a pixel.
#[derive(Clone, PartialEq, Eq)]
pub struct BitImage {
    rows: Box<[Row; SIZE]>,
}

impl core::fmt::Debug for BitImage {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("BitImage").field("ones", &self.count_ones()).finish_non_exhaustive()
    }
}

impl Default for BitImage {
    fn default() -> Self {
        Self::zeros()
    }
}

impl BitImage {
    pub fn zeros() -> Self {
        Self { rows: Box::new([EMPTY_ROW; SIZE]) }
    }

    pub fn ones() -> Self {
        Self { rows: Box::new([FULL_ROW; SIZE]) }
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut img = Self::zeros();
        for r in 0..SIZE {
            for c in 0..SIZE {
                if f(r, c) {
                    img.rows[r][c / 64] |= 1 << (c % 64);
                }
            }
        }
        img
    }

    pub fn from_points(points: &[PixelCoord]) -> Self {
        let mut img = Self::zeros();
        for &p in points {
            img.set(p, true);
        }
        img
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.rows[row][col / 64] >> (col % 64) & 1 == 1
    }

    #[inline]
    pub fn at(&self, p: PixelCoord) -> bool {
        self.get(usize::from(p.row), usize::from(p.col))
    }

    #[inline]
    pub fn set(&mut self, p: PixelCoord, value: bool) {
        let (r, c) = (usize::from(p.row), usize::from(p.col));
        let bit = 1u64 << (c % 64);
        if value {
            self.rows[r][c / 64] |= bit;
        } else {
            self.rows[r][c / 64] &= !bit;
        }
    }

    #[inline]
    pub(crate) fn rows(&self) -> &[Row; SIZE] {
        &self.rows
    }

    #[inline]
    pub(crate) fn rows_mut(&mut self) -> &mut [Row; SIZE] {
        &mut self.rows
    }

    pub fn count_ones(&self) -> u32 {
        self.rows.iter().flatten().map(|w| w.count_ones()).sum()
    }

    pub fn is_empty(&self) -> bool {
        !global_or(self)
    }

    /// Iterates the set pixels in row-major order.
    pub fn iter_ones(&self) -> impl Iterator<Item = PixelCoord> + '_ {
        self.rows.iter().enumerate().flat_map(|(r, row)| {
            row.iter().enumerate().flat_map(move |(w, &word)| {
                BitIter(word).map(move |b| PixelCoord::new(r as u8, (w * 64 + b) as u8))
            })
        })
    }

    /// `self[p] = 1` implies `other[p] = 1`.
    pub fn is_subset_of(&self, other: &BitImage) -> bool {
        self.rows
            .iter()
            .flatten()
            .zip(other.rows.iter().flatten())
            .all(|(a, b)| a & !b == 0)
    }

    pub fn clear(&mut self) {
        self.rows.fill(EMPTY_ROW);
    }

    pub fn copy_from(&mut self, other: &BitImage) {
        self.rows.copy_from_slice(&other.rows[..]);
    }

    /// In-place complement.
    pub fn invert(&mut self) {
        for w in self.rows.iter_mut().flatten() {
            *w = !*w;
        }
    }

    /// `self &= !other`.
    pub fn and_not_assign(&mut self, other: &BitImage) {
        self.zip_assign(other, |a, b| a & !b);
    }

    fn zip_assign(&mut self, other: &BitImage, f: impl Fn(u64, u64) -> u64) {
        for (a, &b) in self.rows.iter_mut().flatten().zip(other.rows.iter().flatten()) {
            *a = f(*a, b);
        }
    }

    fn zip(&self, other: &BitImage, f: impl Fn(u64, u64) -> u64) -> BitImage {
        let mut out = self.clone();
        out.zip_assign(other, f);
        out
    }

    /// Writes the thresholded `img` into `self`: bit set iff `img >= level`.
    pub fn threshold_from(&mut self, img: &GreyImage, level: u8) {
        for (r, row) in self.rows.iter_mut().enumerate() {
            let src = img.row(r);
            for (w, word) in row.iter_mut().enumerate() {
                *word = src[w * 64..(w + 1) * 64]
                    .iter()
                    .enumerate()
                    .fold(0u64, |acc, (i, &v)| acc | (u64::from(v >= level) << i));
            }
        }
    }

    /// Writes `src` translated by `steps` pixels towards `dir` into `self`.
    pub fn shift_from(&mut self, src: &BitImage, dir: Direction, steps: usize) {
        if steps >= SIZE {
            self.clear();
            return;
        }
        match dir {
            Direction::North => {
                self.rows[..SIZE - steps].copy_from_slice(&src.rows[steps..]);
                self.rows[SIZE - steps..].fill(EMPTY_ROW);
            }
            Direction::South => {
                self.rows[steps..].copy_from_slice(&src.rows[..SIZE - steps]);
                self.rows[..steps].fill(EMPTY_ROW);
            }
            Direction::East => {
                for (d, s) in self.rows.iter_mut().zip(src.rows.iter()) {
                    *d = row_shl(s, steps);
                }
            }
            Direction::West => {
                for (d, s) in self.rows.iter_mut().zip(src.rows.iter()) {
                    *d = row_shr(s, steps);
                }
            }
        }
    }

    #[allow(dead_code)]
    pub(crate) fn debug_check(&self) {
        // Rows are exactly WORDS_PER_ROW words wide, so there is nothing
        // beyond column 255 that could hold stray bits.
        debug_assert_eq!(self.rows.len() * WORDS_PER_ROW * 64, SIZE * SIZE);
    }
}

/// Iterator over set bit positions of one word, lowest first.
pub(crate) struct BitIter(pub(crate) u64);

impl Iterator for BitIter {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let b = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(b)
    }
}

/// Row shifted towards higher columns; vacated columns are zero.
pub(crate) fn row_shl(row: &Row, k: usize) -> Row {
    let mut out = EMPTY_ROW;
    if k >= SIZE {
        return out;
    }
    let (wk, bk) = (k / 64, k % 64);
    for i in (wk..WORDS_PER_ROW).rev() {
        let mut v = row[i - wk] << bk;
        if bk > 0 && i > wk {
            v |= row[i - wk - 1] >> (64 - bk);
        }
        out[i] = v;
    }
    out
}

/// Row shifted towards lower columns; vacated columns are zero.
pub(crate) fn row_shr(row: &Row, k: usize) -> Row {
    let mut out = EMPTY_ROW;
    if k >= SIZE {
        return out;
    }
    let (wk, bk) = (k / 64, k % 64);
    for i in 0..WORDS_PER_ROW - wk {
        let mut v = row[i + wk] >> bk;
        if bk > 0 && i + wk + 1 < WORDS_PER_ROW {
            v |= row[i + wk + 1] << (64 - bk);
        }
        out[i] = v;
    }
    out
}

#[inline]
pub(crate) fn row_is_zero(row: &Row) -> bool {
    row.iter().all(|&w| w == 0)
}

macro_rules! binop {
    ($tr:ident, $m:ident, $tra:ident, $ma:ident, $op:tt) => {
        impl $tr<&BitImage> for &BitImage {
            type Output = BitImage;
            fn $m(self, rhs: &BitImage) -> BitImage {
                self.zip(rhs, |a, b| a $op b)
            }
        }
        impl $tra<&BitImage> for BitImage {
            fn $ma(&mut self, rhs: &BitImage) {
                self.zip_assign(rhs, |a, b| a $op b);
            }
        }
    };
}

binop!(BitAnd, bitand, BitAndAssign, bitand_assign, &);
binop!(BitOr, bitor, BitOrAssign, bitor_assign, |);
binop!(BitXor, bitxor, BitXorAssign, bitxor_assign, ^);

impl Not for &BitImage {
    type Output = BitImage;
    fn not(self) -> BitImage {
        let mut out = self.clone();
        out.invert();
        out
    }
}

/// `out[p] = img[p] >= level`, white is 1.
pub fn threshold(img: &GreyImage, level: u8) -> BitImage {
    let mut out = BitImage::zeros();
    out.threshold_from(img, level);
    out
}

pub fn bit_not(a: &BitImage) -> BitImage {
    !a
}

pub fn bit_and(a: &BitImage, b: &BitImage) -> BitImage {
    a & b
}

pub fn bit_or(a: &BitImage, b: &BitImage) -> BitImage {
    a | b
}

pub fn bit_xor(a: &BitImage, b: &BitImage) -> BitImage {
    a ^ b
}

/// Translates `img` by `steps` pixels towards `dir`, filling with zeros.
pub fn shift(img: &BitImage, dir: Direction, steps: usize) -> BitImage {
    let mut out = BitImage::zeros();
    out.shift_from(img, dir, steps);
    out
}

/// Plane with a single set pixel at `p`.
pub fn load_point(p: PixelCoord) -> BitImage {
    let mut out = BitImage::zeros();
    out.set(p, true);
    out
}

/// True iff any pixel is set.
pub fn global_or(img: &BitImage) -> bool {
    img.rows.iter().flatten().any(|&w| w != 0)
}

/// First set pixel in row-major order.
pub fn scan_event(img: &BitImage) -> Option<PixelCoord> {
    img.rows.iter().enumerate().find_map(|(r, row)| {
        row.iter().enumerate().find(|(_, &w)| w != 0).map(|(w, &word)| {
            PixelCoord::new(r as u8, (w * 64 + word.trailing_zeros() as usize) as u8)
        })
    })
}

/// Tight box around all set pixels.
pub fn scan_boundingbox(img: &BitImage) -> Option<BoundingBox> {
    let first = img.rows.iter().position(|r| !row_is_zero(r))?;
    let last = img.rows.iter().rposition(|r| !row_is_zero(r))?;
    let mut cols = EMPTY_ROW;
    for row in &img.rows[first..=last] {
        for (c, w) in cols.iter_mut().zip(row) {
            *c |= w;
        }
    }
    let lo = cols.iter().position(|&w| w != 0)?;
    let hi = cols.iter().rposition(|&w| w != 0)?;
    let min_col = lo * 64 + cols[lo].trailing_zeros() as usize;
    let max_col = hi * 64 + 63 - cols[hi].leading_zeros() as usize;
    Some(BoundingBox::new(
        PixelCoord::new(first as u8, min_col as u8),
        PixelCoord::new(last as u8, max_col as u8),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn random_image(rng: &mut impl Rng, density: f64) -> BitImage {
        BitImage::from_fn(|_, _| rng.random_bool(density))
    }

    #[test]
    fn threshold_extremes() {
        assert!(threshold(&GreyImage::filled(0), 1).is_empty());
        assert_eq!(threshold(&GreyImage::filled(255), 0), BitImage::ones());
    }

    #[test]
    fn threshold_matches_per_pixel_loop() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let grey = GreyImage::from_fn(|_, _| rng.random());
        let bits = threshold(&grey, 128);
        for r in 0..SIZE {
            for c in 0..SIZE {
                assert_eq!(bits.get(r, c), grey.get(r, c) >= 128, "({r},{c})");
            }
        }
        // an 8×8 patch placed off the word grid
        let patch = GreyImage::from_fn(|r, c| {
            if (60..68).contains(&r) && (60..68).contains(&c) {
                ((r * 31 + c * 17) % 256) as u8
            } else {
                0
            }
        });
        let bits = threshold(&patch, 128);
        for r in 60..68 {
            for c in 60..68 {
                assert_eq!(bits.get(r, c), patch.get(r, c) >= 128);
            }
        }
    }

    #[test]
    fn logic_identities() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let a = random_image(&mut rng, 0.5);
            let b = random_image(&mut rng, 0.3);
            assert!(bit_xor(&a, &a).is_empty());
            assert!(bit_and(&a, &bit_not(&a)).is_empty());
            assert_eq!(bit_not(&bit_not(&a)), a);
            let lhs = bit_not(&bit_and(&a, &b));
            let rhs = bit_or(&bit_not(&a), &bit_not(&b));
            assert_eq!(lhs, rhs);
            for r in (0..SIZE).step_by(37) {
                for c in 0..SIZE {
                    assert_eq!(lhs.get(r, c), !(a.get(r, c) && b.get(r, c)));
                }
            }
        }
    }

    #[test]
    fn shift_examples() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let a = random_image(&mut rng, 0.5);
        assert_eq!(shift(&a, Direction::North, 0), a);

        let p = load_point(PixelCoord::new(10, 10));
        assert_eq!(
            shift(&p, Direction::North, 2).iter_ones().collect::<Vec<_>>(),
            [PixelCoord::new(8, 10)]
        );
        assert_eq!(scan_event(&shift(&p, Direction::East, 70)), Some(PixelCoord::new(10, 80)));
        assert_eq!(scan_event(&shift(&p, Direction::West, 10)), Some(PixelCoord::new(10, 0)));
        assert!(shift(&p, Direction::West, 11).is_empty());

        // rows 0-1 were pushed out going north and come back zero-filled
        let back = shift(&shift(&a, Direction::North, 2), Direction::South, 2);
        for r in 0..SIZE {
            for c in 0..SIZE {
                let want = r >= 2 && a.get(r, c);
                assert_eq!(back.get(r, c), want, "({r},{c})");
            }
        }
    }

    #[test]
    fn scans() {
        let empty = BitImage::zeros();
        assert_eq!(scan_event(&empty), None);
        assert_eq!(scan_boundingbox(&empty), None);
        assert!(!global_or(&empty));

        let one = load_point(PixelCoord::new(5, 200));
        assert_eq!(scan_event(&one), Some(PixelCoord::new(5, 200)));
        assert!(global_or(&one));

        let three = BitImage::from_points(&[
            PixelCoord::new(3, 7),
            PixelCoord::new(3, 4),
            PixelCoord::new(9, 0),
        ]);
        assert_eq!(scan_event(&three), Some(PixelCoord::new(3, 4)));

        let nine = load_point(PixelCoord::new(9, 9));
        let b = scan_boundingbox(&nine).unwrap();
        assert_eq!((b.min, b.max, b.centre), (PixelCoord::new(9, 9), PixelCoord::new(9, 9), PixelCoord::new(9, 9)));

        let two = BitImage::from_points(&[PixelCoord::new(2, 2), PixelCoord::new(6, 10)]);
        let b = scan_boundingbox(&two).unwrap();
        assert_eq!(b.min, PixelCoord::new(2, 2));
        assert_eq!(b.max, PixelCoord::new(6, 10));
        assert_eq!(b.centre, PixelCoord::new(4, 6));
    }

    #[test]
    fn load_point_corners() {
        for p in [PixelCoord::new(0, 0), PixelCoord::new(255, 255), PixelCoord::new(17, 128)] {
            let img = load_point(p);
            assert_eq!(img.count_ones(), 1);
            assert!(img.at(p));
        }
    }

    #[test]
    fn bounding_box_matches_min_max_scan() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for _ in 0..200 {
            let density = rng.random_range(0.00001..0.002);
            let img = random_image(&mut rng, density);
            let pts: Vec<_> = img.iter_ones().collect();
            let got = scan_boundingbox(&img);
            if pts.is_empty() {
                assert_eq!(got, None);
                continue;
            }
            let min_r = pts.iter().map(|p| p.row).min().unwrap();
            let max_r = pts.iter().map(|p| p.row).max().unwrap();
            let min_c = pts.iter().map(|p| p.col).min().unwrap();
            let max_c = pts.iter().map(|p| p.col).max().unwrap();
            let b = got.unwrap();
            assert_eq!(b.min, PixelCoord::new(min_r, min_c));
            assert_eq!(b.max, PixelCoord::new(max_r, max_c));
            assert_eq!(scan_event(&img), pts.first().copied());
        }
    }

    proptest! {
        #[test]
        fn shift_round_trip_keeps_interior(seed in any::<u64>(), k in 0usize..40, d in 0usize..4) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let a = random_image(&mut rng, 0.5);
            let dir = Direction::ALL[d];
            let back = shift(&shift(&a, dir, k), dir.opposite(), k);
            back.debug_check();
            for r in 0..SIZE {
                for c in 0..SIZE {
                    // distance to the border the content was pushed against
                    let dist = match dir {
                        Direction::North => r,
                        Direction::South => SIZE - 1 - r,
                        Direction::West => c,
                        Direction::East => SIZE - 1 - c,
                    };
                    if dist >= k {
                        prop_assert_eq!(back.get(r, c), a.get(r, c));
                    } else {
                        prop_assert!(!back.get(r, c));
                    }
                }
            }
        }

        #[test]
        fn global_or_agrees_with_popcount(seed in any::<u64>(), density in 0.0f64..0.0005) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let a = random_image(&mut rng, density);
            prop_assert_eq!(global_or(&a), a.count_ones() > 0);
        }
    }
}
