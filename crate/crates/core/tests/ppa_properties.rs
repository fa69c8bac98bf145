use ppanav_core::ppa::{
    bit_and, bit_not, bit_or, bit_xor, components, count_components, flood, global_or, scan_boundingbox, scan_event,
    shift, BitImage, Direction, PixelCoord, SeedSpec, SIZE,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_bits(seed: u64, density: f64) -> BitImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    BitImage::from_fn(|_, _| rng.random_bool(density))
}

fn grid(img: &BitImage) -> Vec<bool> {
    (0..SIZE * SIZE).map(|i| img.get(i / SIZE, i % SIZE)).collect()
}

/// Depth-first search over a plain bool grid, 4-connected.
fn dfs_reach(mask: &[bool], seeds: &[(usize, usize)]) -> Vec<bool> {
    let mut seen = vec![false; SIZE * SIZE];
    let mut stack: Vec<(usize, usize)> = seeds.iter().copied().filter(|&(r, c)| mask[r * SIZE + c]).collect();
    while let Some((r, c)) = stack.pop() {
        if seen[r * SIZE + c] {
            continue;
        }
        seen[r * SIZE + c] = true;
        let mut try_push = |r: usize, c: usize| {
            if mask[r * SIZE + c] && !seen[r * SIZE + c] {
                stack.push((r, c));
            }
        };
        if r > 0 {
            try_push(r - 1, c);
        }
        if r + 1 < SIZE {
            try_push(r + 1, c);
        }
        if c > 0 {
            try_push(r, c - 1);
        }
        if c + 1 < SIZE {
            try_push(r, c + 1);
        }
    }
    seen
}

fn seed_spec() -> impl Strategy<Value = SeedSpec> {
    prop_oneof![
        Just(SeedSpec::Border),
        proptest::collection::vec(any::<(u8, u8)>(), 1..6)
            .prop_map(|v| SeedSpec::Points(v.into_iter().map(|(r, c)| PixelCoord::new(r, c)).collect())),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn de_morgan_and_involution(a in any::<u64>(), b in any::<u64>(), da in 0.1f64..0.9, db in 0.1f64..0.9) {
        let (a, b) = (random_bits(a, da), random_bits(b, db));
        prop_assert_eq!(bit_not(&bit_and(&a, &b)), bit_or(&bit_not(&a), &bit_not(&b)));
        prop_assert_eq!(bit_not(&bit_or(&a, &b)), bit_and(&bit_not(&a), &bit_not(&b)));
        prop_assert_eq!(bit_not(&bit_not(&a)), a.clone());
        prop_assert_eq!(bit_xor(&a, &b), bit_and(&bit_or(&a, &b), &bit_not(&bit_and(&a, &b))));
    }

    #[test]
    fn shift_moves_every_pixel(seed in any::<u64>(), k in 0usize..300) {
        let a = random_bits(seed, 0.3);
        for dir in Direction::ALL {
            let s = shift(&a, dir, k);
            let (dr, dc): (i64, i64) = match dir {
                Direction::North => (-1, 0),
                Direction::South => (1, 0),
                Direction::East => (0, 1),
                Direction::West => (0, -1),
            };
            let want = BitImage::from_fn(|r, c| {
                let (sr, sc) = (r as i64 - dr * k as i64, c as i64 - dc * k as i64);
                (0..SIZE as i64).contains(&sr) && (0..SIZE as i64).contains(&sc) && a.get(sr as usize, sc as usize)
            });
            prop_assert_eq!(s, want);
        }
    }

    #[test]
    fn flood_is_subset_idempotent_and_matches_dfs(seed in any::<u64>(), density in 0.2f64..0.8, seeds in seed_spec()) {
        let mask = random_bits(seed, density);
        let out = flood(&mask, &seeds);
        prop_assert!(out.is_subset_of(&mask));
        let starts: Vec<(usize, usize)> = match &seeds {
            SeedSpec::Border => (0..SIZE).flat_map(|i| [(0, i), (SIZE - 1, i), (i, 0), (i, SIZE - 1)]).collect(),
            SeedSpec::Points(ps) => ps.iter().map(|p| (usize::from(p.row), usize::from(p.col))).collect(),
        };
        prop_assert_eq!(grid(&out), dfs_reach(&grid(&mask), &starts));
        // flooding the result again from the seeds that survived changes nothing
        let again = match &seeds {
            SeedSpec::Border => flood(&out, &SeedSpec::Border),
            SeedSpec::Points(ps) => flood(&out, &SeedSpec::Points(ps.iter().copied().filter(|p| out.at(*p)).collect())),
        };
        prop_assert_eq!(again, out);
    }

    #[test]
    fn scans_agree_with_pixels(seed in any::<u64>(), density in 0.0f64..0.01) {
        let a = random_bits(seed, density);
        let ones: Vec<PixelCoord> = a.iter_ones().collect();
        prop_assert_eq!(global_or(&a), !ones.is_empty());
        prop_assert_eq!(scan_event(&a), ones.first().copied());
        match scan_boundingbox(&a) {
            None => prop_assert!(ones.is_empty()),
            Some(b) => {
                prop_assert_eq!(b.min.row, ones.iter().map(|p| p.row).min().unwrap());
                prop_assert_eq!(b.max.row, ones.iter().map(|p| p.row).max().unwrap());
                prop_assert_eq!(b.min.col, ones.iter().map(|p| p.col).min().unwrap());
                prop_assert_eq!(b.max.col, ones.iter().map(|p| p.col).max().unwrap());
            }
        }
    }

    #[test]
    fn component_areas_partition_the_ones(seed in any::<u64>(), density in 0.05f64..0.7) {
        let a = random_bits(seed, density);
        let comps = components(&a);
        prop_assert_eq!(comps.len(), count_components(&a));
        prop_assert_eq!(comps.iter().map(|c| c.area).sum::<u32>(), a.count_ones());
        for c in comps.iter().take(20) {
            let blob = flood(&a, &SeedSpec::point(c.first));
            prop_assert_eq!(blob.count_ones(), c.area);
            prop_assert_eq!(scan_boundingbox(&blob), Some(c.bbox));
        }
    }
}
