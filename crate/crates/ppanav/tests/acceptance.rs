//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::collections::VecDeque;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use ppanav::config::{Preset, RunConfig};
use ppanav::harness::{run, RunOutcome, Termination};
use ppanav::trajectory::{write_records, TrajectoryRecord};
use ppanav_core::guidance::{pid_step, PidGains, PidState};
use ppanav_core::marker::{denoise, detect_disks, eliminate_background, DetectionMode, PipelineConfig, TrackerState};
use ppanav_core::ppa::{components, count_components, flood, threshold, BitImage, GreyImage, PixelCoord, SeedSpec, SIZE};
use ppanav_core::sim::pattern::{draw_front, FrontTruth, InkLevels, PatternLayout};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FLOOD_CASES: usize = 1000;
const FLOOD_TIME_LIMIT: Duration = Duration::from_secs(30);
const COMPONENT_CASES: usize = 200;
const CENTRE_TOL_PX: f64 = 2.0;
const FALLBACK_FRAMES: usize = 500;
const FALLBACK_MIN_RATE: f64 = 0.99;
const V_CMD: f64 = 2.2;
const SPEED_TOL: f64 = 0.05;
const LOOP_TIME_LIMIT: Duration = Duration::from_secs(120);
const STEER_MEDIAN_MAX: f64 = 0.05;
/// Centroid offsets are whole pixels, so one pixel is the finest "decrease".
const D_QUANTUM_PX: f64 = 1.0;
const PID_REL_TOL: f64 = 1e-12;
const BENCH_ITERS: usize = 300;
const FRAME_BUDGET_MS: f64 = 5.0;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

// ---- oracles ----

fn bfs_flood(mask: &[bool], seeds: &[(usize, usize)]) -> Vec<bool> {
    let mut out = vec![false; SIZE * SIZE];
    let mut queue = VecDeque::new();
    for &(r, c) in seeds {
        if mask[r * SIZE + c] && !out[r * SIZE + c] {
            out[r * SIZE + c] = true;
            queue.push_back((r, c));
        }
    }
    while let Some((r, c)) = queue.pop_front() {
        let mut visit = |r: usize, c: usize| {
            let i = r * SIZE + c;
            if mask[i] && !out[i] {
                out[i] = true;
                queue.push_back((r, c));
            }
        };
        if r > 0 {
            visit(r - 1, c);
        }
        if r + 1 < SIZE {
            visit(r + 1, c);
        }
        if c > 0 {
            visit(r, c - 1);
        }
        if c + 1 < SIZE {
            visit(r, c + 1);
        }
    }
    out
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Sorted component areas by union-find over 4-neighbours.
fn union_find_areas(pixels: &[bool]) -> Vec<u32> {
    let mut parent: Vec<usize> = (0..pixels.len()).collect();
    for r in 0..SIZE {
        for c in 0..SIZE {
            let i = r * SIZE + c;
            if !pixels[i] {
                continue;
            }
            for j in [(c + 1 < SIZE).then(|| i + 1), (r + 1 < SIZE).then(|| i + SIZE)].into_iter().flatten() {
                if pixels[j] {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    parent[a] = b;
                }
            }
        }
    }
    let mut areas = std::collections::HashMap::<usize, u32>::new();
    for i in (0..pixels.len()).filter(|&i| pixels[i]) {
        *areas.entry(find(&mut parent, i)).or_default() += 1;
    }
    let mut v: Vec<u32> = areas.into_values().collect();
    v.sort_unstable();
    v
}

fn to_bits(pixels: &[bool]) -> BitImage {
    BitImage::from_fn(|r, c| pixels[r * SIZE + c])
}

fn from_bits(img: &BitImage) -> Vec<bool> {
    (0..SIZE * SIZE).map(|i| img.get(i / SIZE, i % SIZE)).collect()
}

// ---- synthetic frames ----

struct Board {
    img: GreyImage,
    truth: FrontTruth,
}

fn board(centre: (f64, f64), scale: f64) -> Board {
    let mut img = GreyImage::filled(170);
    let truth = draw_front(&mut img, &PatternLayout::gate(), centre, scale, InkLevels::default());
    Board { img, truth }
}

/// Random fully visible board with disks of at least `min_radius_px`.
fn random_board(rng: &mut ChaCha8Rng, min_radius_px: f64) -> Board {
    let disk_r = PatternLayout::gate().disks()[0].radius;
    let side = PatternLayout::gate().side;
    let scale = rng.random_range(min_radius_px / disk_r..650.0);
    let half = side * scale / 2.0 + 2.0;
    let lim = (half, SIZE as f64 - 1.0 - half);
    let centre = (rng.random_range(lim.0..=lim.1), rng.random_range(lim.0..=lim.1));
    board(centre, scale)
}

fn within(points: &[PixelCoord], truth: &[(f64, f64)], tol: f64) -> bool {
    points.len() == truth.len()
        && points.iter().zip(truth).all(|(p, t)| (f64::from(p.row) - t.0).abs() <= tol && (f64::from(p.col) - t.1).abs() <= tol)
}

// ---- criteria ----

fn flood_equivalence() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    let mut mismatches = 0;
    for case in 0..FLOOD_CASES {
        let n = rng.random_range(8..=SIZE);
        let density = rng.random_range(0.2..=0.8);
        let border = case % 2 == 0;
        let (r0, c0) = if border {
            // park the mask in a corner so the border actually reaches it
            let off = if rng.random_bool(0.5) { 0 } else { SIZE - n };
            (off, if rng.random_bool(0.5) { 0 } else { SIZE - n })
        } else {
            (rng.random_range(0..=SIZE - n), rng.random_range(0..=SIZE - n))
        };
        let mut mask = vec![false; SIZE * SIZE];
        for r in r0..r0 + n {
            for c in c0..c0 + n {
                mask[r * SIZE + c] = rng.random_bool(density);
            }
        }
        let (spec, seeds) = if border {
            let seeds: Vec<(usize, usize)> =
                (0..SIZE).flat_map(|k| [(0, k), (SIZE - 1, k), (k, 0), (k, SIZE - 1)]).collect();
            (SeedSpec::Border, seeds)
        } else {
            let seeds: Vec<(usize, usize)> = (0..rng.random_range(1..=8))
                .map(|_| (rng.random_range(r0..r0 + n), rng.random_range(c0..c0 + n)))
                .collect();
            (SeedSpec::Points(seeds.iter().map(|&(r, c)| PixelCoord::new(r as u8, c as u8)).collect()), seeds)
        };
        if from_bits(&flood(&to_bits(&mask), &spec)) != bfs_flood(&mask, &seeds) {
            mismatches += 1;
        }
    }
    let took = start.elapsed();
    verdict(
        mismatches == 0 && took < FLOOD_TIME_LIMIT,
        format!("{mismatches}/{FLOOD_CASES} masks differ from BFS, {:.2} s (limit {} s)", took.as_secs_f64(), FLOOD_TIME_LIMIT.as_secs()),
    )
}

fn component_equivalence() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut mismatches = 0;
    for _ in 0..COMPONENT_CASES {
        let density = rng.random_range(0.02..0.7);
        let pixels: Vec<bool> = (0..SIZE * SIZE).map(|_| rng.random_bool(density)).collect();
        let img = to_bits(&pixels);
        let want = union_find_areas(&pixels);
        let mut got: Vec<u32> = components(&img).iter().map(|c| c.area).collect();
        got.sort_unstable();
        if count_components(&img) != want.len() || got != want {
            mismatches += 1;
        }
    }
    verdict(mismatches == 0, format!("{mismatches}/{COMPONENT_CASES} images differ from union-find"))
}

fn background_elimination() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cases = 100;
    let mut bad = 0;
    for _ in 0..cases {
        let b = random_board(&mut rng, 3.0);
        let out = eliminate_background(&threshold(&b.img, 128), 4);
        let want = BitImage::from_points(
            &b.truth.disk_pixels.iter().flatten().map(|&(r, c)| PixelCoord::new(r as u8, c as u8)).collect::<Vec<_>>(),
        );
        if components(&out).len() != 4 || out != want {
            bad += 1;
        }
    }
    verdict(bad == 0, format!("{bad}/{cases} ideal boards not reduced to exactly their 4 disk supports"))
}

fn denoise_criterion() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let cfg = PipelineConfig::default();
    let frames = 100;
    let (mut specks, mut survivors, mut bad_frames) = (0usize, 0usize, 0usize);
    for _ in 0..frames {
        let mut b = random_board(&mut rng, 6.0);
        let ink = threshold(&b.img, 128);
        let mut placed: Vec<(usize, usize, usize, usize)> = Vec::new();
        // black specks under 5x5 scattered over white, each with a clear margin
        for _ in 0..400 {
            let (h, w) = (rng.random_range(1..=4), rng.random_range(1..=4));
            let (r, c) = (rng.random_range(3..SIZE - 8), rng.random_range(3..SIZE - 8));
            let clear = (r - 3..r + h + 3).all(|y| (c - 3..c + w + 3).all(|x| ink.get(y, x)))
                && placed.iter().all(|&(pr, pc, ph, pw)| r + h + 3 <= pr || pr + ph + 3 <= r || c + w + 3 <= pc || pc + pw + 3 <= c);
            if clear {
                placed.push((r, c, h, w));
                for y in r..r + h {
                    for x in c..c + w {
                        b.img.set(y, x, 10);
                    }
                }
            }
            if placed.len() == 30 {
                break;
            }
        }
        let disks = eliminate_background(&threshold(&b.img, 128), cfg.flood_steps);
        let cleaned = denoise(&disks, cfg.p_step);
        specks += placed.len();
        survivors += placed
            .iter()
            .filter(|&&(r, c, h, w)| (r..r + h).any(|y| (c..c + w).any(|x| cleaned.get(y, x))))
            .count();
        let disks_survive = b.truth.disk_pixels.iter().all(|px| px.iter().any(|&(r, c)| cleaned.get(r, c)));
        let found = detect_disks(&b.img, &cfg, &mut TrackerState::default());
        let located = found.is_ok_and(|o| o.mode == DetectionMode::Direct && within(&o.points, &b.truth.disk_centres, CENTRE_TOL_PX));
        if !(disks_survive && located) {
            bad_frames += 1;
        }
    }
    verdict(
        survivors == 0 && bad_frames == 0,
        format!("{survivors}/{specks} specks survived; {bad_frames}/{frames} frames lost a disk or missed a centre by > {CENTRE_TOL_PX} px"),
    )
}

/// Paints a white band across both outlines of one side of the board.
fn break_outlines(img: &mut GreyImage, centre: (f64, f64), scale: f64, rng: &mut ChaCha8Rng) -> (usize, f64) {
    let side_px = PatternLayout::gate().side * scale;
    let side = rng.random_range(0..4usize);
    let along = rng.random_range(-0.43..0.43) * side_px;
    let width = rng.random_range(2.0..6.0);
    for r in 0..SIZE {
        for c in 0..SIZE {
            let (dr, dc) = (r as f64 - centre.0, c as f64 - centre.1);
            // (across the outline, along the outline) for the chosen side
            let (across, run) = match side {
                0 => (-dr, dc),
                1 => (dr, dc),
                2 => (-dc, dr),
                _ => (dc, dr),
            };
            if (across / side_px) > 0.30 && (run - along).abs() <= width / 2.0 && img.get(r, c) < 128 {
                img.set(r, c, 235);
            }
        }
    }
    (side, along / side_px)
}

fn fallback_tracking() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let cfg = PipelineConfig::default();
    let (mut ok, mut via_fallback) = (0, 0);
    for _ in 0..FALLBACK_FRAMES {
        let scale = rng.random_range(250.0..600.0);
        let half = PatternLayout::gate().side * scale / 2.0 + 4.0;
        let lim = (half, SIZE as f64 - 1.0 - half);
        let centre = (rng.random_range(lim.0..=lim.1), rng.random_range(lim.0..=lim.1));
        // prior frame: intact, a couple of pixels away
        let prior = board((centre.0 + rng.random_range(-2.0..2.0), centre.1 + rng.random_range(-2.0..2.0)), scale);
        let mut tracker = TrackerState::default();
        if detect_disks(&prior.img, &cfg, &mut tracker).is_err() {
            continue;
        }
        let mut now = board(centre, scale);
        break_outlines(&mut now.img, centre, scale, &mut rng);
        if let Ok(o) = detect_disks(&now.img, &cfg, &mut tracker) {
            via_fallback += usize::from(o.mode == DetectionMode::Fallback);
            ok += usize::from(within(&o.points, &now.truth.disk_centres, CENTRE_TOL_PX));
        }
    }
    let rate = ok as f64 / FALLBACK_FRAMES as f64;
    verdict(
        rate >= FALLBACK_MIN_RATE,
        format!("{ok}/{FALLBACK_FRAMES} broken frames within {CENTRE_TOL_PX} px ({via_fallback} via fallback), need {:.0}%", FALLBACK_MIN_RATE * 100.0),
    )
}

struct GateRun {
    outcome: RunOutcome,
    took: Duration,
}

fn gate_run() -> &'static GateRun {
    static RUN: OnceLock<GateRun> = OnceLock::new();
    RUN.get_or_init(|| {
        let start = Instant::now();
        let outcome = run(&RunConfig::preset(Preset::Gates)).expect("default gate course runs");
        GateRun { outcome, took: start.elapsed() }
    })
}

fn closed_loop() -> Verdict {
    let r = gate_run();
    let m = &r.outcome.metrics;
    let speed_err = (m.avg_speed - V_CMD).abs() / V_CMD;
    verdict(
        m.termination == Termination::Completed
            && m.gates_passed == 8
            && m.collisions == 0
            && speed_err <= SPEED_TOL
            && r.took < LOOP_TIME_LIMIT,
        format!(
            "{:?}, gates {}/{}, collisions {}, avg speed {:.3} m/s ({:.2}% off), wall {:.1} s",
            m.termination,
            m.gates_passed,
            m.gates_total,
            m.collisions,
            m.avg_speed,
            speed_err * 100.0,
            r.took.as_secs_f64()
        ),
    )
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    match xs.len() {
        0 => f64::NAN,
        n if n % 2 == 1 => xs[n / 2],
        n => (xs[n / 2 - 1] + xs[n / 2]) / 2.0,
    }
}

/// `d` of records looking at `gate`.
fn d_on(records: &[TrajectoryRecord], gate: usize) -> impl Iterator<Item = (f64, f64)> + '_ {
    records.iter().filter(move |r| r.target == Some(gate)).filter_map(|r| r.d.map(|d| (r.t, d)))
}

fn convergence() -> Verdict {
    let r = gate_run();
    let recs = &r.outcome.records;
    let times = &r.outcome.metrics.gate_times;
    let mut notes = Vec::new();
    let mut pass = times.len() == 8;
    for (gate, &tc) in times.iter().enumerate() {
        let med = median(recs.iter().filter(|r| r.t > tc - 0.5 && r.t <= tc).map(|r| r.steer.abs()).collect());
        let early = d_on(recs, gate).find(|&(t, _)| t >= tc - 1.0);
        let late = d_on(recs, gate).filter(|&(t, _)| t <= tc - 0.1).last();
        let ok = match (early, late) {
            (Some((_, e)), Some((_, l))) => med < STEER_MEDIAN_MAX && l.abs() <= e.abs().max(D_QUANTUM_PX),
            _ => false,
        };
        pass &= ok;
        let fmt = |x: Option<(f64, f64)>| x.map_or("-".to_string(), |(_, d)| format!("{d:.0}"));
        notes.push(format!("g{gate}: med {med:.3}, |d| {}->{}", fmt(early), fmt(late)));
    }
    verdict(pass, notes.join("; "))
}

fn slalom() -> Verdict {
    let out = run(&RunConfig::preset(Preset::Slalom)).expect("default slalom runs");
    let m = &out.metrics;
    verdict(
        m.termination == Termination::Completed && m.collisions == 0,
        format!("{:?}, markers {}/{}, collisions {}, avg speed {:.2} m/s", m.termination, m.gates_passed, m.gates_total, m.collisions, m.avg_speed),
    )
}

fn pid_recurrence() -> Verdict {
    let gains = [PidGains::new(0.5, 0.0, 0.0), PidGains::new(0.2, 0.1, 0.0), PidGains::new(1.0, 0.25, 0.5)];
    let errors: [[f64; 4]; 3] = [[1.0, 1.0, 1.0, 1.0], [2.0, -1.0, 0.25, 3.0], [10.0, 5.0, -4.0, 0.5]];
    // worked by hand: u = kp*e + ki*(running sum of e) + kd*(e - previous e)
    let expected: [[[f64; 4]; 3]; 3] = [
        [[0.5, 0.5, 0.5, 0.5], [1.0, -0.5, 0.125, 1.5], [5.0, 2.5, -2.0, 0.25]],
        [[0.3, 0.4, 0.5, 0.6], [0.6, -0.1, 0.175, 1.025], [3.0, 2.5, 0.3, 1.25]],
        [[1.75, 1.5, 1.75, 2.0], [3.5, -2.25, 1.1875, 5.4375], [17.5, 6.25, -5.75, 5.625]],
    ];
    let mut worst: f64 = 0.0;
    for (g, want_g) in gains.iter().zip(&expected) {
        for (seq, want) in errors.iter().zip(want_g) {
            let mut s = PidState::default();
            for (&e, &w) in seq.iter().zip(want) {
                worst = worst.max((pid_step(&mut s, g, e) - w).abs() / w.abs());
            }
        }
    }
    verdict(worst <= PID_REL_TOL, format!("worst relative error {worst:.2e} over 9 sequences"))
}

fn throughput() -> Verdict {
    let report = ppanav::bench::run(BENCH_ITERS);
    let mean_ms = report.timings.total.mean_ns as f64 / 1e6;
    println!("{}", report.table());
    verdict(
        mean_ms <= FRAME_BUDGET_MS,
        format!("mean pipeline {mean_ms:.3} ms/frame over {} frames (budget {FRAME_BUDGET_MS} ms)", report.frames),
    )
}

fn determinism() -> Verdict {
    let csv = |records: &[TrajectoryRecord]| {
        let mut buf = Vec::new();
        write_records(&mut buf, records).expect("in-memory CSV");
        buf
    };
    let first = csv(&gate_run().outcome.records);
    let second = csv(&run(&RunConfig::preset(Preset::Gates)).expect("rerun").records);
    verdict(first == second, format!("{} vs {} bytes, identical: {}", first.len(), second.len(), first == second))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 11] = [
        ("flood-oracle", flood_equivalence),
        ("component-oracle", component_equivalence),
        ("background-elimination", background_elimination),
        ("denoise", denoise_criterion),
        ("fallback-tracking", fallback_tracking),
        ("closed-loop-8-gates", closed_loop),
        ("steering-convergence", convergence),
        ("slalom", slalom),
        ("pid-recurrence", pid_recurrence),
        ("throughput", throughput),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let v = check();
        failed += usize::from(!v.pass);
        println!("{} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
