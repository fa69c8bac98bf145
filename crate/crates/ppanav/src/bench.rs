//! Per-stage timing of the detection pipeline on rendered frames.

use std::fmt::Write as _;

use ppanav_core::guidance::{compute_errors, SteeringController};
use ppanav_core::marker::{DiskDetector, PipelineConfig, StageClock};
use ppanav_core::ppa::GreyImage;
use ppanav_core::sim::render;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::Scenario;
use crate::harness::{auto_reference, head_on_pose, StageStats, StdClock, TimingReport, TimingSamples};

/// Frame budget at 200 frames per second.
pub const FRAME_BUDGET_NS: u64 = 5_000_000;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BenchReport {
    pub iterations: usize,
    pub frames: usize,
    pub timings: TimingReport,
    pub budget_ns: u64,
}

impl BenchReport {
    pub fn within_budget(&self) -> bool {
        self.timings.total.mean_ns <= self.budget_ns as f64
    }

    /// Sum of the per-category means over the mean total.
    pub fn stage_sum_ratio(&self) -> f64 {
        let t = &self.timings;
        let sum = t.threshold.mean_ns + t.flooding.mean_ns + t.denoise.mean_ns + t.centroid.mean_ns + t.control.mean_ns;
        if t.total.mean_ns > 0.0 { sum / t.total.mean_ns } else { 1.0 }
    }

    pub fn rows(&self) -> [(&'static str, StageStats); 6] {
        let t = &self.timings;
        [
            ("threshold", t.threshold),
            ("flooding", t.flooding),
            ("denoise", t.denoise),
            ("centroid", t.centroid),
            ("control", t.control),
            ("total", t.total),
        ]
    }

    pub fn table(&self) -> String {
        let mut s = format!("{} iterations over {} frames\n", self.iterations, self.frames);
        let _ = writeln!(s, "{:<10} {:>12} {:>12} {:>12}", "stage", "mean_us", "p50_us", "p99_us");
        for (name, st) in self.rows() {
            let _ = writeln!(
                s,
                "{:<10} {:>12.2} {:>12.2} {:>12.2}",
                name,
                st.mean_ns / 1e3,
                st.p50_ns as f64 / 1e3,
                st.p99_ns as f64 / 1e3
            );
        }
        let verdict = if self.within_budget() { "within" } else { "over" };
        let _ = writeln!(s, "mean total {:.3} ms, {verdict} the {:.1} ms budget", self.timings.total.mean_ns / 1e6, self.budget_ns as f64 / 1e6);
        s
    }
}

/// Noisy views of every gate of the default course from several ranges and
/// lateral offsets, clutter included.
pub fn representative_frames() -> Vec<GreyImage> {
    let scenario = Scenario::default_gates();
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.render.seed);
    let mut out = Vec::new();
    for gate in 0..scenario.course.gates.len() {
        for (dist, lateral) in [(0.6, 0.0), (1.0, 0.1), (1.6, -0.15), (2.4, 0.2)] {
            let mut pose = head_on_pose(&scenario, gate, dist);
            let (s, c) = pose.theta.sin_cos();
            pose.x += lateral * s;
            pose.y -= lateral * c;
            out.push(render(&scenario.course, &pose, &scenario.camera, &scenario.render, &mut rng).image);
        }
    }
    out
}

/// Times `iterations` detections cycling through the representative frames.
pub fn run(iterations: usize) -> BenchReport {
    let frames = representative_frames();
    let scenario = Scenario::default_gates();
    let cfg = PipelineConfig::default();
    let reference = auto_reference(&scenario, 1.0, &cfg).expect("default course calibrates");
    let mut det = DiskDetector::with_clock(cfg, StdClock::default());
    let mut ctl = SteeringController::new(Default::default());
    let mut samples = TimingSamples::default();
    for i in 0..iterations {
        let res = det.detect(&frames[i % frames.len()]);
        let stage = det.timings();
        let c0 = det.clock_mut().now_ns();
        match res {
            Ok(obs) if obs.points.len() == 4 => {
                std::hint::black_box(ctl.on_target(&compute_errors(&obs, &reference)));
            }
            _ => {
                std::hint::black_box(ctl.on_loss());
            }
        }
        let c1 = det.clock_mut().now_ns();
        samples.push(&stage, c1 - c0);
    }
    BenchReport { iterations, frames: frames.len(), timings: samples.report(), budget_ns: FRAME_BUDGET_NS }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_schema() {
        let r = run(40);
        let names: Vec<&str> = r.rows().iter().map(|(n, _)| *n).collect();
        assert_eq!(names, ["threshold", "flooding", "denoise", "centroid", "control", "total"]);
        assert!((r.stage_sum_ratio() - 1.0).abs() < 0.1, "{}", r.stage_sum_ratio());
        assert!(r.table().contains("budget"));
    }
}
