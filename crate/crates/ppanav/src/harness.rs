//! The closed loop: render, detect, steer, integrate.

use std::path::Path;
use std::time::Instant;

use ppanav_core::guidance::{compute_errors, ReferenceMarker, SlalomScheduler, SteeringCommand, SteeringController};
use ppanav_core::marker::{slalom_sightings_timed, DetectionMode, DiskDetector, PipelineConfig, StageClock, StageTimings};
use ppanav_core::ppa::PixelCoord;
use ppanav_core::sim::{collision, gate_passed, render, BoardTruth, step_vehicle, Course, RenderOptions, SpotNoise, VehicleState};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{RunConfig, Scenario};
use crate::trajectory::{format_points, LogMode, TrajectoryRecord};

/// Wall clock for stage timings.
#[derive(Clone, Copy, Debug)]
pub struct StdClock(Instant);

impl Default for StdClock {
    fn default() -> Self {
        Self(Instant::now())
    }
}

impl StageClock for StdClock {
    fn now_ns(&mut self) -> u64 {
        self.0.elapsed().as_nanos() as u64
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CalibrationError {
    #[error("calibration saw {found} disks in {mode} mode; need {expected} in direct mode")]
    Incomplete { found: usize, expected: usize, mode: &'static str },
    #[error("no marker in view")]
    NoTarget,
    #[error("disk centres do not form a quadrangle")]
    Degenerate,
    #[error("reference file: {0}")]
    File(String),
}

/// Reference-marker file written by `calibrate`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceFile {
    /// Quadrant order: top-left, top-right, bottom-left, bottom-right.
    pub points: [[u8; 2]; 4],
    pub centroid: [u8; 2],
}

impl From<&ReferenceMarker> for ReferenceFile {
    fn from(r: &ReferenceMarker) -> Self {
        let c = r.centroid();
        Self { points: r.points.map(|p| [p.row, p.col]), centroid: [c.row, c.col] }
    }
}

impl ReferenceFile {
    pub fn marker(&self) -> Result<ReferenceMarker, CalibrationError> {
        ReferenceMarker::new(self.points.map(|[r, c]| PixelCoord::new(r, c))).map_err(|_| CalibrationError::Degenerate)
    }

    pub fn load(path: &Path) -> Result<ReferenceMarker, CalibrationError> {
        let text = std::fs::read_to_string(path).map_err(|e| CalibrationError::File(format!("{}: {e}", path.display())))?;
        let f: Self = serde_json::from_str(&text).map_err(|e| CalibrationError::File(format!("{}: {e}", path.display())))?;
        f.marker()
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self).expect("plain data") + "\n")
    }
}

/// Renders the scenario from `pose` and turns the detection into a
/// reference marker. Only a direct detection of all disks is accepted.
pub fn calibrate(
    scenario: &Scenario,
    pose: &VehicleState,
    pipeline: &PipelineConfig,
) -> Result<ReferenceMarker, CalibrationError> {
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.render.seed);
    let frame = render(&scenario.course, pose, &scenario.camera, &scenario.render, &mut rng);
    let mut det = DiskDetector::new(pipeline.clone());
    let obs = det.detect(&frame.image).map_err(|_| CalibrationError::NoTarget)?;
    if obs.mode != DetectionMode::Direct || obs.points.len() != 4 || pipeline.disc_num != 4 {
        let mode = if obs.mode == DetectionMode::Direct { "direct" } else { "fallback" };
        return Err(CalibrationError::Incomplete { found: obs.points.len(), expected: 4, mode });
    }
    let pts: [PixelCoord; 4] = obs.points.try_into().expect("four points");
    ReferenceMarker::new(pts).map_err(|_| CalibrationError::Degenerate)
}

/// Head-on pose `distance` metres (camera to board) in front of gate `index`.
pub fn head_on_pose(scenario: &Scenario, index: usize, distance: f64) -> VehicleState {
    let g = &scenario.course.gates[index];
    let back = distance + scenario.camera.mount_offset;
    let (s, c) = g.facing.sin_cos();
    VehicleState::at(g.centre[0] - back * c, g.centre[1] - back * s, g.facing)
}

/// Reference captured head-on in front of the first gate, with the gate
/// alone in a noise-free arena.
pub fn auto_reference(scenario: &Scenario, distance: f64, pipeline: &PipelineConfig) -> Result<ReferenceMarker, CalibrationError> {
    let pose = head_on_pose(scenario, 0, distance);
    let isolated = Scenario {
        course: Course { gates: vec![scenario.course.gates[0]], clutter: Vec::new(), ..scenario.course.clone() },
        render: RenderOptions { sigma: 0.0, spots: SpotNoise { count: 0, ..scenario.render.spots.clone() }, ..scenario.render.clone() },
        ..scenario.clone()
    };
    calibrate(&isolated, &pose, pipeline)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Completed,
    Collision,
    OutOfBounds,
    Timeout,
}

/// Mean and percentiles of one timing category, nanoseconds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageStats {
    pub mean_ns: f64,
    pub p50_ns: u64,
    pub p99_ns: u64,
}

impl StageStats {
    pub fn from_samples(samples: &[u64]) -> Self {
        if samples.is_empty() {
            return Self::default();
        }
        let mut s = samples.to_vec();
        s.sort_unstable();
        let pct = |q: f64| s[((q * (s.len() - 1) as f64).round() as usize).min(s.len() - 1)];
        Self { mean_ns: s.iter().map(|&v| v as f64).sum::<f64>() / s.len() as f64, p50_ns: pct(0.5), p99_ns: pct(0.99) }
    }
}

/// Per-frame timing samples in the reported categories.
#[derive(Clone, Debug, Default)]
pub struct TimingSamples {
    pub threshold: Vec<u64>,
    pub flooding: Vec<u64>,
    pub denoise: Vec<u64>,
    pub centroid: Vec<u64>,
    pub control: Vec<u64>,
}

impl TimingSamples {
    pub fn push(&mut self, t: &StageTimings, control_ns: u64) {
        self.threshold.push(t.threshold_ns);
        self.flooding.push(t.flooding_ns);
        self.denoise.push(t.denoise_ns);
        self.centroid.push(t.centroid_ns);
        self.control.push(control_ns);
    }

    pub fn report(&self) -> TimingReport {
        let total: Vec<u64> = (0..self.threshold.len())
            .map(|i| self.threshold[i] + self.flooding[i] + self.denoise[i] + self.centroid[i] + self.control[i])
            .collect();
        TimingReport {
            threshold: StageStats::from_samples(&self.threshold),
            flooding: StageStats::from_samples(&self.flooding),
            denoise: StageStats::from_samples(&self.denoise),
            centroid: StageStats::from_samples(&self.centroid),
            control: StageStats::from_samples(&self.control),
            total: StageStats::from_samples(&total),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub threshold: StageStats,
    pub flooding: StageStats,
    pub denoise: StageStats,
    pub centroid: StageStats,
    pub control: StageStats,
    pub total: StageStats,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub termination: Termination,
    pub gates_total: usize,
    pub gates_passed: usize,
    pub collisions: u32,
    pub steps: usize,
    pub elapsed_s: f64,
    pub path_length_m: f64,
    /// Path length over elapsed time.
    pub avg_speed: f64,
    pub max_speed: f64,
    /// Fraction of control steps with a target in view.
    pub detection_rate: f64,
    /// Fraction of detections that came from fallback tracking.
    pub fallback_rate: f64,
    /// Simulation times at which each gate was passed.
    pub gate_times: Vec<f64>,
    pub timings: TimingReport,
}

pub struct RunOutcome {
    pub records: Vec<TrajectoryRecord>,
    pub metrics: MetricsReport,
    pub reference: Option<ReferenceMarker>,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error("reference marker: {0}")]
    Reference(#[from] CalibrationError),
}

enum Guide {
    Gates { detector: DiskDetector<StdClock>, controller: SteeringController, reference: ReferenceMarker },
    Slalom { scheduler: SlalomScheduler, clock: StdClock },
}

/// Runs `scenario` under `cfg` until the course is completed, the vehicle
/// hits something or leaves the arena, or `max_time_s` runs out.
pub fn run_scenario(cfg: &RunConfig, scenario: &Scenario) -> Result<RunOutcome, RunError> {
    cfg.validate_loop()?;
    let course = &scenario.course;
    let params = &scenario.vehicle;
    let mut guide = if scenario.is_slalom() {
        let mut sc = cfg.slalom.clone();
        sc.wheelbase_m = params.wheelbase;
        sc.steer_rate = params.steer_rate;
        sc.max_steer = params.max_steer;
        Guide::Slalom { scheduler: SlalomScheduler::new(sc), clock: StdClock::default() }
    } else {
        let reference = match &cfg.reference {
            Some(path) => ReferenceFile::load(path)?,
            None => auto_reference(scenario, cfg.reference_distance_m, &cfg.pipeline)?,
        };
        Guide::Gates {
            detector: DiskDetector::with_clock(cfg.pipeline.clone(), StdClock::default()),
            controller: SteeringController::new(cfg.guidance.clone()),
            reference,
        }
    };
    let reference = match &guide {
        Guide::Gates { reference, .. } => Some(*reference),
        Guide::Slalom { .. } => None,
    };

    let dt = 1.0 / cfg.control_hz;
    let substeps = (cfg.physics_hz / cfg.control_hz).round().max(1.0) as usize;
    let h = dt / substeps as f64;
    let max_steps = (cfg.max_time_s * cfg.control_hz).ceil() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.render.seed);
    let mut state = course.start_state();
    state.speed = params.v_cmd.max(0.0);

    let mut records = Vec::with_capacity(max_steps.min(1 << 16));
    let mut samples = TimingSamples::default();
    let mut next_gate = 0;
    let mut gate_times = Vec::new();
    let mut path = 0.0;
    let mut max_speed: f64 = 0.0;
    let (mut seen, mut fallback) = (0usize, 0usize);
    let mut termination = Termination::Timeout;
    let mut steps = 0;

    while steps < max_steps {
        let t = steps as f64 * dt;
        let frame = render(course, &state, &scenario.camera, &scenario.render, &mut rng);
        let mut rec = TrajectoryRecord {
            t,
            x: state.x,
            y: state.y,
            theta: state.theta,
            v: state.speed,
            steer: 0.0,
            d: None,
            delta: None,
            mode: LogMode::Lost,
            gate_index: next_gate,
            wheel: state.steer,
            out_d: None,
            out_delta: None,
            centroid_row: None,
            centroid_col: None,
            points: String::new(),
            target: None,
        };
        let cmd = match &mut guide {
            Guide::Gates { detector, controller, reference } => {
                let result = detector.detect(&frame.image);
                let stage = detector.timings();
                let c0 = detector.clock_mut().now_ns();
                let cmd = match &result {
                    Ok(obs) if obs.points.len() == 4 => {
                        let trace = controller.on_target(&compute_errors(obs, reference));
                        rec.mode = if obs.mode == DetectionMode::Direct { LogMode::Direct } else { LogMode::Fallback };
                        rec.d = Some(trace.e_d);
                        rec.delta = Some(trace.e_delta);
                        rec.out_d = Some(trace.out_d);
                        rec.out_delta = Some(trace.out_delta);
                        rec.centroid_row = Some(obs.centroid.row);
                        rec.centroid_col = Some(obs.centroid.col);
                        rec.points = format_points(&obs.points.iter().map(|p| (p.row, p.col)).collect::<Vec<_>>());
                        rec.target = truth_target(&frame.truth, (f64::from(obs.centroid.row), f64::from(obs.centroid.col)));
                        trace.command
                    }
                    _ => controller.on_loss(),
                };
                let c1 = detector.clock_mut().now_ns();
                samples.push(&stage, c1 - c0);
                cmd
            }
            Guide::Slalom { scheduler, clock } => {
                let (sightings, stage) = slalom_sightings_timed(&frame.image, &cfg.pipeline, clock);
                let c0 = clock.now_ns();
                let step = scheduler.step(&sightings, state.speed, dt);
                let c1 = clock.now_ns();
                samples.push(&stage, c1 - c0);
                log::debug!(
                    "t={t:.3} phase={} heading={:.3} sightings={:?}",
                    step.phase.name(),
                    scheduler.heading(),
                    sightings.iter().map(|s| (s.centre().col, (s.range_m * 100.0).round() / 100.0, s.command.map(|c| c.angle_deg))).collect::<Vec<_>>()
                );
                if let Some(s) = sightings.first() {
                    rec.mode = LogMode::Slalom;
                    let c = s.centre();
                    rec.d = Some(f64::from(c.col) - scheduler.cfg.centre_col);
                    rec.centroid_row = Some(c.row);
                    rec.centroid_col = Some(c.col);
                    rec.target = truth_target(&frame.truth, (f64::from(c.row), f64::from(c.col)));
                }
                SteeringCommand::limited(step.angle, params.max_steer)
            }
        };
        rec.steer = cmd.angle;
        match rec.mode {
            LogMode::Lost => {}
            LogMode::Fallback => {
                seen += 1;
                fallback += 1;
            }
            _ => seen += 1,
        }
        records.push(rec);
        steps += 1;

        let mut done = None;
        for k in 0..substeps {
            let prev = state;
            state = step_vehicle(&prev, &cmd, h, params);
            path += (state.x - prev.x).hypot(state.y - prev.y);
            max_speed = max_speed.max(state.speed);
            if next_gate < course.gates.len() && gate_passed(&prev, &state, &course.gates[next_gate]) {
                next_gate += 1;
                gate_times.push(t + (k + 1) as f64 * h);
            }
            if collision(&state, course, params) {
                done = Some(Termination::Collision);
            } else if !course.bounds.contains(state.position()) {
                done = Some(Termination::OutOfBounds);
            } else if next_gate == course.gates.len() {
                done = Some(Termination::Completed);
            }
            if done.is_some() {
                break;
            }
        }
        if let Some(d) = done {
            termination = d;
            break;
        }
    }

    let elapsed_s = steps as f64 * dt;
    let metrics = MetricsReport {
        termination,
        gates_total: course.gates.len(),
        gates_passed: next_gate,
        collisions: u32::from(termination == Termination::Collision),
        steps,
        elapsed_s,
        path_length_m: path,
        avg_speed: if elapsed_s > 0.0 { path / elapsed_s } else { 0.0 },
        max_speed,
        detection_rate: if steps > 0 { seen as f64 / steps as f64 } else { 0.0 },
        fallback_rate: if seen > 0 { fallback as f64 / seen as f64 } else { 0.0 },
        gate_times,
        timings: samples.report(),
    };
    log::info!(
        "run finished: {:?}, {}/{} gates in {:.2} s",
        metrics.termination,
        metrics.gates_passed,
        metrics.gates_total,
        metrics.elapsed_s
    );
    Ok(RunOutcome { records, metrics, reference })
}

/// Board whose painted disks are centred within a few pixels of `centre`.
fn truth_target(truth: &[BoardTruth], centre: (f64, f64)) -> Option<usize> {
    const REACH_PX: f64 = 12.0;
    truth
        .iter()
        .filter_map(|b| {
            let pts: Vec<(f64, f64)> = b.pixel_centroid.iter().flatten().copied().collect();
            if pts.is_empty() {
                return None;
            }
            let n = pts.len() as f64;
            let (r, c) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0 / n, a.1 + p.1 / n));
            Some((b.board, (r - centre.0).hypot(c - centre.1)))
        })
        .filter(|&(_, dist)| dist <= REACH_PX)
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(board, _)| board)
}

/// Loads the scenario named by `cfg` and runs it.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome, RunError> {
    let scenario = cfg.scenario()?;
    run_scenario(cfg, &scenario)
}
