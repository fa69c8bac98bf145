//! Steering from marker observations.
//!
//! The four disk centres are matched to a reference marker by quadrant.
//! Two error terms drive the front wheels: `d`, the horizontal offset of the
//! observed centroid from the reference centroid, and `delta`, the
//! horizontal skew between the bottom and top pairs of disks. Each goes
//! through its own discrete PID and the two outputs are summed.

mod slalom;

pub use slalom::{slalom_schedule, SlalomConfig, SlalomPhase, SlalomScheduler, SlalomStep};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::marker::MarkerObservation;
use crate::ppa::PixelCoord;

#[derive(Clone, Copy, Debug, Error, PartialEq, Eq)]
#[error("points do not fall one per quadrant around their centroid")]
pub struct DegenerateQuadrangle;

/// Four points in quadrant order plus their centroid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Quadrangle {
    /// Top-left, top-right, bottom-left, bottom-right.
    pub points: [PixelCoord; 4],
    /// Per-axis floor of the mean.
    pub centroid: PixelCoord,
}

/// Assigns each point to a quadrant around the mean of all four.
///
/// The comparison is done in integers (`4 * p - sum`), so a point exactly on
/// an axis through the mean is detected without rounding.
pub fn order_by_quadrant(points: &[PixelCoord; 4]) -> Result<Quadrangle, DegenerateQuadrangle> {
    let sr: i32 = points.iter().map(|p| i32::from(p.row)).sum();
    let sc: i32 = points.iter().map(|p| i32::from(p.col)).sum();
    let mut slots: [Option<PixelCoord>; 4] = [None; 4];
    for &p in points {
        let dr = 4 * i32::from(p.row) - sr;
        let dc = 4 * i32::from(p.col) - sc;
        if dr == 0 || dc == 0 {
            return Err(DegenerateQuadrangle);
        }
        let k = usize::from(dr > 0) * 2 + usize::from(dc > 0);
        if slots[k].replace(p).is_some() {
            return Err(DegenerateQuadrangle);
        }
    }
    Ok(Quadrangle {
        points: slots.map(|s| s.expect("four points, four distinct slots")),
        centroid: PixelCoord::new((sr / 4) as u8, (sc / 4) as u8),
    })
}

/// Disk centres of the marker as seen from the desired pose.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceMarker {
    pub points: [PixelCoord; 4],
}

impl ReferenceMarker {
    /// Builds a reference from four points in any order.
    pub fn new(points: [PixelCoord; 4]) -> Result<Self, DegenerateQuadrangle> {
        Ok(Self { points: order_by_quadrant(&points)?.points })
    }

    pub fn centroid(&self) -> PixelCoord {
        crate::marker::mean_floor(&self.points)
    }
}

/// Error terms in pixels.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ControlError {
    /// Observed minus reference centroid column.
    pub d: f64,
    /// `(c3 + c4) - (c1 + c2)` over the observed columns.
    pub delta: f64,
}

/// Errors of a quadrant-ordered observation against the reference.
///
/// Only the first four points are used; an observation that carries fewer
/// yields zero skew.
pub fn compute_errors(obs: &MarkerObservation, reference: &ReferenceMarker) -> ControlError {
    let d = f64::from(obs.centroid.col) - f64::from(reference.centroid().col);
    let delta = match obs.points.as_slice() {
        [p1, p2, p3, p4, ..] => {
            let c = |p: &PixelCoord| f64::from(p.col);
            (c(p3) + c(p4)) - (c(p1) + c(p2))
        }
        _ => 0.0,
    };
    ControlError { d, delta }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
}

impl PidGains {
    pub const fn new(kp: f64, ki: f64, kd: f64) -> Self {
        Self { kp, ki, kd }
    }

    pub const fn proportional(kp: f64) -> Self {
        Self::new(kp, 0.0, 0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PidState {
    pub integral: f64,
    pub prev_error: f64,
    /// Bound on `|integral|`.
    pub integral_limit: f64,
}

impl Default for PidState {
    fn default() -> Self {
        Self::new(f64::INFINITY)
    }
}

impl PidState {
    pub fn new(integral_limit: f64) -> Self {
        Self { integral: 0.0, prev_error: 0.0, integral_limit }
    }

    pub fn reset(&mut self) {
        self.integral = 0.0;
        self.prev_error = 0.0;
    }
}

/// One step of the discrete PID, no time factor:
/// `kp*e + ki*I + kd*(e - e_prev)` with `I` the clamped running sum
/// including `e`.
pub fn pid_step(state: &mut PidState, gains: &PidGains, e: f64) -> f64 {
    let lim = state.integral_limit;
    state.integral = (state.integral + e).clamp(-lim, lim);
    let out = gains.kp * e + gains.ki * state.integral + gains.kd * (e - state.prev_error);
    state.prev_error = e;
    out
}

/// Front-wheel command, radians, positive turns left.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SteeringCommand {
    pub angle: f64,
    pub clamped: bool,
}

impl SteeringCommand {
    /// Clamps `angle` to `±max_steer`, flagging when it had to.
    pub fn limited(angle: f64, max_steer: f64) -> Self {
        let out = angle.clamp(-max_steer, max_steer);
        Self { angle: out, clamped: out != angle }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GuidanceConfig {
    /// Gains on the centroid offset `d`.
    pub gains_d: PidGains,
    /// Gains on the skew `delta`.
    pub gains_delta: PidGains,
    /// Radians of steering per unit of summed PID output. The applied angle
    /// is the negative of this times the output, so a marker right of the
    /// reference steers right.
    pub pixels_to_radians: f64,
    pub max_steer: f64,
    /// Frames the last command is held after the target is lost.
    pub hold_frames: u32,
    /// Per-frame decay factor after the hold.
    pub decay: f64,
}

impl Default for GuidanceConfig {
    fn default() -> Self {
        Self {
            gains_d: PidGains::new(0.006, 0.0, 0.002),
            gains_delta: PidGains::new(0.003, 0.0, 0.001),
            pixels_to_radians: 1.0,
            max_steer: 0.45,
            hold_frames: 5,
            decay: 0.5,
        }
    }
}

/// Per-channel telemetry of one steering step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SteeringTrace {
    pub e_d: f64,
    pub e_delta: f64,
    pub out_d: f64,
    pub out_delta: f64,
    pub command: SteeringCommand,
}

/// Sums the two PID channels and converts to a clamped wheel angle.
pub fn steering_output(
    err: &ControlError,
    states: &mut [PidState; 2],
    gains_d: &PidGains,
    gains_delta: &PidGains,
    cfg: &GuidanceConfig,
) -> SteeringTrace {
    let out_d = pid_step(&mut states[0], gains_d, err.d);
    let out_delta = pid_step(&mut states[1], gains_delta, err.delta);
    let angle = -cfg.pixels_to_radians * (out_d + out_delta);
    SteeringTrace {
        e_d: err.d,
        e_delta: err.delta,
        out_d,
        out_delta,
        command: SteeringCommand::limited(angle, cfg.max_steer),
    }
}

/// Command while no target is visible: `last` for `hold_frames` frames,
/// then multiplied by `decay` once per extra frame.
pub fn loss_policy(last: SteeringCommand, frames_lost: u32, cfg: &GuidanceConfig) -> SteeringCommand {
    if frames_lost <= cfg.hold_frames {
        return last;
    }
    let k = frames_lost - cfg.hold_frames;
    let factor = crate::math::powi(cfg.decay, k.min(i32::MAX as u32) as i32);
    SteeringCommand { angle: last.angle * factor, clamped: false }
}

/// Gate-following controller: PID state for both channels plus the last
/// command for target-loss handling.
#[derive(Clone, Debug)]
pub struct SteeringController {
    pub cfg: GuidanceConfig,
    states: [PidState; 2],
    last: SteeringCommand,
    frames_lost: u32,
}

impl SteeringController {
    pub fn new(cfg: GuidanceConfig) -> Self {
        let limit = |g: &PidGains| {
            if g.ki > 0.0 {
                cfg.max_steer / (g.ki * cfg.pixels_to_radians.abs().max(f64::MIN_POSITIVE))
            } else {
                f64::INFINITY
            }
        };
        let states = [PidState::new(limit(&cfg.gains_d)), PidState::new(limit(&cfg.gains_delta))];
        Self { cfg, states, last: SteeringCommand::default(), frames_lost: 0 }
    }

    pub fn states(&self) -> &[PidState; 2] {
        &self.states
    }

    pub fn reset(&mut self) {
        self.states.iter_mut().for_each(PidState::reset);
        self.last = SteeringCommand::default();
        self.frames_lost = 0;
    }

    pub fn on_target(&mut self, err: &ControlError) -> SteeringTrace {
        let cfg = &self.cfg;
        let trace = steering_output(err, &mut self.states, &cfg.gains_d, &cfg.gains_delta, cfg);
        self.last = trace.command;
        self.frames_lost = 0;
        trace
    }

    pub fn on_loss(&mut self) -> SteeringCommand {
        self.frames_lost = self.frames_lost.saturating_add(1);
        loss_policy(self.last, self.frames_lost, &self.cfg)
    }
}
