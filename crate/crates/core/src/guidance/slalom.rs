//! Turn scheduling for a line of slalom markers.
//!
//! The vehicle centres the nearest marker in the image until it is within
//! the turn range, then holds a fixed wheel angle until the heading change
//! predicted from speed, wheelbase and servo slew reaches the commanded
//! angle and straightens the wheels. Once it has driven far enough to be
//! past the marker it turns back onto its start-up heading, which is taken
//! to be the direction of the marker line, and looks for the next one.
//! There is no heading sensor; heading is dead-reckoned throughout.

use serde::{Deserialize, Serialize};

use crate::marker::{SlalomCommand, SlalomSighting};
use crate::math;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SlalomConfig {
    /// Range at which the turn starts, metres.
    pub turn_range_m: f64,
    /// Centering gain, radians of steer per pixel of column offset.
    pub center_kp: f64,
    /// Image column the marker is steered towards.
    pub centre_col: f64,
    /// Wheel angle held during a turn, radians.
    pub turn_steer: f64,
    /// Sightings closer than this are ignored after a turn, so the marker
    /// just passed is not picked up again.
    pub reacquire_min_range_m: f64,
    pub wheelbase_m: f64,
    /// Servo slew rate, rad/s.
    pub steer_rate: f64,
    pub max_steer: f64,
    /// Distance from the start of a turn after which the vehicle turns back
    /// onto its start-up heading; zero or less keeps the turned heading.
    pub return_after_m: f64,
}

impl Default for SlalomConfig {
    fn default() -> Self {
        Self {
            turn_range_m: 0.80,
            center_kp: 0.004,
            centre_col: 127.5,
            turn_steer: 0.30,
            reacquire_min_range_m: 1.2,
            wheelbase_m: 0.26,
            steer_rate: 8.0,
            max_steer: 0.45,
            return_after_m: 1.2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manoeuvre {
    /// +1 for a left turn, -1 for right.
    pub sign: f64,
    /// Heading change to make, radians.
    pub target: f64,
    /// Dead-reckoned heading change so far.
    pub turned: f64,
    /// Distance driven since the outward turn began.
    pub travelled: f64,
    /// Set on the leg that turns back onto the original heading.
    pub back: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "phase", rename_all = "snake_case")]
pub enum SlalomPhase {
    /// No marker in view.
    Searching,
    /// Steering the nearest marker to the image centre.
    Centering,
    /// Holding the wheel angle of a turn.
    Turning(Manoeuvre),
    /// Wheels returning to straight after a turn.
    Settling(Manoeuvre),
    /// Driving straight past the marker before turning back.
    Passing(Manoeuvre),
}

impl SlalomPhase {
    pub fn name(&self) -> &'static str {
        match self {
            SlalomPhase::Searching => "searching",
            SlalomPhase::Centering => "centering",
            SlalomPhase::Turning(_) => "turning",
            SlalomPhase::Settling(_) => "settling",
            SlalomPhase::Passing(_) => "passing",
        }
    }
}

/// Phase a fresh command calls for on its own: centre while farther than
/// the turn range, turn once inside it.
pub fn slalom_schedule(cmd: &SlalomCommand, cfg: &SlalomConfig) -> SlalomPhase {
    if cmd.range_m > cfg.turn_range_m {
        SlalomPhase::Centering
    } else {
        SlalomPhase::Turning(Manoeuvre {
            sign: cmd.direction.sign(),
            target: cmd.angle_deg.to_radians(),
            turned: 0.0,
            travelled: 0.0,
            back: false,
        })
    }
}

/// Output of one scheduler step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlalomStep {
    /// Wheel angle, radians, positive left.
    pub angle: f64,
    pub phase: SlalomPhase,
    /// Range of the marker being tracked, if any.
    pub range_m: Option<f64>,
    /// Set on the step the outward turn finishes settling, with its
    /// dead-reckoned heading change.
    pub completed_turn: Option<f64>,
}

/// Slalom state machine; one per vehicle.
#[derive(Clone, Debug)]
pub struct SlalomScheduler {
    pub cfg: SlalomConfig,
    phase: SlalomPhase,
    /// Last command decoded for the tracked marker.
    pending: Option<SlalomCommand>,
    /// Model of the actual wheel angle.
    wheel: f64,
    /// Require sightings beyond the re-acquire range.
    after_turn: bool,
    /// Dead-reckoned heading relative to the heading at start-up.
    heading: f64,
}

impl SlalomScheduler {
    pub fn new(cfg: SlalomConfig) -> Self {
        Self { cfg, phase: SlalomPhase::Searching, pending: None, wheel: 0.0, after_turn: false, heading: 0.0 }
    }

    /// Dead-reckoned heading change since start-up, radians, positive left.
    pub fn heading(&self) -> f64 {
        self.heading
    }

    pub fn phase(&self) -> SlalomPhase {
        self.phase
    }

    fn yaw_rate(&self, wheel: f64, speed: f64) -> f64 {
        speed / self.cfg.wheelbase_m * math::tan(wheel)
    }

    /// Heading still to come from unwinding `wheel` to zero at the slew rate.
    fn unwind(&self, wheel: f64, speed: f64) -> f64 {
        let t = wheel.abs() / self.cfg.steer_rate;
        // tan is close to linear over the steer range; average of the ramp
        speed / self.cfg.wheelbase_m * math::tan(wheel.abs()) * t / 2.0
    }

    fn slew_model(&mut self, cmd: f64, dt: f64) {
        let max = self.cfg.steer_rate * dt;
        self.wheel += (cmd - self.wheel).clamp(-max, max);
    }

    /// Advances one control period of `dt` seconds at `speed` m/s.
    /// `sightings` are ordered nearest first.
    pub fn step(&mut self, sightings: &[SlalomSighting], speed: f64, dt: f64) -> SlalomStep {
        let cfg = self.cfg.clone();
        let mut completed_turn = None;
        let mut range_m = None;
        self.heading += self.yaw_rate(self.wheel, speed) * dt;
        let angle = match self.phase {
            SlalomPhase::Turning(mut m) => {
                m.turned += self.yaw_rate(self.wheel, speed).abs() * dt;
                m.travelled += speed * dt;
                if m.turned + self.unwind(self.wheel, speed) >= m.target {
                    self.phase = SlalomPhase::Settling(m);
                    0.0
                } else {
                    self.phase = SlalomPhase::Turning(m);
                    m.sign * cfg.turn_steer
                }
            }
            SlalomPhase::Settling(mut m) => {
                m.turned += self.yaw_rate(self.wheel, speed).abs() * dt;
                m.travelled += speed * dt;
                self.phase = if self.wheel.abs() >= 1e-9 {
                    SlalomPhase::Settling(m)
                } else if m.back {
                    SlalomPhase::Searching
                } else {
                    completed_turn = Some(m.turned);
                    if cfg.return_after_m > 0.0 { SlalomPhase::Passing(m) } else { SlalomPhase::Searching }
                };
                0.0
            }
            SlalomPhase::Passing(mut m) => {
                m.travelled += speed * dt;
                // turn back onto the start-up heading, the direction of the line
                let err = -self.heading;
                self.phase = if m.travelled < cfg.return_after_m {
                    SlalomPhase::Passing(m)
                } else if err.abs() < 1e-3 {
                    SlalomPhase::Searching
                } else {
                    SlalomPhase::Turning(Manoeuvre { sign: err.signum(), target: err.abs(), turned: 0.0, back: true, ..m })
                };
                0.0
            }
            SlalomPhase::Searching | SlalomPhase::Centering => {
                let min_range = if self.after_turn { cfg.reacquire_min_range_m } else { 0.0 };
                match sightings.iter().find(|s| s.range_m >= min_range) {
                    None => {
                        self.phase = SlalomPhase::Searching;
                        0.0
                    }
                    Some(s) => {
                        self.after_turn = false;
                        range_m = Some(s.range_m);
                        if let Some(cmd) = s.command {
                            self.pending = Some(cmd);
                        }
                        match self.pending.filter(|_| s.range_m <= cfg.turn_range_m) {
                            Some(cmd) => {
                                self.pending = None;
                                self.after_turn = true;
                                let cmd = SlalomCommand { range_m: s.range_m, ..cmd };
                                self.phase = slalom_schedule(&cmd, &cfg);
                                cmd.direction.sign() * cfg.turn_steer
                            }
                            None => {
                                self.phase = SlalomPhase::Centering;
                                -cfg.center_kp * (f64::from(s.centre().col) - cfg.centre_col)
                            }
                        }
                    }
                }
            }
        };
        let angle = angle.clamp(-cfg.max_steer, cfg.max_steer);
        self.slew_model(angle, dt);
        SlalomStep { angle, phase: self.phase, range_m, completed_turn }
    }
}
