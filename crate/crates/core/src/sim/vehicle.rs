use serde::{Deserialize, Serialize};

use crate::guidance::SteeringCommand;
use crate::math;

/// Car-like vehicle, kinematic bicycle model. The reference point is the
/// centre of the rear axle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VehicleParams {
    pub wheelbase: f64,
    pub width: f64,
    pub length: f64,
    /// Body length behind the rear axle.
    pub rear_overhang: f64,
    pub max_steer: f64,
    /// Servo slew limit, rad/s.
    pub steer_rate: f64,
    /// Commanded (and held) speed, m/s.
    pub v_cmd: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self { wheelbase: 0.26, width: 0.18, length: 0.40, rear_overhang: 0.07, max_steer: 0.45, steer_rate: 8.0, v_cmd: 2.2 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    pub x: f64,
    pub y: f64,
    /// Heading, radians counter-clockwise from +x.
    pub theta: f64,
    /// Front-wheel angle, positive left.
    pub steer: f64,
    pub speed: f64,
}

impl VehicleState {
    pub fn at(x: f64, y: f64, theta: f64) -> Self {
        Self { x, y, theta, steer: 0.0, speed: 0.0 }
    }

    pub fn position(&self) -> [f64; 2] {
        [self.x, self.y]
    }

    pub fn forward(&self) -> [f64; 2] {
        [math::cos(self.theta), math::sin(self.theta)]
    }
}

/// One explicit Euler step: the wheel slews towards the command at the
/// servo rate, then position and heading advance at the commanded speed.
pub fn step_vehicle(state: &VehicleState, cmd: &SteeringCommand, dt: f64, params: &VehicleParams) -> VehicleState {
    let target = cmd.angle.clamp(-params.max_steer, params.max_steer);
    let max = params.steer_rate * dt;
    let steer = (state.steer + (target - state.steer).clamp(-max, max)).clamp(-params.max_steer, params.max_steer);
    let v = params.v_cmd.max(0.0);
    VehicleState {
        x: state.x + v * math::cos(state.theta) * dt,
        y: state.y + v * math::sin(state.theta) * dt,
        theta: math::wrap_angle(state.theta + v / params.wheelbase * math::tan(steer) * dt),
        steer,
        speed: v,
    }
}
