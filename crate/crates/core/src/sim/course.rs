use alloc::vec::Vec;
use arrayvec::ArrayVec;
use serde::{Deserialize, Serialize};

use super::pattern::{PatternKind, PatternLayout, TurnDirection};
use super::vehicle::{VehicleParams, VehicleState};
use crate::math;

/// Radius of each gate post.
pub const POST_RADIUS: f64 = 0.02;
/// Radius of the stand under a slalom marker or distractor board.
pub const STAND_RADIUS: f64 = 0.03;
/// Gate opening between the posts.
pub const GATE_WIDTH: f64 = 0.36;
/// How far beside a slalom stand the pass line reaches.
pub const SLALOM_PASS_REACH: f64 = 1.2;
/// Height of board centres above the floor; the camera sits at the same height.
pub const DEFAULT_MOUNT_HEIGHT: f64 = 0.20;

/// A printed board standing in the arena. The printed side faces
/// `-facing`, towards a vehicle travelling along `facing`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Board {
    pub centre: [f64; 2],
    /// Direction of travel past the board, radians.
    pub facing: f64,
    /// Height of the board centre.
    pub height: f64,
    pub layout: PatternLayout,
}

impl Board {
    pub fn facing_vec(&self) -> [f64; 2] {
        [math::cos(self.facing), math::sin(self.facing)]
    }

    /// Unit vector to the right of `facing`; also the board's `u` axis.
    pub fn right_vec(&self) -> [f64; 2] {
        [math::sin(self.facing), -math::cos(self.facing)]
    }
}

/// A gate or slalom marker the vehicle must pass, in course order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GatePose {
    pub centre: [f64; 2],
    /// Direction the vehicle must cross in, radians.
    pub facing: f64,
    /// Opening between the posts.
    pub width: f64,
    pub pattern: PatternLayout,
    pub mount_height: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Circle {
    pub centre: [f64; 2],
    pub radius: f64,
}

impl GatePose {
    pub fn gate(x: f64, y: f64, facing: f64) -> Self {
        Self { centre: [x, y], facing, width: GATE_WIDTH, pattern: PatternLayout::gate(), mount_height: DEFAULT_MOUNT_HEIGHT }
    }

    pub fn slalom(x: f64, y: f64, facing: f64, direction: TurnDirection, count: u8) -> Self {
        Self { pattern: PatternLayout::slalom(direction, count), ..Self::gate(x, y, facing) }
    }

    pub fn slalom_direction(&self) -> Option<TurnDirection> {
        match self.pattern.kind {
            PatternKind::Slalom { direction, .. } => Some(direction),
            _ => None,
        }
    }

    pub fn board(&self) -> Board {
        Board { centre: self.centre, facing: self.facing, height: self.mount_height, layout: self.pattern }
    }

    /// Posts of a gate, or the single stand of a slalom marker.
    pub fn obstacles(&self) -> ArrayVec<Circle, 2> {
        let mut out = ArrayVec::new();
        if self.slalom_direction().is_some() {
            out.push(Circle { centre: self.centre, radius: STAND_RADIUS });
        } else {
            let r = self.board().right_vec();
            let off = self.width / 2.0 + POST_RADIUS;
            for s in [-1.0, 1.0] {
                out.push(Circle { centre: [self.centre[0] + s * off * r[0], self.centre[1] + s * off * r[1]], radius: POST_RADIUS });
            }
        }
        out
    }

    /// Segment the reference point has to cross, as `(a, b)`. For a gate,
    /// the opening between the posts; for a slalom marker, a line from the
    /// stand out to the side the marker commands.
    pub fn pass_segment(&self) -> ([f64; 2], [f64; 2]) {
        let r = self.board().right_vec();
        let c = self.centre;
        match self.slalom_direction() {
            None => {
                let h = self.width / 2.0;
                ([c[0] - h * r[0], c[1] - h * r[1]], [c[0] + h * r[0], c[1] + h * r[1]])
            }
            Some(dir) => {
                // turning right means passing the marker on its right
                let s = -dir.sign() * SLALOM_PASS_REACH;
                (c, [c[0] + s * r[0], c[1] + s * r[1]])
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Bounds {
    pub fn contains(&self, p: [f64; 2]) -> bool {
        (self.min[0]..=self.max[0]).contains(&p[0]) && (self.min[1]..=self.max[1]).contains(&p[1])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Course {
    pub gates: Vec<GatePose>,
    /// Distractor boards.
    pub clutter: Vec<Board>,
    pub bounds: Bounds,
    /// Initial pose (x, y, heading) of the rear axle.
    pub start: [f64; 3],
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum CourseError {
    #[error("course has no gates")]
    Empty,
    #[error("gate {0} lies outside the arena bounds")]
    OutOfBounds(usize),
    #[error("gates {0} and {1} overlap")]
    Overlap(usize, usize),
    #[error("start pose lies outside the arena bounds")]
    StartOutOfBounds,
}

impl Course {
    pub fn validate(&self) -> Result<(), CourseError> {
        if self.gates.is_empty() {
            return Err(CourseError::Empty);
        }
        for (i, g) in self.gates.iter().enumerate() {
            if !self.bounds.contains(g.centre) {
                return Err(CourseError::OutOfBounds(i));
            }
            for (j, h) in self.gates.iter().enumerate().skip(i + 1) {
                let reach = (g.width + h.width) / 2.0 + 2.0 * POST_RADIUS;
                if math::hypot(g.centre[0] - h.centre[0], g.centre[1] - h.centre[1]) < reach {
                    return Err(CourseError::Overlap(i, j));
                }
            }
        }
        if !self.bounds.contains([self.start[0], self.start[1]]) {
            return Err(CourseError::StartOutOfBounds);
        }
        Ok(())
    }

    pub fn start_state(&self) -> VehicleState {
        VehicleState::at(self.start[0], self.start[1], self.start[2])
    }

    /// Every board in the arena: gate patterns first, then clutter.
    pub fn boards(&self) -> impl Iterator<Item = Board> + '_ {
        self.gates.iter().map(GatePose::board).chain(self.clutter.iter().copied())
    }

    pub fn obstacles(&self) -> impl Iterator<Item = Circle> + '_ {
        self.gates
            .iter()
            .flat_map(GatePose::obstacles)
            .chain(self.clutter.iter().map(|b| Circle { centre: b.centre, radius: STAND_RADIUS }))
    }

    /// Eight gates on a winding line with a distractor board beside each.
    ///
    /// Successive gates are 2.6 m apart and turn by 20 degrees, so the next
    /// gate is well inside the camera's field of view after each crossing.
    pub fn default_gates() -> Self {
        const CHORD: f64 = 2.6;
        let turns_deg = [20.0, 20.0, -20.0, -20.0, -20.0, -20.0, 20.0];
        let mut gates = Vec::new();
        let (mut x, mut y, mut h) = (2.4, 0.0, 0.0f64);
        gates.push(GatePose::gate(x, y, h));
        for t in turns_deg {
            let t = f64::to_radians(t);
            let dir = h + t / 2.0;
            x += CHORD * math::cos(dir);
            y += CHORD * math::sin(dir);
            h += t;
            gates.push(GatePose::gate(x, y, h));
        }
        let mut clutter = Vec::new();
        for (i, g) in gates.iter().enumerate() {
            let b = g.board();
            let (f, r) = (b.facing_vec(), b.right_vec());
            // outside of the next bend, a little past the gate line
            let next_turn = turns_deg.get(i).copied().unwrap_or(20.0);
            let side = if next_turn > 0.0 { 0.9 } else { -0.9 };
            let layout = if i % 2 == 0 {
                PatternLayout { kind: PatternKind::SingleOutline, side: PatternLayout::DEFAULT_GATE_SIDE }
            } else {
                PatternLayout { kind: PatternKind::Scatter, side: PatternLayout::DEFAULT_GATE_SIDE }
            };
            clutter.push(Board {
                centre: [g.centre[0] + 0.5 * f[0] + side * r[0], g.centre[1] + 0.5 * f[1] + side * r[1]],
                facing: g.facing,
                height: DEFAULT_MOUNT_HEIGHT,
                layout,
            });
        }
        let bounds = bounds_around(gates.iter().map(|g| g.centre).chain([[0.0, 0.0]]), 3.0);
        Self { gates, clutter, bounds, start: [0.0, 0.0, 0.0] }
    }

    /// Eight slalom markers on the x axis, 2.4 m apart, alternating right
    /// and left 15-degree turns.
    pub fn default_slalom() -> Self {
        let gates: Vec<GatePose> = (0..8)
            .map(|i| {
                let dir = if i % 2 == 0 { TurnDirection::Right } else { TurnDirection::Left };
                GatePose::slalom(2.4 * f64::from(i), 0.0, 0.0, dir, 1)
            })
            .collect();
        let bounds = bounds_around(gates.iter().map(|g| g.centre).chain([[-3.0, 0.0]]), 3.0);
        Self { gates, clutter: Vec::new(), bounds, start: [-3.0, 0.0, 0.0] }
    }
}

fn bounds_around(points: impl Iterator<Item = [f64; 2]>, margin: f64) -> Bounds {
    let mut b = Bounds { min: [f64::INFINITY; 2], max: [f64::NEG_INFINITY; 2] };
    for p in points {
        for k in 0..2 {
            b.min[k] = b.min[k].min(p[k] - margin);
            b.max[k] = b.max[k].max(p[k] + margin);
        }
    }
    b
}

/// Whether the reference point crossed `gate`'s pass segment in the facing
/// direction while moving from `prev` to `cur`.
pub fn gate_passed(prev: &VehicleState, cur: &VehicleState, gate: &GatePose) -> bool {
    let board = gate.board();
    let f = board.facing_vec();
    let along = |s: &VehicleState| (s.x - gate.centre[0]) * f[0] + (s.y - gate.centre[1]) * f[1];
    let (s0, s1) = (along(prev), along(cur));
    if !(s0 <= 0.0 && s1 > 0.0) {
        return false;
    }
    let lam = s0 / (s0 - s1);
    let p = [prev.x + lam * (cur.x - prev.x), prev.y + lam * (cur.y - prev.y)];
    let (a, b) = gate.pass_segment();
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let t = ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / (dx * dx + dy * dy);
    (0.0..=1.0).contains(&t)
}

/// Corners of the vehicle body, counter-clockwise from rear right.
pub fn body_corners(state: &VehicleState, params: &VehicleParams) -> [[f64; 2]; 4] {
    let [fx, fy] = state.forward();
    let (lx, ly) = (-fy, fx);
    let back = -params.rear_overhang;
    let front = params.length - params.rear_overhang;
    let w = params.width / 2.0;
    [(back, -w), (front, -w), (front, w), (back, w)].map(|(a, b)| [state.x + a * fx + b * lx, state.y + a * fy + b * ly])
}

/// Whether the body rectangle touches a circle.
pub fn body_hits(state: &VehicleState, params: &VehicleParams, c: &Circle) -> bool {
    let [fx, fy] = state.forward();
    let (dx, dy) = (c.centre[0] - state.x, c.centre[1] - state.y);
    // circle centre in body coordinates
    let a = dx * fx + dy * fy;
    let b = -dx * fy + dy * fx;
    let ca = a.clamp(-params.rear_overhang, params.length - params.rear_overhang);
    let cb = b.clamp(-params.width / 2.0, params.width / 2.0);
    (a - ca) * (a - ca) + (b - cb) * (b - cb) <= c.radius * c.radius
}

/// Whether the body touches any post or stand of the course.
pub fn collision(cur: &VehicleState, course: &Course, params: &VehicleParams) -> bool {
    course.obstacles().any(|c| body_hits(cur, params, &c))
}
