//! Course files and run configuration, both TOML.

use std::path::{Path, PathBuf};

use ppanav_core::guidance::{GuidanceConfig, SlalomConfig};
use ppanav_core::marker::PipelineConfig;
use ppanav_core::sim::course::{Board, Bounds, Course, GatePose};
use ppanav_core::sim::pattern::{PatternKind, PatternLayout, TurnDirection, SLALOM_MAX_DISKS};
use ppanav_core::sim::{CameraModel, RenderOptions, VehicleParams};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot parse {path}: {source}")]
    Parse { path: PathBuf, source: toml::de::Error },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

fn read_text(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_owned(), source })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoardKind {
    Gate,
    Slalom,
    SingleOutline,
    Scatter,
}

/// One `[[gates]]` or `[[clutter]]` table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoardEntry {
    pub x: f64,
    pub y: f64,
    /// Direction of travel through the gate, degrees counter-clockwise from +x.
    pub facing_deg: f64,
    pub kind: BoardKind,
    /// Slalom turn direction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<TurnDirection>,
    /// Slalom small-disk count; the turn is `k * 15` degrees.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u8>,
    /// Board side length in metres.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side_m: Option<f64>,
    /// Gate opening in metres.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width_m: Option<f64>,
    /// Height of the board centre in metres.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height_m: Option<f64>,
}

impl BoardEntry {
    fn layout(&self) -> Result<PatternLayout, ConfigError> {
        let kind = match self.kind {
            BoardKind::Gate => PatternKind::Gate,
            BoardKind::SingleOutline => PatternKind::SingleOutline,
            BoardKind::Scatter => PatternKind::Scatter,
            BoardKind::Slalom => {
                let direction = self.direction.ok_or_else(|| ConfigError::Invalid("slalom board needs a direction".into()))?;
                let count = self.k.ok_or_else(|| ConfigError::Invalid("slalom board needs k".into()))?;
                if !(1..=SLALOM_MAX_DISKS).contains(&count) {
                    return Err(ConfigError::Invalid(format!("slalom k must be in 1..={SLALOM_MAX_DISKS}, got {count}")));
                }
                PatternKind::Slalom { direction, count }
            }
        };
        let default_side = match kind {
            PatternKind::Slalom { .. } => PatternLayout::DEFAULT_SLALOM_SIDE,
            _ => PatternLayout::DEFAULT_GATE_SIDE,
        };
        let side = self.side_m.unwrap_or(default_side);
        if !(side > 0.0 && side.is_finite()) {
            return Err(ConfigError::Invalid(format!("board side must be positive, got {side}")));
        }
        Ok(PatternLayout { kind, side })
    }

    fn to_gate(&self) -> Result<GatePose, ConfigError> {
        let mut g = GatePose::gate(self.x, self.y, self.facing_deg.to_radians());
        g.pattern = self.layout()?;
        if let Some(w) = self.width_m {
            g.width = w;
        }
        if let Some(h) = self.height_m {
            g.mount_height = h;
        }
        Ok(g)
    }

    fn to_board(&self) -> Result<Board, ConfigError> {
        let g = self.to_gate()?;
        Ok(g.board())
    }

    fn from_layout(centre: [f64; 2], facing: f64, layout: &PatternLayout, height: f64) -> Self {
        let (kind, direction, k) = match layout.kind {
            PatternKind::Gate => (BoardKind::Gate, None, None),
            PatternKind::SingleOutline => (BoardKind::SingleOutline, None, None),
            PatternKind::Scatter => (BoardKind::Scatter, None, None),
            PatternKind::Slalom { direction, count } => (BoardKind::Slalom, Some(direction), Some(count)),
        };
        Self {
            x: centre[0],
            y: centre[1],
            facing_deg: facing.to_degrees(),
            kind,
            direction,
            k,
            side_m: Some(layout.side),
            width_m: None,
            height_m: Some(height),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StartPose {
    pub x: f64,
    pub y: f64,
    pub heading_deg: f64,
}

/// Everything about the simulated world: arena, vehicle, camera, noise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CourseFile {
    pub bounds: Bounds,
    pub start: StartPose,
    pub gates: Vec<BoardEntry>,
    #[serde(default)]
    pub clutter: Vec<BoardEntry>,
    #[serde(default)]
    pub vehicle: VehicleParams,
    #[serde(default)]
    pub camera: CameraModel,
    #[serde(default)]
    pub noise: RenderOptions,
}

/// A course file resolved into simulator types.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub course: Course,
    pub vehicle: VehicleParams,
    pub camera: CameraModel,
    pub render: RenderOptions,
}

impl Scenario {
    /// Whether the course is made of slalom markers.
    pub fn is_slalom(&self) -> bool {
        self.course.gates.iter().any(|g| g.slalom_direction().is_some())
    }

    /// Built-in eight-gate course at 2.2 m/s with light noise.
    pub fn default_gates() -> Self {
        Self {
            course: Course::default_gates(),
            vehicle: VehicleParams::default(),
            camera: CameraModel::default(),
            render: RenderOptions {
                sigma: 6.0,
                spots: ppanav_core::sim::SpotNoise { count: 3, radius_min: 1.0, radius_max: 4.0, level: 250 },
                ..RenderOptions::default()
            },
        }
    }

    /// Built-in slalom line at 3.88 m/s.
    pub fn default_slalom() -> Self {
        Self {
            course: Course::default_slalom(),
            vehicle: VehicleParams { v_cmd: 3.88, ..VehicleParams::default() },
            ..Self::default_gates()
        }
    }

    pub fn to_file(&self) -> CourseFile {
        let c = &self.course;
        CourseFile {
            bounds: c.bounds,
            start: StartPose { x: c.start[0], y: c.start[1], heading_deg: c.start[2].to_degrees() },
            gates: c
                .gates
                .iter()
                .map(|g| BoardEntry { width_m: Some(g.width), ..BoardEntry::from_layout(g.centre, g.facing, &g.pattern, g.mount_height) })
                .collect(),
            clutter: c.clutter.iter().map(|b| BoardEntry::from_layout(b.centre, b.facing, &b.layout, b.height)).collect(),
            vehicle: self.vehicle.clone(),
            camera: self.camera.clone(),
            noise: self.render.clone(),
        }
    }
}

impl CourseFile {
    pub fn parse(text: &str, path: &Path) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|source| ConfigError::Parse { path: path.to_owned(), source })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::parse(&read_text(path)?, path)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("course files always serialise")
    }

    pub fn resolve(&self) -> Result<Scenario, ConfigError> {
        let course = Course {
            gates: self.gates.iter().map(BoardEntry::to_gate).collect::<Result<_, _>>()?,
            clutter: self.clutter.iter().map(BoardEntry::to_board).collect::<Result<_, _>>()?,
            bounds: self.bounds,
            start: [self.start.x, self.start.y, self.start.heading_deg.to_radians()],
        };
        course.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let v = &self.vehicle;
        if !(v.wheelbase > 0.0 && v.max_steer > 0.0 && v.steer_rate > 0.0 && v.v_cmd >= 0.0) {
            return Err(ConfigError::Invalid("vehicle parameters must be positive".into()));
        }
        if !(self.camera.focal_px > 0.0) {
            return Err(ConfigError::Invalid("camera focal_px must be positive".into()));
        }
        if !(self.noise.sigma >= 0.0 && self.noise.sigma.is_finite()) {
            return Err(ConfigError::Invalid("noise sigma must be finite and non-negative".into()));
        }
        Ok(Scenario { course, vehicle: v.clone(), camera: self.camera.clone(), render: self.noise.clone() })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Gates,
    Slalom,
}

/// Run configuration: which course, controller settings and loop rates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Course file, relative to the configuration file.
    pub course: Option<PathBuf>,
    /// Built-in course used when `course` is not given.
    pub preset: Option<Preset>,
    /// Overrides the course file's noise seed.
    pub seed: Option<u64>,
    pub control_hz: f64,
    pub physics_hz: f64,
    pub max_time_s: f64,
    /// Reference-marker file from `calibrate`, relative to the configuration
    /// file. Without one, the reference is captured head-on in front of the
    /// first gate at `reference_distance_m`.
    pub reference: Option<PathBuf>,
    pub reference_distance_m: f64,
    pub pipeline: PipelineConfig,
    pub guidance: GuidanceConfig,
    pub slalom: SlalomConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            course: None,
            preset: None,
            seed: None,
            control_hz: 200.0,
            physics_hz: 1000.0,
            max_time_s: 60.0,
            reference: None,
            reference_distance_m: 1.0,
            pipeline: PipelineConfig::default(),
            guidance: GuidanceConfig::default(),
            slalom: SlalomConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn preset(preset: Preset) -> Self {
        Self { preset: Some(preset), ..Self::default() }
    }

    /// Loads a configuration and makes its relative paths relative to the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let mut cfg: Self = toml::from_str(&read_text(path)?).map_err(|source| ConfigError::Parse { path: path.to_owned(), source })?;
        let dir = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.course, &mut cfg.reference].into_iter().flatten() {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads only the `[pipeline]` table of a configuration file.
    pub fn load_pipeline(path: &Path) -> Result<PipelineConfig, ConfigError> {
        #[derive(Deserialize)]
        struct PipelineOnly {
            #[serde(default)]
            pipeline: PipelineConfig,
        }
        let cfg: PipelineOnly =
            toml::from_str(&read_text(path)?).map_err(|source| ConfigError::Parse { path: path.to_owned(), source })?;
        cfg.pipeline.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(cfg.pipeline)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.into()));
        if self.course.is_some() == self.preset.is_some() {
            return bad("exactly one of `course` and `preset` must be set");
        }
        self.validate_loop()
    }

    /// Checks everything except the course source.
    pub fn validate_loop(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.into()));
        if !(self.control_hz > 0.0 && self.control_hz.is_finite()) {
            return bad("control_hz must be positive");
        }
        if !(self.physics_hz >= self.control_hz && self.physics_hz.is_finite()) {
            return bad("physics_hz must be at least control_hz");
        }
        if !(self.max_time_s > 0.0) {
            return bad("max_time_s must be positive");
        }
        if !(self.reference_distance_m > 0.0) {
            return bad("reference_distance_m must be positive");
        }
        self.pipeline.validate().map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// The scenario this configuration runs, with the seed override applied.
    pub fn scenario(&self) -> Result<Scenario, ConfigError> {
        let mut s = match (&self.course, self.preset) {
            (Some(path), _) => CourseFile::load(path)?.resolve()?,
            (None, Some(Preset::Gates)) => Scenario::default_gates(),
            (None, Some(Preset::Slalom)) => Scenario::default_slalom(),
            (None, None) => return Err(ConfigError::Invalid("no course given".into())),
        };
        if let Some(seed) = self.seed {
            s.render.seed = seed;
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_round_trip_through_toml() {
        for s in [Scenario::default_gates(), Scenario::default_slalom()] {
            let text = s.to_file().to_toml();
            let back = CourseFile::parse(&text, Path::new("x.toml")).unwrap().resolve().unwrap();
            assert_eq!(back.course.gates.len(), s.course.gates.len());
            for (a, b) in back.course.gates.iter().zip(&s.course.gates) {
                assert!((a.centre[0] - b.centre[0]).abs() < 1e-9 && (a.facing - b.facing).abs() < 1e-9);
                assert_eq!(a.pattern, b.pattern);
            }
            assert_eq!(back.vehicle, s.vehicle);
            assert_eq!(back.render, s.render);
        }
    }

    #[test]
    fn minimal_course_file() {
        let text = r#"
            [bounds]
            min = [-2.0, -2.0]
            max = [6.0, 2.0]
            [start]
            x = 0.0
            y = 0.0
            heading_deg = 0.0
            [[gates]]
            x = 2.0
            y = 0.0
            facing_deg = 0.0
            kind = "gate"
        "#;
        let s = CourseFile::parse(text, Path::new("c.toml")).unwrap().resolve().unwrap();
        assert_eq!(s.course.gates.len(), 1);
        assert_eq!(s.vehicle, VehicleParams::default());
    }

    #[test]
    fn slalom_entry_needs_direction() {
        let text = r#"
            bounds = { min = [-2.0, -2.0], max = [6.0, 2.0] }
            start = { x = 0.0, y = 0.0, heading_deg = 0.0 }
            gates = [{ x = 2.0, y = 0.0, facing_deg = 0.0, kind = "slalom", k = 2 }]
        "#;
        let err = CourseFile::parse(text, Path::new("c.toml")).unwrap().resolve().unwrap_err();
        assert!(matches!(err, ConfigError::Invalid(_)));
    }

    #[test]
    fn run_config_rules() {
        assert!(RunConfig::preset(Preset::Gates).validate().is_ok());
        assert!(RunConfig::default().validate().is_err());
        let cfg = RunConfig { control_hz: 0.0, ..RunConfig::preset(Preset::Gates) };
        assert!(cfg.validate().is_err());
        let text = "preset = \"slalom\"\nseed = 9\n[guidance]\nmax_steer = 0.4\n";
        let cfg: RunConfig = toml::from_str(text).unwrap();
        assert_eq!(cfg.guidance.max_steer, 0.4);
        assert_eq!(cfg.scenario().unwrap().render.seed, 9);
    }
}
