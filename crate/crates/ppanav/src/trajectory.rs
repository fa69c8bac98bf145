//! Trajectory log: one CSV row per control step.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

/// How the target was seen on a control step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogMode {
    Direct,
    Fallback,
    /// A slalom marker was in view.
    Slalom,
    Lost,
}

impl LogMode {
    pub fn seen(self) -> bool {
        self != LogMode::Lost
    }
}

/// One control step. `steer` is the commanded wheel angle and `wheel` the
/// actual one after servo slew. `d` and `delta` are empty when no target
/// was seen; on slalom runs `d` is the marker's column offset from the
/// image centre and `delta` stays empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub v: f64,
    pub steer: f64,
    pub d: Option<f64>,
    pub delta: Option<f64>,
    pub mode: LogMode,
    /// Gates passed so far.
    pub gate_index: usize,
    pub wheel: f64,
    pub out_d: Option<f64>,
    pub out_delta: Option<f64>,
    pub centroid_row: Option<u8>,
    pub centroid_col: Option<u8>,
    /// Disk centres as `r c` pairs separated by `;`.
    pub points: String,
    /// Ground truth: index (gates first, then clutter) of the board whose
    /// rendered disks the detection sits on.
    pub target: Option<usize>,
}

/// Column order of the trajectory CSV.
pub const HEADER: [&str; 17] = [
    "t", "x", "y", "theta", "v", "steer", "d", "delta", "mode", "gate_index", "wheel", "out_d", "out_delta",
    "centroid_row", "centroid_col", "points", "target",
];

#[derive(Debug, thiserror::Error)]
pub enum TrajectoryError {
    #[error("trajectory I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed trajectory: {0}")]
    Parse(#[from] csv::Error),
    #[error("unexpected header {0:?}")]
    Header(Vec<String>),
    #[error("bad points field {0:?}")]
    Points(String),
}

pub fn format_points(points: &[(u8, u8)]) -> String {
    points.iter().map(|(r, c)| format!("{r} {c}")).collect::<Vec<_>>().join(";")
}

pub fn parse_points(s: &str) -> Result<Vec<(u8, u8)>, TrajectoryError> {
    let bad = || TrajectoryError::Points(s.to_owned());
    s.split(';')
        .filter(|p| !p.is_empty())
        .map(|p| {
            let (r, c) = p.split_once(' ').ok_or_else(bad)?;
            Ok((r.parse().map_err(|_| bad())?, c.parse().map_err(|_| bad())?))
        })
        .collect()
}

pub fn write_records(out: impl Write, records: &[TrajectoryRecord]) -> Result<(), TrajectoryError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(HEADER)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records(input: impl Read) -> Result<Vec<TrajectoryRecord>, TrajectoryError> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers()?;
    if header.iter().ne(HEADER) {
        return Err(TrajectoryError::Header(header.iter().map(str::to_owned).collect()));
    }
    let records: Vec<TrajectoryRecord> = rd.deserialize().collect::<Result<_, _>>()?;
    for r in &records {
        parse_points(&r.points)?;
    }
    Ok(records)
}

pub fn save(path: &Path, records: &[TrajectoryRecord]) -> Result<(), TrajectoryError> {
    let f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_records(f, records)
}

pub fn load(path: &Path) -> Result<Vec<TrajectoryRecord>, TrajectoryError> {
    read_records(std::io::BufReader::new(std::fs::File::open(path)?))
}
