//! Offline detection over a directory of frames.

use std::io::Write;
use std::path::{Path, PathBuf};

use ppanav_core::marker::{DetectionMode, DiskDetector, PipelineConfig};
use ppanav_core::ppa::GreyImage;
use serde::{Deserialize, Serialize};

use crate::harness::StdClock;
use crate::pnm::{load_grey, PnmError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameMode {
    Direct,
    Fallback,
    Lost,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageNs {
    pub threshold: u64,
    pub flooding: u64,
    pub denoise: u64,
    pub centroid: u64,
    pub total: u64,
}

/// One JSON line of `detect` output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub frame_id: u64,
    pub file: String,
    pub mode: FrameMode,
    /// `[row, col]` per disk; quadrant order when there are four.
    pub points: Vec<[u8; 2]>,
    pub centroid: Option<[u8; 2]>,
    pub elapsed_per_stage_ns: StageNs,
}

#[derive(Debug, thiserror::Error)]
pub enum DetectDirError {
    #[error("{0}")]
    Config(String),
    #[error("{path}: {source}")]
    Frame { path: PathBuf, source: PnmError },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// PGM frames in `dir`, sorted by file name.
pub fn frame_paths(dir: &Path) -> Result<Vec<PathBuf>, DetectDirError> {
    let rd = std::fs::read_dir(dir).map_err(|e| DetectDirError::Config(format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = rd
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("pgm")))
        .collect();
    paths.sort();
    Ok(paths)
}

/// Runs one detector over `frames` in order, so fallback tracking carries
/// from each frame to the next.
pub fn detect_frames<'a>(
    frames: impl IntoIterator<Item = (String, &'a GreyImage)>,
    cfg: &PipelineConfig,
) -> Vec<FrameRecord> {
    let mut det = DiskDetector::with_clock(cfg.clone(), StdClock::default());
    frames
        .into_iter()
        .map(|(file, img)| {
            let frame_id = det.tracker.next_frame_id;
            let res = det.detect(img);
            let t = det.timings();
            let elapsed_per_stage_ns = StageNs {
                threshold: t.threshold_ns,
                flooding: t.flooding_ns,
                denoise: t.denoise_ns,
                centroid: t.centroid_ns,
                total: t.total_ns(),
            };
            match res {
                Ok(obs) => FrameRecord {
                    frame_id,
                    file,
                    mode: if obs.mode == DetectionMode::Direct { FrameMode::Direct } else { FrameMode::Fallback },
                    points: obs.points.iter().map(|p| [p.row, p.col]).collect(),
                    centroid: Some([obs.centroid.row, obs.centroid.col]),
                    elapsed_per_stage_ns,
                },
                Err(_) => FrameRecord { frame_id, file, mode: FrameMode::Lost, points: Vec::new(), centroid: None, elapsed_per_stage_ns },
            }
        })
        .collect()
}

/// Detects every PGM in `dir` and writes one JSON line per frame to `out`.
/// Returns the number of frames.
pub fn detect_dir(dir: &Path, cfg: &PipelineConfig, out: &mut impl Write) -> Result<usize, DetectDirError> {
    let paths = frame_paths(dir)?;
    let mut images = Vec::with_capacity(paths.len());
    for p in &paths {
        let img = load_grey(p).map_err(|source| DetectDirError::Frame { path: p.clone(), source })?;
        let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        images.push((name, img));
    }
    let records = detect_frames(images.iter().map(|(n, i)| (n.clone(), i)), cfg);
    for r in &records {
        serde_json::to_writer(&mut *out, r).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(records.len())
}
