//! Standalone SVG plots of a trajectory log.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ppanav_core::sim::Course;

use crate::trajectory::{parse_points, TrajectoryRecord};

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 56.0;

/// Axis-aligned plot area mapping data coordinates to SVG pixels.
pub struct Chart {
    x: (f64, f64),
    y: (f64, f64),
    width: f64,
    height: f64,
    body: String,
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0].into_iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag)
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-9 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

impl Chart {
    pub fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        Self::sized(x, y, W, H)
    }

    fn sized(x: (f64, f64), y: (f64, f64), width: f64, height: f64) -> Self {
        Self { x, y, width, height, body: String::new() }
    }

    /// Chart whose data units are equal on both axes.
    pub fn equal_aspect(x: (f64, f64), y: (f64, f64)) -> Self {
        let (dx, dy) = (x.1 - x.0, y.1 - y.0);
        let inner = (W - 2.0 * MARGIN, H - 2.0 * MARGIN);
        let scale = (inner.0 / dx).min(inner.1 / dy);
        Self::sized(x, y, dx * scale + 2.0 * MARGIN, dy * scale + 2.0 * MARGIN)
    }

    pub fn px(&self, x: f64, y: f64) -> (f64, f64) {
        let u = MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (self.width - 2.0 * MARGIN);
        let v = self.height - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (self.height - 2.0 * MARGIN);
        (u, v)
    }

    pub fn polyline(&mut self, pts: &[(f64, f64)], class: &str, stroke: &str) {
        if pts.is_empty() {
            return;
        }
        let mut s = String::new();
        for &(x, y) in pts {
            let (u, v) = self.px(x, y);
            let _ = write!(s, "{u:.2},{v:.2} ");
        }
        let _ = writeln!(
            self.body,
            r#"<polyline class="{class}" fill="none" stroke="{stroke}" stroke-width="1.5" points="{}"/>"#,
            s.trim_end()
        );
    }

    pub fn line(&mut self, a: (f64, f64), b: (f64, f64), class: &str, stroke: &str, width: f64) {
        let (a, b) = (self.px(a.0, a.1), self.px(b.0, b.1));
        let _ = writeln!(
            self.body,
            r#"<line class="{class}" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{stroke}" stroke-width="{width}"/>"#,
            a.0, a.1, b.0, b.1
        );
    }

    pub fn dot(&mut self, p: (f64, f64), r: f64, class: &str, fill: &str) {
        let (u, v) = self.px(p.0, p.1);
        let _ = writeln!(self.body, r#"<circle class="{class}" cx="{u:.2}" cy="{v:.2}" r="{r}" fill="{fill}"/>"#);
    }

    fn axes(&self, title: &str, xlabel: &str, ylabel: &str) -> String {
        let mut s = String::new();
        let (x0, y0) = self.px(self.x.0, self.y.0);
        let (x1, y1) = self.px(self.x.1, self.y.1);
        let _ = writeln!(s, r#"<rect class="frame" x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#, x1 - x0, y0 - y1);
        let step = nice_step(self.x.1 - self.x.0);
        let mut t = (self.x.0 / step).ceil() * step;
        while t <= self.x.1 + 1e-9 {
            let (u, _) = self.px(t, self.y.0);
            let _ = writeln!(s, r#"<line x1="{u:.2}" y1="{y0:.2}" x2="{u:.2}" y2="{:.2}" stroke="black"/><text x="{u:.2}" y="{:.2}" font-size="11" text-anchor="middle">{}</text>"#, y0 + 4.0, y0 + 16.0, fmt_tick(t));
            t += step;
        }
        let step = nice_step(self.y.1 - self.y.0);
        let mut t = (self.y.0 / step).ceil() * step;
        while t <= self.y.1 + 1e-9 {
            let (_, v) = self.px(self.x.0, t);
            let _ = writeln!(s, r#"<line x1="{:.2}" y1="{v:.2}" x2="{x0:.2}" y2="{v:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{}</text>"#, x0 - 4.0, x0 - 6.0, v + 4.0, fmt_tick(t));
            t += step;
        }
        let _ = writeln!(s, r#"<text x="{:.2}" y="20" font-size="14" text-anchor="middle">{title}</text>"#, self.width / 2.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">{xlabel}</text>"#, (x0 + x1) / 2.0, self.height - 12.0);
        let _ = writeln!(s, r#"<text x="14" y="{:.2}" font-size="12" text-anchor="middle" transform="rotate(-90 14 {:.2})">{ylabel}</text>"#, (y0 + y1) / 2.0, (y0 + y1) / 2.0);
        s
    }

    pub fn finish(self, title: &str, xlabel: &str, ylabel: &str) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.2} {h:.2}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}{}</svg>\n",
            self.axes(title, xlabel, ylabel),
            self.body,
            w = self.width,
            h = self.height
        )
    }
}

fn fmt_tick(t: f64) -> String {
    let t = if t.abs() < 1e-9 { 0.0 } else { t };
    let s = format!("{t:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_owned()
}

/// Arena view: path, gates (from `course` when given, otherwise a dot at
/// each logged gate crossing) and distractor stands.
pub fn trajectory_svg(records: &[TrajectoryRecord], course: Option<&Course>) -> String {
    let mut xs: Vec<f64> = records.iter().map(|r| r.x).collect();
    let mut ys: Vec<f64> = records.iter().map(|r| r.y).collect();
    if let Some(c) = course {
        for g in &c.gates {
            xs.push(g.centre[0]);
            ys.push(g.centre[1]);
        }
    }
    let (x, y) = (extent(xs.into_iter()), extent(ys.into_iter()));
    let (x, y) = (padded(x.0, x.1), padded(y.0, y.1));
    let mut ch = Chart::equal_aspect(x, y);
    if let Some(c) = course {
        for b in &c.clutter {
            ch.dot((b.centre[0], b.centre[1]), 3.0, "clutter", "#999999");
        }
        for g in &c.gates {
            let [a, b] = post_centres(g);
            ch.line((a[0], a[1]), (b[0], b[1]), "gate", "#d62728", 3.0);
        }
    } else {
        for w in records.windows(2).filter(|w| w[1].gate_index > w[0].gate_index) {
            ch.dot((w[1].x, w[1].y), 4.0, "gate", "#d62728");
        }
    }
    let path: Vec<(f64, f64)> = records.iter().map(|r| (r.x, r.y)).collect();
    ch.polyline(&path, "path", "#1f77b4");
    ch.finish("Trajectory in the arena", "x (m)", "y (m)")
}

/// Ends of a gate's pass line: the post centres for a gate, the stand and
/// the pass reach for a slalom marker.
fn post_centres(g: &ppanav_core::sim::GatePose) -> [[f64; 2]; 2] {
    let (a, b) = g.pass_segment();
    [a, b]
}

pub fn time_series_svg(records: &[TrajectoryRecord], title: &str, ylabel: &str, f: impl Fn(&TrajectoryRecord) -> f64) -> String {
    let x = padded(0.0, records.last().map_or(1.0, |r| r.t));
    let y = extent(records.iter().map(&f));
    let y = padded(y.0.min(0.0), y.1.max(0.0));
    let mut ch = Chart::new(x, y);
    let pts: Vec<(f64, f64)> = records.iter().map(|r| (r.t, f(r))).collect();
    ch.polyline(&pts, "series", "#1f77b4");
    ch.finish(title, "t (s)", ylabel)
}

/// Disk centres in the image plane over the run, fading from light to
/// dark with time, plus the centroid track.
pub fn image_plane_svg(records: &[TrajectoryRecord]) -> String {
    let mut ch = Chart::equal_aspect((0.0, 255.0), (0.0, 255.0));
    let n = records.len().max(1) as f64;
    let mut centroid = Vec::new();
    for (i, r) in records.iter().enumerate() {
        let shade = (200.0 * (1.0 - i as f64 / n)) as u8;
        let fill = format!("rgb({shade},{shade},255)");
        for (row, col) in parse_points(&r.points).unwrap_or_default() {
            ch.dot((f64::from(col), 255.0 - f64::from(row)), 1.5, "disk", &fill);
        }
        if let (Some(row), Some(col)) = (r.centroid_row, r.centroid_col) {
            centroid.push((f64::from(col), 255.0 - f64::from(row)));
        } else if !centroid.is_empty() {
            ch.polyline(&std::mem::take(&mut centroid), "centroid", "#d62728");
        }
    }
    ch.polyline(&centroid, "centroid", "#d62728");
    ch.finish("Trajectory in the image plane", "column (px)", "255 - row (px)")
}

/// Writes the four plots into `dir`, returning their paths.
pub fn write_all(records: &[TrajectoryRecord], course: Option<&Course>, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let files = [
        ("trajectory.svg", trajectory_svg(records, course)),
        ("velocity.svg", time_series_svg(records, "Velocity", "v (m/s)", |r| r.v)),
        ("steering.svg", time_series_svg(records, "Steering angle", "steer (rad)", |r| r.steer)),
        ("image_plane.svg", image_plane_svg(records)),
    ];
    let mut out = Vec::new();
    for (name, svg) in files {
        let p = dir.join(name);
        std::fs::write(&p, svg)?;
        out.push(p);
    }
    Ok(out)
}
