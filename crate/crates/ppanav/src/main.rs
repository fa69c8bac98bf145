use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ppanav::config::{CourseFile, RunConfig};
use ppanav::harness::{self, ReferenceFile, RunError, Termination};
use ppanav::{bench, detect, plot, trajectory};
use ppanav_core::sim::VehicleState;

const EXIT_CONFIG: u8 = 2;
const EXIT_RUN_FAILED: u8 = 3;
const EXIT_CALIBRATION: u8 = 4;

/// Focal-plane vision emulator and closed-loop gate navigation simulator.
///
/// Log verbosity comes from PPANAV_LOG (error, warn, info, debug, trace).
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a closed-loop scenario and write trajectory.csv and metrics.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the noise seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Capture a reference marker from a pose on a course.
    Calibrate {
        #[arg(long)]
        course: PathBuf,
        /// Rear-axle pose `x,y,theta` in metres and radians.
        #[arg(long, value_parser = parse_pose, allow_hyphen_values = true)]
        pose: VehicleState,
        #[arg(long)]
        out: PathBuf,
    },
    /// Detect gate markers in a directory of PGM frames; JSON lines on stdout.
    Detect {
        #[arg(long)]
        frames: PathBuf,
        #[arg(long)]
        config: PathBuf,
    },
    /// Time the detection pipeline on rendered frames.
    Bench {
        #[arg(long, default_value_t = 1000)]
        iters: usize,
    },
    /// Render SVG plots from a trajectory CSV.
    Plot {
        #[arg(long)]
        traj: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Course file whose gates are drawn on the arena plot.
        #[arg(long)]
        course: Option<PathBuf>,
    },
}

fn parse_pose(s: &str) -> Result<VehicleState, String> {
    let v: Vec<f64> = s.split(',').map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}"))).collect::<Result<_, _>>()?;
    match v.as_slice() {
        &[x, y, theta] if v.iter().all(|f| f.is_finite()) => Ok(VehicleState::at(x, y, theta)),
        _ => Err("expected three finite numbers x,y,theta".into()),
    }
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    log::error!("{msg}");
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn write_file(path: &Path, text: &str) -> Result<(), String> {
    std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

fn cmd_run(config: &Path, out: &Path, seed: Option<u64>) -> ExitCode {
    let mut cfg = match RunConfig::load(config) {
        Ok(c) => c,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    if seed.is_some() {
        cfg.seed = seed;
    }
    let outcome = match harness::run(&cfg) {
        Ok(o) => o,
        Err(RunError::Config(e)) => return fail(EXIT_CONFIG, e),
        Err(e @ RunError::Reference(_)) => return fail(EXIT_CALIBRATION, e),
    };
    if let Err(e) = std::fs::create_dir_all(out) {
        return fail(EXIT_RUN_FAILED, format!("{}: {e}", out.display()));
    }
    if let Err(e) = trajectory::save(&out.join("trajectory.csv"), &outcome.records) {
        return fail(EXIT_RUN_FAILED, e);
    }
    let metrics = serde_json::to_string_pretty(&outcome.metrics).expect("plain data") + "\n";
    if let Err(e) = write_file(&out.join("metrics.json"), &metrics) {
        return fail(EXIT_RUN_FAILED, e);
    }
    print!("{metrics}");
    match outcome.metrics.termination {
        Termination::Completed => ExitCode::SUCCESS,
        t => fail(EXIT_RUN_FAILED, format!("run ended with {t:?}")),
    }
}

fn cmd_calibrate(course: &Path, pose: &VehicleState, out: &Path) -> ExitCode {
    let scenario = match CourseFile::load(course).and_then(|c| c.resolve()) {
        Ok(s) => s,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    match harness::calibrate(&scenario, pose, &Default::default()) {
        Ok(r) => match ReferenceFile::from(&r).save(out) {
            Ok(()) => {
                println!("{}", serde_json::to_string(&ReferenceFile::from(&r)).expect("plain data"));
                ExitCode::SUCCESS
            }
            Err(e) => fail(EXIT_RUN_FAILED, format!("{}: {e}", out.display())),
        },
        Err(e) => fail(EXIT_CALIBRATION, e),
    }
}

fn cmd_detect(frames: &Path, config: &Path) -> ExitCode {
    let pipeline = match RunConfig::load_pipeline(config) {
        Ok(c) => c,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    let stdout = std::io::stdout();
    match detect::detect_dir(frames, &pipeline, &mut stdout.lock()) {
        Ok(n) => {
            log::info!("processed {n} frames");
            ExitCode::SUCCESS
        }
        Err(detect::DetectDirError::Config(e)) => fail(EXIT_CONFIG, e),
        Err(e) => fail(EXIT_RUN_FAILED, e),
    }
}

fn cmd_plot(traj: &Path, out: &Path, course: Option<&Path>) -> ExitCode {
    let course = match course.map(|p| CourseFile::load(p).and_then(|c| c.resolve())) {
        Some(Ok(s)) => Some(s.course),
        Some(Err(e)) => return fail(EXIT_CONFIG, e),
        None => None,
    };
    let records = match trajectory::load(traj) {
        Ok(r) => r,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    match plot::write_all(&records, course.as_ref(), out) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(EXIT_RUN_FAILED, e),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("PPANAV_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(EXIT_CONFIG);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match cli.cmd {
        Cmd::Run { config, out, seed } => cmd_run(&config, &out, seed),
        Cmd::Calibrate { course, pose, out } => cmd_calibrate(&course, &pose, &out),
        Cmd::Detect { frames, config } => cmd_detect(&frames, &config),
        Cmd::Bench { iters } => {
            print!("{}", bench::run(iters).table());
            ExitCode::SUCCESS
        }
        Cmd::Plot { traj, out, course } => cmd_plot(&traj, &out, course.as_deref()),
    }
}
