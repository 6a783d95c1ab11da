//! Command-line workflows: `track`, `synth`, `eval` and `bench`.
//!
//! Every command returns a process exit code: 0 on success, 1 for data
//! errors, 2 for unusable cameras and 64 for usage errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::CameraModel;
use crate::io;
use crate::synth;
use crate::tracker::{run_sequence, DetectionSet, FrameOutput, TrackerConfig, TrackerStats};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DATA: i32 = 1;
pub const EXIT_CAMERA: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(
    name = "ucmc",
    version,
    about = "Ground-plane multi-object tracking from detections and a calibrated camera",
    after_help = "Set UCMC_LOG (error, warn, info, debug, trace) to control log verbosity."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Track a detection file and write MOT-format tracks
    Track(TrackArgs),
    /// Generate detections, ground truth and camera files for a scenario
    Synth(SynthArgs),
    /// Score tracks against ground truth using ground-plane distance
    Eval(EvalArgs),
    /// Time tracking on pre-parsed detections
    Bench(BenchArgs),
}

/// Tracker parameters. Defaults match `TrackerConfig::default()`.
#[derive(Debug, Clone, Args)]
pub struct TrackerFlags {
    /// Confidence threshold for starting a track [0..1]
    #[arg(long, default_value_t = 0.6)]
    pub tau: f64,
    /// Lost time threshold: frames a track may stay unmatched before deletion [frames]
    #[arg(long, default_value_t = 30)]
    pub dt_threshold: u32,
    /// Process compensation factor along ground x [m^2/s^4 scale]
    #[arg(long, default_value_t = 5.0)]
    pub sigma_x: f64,
    /// Process compensation factor along ground y [m^2/s^4 scale]
    #[arg(long, default_value_t = 5.0)]
    pub sigma_y: f64,
    /// Detection noise factor, relative to box size [dimensionless]
    #[arg(long, default_value_t = 0.05)]
    pub sigma_m: f64,
    /// Association gate on the normalized Mahalanobis distance [dimensionless]
    #[arg(long, default_value_t = crate::association::DEFAULT_GATE)]
    pub gate: f64,
    /// Frame rate; overrides seqinfo, which otherwise defaults to 30 [frames/s]
    #[arg(long)]
    pub fps: Option<f64>,
    /// Also emit unmatched tracks at their predicted position
    #[arg(long, default_value_t = false)]
    pub emit_coasted: bool,
    /// Associated detections required before a track is emitted [count]
    #[arg(long, default_value_t = 1)]
    pub min_hits: u32,
    /// Prior velocity standard deviation for new tracks [m/s]
    #[arg(long, default_value_t = 5.0)]
    pub init_velocity_std: f64,
}

impl TrackerFlags {
    fn config(&self, seq_fps: f64) -> TrackerConfig {
        TrackerConfig {
            tau: self.tau,
            dt_threshold: self.dt_threshold,
            sigma_x: self.sigma_x,
            sigma_y: self.sigma_y,
            sigma_m: self.sigma_m,
            gate: self.gate,
            fps: self.fps.unwrap_or(seq_fps),
            emit_coasted: self.emit_coasted,
            min_hits: self.min_hits,
            init_velocity_std: self.init_velocity_std,
            parallel: false,
        }
    }
}

#[derive(Debug, Args)]
pub struct TrackArgs {
    /// MOT-format detection file
    #[arg(long)]
    pub det: PathBuf,
    /// Camera parameter file
    #[arg(long)]
    pub cam: PathBuf,
    /// seqinfo.ini providing frameRate and seqLength
    #[arg(long)]
    pub seqinfo: Option<PathBuf>,
    /// Output track file
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads for cost-matrix rows; output is identical for any value [count]
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[command(flatten)]
    pub tracker: TrackerFlags,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Scenario description file
    #[arg(long)]
    pub spec: PathBuf,
    /// Random seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory receiving det.txt, gt.txt, camera.txt and seqinfo.ini
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Track file produced by `track`
    #[arg(long)]
    pub tracks: PathBuf,
    /// Ground-truth file
    #[arg(long)]
    pub gt: PathBuf,
    /// Camera used to map boxes to the ground
    #[arg(long)]
    pub cam: PathBuf,
    /// Ground distance under which a box matches a truth box [m]
    #[arg(long, default_value_t = synth::DEFAULT_MATCH_THRESHOLD)]
    pub threshold: f64,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// MOT-format detection file
    #[arg(long)]
    pub det: PathBuf,
    /// Camera parameter file
    #[arg(long)]
    pub cam: PathBuf,
    /// seqinfo.ini providing frameRate
    #[arg(long)]
    pub seqinfo: Option<PathBuf>,
    /// Number of timed runs [count]
    #[arg(long, default_value_t = 5)]
    pub repeat: usize,
    #[command(flatten)]
    pub tracker: TrackerFlags,
}

/// Summary line printed by `track`.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RunSummary {
    pub frames: u64,
    pub tracks_created: u64,
    pub tracks_deleted: u64,
    pub dropped_detections: u64,
    pub wall_ms: f64,
    pub fps: f64,
    pub sigma_m: f64,
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub tau: f64,
    pub dt_threshold: u32,
    pub gate: f64,
}

impl RunSummary {
    fn new(stats: &TrackerStats, config: &TrackerConfig, seconds: f64) -> Self {
        Self {
            frames: stats.frames,
            tracks_created: stats.tracks_created,
            tracks_deleted: stats.tracks_deleted,
            dropped_detections: stats.dropped_detections(),
            wall_ms: seconds * 1e3,
            fps: if seconds > 0.0 {
                stats.frames as f64 / seconds
            } else {
                0.0
            },
            sigma_m: config.sigma_m,
            sigma_x: config.sigma_x,
            sigma_y: config.sigma_y,
            tau: config.tau,
            dt_threshold: config.dt_threshold,
            gate: config.gate,
        }
    }
}

fn exit_code(err: &Error) -> i32 {
    if err.is_camera_error() {
        EXIT_CAMERA
    } else if matches!(err, Error::InvalidConfig(_)) {
        EXIT_USAGE
    } else {
        EXIT_DATA
    }
}

/// Parses arguments and runs the selected command, writing to the given streams.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match &cli.command {
        Command::Track(a) => cmd_track(a, out),
        Command::Synth(a) => cmd_synth(a, out),
        Command::Eval(a) => cmd_eval(a, out),
        Command::Bench(a) => cmd_bench(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

struct Inputs {
    detections: DetectionSet,
    camera: CameraModel,
    fps: f64,
    length: Option<u32>,
}

fn load_inputs(det: &Path, cam: &Path, seqinfo: Option<&Path>) -> Result<Inputs> {
    let camera = io::parse_camera(cam)?;
    let detections = io::parse_detections(det)?;
    let info = match seqinfo {
        Some(p) => io::parse_seqinfo(p)?,
        None => io::SeqInfo::default(),
    };
    Ok(Inputs {
        detections,
        camera,
        fps: info.fps,
        length: info.length,
    })
}

fn track_once(inputs: &Inputs, config: &TrackerConfig) -> Result<(Vec<FrameOutput>, TrackerStats)> {
    run_sequence(&inputs.detections, &inputs.camera, config, inputs.length)
}

pub fn cmd_track(args: &TrackArgs, out: &mut dyn Write) -> Result<()> {
    let inputs = load_inputs(&args.det, &args.cam, args.seqinfo.as_deref())?;
    let mut config = args.tracker.config(inputs.fps);
    config.parallel = args.threads > 1;
    config.validate()?;

    let start = Instant::now();
    let (outputs, stats) = if config.parallel {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(args.threads)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
        pool.install(|| track_once(&inputs, &config))?
    } else {
        track_once(&inputs, &config)?
    };
    let seconds = start.elapsed().as_secs_f64();

    io::write_tracks(&args.out, &outputs)?;
    let summary = RunSummary::new(&stats, &config, seconds);
    let line = serde_json::to_string(&summary).expect("summary serializes");
    let _ = writeln!(out, "{line}");
    Ok(())
}

pub fn cmd_synth(args: &SynthArgs, out: &mut dyn Write) -> Result<()> {
    let scenario = synth::parse_scenario(&args.spec)?;
    let seq = synth::generate(&scenario, args.seed)?;
    std::fs::create_dir_all(&args.out_dir).map_err(|e| Error::io(&args.out_dir, e))?;
    let det = args.out_dir.join("det.txt");
    let gt = args.out_dir.join("gt.txt");
    let cam = args.out_dir.join("camera.txt");
    let info = args.out_dir.join("seqinfo.ini");
    io::write_detections(&det, &seq.detections)?;
    io::write_identity_records(&gt, &seq.ground_truth)?;
    io::write_camera(&cam, &scenario.camera)?;
    let ini = format!(
        "[Sequence]\nname=synthetic-{}\nframeRate={}\nseqLength={}\nimWidth={}\nimHeight={}\n",
        args.seed, scenario.fps, scenario.frames, scenario.image_size.0, scenario.image_size.1
    );
    std::fs::write(&info, ini).map_err(|e| Error::io(&info, e))?;
    let _ = writeln!(
        out,
        "targets={} detections={} gt={}",
        seq.targets.len(),
        seq.detections.values().map(Vec::len).sum::<usize>(),
        seq.ground_truth.len()
    );
    Ok(())
}

fn frame_range(records: &[io::DetFileRecord]) -> Option<(u32, u32)> {
    let min = records.iter().map(|r| r.frame).min()?;
    let max = records.iter().map(|r| r.frame).max()?;
    Some((min, max))
}

pub fn cmd_eval(args: &EvalArgs, out: &mut dyn Write) -> Result<()> {
    let camera = io::parse_camera(&args.cam)?;
    let tracks = io::parse_records(&args.tracks)?;
    let gt = io::parse_records(&args.gt)?;
    if let (Some(t), Some(g)) = (frame_range(&tracks), frame_range(&gt)) {
        if t.1 < g.0 || g.1 < t.0 {
            return Err(Error::FrameRange(format!(
                "tracks cover {}..={}, ground truth covers {}..={}",
                t.0, t.1, g.0, g.1
            )));
        }
    }
    let r = synth::evaluate(&tracks, &gt, &camera, args.threshold);
    let _ = writeln!(out, "idf1={:?}", r.idf1);
    let _ = writeln!(out, "mota={:?}", r.mota);
    let _ = writeln!(out, "id_switches={}", r.id_switches);
    let _ = writeln!(out, "association_accuracy={:?}", r.association_accuracy);
    let _ = writeln!(out, "num_gt={}", r.num_gt);
    let _ = writeln!(out, "num_predictions={}", r.num_predictions);
    let _ = writeln!(out, "false_positives={}", r.false_positives);
    let _ = writeln!(out, "false_negatives={}", r.false_negatives);
    Ok(())
}

/// Median frames per second over `repeat` runs on pre-parsed detections.
pub fn bench_fps(
    detections: &DetectionSet,
    camera: &CameraModel,
    config: &TrackerConfig,
    last_frame: Option<u32>,
    repeat: usize,
) -> Result<f64> {
    let mut rates = Vec::with_capacity(repeat.max(1));
    for _ in 0..repeat.max(1) {
        let start = Instant::now();
        let (_, stats) = run_sequence(detections, camera, config, last_frame)?;
        let secs = start.elapsed().as_secs_f64().max(1e-9);
        rates.push(stats.frames as f64 / secs);
    }
    rates.sort_by(f64::total_cmp);
    let n = rates.len();
    Ok(if n % 2 == 1 {
        rates[n / 2]
    } else {
        0.5 * (rates[n / 2 - 1] + rates[n / 2])
    })
}

pub fn cmd_bench(args: &BenchArgs, out: &mut dyn Write) -> Result<()> {
    let inputs = load_inputs(&args.det, &args.cam, args.seqinfo.as_deref())?;
    let config = args.tracker.config(inputs.fps);
    config.validate()?;
    let fps = bench_fps(&inputs.detections, &inputs.camera, &config, inputs.length, args.repeat)?;
    let _ = writeln!(out, "fps_median={fps}");
    Ok(())
}
