//! Command implementations behind the `affrec` binary.
//!
//! Every command reports through [`CliError`], whose variant fixes the exit
//! code: 1 for usage problems (bad flags, unreadable files), 2 for malformed
//! or unsuitable data and 3 when the numerics fail.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use affrec::epipolar::{estimate_f_7pt, estimate_f_8pt, sampson_distance, af_consistency_residual};
use affrec::eval::{evaluate, EvalConfig, EvalReport};
use affrec::homography::{h_dlt, reprojection_error};
use affrec::matchfile::{parse_fundamental, parse_match_list, write_fundamental, FormatError, MatchList};
use affrec::recovery::{DEFAULT_MAX_SCALE, DEFAULT_MAX_SHEAR};
use affrec::robust::LoConfig;
use affrec::synthbench::{self, FMode};
use affrec::{
    filter_candidates, haf_from_ac, h_3pt, h_4pt, lo_ransac_fundamental, lo_ransac_homography, recover_affine,
    FundamentalMatrix, Homography, PointPair, RansacConfig, SolverCombo,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<affrec::Error> for CliError {
    fn from(e: affrec::Error) -> Self {
        use affrec::Error as E;
        match e {
            E::InvalidInput(_) | E::TooFewCorrespondences { .. } => CliError::Data(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

fn format_error(path: &Path, e: FormatError) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "affrec", version, about = "Affine correspondences and homographies from feature matches")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Recover the affine correspondence of every match given F.
    Recover(RecoverArgs),
    /// Estimate a homography from a match file.
    Homography(HomographyArgs),
    /// Estimate a fundamental matrix from a match file.
    Fundamental(FundamentalArgs),
    /// Run a synthetic experiment and write its curve table.
    Synth(SynthArgs),
    /// Evaluate a solver combination on a labelled match file.
    Eval(EvalArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct Input {
    /// Match file: u1 v1 u2 v2 q1 q2 alpha1 alpha2 [quality [label]].
    #[arg(long, short)]
    pub matches: PathBuf,
    /// Orientations in the match file are in degrees.
    #[arg(long)]
    pub degrees: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct Output {
    /// Output file; stdout when absent.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Manifest path; defaults to `<out>.manifest.json`, or stderr when
    /// writing to stdout.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct RecoverArgs {
    #[command(flatten)]
    pub input: Input,
    /// Fundamental matrix file, nine entries in row-major order.
    #[arg(long, short)]
    pub fundamental: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_MAX_SCALE)]
    pub max_scale: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_SHEAR)]
    pub max_shear: f64,
    /// Keep candidates with extreme scaling or shear.
    #[arg(long)]
    pub no_filter: bool,
    /// One JSON object per row instead of CSV.
    #[arg(long)]
    pub json: bool,
    /// Add the per-row recovery time in microseconds.
    #[arg(long)]
    pub timing: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HomographySolver {
    /// One affine correspondence recovered from a row (needs F).
    Haf,
    /// Exactly four rows.
    #[value(name = "4pt")]
    #[serde(rename = "4pt")]
    FourPoint,
    /// Exactly three rows (needs F).
    #[value(name = "3pt")]
    #[serde(rename = "3pt")]
    ThreePoint,
    /// Normalized DLT over all rows.
    Dlt,
    /// LO-RANSAC with a solver combination.
    Ransac,
}

#[derive(Debug, Args, Serialize)]
pub struct RansacArgs {
    /// Solver combination: 1S4P, 1S3P, 4P4P, 4P3P, 3P4P or 3P3P.
    #[arg(long, default_value = "1S4P", value_parser = parse_combo)]
    #[serde(serialize_with = "display")]
    pub combo: SolverCombo,
    #[arg(long, default_value_t = 2.0)]
    pub threshold: f64,
    #[arg(long, default_value_t = 0.99)]
    pub confidence: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100_000)]
    pub max_samples: usize,
    #[arg(long, default_value_t = 4)]
    pub lo_iterations: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct HomographyArgs {
    #[command(flatten)]
    pub input: Input,
    /// Fundamental matrix file; needed by haf, 3pt and the 1S and 3P combinations
    #[arg(long, short)]
    pub fundamental: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "ransac")]
    pub solver: HomographySolver,
    /// Row used by the HAF solver.
    #[arg(long, default_value_t = 0)]
    pub row: usize,
    #[command(flatten)]
    pub ransac: RansacArgs,
    #[arg(long)]
    pub json: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum FundamentalMethod {
    #[value(name = "8pt")]
    #[serde(rename = "8pt")]
    EightPoint,
    #[value(name = "7pt")]
    #[serde(rename = "7pt")]
    SevenPoint,
    #[serde(rename = "ransac")]
    Ransac,
}

#[derive(Debug, Args, Serialize)]
pub struct FundamentalArgs {
    #[command(flatten)]
    pub input: Input,
    #[arg(long, value_enum, default_value = "ransac")]
    pub method: FundamentalMethod,
    #[arg(long, default_value_t = 2.0)]
    pub threshold: f64,
    #[arg(long, default_value_t = 0.99)]
    pub confidence: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100_000)]
    pub max_samples: usize,
    #[arg(long, default_value_t = 4)]
    pub lo_iterations: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Affine,
    Homography,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum FModeArg {
    /// Ground-truth F from the cameras.
    #[value(name = "gt")]
    #[serde(rename = "gt")]
    GroundTruth,
    /// Eight-point F from noisy off-plane points.
    #[value(name = "8pt")]
    #[serde(rename = "8pt")]
    EightPoint,
}

impl From<FModeArg> for FMode {
    fn from(m: FModeArg) -> Self {
        match m {
            FModeArg::GroundTruth => FMode::GroundTruth,
            FModeArg::EightPoint => FMode::EstimatedEightPoint,
        }
    }
}

pub const DEFAULT_SIGMAS: &str = "0,0.5,1,1.5,2,2.5,3";
pub const DEFAULT_BASELINES: &str = "5,10,15,20,25,30,35,40,45,50";

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub experiment: Experiment,
    /// Comma-separated noise levels in pixels.
    #[arg(long, default_value = DEFAULT_SIGMAS, value_delimiter = ',', value_parser = non_negative)]
    pub sigmas: Vec<f64>,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[arg(long, value_enum, default_value = "gt")]
    pub f_mode: FModeArg,
    /// Sweep the camera distance (percent of the sphere radius) for the
    /// homography experiment.
    #[arg(long)]
    pub baseline_sweep: bool,
    /// Baseline ratios used by --baseline-sweep.
    #[arg(long, default_value = DEFAULT_BASELINES, value_delimiter = ',', value_parser = non_negative)]
    pub baselines: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory for the CSV and manifest.json; stdout when absent.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    /// Match file with quality and label columns (label −1 = outlier).
    #[command(flatten)]
    pub input: Input,
    /// Known F; estimated from all matches when absent.
    #[arg(long, short)]
    pub fundamental: Option<PathBuf>,
    #[command(flatten)]
    pub ransac: RansacArgs,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub repeats: u64,
    /// Runs with mean error above this many pixels count as not found.
    #[arg(long, default_value_t = 10.0)]
    pub fn_threshold: f64,
    /// Ignore the quality column for PROSAC ordering.
    #[arg(long)]
    pub no_quality: bool,
    /// Add the time column.
    #[arg(long)]
    pub timing: bool,
    /// Output directory for eval.csv and manifest.json; stdout when absent.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

fn parse_combo(s: &str) -> Result<SolverCombo, String> {
    s.parse().map_err(|e: affrec::Error| e.to_string())
}

fn non_negative(s: &str) -> Result<f64, String> {
    match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 0.0 => Ok(v),
        _ => Err(format!("expected a finite non-negative number, got {s:?}")),
    }
}

fn display<T: std::fmt::Display, S: serde::Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

/// Parses `args` and runs the command. Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: &Command) -> CliResult<()> {
    match command {
        Command::Recover(a) => cmd_recover(a),
        Command::Homography(a) => cmd_homography(a),
        Command::Fundamental(a) => cmd_fundamental(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Eval(a) => cmd_eval(a),
    }
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn read_matches(input: &Input) -> CliResult<MatchList> {
    let list = parse_match_list(&read_text(&input.matches)?, input.degrees).map_err(|e| format_error(&input.matches, e))?;
    if list.records.is_empty() {
        return Err(CliError::Data(format!("{}: no matches", input.matches.display())));
    }
    Ok(list)
}

fn read_fundamental(path: &Path) -> CliResult<FundamentalMatrix> {
    parse_fundamental(&read_text(path)?).map_err(|e| format_error(path, e))
}

fn require_fundamental(path: &Option<PathBuf>, why: &str) -> CliResult<FundamentalMatrix> {
    match path {
        Some(p) => read_fundamental(p),
        None => Err(CliError::Usage(format!("--fundamental is required {why}"))),
    }
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::Usage(format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

fn manifest(command: &str, args: &impl Serialize, extra: serde_json::Value) -> String {
    let mut m = json!({
        "tool": "affrec",
        "version": env!("CARGO_PKG_VERSION"),
        "library_version": affrec::VERSION,
        "command": command,
        "config": args,
    });
    if let (Some(obj), serde_json::Value::Object(more)) = (m.as_object_mut(), extra) {
        obj.extend(more);
    }
    serde_json::to_string_pretty(&m).expect("manifest is serializable") + "\n"
}

/// Writes a single-file result and its manifest.
fn emit(output: &Output, body: &str, manifest_text: &str) -> CliResult<()> {
    match &output.out {
        Some(path) => {
            write_file(path, body)?;
            let mpath = output.manifest.clone().unwrap_or_else(|| {
                let mut s = path.clone().into_os_string();
                s.push(".manifest.json");
                PathBuf::from(s)
            });
            write_file(&mpath, manifest_text)
        }
        None => {
            print_stdout(body)?;
            match &output.manifest {
                Some(mpath) => write_file(mpath, manifest_text),
                None => {
                    eprint!("{manifest_text}");
                    Ok(())
                }
            }
        }
    }
}

/// Writes `file_name` and `manifest.json` into `dir`, or the body to stdout
/// and the manifest to stderr.
fn emit_dir(dir: &Option<PathBuf>, file_name: &str, body: &str, manifest_text: &str) -> CliResult<()> {
    match dir {
        Some(dir) => {
            write_file(&dir.join(file_name), body)?;
            write_file(&dir.join("manifest.json"), manifest_text)
        }
        None => {
            print_stdout(body)?;
            eprint!("{manifest_text}");
            Ok(())
        }
    }
}

fn print_stdout(body: &str) -> CliResult<()> {
    let mut out = std::io::stdout().lock();
    // a closed pipe is not an error worth reporting
    let _ = out.write_all(body.as_bytes());
    let _ = out.flush();
    Ok(())
}

#[derive(Debug, Serialize)]
struct CandidateRecord {
    a: [f64; 4],
    q_u: f64,
    q_v: f64,
    w: f64,
    residual: f64,
}

#[derive(Debug, Serialize)]
struct RecoverRecord {
    row: usize,
    degeneracy: affrec::Degeneracy,
    candidates: Vec<CandidateRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    runtime_us: Option<f64>,
}

fn degeneracy_name(d: affrec::Degeneracy) -> String {
    serde_json::to_value(d)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

pub fn cmd_recover(args: &RecoverArgs) -> CliResult<()> {
    let f = require_fundamental(&args.fundamental, "for recover")?;
    let list = read_matches(&args.input)?;
    if !(args.max_scale >= 1.0) || !(args.max_shear >= 0.0) {
        return Err(CliError::Usage("--max-scale must be ≥ 1 and --max-shear ≥ 0".into()));
    }
    let mut records = Vec::with_capacity(list.records.len());
    for (row, rec) in list.records.iter().enumerate() {
        let start = Instant::now();
        let mut result = recover_affine(&f, &rec.corr);
        if !args.no_filter {
            result = filter_candidates(result, args.max_scale, args.max_shear);
        }
        let elapsed = start.elapsed().as_secs_f64() * 1e6;
        let candidates = result
            .candidates
            .iter()
            .map(|c| {
                let a = c.ac.a;
                CandidateRecord {
                    a: [a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]],
                    q_u: c.components.q_u,
                    q_v: c.components.q_v,
                    w: c.components.w,
                    residual: af_consistency_residual(&f, &c.ac).unwrap_or(f64::NAN),
                }
            })
            .collect();
        records.push(RecoverRecord {
            row,
            degeneracy: result.degeneracy,
            candidates,
            runtime_us: args.timing.then_some(elapsed),
        });
    }

    let mut body = String::new();
    if args.json {
        for r in &records {
            body.push_str(&serde_json::to_string(r).expect("record is serializable"));
            body.push('\n');
        }
    } else {
        body.push_str("row,candidate,degeneracy,a11,a12,a21,a22,q_u,q_v,w,residual");
        body.push_str(if args.timing { ",runtime_us\n" } else { "\n" });
        for r in &records {
            let name = degeneracy_name(r.degeneracy);
            let timing = r.runtime_us.map(|t| format!(",{t:e}")).unwrap_or_default();
            if r.candidates.is_empty() {
                let _ = writeln!(body, "{},,{name},,,,,,,,{timing}", r.row);
            }
            for (k, c) in r.candidates.iter().enumerate() {
                let _ = writeln!(
                    body,
                    "{},{k},{name},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}{timing}",
                    r.row, c.a[0], c.a[1], c.a[2], c.a[3], c.q_u, c.q_v, c.w, c.residual
                );
            }
        }
    }
    emit(&args.output, &body, &manifest("recover", args, json!({})))
}

fn ransac_config(r: &RansacArgs) -> RansacConfig {
    RansacConfig {
        threshold: r.threshold,
        confidence: r.confidence,
        max_samples: r.max_samples,
        seed: r.seed,
        lo_iterations: r.lo_iterations,
        combo: r.combo,
        ..RansacConfig::default()
    }
}

fn homography_text(h: &Homography) -> String {
    let m = h.matrix();
    let mut out = String::from("# homography, row-major\n");
    for i in 0..3 {
        let _ = writeln!(out, "{:e} {:e} {:e}", m[(i, 0)], m[(i, 1)], m[(i, 2)]);
    }
    out
}

fn mean_error(h: &Homography, pairs: &[PointPair]) -> f64 {
    pairs.iter().map(|(a, b)| reprojection_error(h, a, b)).sum::<f64>() / pairs.len() as f64
}

pub fn cmd_homography(args: &HomographyArgs) -> CliResult<()> {
    let list = read_matches(&args.input)?;
    let corrs = list.correspondences();
    let pairs: Vec<PointPair> = corrs.iter().map(|c| c.points()).collect();
    let take = |n: usize| -> CliResult<&[PointPair]> {
        pairs
            .get(..n)
            .ok_or_else(|| CliError::Data(format!("solver needs {n} rows, file has {}", pairs.len())))
    };
    let mut inliers = None;
    let mut samples = None;
    let h = match args.solver {
        HomographySolver::Haf => {
            let f = require_fundamental(&args.fundamental, "for the HAF solver")?;
            let corr = corrs
                .get(args.row)
                .ok_or_else(|| CliError::Usage(format!("--row {} is out of range", args.row)))?;
            let rec = recover_affine(&f, corr);
            // with two candidates keep the one that explains the file best
            rec.candidates
                .iter()
                .filter_map(|c| haf_from_ac(&f, &c.ac).ok())
                .min_by(|a, b| mean_error(a, &pairs).total_cmp(&mean_error(b, &pairs)))
                .ok_or_else(|| CliError::Numerical(format!("no affine candidate for row {} ({:?})", args.row, rec.degeneracy)))?
        }
        HomographySolver::FourPoint => h_4pt(take(4)?)?,
        HomographySolver::ThreePoint => {
            let f = require_fundamental(&args.fundamental, "for the 3pt solver")?;
            h_3pt(&f, take(3)?)?
        }
        HomographySolver::Dlt => h_dlt(&pairs)?,
        HomographySolver::Ransac => {
            let f = if args.ransac.combo.needs_fundamental() {
                Some(require_fundamental(&args.fundamental, "for this solver combination")?)
            } else {
                args.fundamental.as_deref().map(read_fundamental).transpose()?
            };
            let qualities = list.qualities();
            let res = lo_ransac_homography(&corrs, f.as_ref(), &ransac_config(&args.ransac), qualities.as_deref())?;
            inliers = Some(res.inliers.len());
            samples = Some(res.samples_drawn);
            res.model
                .ok_or_else(|| CliError::Numerical("no homography found".into()))?
        }
    };
    let body = if args.json {
        let m = h.matrix();
        let entries: Vec<f64> = (0..9).map(|k| m[(k / 3, k % 3)]).collect();
        let v = json!({
            "homography": entries,
            "mean_error": mean_error(&h, &pairs),
            "inliers": inliers,
            "samples": samples,
        });
        serde_json::to_string(&v).expect("serializable") + "\n"
    } else {
        homography_text(&h)
    };
    emit(&args.output, &body, &manifest("homography", args, json!({})))
}

pub fn cmd_fundamental(args: &FundamentalArgs) -> CliResult<()> {
    let list = read_matches(&args.input)?;
    let pairs: Vec<PointPair> = list.correspondences().iter().map(|c| c.points()).collect();
    let mean_sampson = |f: &FundamentalMatrix| {
        pairs.iter().map(|(a, b)| sampson_distance(f, a, b).value).sum::<f64>() / pairs.len() as f64
    };
    let f = match args.method {
        FundamentalMethod::EightPoint => estimate_f_8pt(&pairs)?,
        FundamentalMethod::SevenPoint => {
            if pairs.len() < 7 {
                return Err(CliError::Data(format!("7pt needs 7 rows, file has {}", pairs.len())));
            }
            estimate_f_7pt(&pairs[..7])?
                .into_iter()
                .min_by(|a, b| mean_sampson(a).total_cmp(&mean_sampson(b)))
                .ok_or_else(|| CliError::Numerical("seven-point algorithm found no real solution".into()))?
        }
        FundamentalMethod::Ransac => {
            let cfg = LoConfig {
                threshold: args.threshold,
                confidence: args.confidence,
                max_samples: args.max_samples,
                lo_iterations: args.lo_iterations,
                seed: args.seed,
            };
            let qualities = list.qualities();
            lo_ransac_fundamental(&pairs, &cfg, qualities.as_deref())?
                .model
                .ok_or_else(|| CliError::Numerical("no fundamental matrix found".into()))?
        }
    };
    emit(&args.output, &write_fundamental(&f), &manifest("fundamental", args, json!({})))
}

pub fn cmd_synth(args: &SynthArgs) -> CliResult<()> {
    if args.sigmas.is_empty() {
        return Err(CliError::Usage("--sigmas must not be empty".into()));
    }
    let trials = args.trials as usize;
    let (rows, name) = match args.experiment {
        Experiment::Affine => {
            if args.baseline_sweep {
                return Err(CliError::Usage("--baseline-sweep applies to the homography experiment".into()));
            }
            (synthbench::run_affine_error_experiment(&args.sigmas, trials, args.seed)?, "affine.csv")
        }
        Experiment::Homography => {
            let baselines = args.baseline_sweep.then_some(args.baselines.as_slice());
            if baselines.is_some_and(|b| b.iter().any(|&r| !(r > 0.0 && r <= 200.0))) {
                return Err(CliError::Usage("baseline ratios must lie in (0, 200]".into()));
            }
            let rows = synthbench::run_homography_experiment(&args.sigmas, trials, args.f_mode.into(), baselines, args.seed)?;
            (rows, if args.baseline_sweep { "homography_baseline.csv" } else { "homography.csv" })
        }
    };
    let extra = json!({
        "seed": args.seed,
        "geometry": {
            "focal_px": synthbench::FOCAL,
            "principal_point_px": [synthbench::PRINCIPAL_POINT.0, synthbench::PRINCIPAL_POINT.1],
            "sphere_radius": synthbench::SPHERE_RADIUS,
            "points_per_scene": synthbench::POINTS_PER_SCENE,
        },
    });
    emit_dir(&args.out, name, &synthbench::curve_csv(&rows), &manifest("synth", args, extra))
}

fn eval_csv(report: &EvalReport, timing: bool) -> String {
    let mut out = String::from("label,inliers,skipped,fn_percent,epsilon,samples");
    out.push_str(if timing { ",time_ms\n" } else { "\n" });
    for r in &report.rows {
        let _ = write!(
            out,
            "{},{},{},{},{:e},{}",
            r.label, r.inliers, r.skipped, r.fn_percent, r.epsilon, r.samples
        );
        if timing {
            let _ = write!(out, ",{:e}", r.time_ms);
        }
        out.push('\n');
    }
    let a = &report.aggregate;
    let _ = write!(out, "all,{},false,{},{:e},{}", a.planes, a.fn_percent, a.epsilon, a.samples);
    if timing {
        let _ = write!(out, ",{:e}", a.time_ms);
    }
    out.push('\n');
    out
}

pub fn cmd_eval(args: &EvalArgs) -> CliResult<()> {
    let list = read_matches(&args.input)?;
    let labels = list
        .labels()
        .ok_or_else(|| CliError::Data(format!("{}: eval needs a label column", args.input.matches.display())))?;
    let qualities = if args.no_quality { None } else { list.qualities() };
    let cfg = EvalConfig {
        combo: args.ransac.combo,
        confidence: args.ransac.confidence,
        threshold: args.ransac.threshold,
        repeats: args.repeats as usize,
        fn_threshold: args.fn_threshold,
        seed: args.ransac.seed,
        lo_iterations: args.ransac.lo_iterations,
        max_samples: args.ransac.max_samples,
    };
    let f = args.fundamental.as_deref().map(read_fundamental).transpose()?;
    let report = evaluate(&list.correspondences(), &labels, qualities.as_deref(), f.as_ref(), &cfg)?;
    if report.aggregate.planes == 0 {
        return Err(CliError::Data("no plane has enough labelled inliers".into()));
    }
    let extra = json!({
        "seed": args.ransac.seed,
        "fundamental": report.fundamental,
        "f_inliers": report.f_inliers,
    });
    emit_dir(&args.out, "eval.csv", &eval_csv(&report, args.timing), &manifest("eval", args, extra))
}
