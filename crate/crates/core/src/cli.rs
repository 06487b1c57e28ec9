//! Command-line front end. The `cbiou` binary is a thin wrapper around
//! [`main_with_args`].

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::{Error, ErrorClass, Result};
use crate::experiments::{
    bench, compare, format_bench, format_compare, format_grid, format_metrics, grid_pairs, grid_search,
    parse_range, render_human, SequenceData,
};
use crate::geometry::SimilarityKind;
use crate::metrics::evaluate;
use crate::mot_io;
use crate::synth::{generate, oracle_detections, perturb, NoiseSpec, Preset, ScenarioSpec};
use crate::tracker::{interpolate_gaps, run_sequence, TrackerConfig};

/// Environment variable naming a default tracker config file.
pub const CONFIG_ENV: &str = "CBIOU_CONFIG";

pub const EXIT_ARGUMENT: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "cbiou", version, about = "Cascaded buffered-IoU multi-object tracker")]
pub struct Cli {
    /// Where to write the run manifest (defaults to `<output>.manifest.json`).
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Track a detection file and write MOT results.
    Track(TrackArgs),
    /// Score a results file against ground truth.
    Eval(EvalArgs),
    /// Search buffer scale pairs over a directory of sequences.
    Grid(GridArgs),
    /// Run the six ablation variants over a directory of sequences.
    Compare(CompareArgs),
    /// Inject false negatives and false positives into detections.
    Perturb(PerturbArgs),
    /// Measure tracker throughput on a synthetic workload.
    Bench(BenchArgs),
    /// Write synthetic ground truth and detections.
    Generate(GenerateArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// TOML file with TrackerConfig keys; falls back to $CBIOU_CONFIG.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub b1: Option<f64>,
    #[arg(long)]
    pub b2: Option<f64>,
    #[arg(long)]
    pub max_age: Option<u32>,
    /// Similarity kernel: iou, giou, diou or biou.
    #[arg(long)]
    pub sim: Option<SimilarityKind>,
    #[arg(long)]
    pub no_cascade: bool,
    #[arg(long)]
    pub no_motion: bool,
}

#[derive(Debug, Args)]
pub struct TrackArgs {
    #[arg(long)]
    pub dets: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Fill gaps of up to this many frames by linear interpolation.
    #[arg(long)]
    pub interpolate: Option<u32>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long)]
    pub res: PathBuf,
    #[arg(long)]
    pub report: PathBuf,
    /// Drop ground-truth rows below this visibility.
    #[arg(long)]
    pub min_visibility: Option<f64>,
    /// Also print an aligned rendering of the report.
    #[arg(long)]
    pub human: bool,
}

#[derive(Debug, Args)]
pub struct DatasetArgs {
    /// Directory of detection files, one `<name>.txt` per sequence.
    #[arg(long)]
    pub dets: PathBuf,
    /// Directory of ground-truth files with matching names.
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long)]
    pub report: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Evaluate cells one at a time.
    #[arg(long)]
    pub serial: bool,
    #[arg(long)]
    pub human: bool,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[command(flatten)]
    pub data: DatasetArgs,
    /// Buffer scale values as `start:stop:step`.
    #[arg(long, default_value = "0.1:0.7:0.1")]
    pub range: String,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub data: DatasetArgs,
}

#[derive(Debug, Args)]
pub struct PerturbArgs {
    #[arg(long)]
    pub gt: PathBuf,
    /// Detections to perturb; the ground-truth boxes are used when absent.
    #[arg(long)]
    pub dets: Option<PathBuf>,
    #[arg(long)]
    pub ratio: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Remove the same share from every frame.
    #[arg(long)]
    pub stratified: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 20)]
    pub objects: usize,
    #[arg(long, default_value_t = 1000)]
    pub frames: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Scenario spec as TOML.
    #[arg(long, conflicts_with = "preset")]
    pub spec: Option<PathBuf>,
    /// fast-linear, irregular or crowded.
    #[arg(long)]
    pub preset: Option<Preset>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of sequences, seeded `seed`, `seed + 1`, ...
    #[arg(long, default_value_t = 1)]
    pub sequences: u64,
    /// Also write detections perturbed at this noise ratio.
    #[arg(long)]
    pub noise: Option<f64>,
    /// Receives `gt/` and `det/` subdirectories.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[arg(long = "from")]
    pub from: PathBuf,
}

/// Record of one run: enough to repeat it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Arguments after the program name.
    pub args: Vec<String>,
    /// Effective tracker configuration, if the command tracks.
    pub config: Option<TrackerConfig>,
    /// Per-variant or per-cell configurations for batch commands.
    pub configs: BTreeMap<String, TrackerConfig>,
    pub paths: BTreeMap<String, String>,
    pub params: BTreeMap<String, serde_json::Value>,
    pub timings: BTreeMap<String, f64>,
}

impl RunManifest {
    fn new(command: &str, args: &[String]) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_owned(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            command: command.to_owned(),
            args: args.to_vec(),
            config: None,
            configs: BTreeMap::new(),
            paths: BTreeMap::new(),
            params: BTreeMap::new(),
            timings: BTreeMap::new(),
        }
    }

    fn path(&mut self, key: &str, p: &Path) {
        self.paths.insert(key.to_owned(), p.display().to_string());
    }

    fn param(&mut self, key: &str, v: impl Serialize) {
        self.params
            .insert(key.to_owned(), serde_json::to_value(v).expect("manifest values serialize"));
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::invalid(format!("{}: not a run manifest: {e}", path.display())))
    }

    fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        write_file(path, &text)
    }
}

/// `<output>.manifest.json` next to `output`.
pub fn default_manifest_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Parse a flat TOML document of TrackerConfig keys.
pub fn parse_config(text: &str) -> Result<TrackerConfig> {
    toml::from_str(text).map_err(|e| Error::invalid(format!("bad tracker config: {e}")))
}

/// Defaults, then the config file, then command-line overrides.
pub fn resolve_config(args: &ConfigArgs) -> Result<(TrackerConfig, Option<PathBuf>)> {
    let file = args
        .config
        .clone()
        .or_else(|| std::env::var_os(CONFIG_ENV).filter(|v| !v.is_empty()).map(PathBuf::from));
    let mut cfg = match &file {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            parse_config(&text).map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?
        }
        None => TrackerConfig::default(),
    };
    if let Some(v) = args.b1 {
        cfg.b1 = v;
    }
    if let Some(v) = args.b2 {
        cfg.b2 = v;
    }
    if let Some(v) = args.max_age {
        cfg.max_age = v;
    }
    if let Some(v) = args.sim {
        cfg.similarity_kind = v;
    }
    if args.no_cascade {
        cfg.cascade_enabled = false;
    }
    if args.no_motion {
        cfg.motion_enabled = false;
    }
    cfg.validate()?;
    Ok((cfg, file))
}

fn txt_files(dir: &Path) -> Result<BTreeMap<String, PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = BTreeMap::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().is_some_and(|e| e == "txt") && path.is_file() {
            if let Some(stem) = path.file_stem() {
                files.insert(stem.to_string_lossy().into_owned(), path);
            }
        }
    }
    Ok(files)
}

/// Pair `<name>.txt` files from the detection and ground-truth directories.
pub fn load_dataset(dets: &Path, gt: &Path) -> Result<Vec<SequenceData>> {
    let det_files = txt_files(dets)?;
    let gt_files = txt_files(gt)?;
    if let Some(name) = det_files.keys().find(|k| !gt_files.contains_key(*k)) {
        return Err(Error::Data {
            line: 0,
            msg: format!("sequence {name} has detections but no ground truth in {}", gt.display()),
        });
    }
    if let Some(name) = gt_files.keys().find(|k| !det_files.contains_key(*k)) {
        return Err(Error::Data {
            line: 0,
            msg: format!("sequence {name} has ground truth but no detections in {}", dets.display()),
        });
    }
    if det_files.is_empty() {
        return Err(Error::Data {
            line: 0,
            msg: format!("no sequences found in {}", dets.display()),
        });
    }
    det_files
        .into_iter()
        .map(|(name, det_path)| {
            let gt = mot_io::read_ground_truth(&gt_files[&name], None).map_err(|e| in_file(e, &gt_files[&name]))?;
            let detections = mot_io::read_detections(&det_path).map_err(|e| in_file(e, &det_path))?;
            Ok(SequenceData { name, gt, detections })
        })
        .collect()
}

/// Prefix row-level errors with the file they came from.
fn in_file(e: Error, path: &Path) -> Error {
    match e {
        Error::Parse { line, msg } => Error::Parse {
            line,
            msg: format!("{}: {msg}", path.display()),
        },
        Error::Data { line, msg } => Error::Data {
            line,
            msg: format!("{}: {msg}", path.display()),
        },
        Error::DuplicateRow { .. } | Error::DuplicateIdentity { .. } => Error::Data {
            line: 0,
            msg: format!("{}: {e}", path.display()),
        },
        other => other,
    }
}

fn emit(report: &str, human: bool) {
    if human {
        print!("{}", render_human(report));
    } else {
        print!("{report}");
    }
}

fn record_config(m: &mut RunManifest, cfg: TrackerConfig, file: Option<PathBuf>) {
    m.config = Some(cfg);
    if let Some(f) = file {
        m.path("config", &f);
    }
}

/// Run a parsed command line. `pinned` replaces config resolution, which
/// is how replays reuse the configuration recorded in a manifest.
pub fn run(cli: Cli, args: &[String], pinned: Option<TrackerConfig>) -> Result<()> {
    let start = Instant::now();
    let config = |c: &ConfigArgs| -> Result<(TrackerConfig, Option<PathBuf>)> {
        match pinned {
            Some(cfg) => {
                cfg.validate()?;
                Ok((cfg, None))
            }
            None => resolve_config(c),
        }
    };
    let (mut manifest, output) = match cli.command {
        Command::Track(a) => {
            let (cfg, file) = config(&a.config)?;
            let mut m = RunManifest::new("track", args);
            record_config(&mut m, cfg, file);
            let dets = mot_io::read_detections(&a.dets).map_err(|e| in_file(e, &a.dets))?;
            let t = Instant::now();
            let mut outputs = run_sequence(&cfg, &dets)?;
            m.timings.insert("tracking_secs".into(), t.elapsed().as_secs_f64());
            if let Some(gap) = a.interpolate {
                outputs = interpolate_gaps(&outputs, gap)?;
                m.param("interpolate", gap);
            }
            mot_io::write_results(&a.out, &outputs)?;
            m.path("dets", &a.dets);
            m.path("out", &a.out);
            (m, a.out)
        }
        Command::Eval(a) => {
            let mut m = RunManifest::new("eval", args);
            let gt = mot_io::read_ground_truth(&a.gt, a.min_visibility).map_err(|e| in_file(e, &a.gt))?;
            let res = mot_io::read_results(&a.res).map_err(|e| in_file(e, &a.res))?;
            let report = format_metrics(&evaluate(&gt, &res)?);
            write_file(&a.report, &report)?;
            emit(&report, a.human);
            m.path("gt", &a.gt);
            m.path("res", &a.res);
            m.path("report", &a.report);
            if let Some(v) = a.min_visibility {
                m.param("min_visibility", v);
            }
            (m, a.report)
        }
        Command::Grid(a) => {
            let (cfg, file) = config(&a.data.config)?;
            let values = parse_range(&a.range)?;
            let mut m = RunManifest::new("grid", args);
            record_config(&mut m, cfg, file);
            let data = load_dataset(&a.data.dets, &a.data.gt)?;
            let grid = grid_search(&cfg, &values, &data, !a.data.serial)?;
            let report = format_grid(&grid);
            write_file(&a.data.report, &report)?;
            emit(&report, a.data.human);
            for c in &grid.cells {
                m.configs.insert(
                    format!("b1={},b2={}", c.b1, c.b2),
                    TrackerConfig { b1: c.b1, b2: c.b2, ..crate::tracker::Variant::CBiouMotion.configure(&cfg) },
                );
            }
            m.param("range", &a.range);
            m.param("combinations", grid_pairs(&values).len());
            m.param("sequences", data.iter().map(|s| s.name.clone()).collect::<Vec<_>>());
            m.path("dets", &a.data.dets);
            m.path("gt", &a.data.gt);
            m.path("report", &a.data.report);
            (m, a.data.report)
        }
        Command::Compare(a) => {
            let (cfg, file) = config(&a.data.config)?;
            let mut m = RunManifest::new("compare", args);
            record_config(&mut m, cfg, file);
            let data = load_dataset(&a.data.dets, &a.data.gt)?;
            let rows = compare(&cfg, &data, !a.data.serial)?;
            let report = format_compare(&rows);
            write_file(&a.data.report, &report)?;
            emit(&report, a.data.human);
            for r in &rows {
                m.configs.insert(r.variant.label().to_owned(), r.config);
            }
            m.param("sequences", data.iter().map(|s| s.name.clone()).collect::<Vec<_>>());
            m.path("dets", &a.data.dets);
            m.path("gt", &a.data.gt);
            m.path("report", &a.data.report);
            (m, a.data.report)
        }
        Command::Perturb(a) => {
            let noise = NoiseSpec { ratio: a.ratio, seed: a.seed, stratified: a.stratified };
            noise.validate()?;
            let mut m = RunManifest::new("perturb", args);
            let gt = mot_io::read_ground_truth(&a.gt, None).map_err(|e| in_file(e, &a.gt))?;
            let dets = match &a.dets {
                Some(p) => {
                    m.path("dets", p);
                    mot_io::read_detections(p).map_err(|e| in_file(e, p))?
                }
                None => oracle_detections(&gt)?,
            };
            let noisy = perturb(&dets, &noise, &gt)?;
            mot_io::write_detections(&a.out, &noisy)?;
            m.param("noise", noise);
            m.path("gt", &a.gt);
            m.path("out", &a.out);
            (m, a.out)
        }
        Command::Bench(a) => {
            let (cfg, file) = config(&a.config)?;
            let mut m = RunManifest::new("bench", args);
            record_config(&mut m, cfg, file);
            let (b, _) = bench(&cfg, a.objects, a.frames, a.seed)?;
            let report = format_bench(&b);
            print!("{report}");
            m.param("objects", a.objects);
            m.param("frames", a.frames);
            m.param("seed", a.seed);
            m.timings.insert("tracking_secs".into(), b.elapsed_secs);
            m.timings.insert("fps".into(), b.fps);
            let out = match a.report {
                Some(p) => {
                    write_file(&p, &report)?;
                    m.path("report", &p);
                    p
                }
                None => PathBuf::from("cbiou-bench"),
            };
            (m, out)
        }
        Command::Generate(a) => {
            let base: ScenarioSpec = match (&a.spec, a.preset) {
                (Some(p), _) => {
                    let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                    toml::from_str(&text)
                        .map_err(|e| Error::invalid(format!("{}: bad scenario spec: {e}", p.display())))?
                }
                (None, Some(preset)) => preset.spec(a.seed),
                (None, None) => return Err(Error::invalid("generate needs --spec or --preset")),
            };
            if a.sequences == 0 {
                return Err(Error::invalid("--sequences must be at least 1"));
            }
            let mut m = RunManifest::new("generate", args);
            for sub in ["gt", "det"] {
                let dir = a.out_dir.join(sub);
                fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            }
            for k in 0..a.sequences {
                let spec = ScenarioSpec { seed: a.seed + k, ..base };
                let s = generate(&spec)?;
                let name = format!("seq{:03}", k);
                mot_io::write_ground_truth(a.out_dir.join("gt").join(format!("{name}.txt")), &s.gt)?;
                let dets = match a.noise {
                    Some(ratio) => perturb(&s.detections, &NoiseSpec::new(ratio, spec.seed)?, &s.gt)?,
                    None => s.detections,
                };
                mot_io::write_detections(a.out_dir.join("det").join(format!("{name}.txt")), &dets)?;
                m.param(&name, spec);
            }
            if let Some(r) = a.noise {
                m.param("noise", r);
            }
            m.path("out_dir", &a.out_dir);
            (m, a.out_dir.join("generate"))
        }
        Command::Replay(a) => {
            let recorded = RunManifest::read(&a.from)?;
            if recorded.command == "replay" {
                return Err(Error::invalid("cannot replay a replay manifest"));
            }
            let argv = std::iter::once("cbiou".to_owned()).chain(recorded.args.iter().cloned());
            let cli = Cli::try_parse_from(argv).map_err(|e| Error::invalid(e.to_string()))?;
            return run(cli, &recorded.args, recorded.config);
        }
    };
    manifest.timings.insert("wall_secs".into(), start.elapsed().as_secs_f64());
    let path = cli.manifest.unwrap_or_else(|| default_manifest_path(&output));
    manifest.write(&path)
}

pub fn exit_code(e: &Error) -> i32 {
    match e.class() {
        ErrorClass::Argument => EXIT_ARGUMENT,
        ErrorClass::Data => EXIT_DATA,
        ErrorClass::Io => EXIT_IO,
    }
}

/// Parse, run and map the outcome to a process exit code.
pub fn main_with_args(argv: impl IntoIterator<Item = OsString>) -> i32 {
    let argv: Vec<OsString> = argv.into_iter().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ARGUMENT } else { 0 };
        }
    };
    let args: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match run(cli, &args, None) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
