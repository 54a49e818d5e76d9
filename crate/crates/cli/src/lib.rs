//! Experiment harness: dataset generation, detector training, evaluation
//! and SNR sweeps driven by a JSON config.

pub mod config;
pub mod report;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use satjam_core::dataset::{generate_split, sample_seed, synthesize, Dataset, Split};
use satjam_core::detectors::{cnn_train_dataset, pca_svm_train_dataset, Detector};
use satjam_core::{Error, Exec, Result};
use satjam_ml::ModelParams;
use serde_json::json;

use crate::config::{DetectorKind, ExperimentConfig, Overrides};
use crate::report::{DetectorReport, Report, ReproduceRow, ReproduceTable};

pub const VERSION: &str = env!("SATJAM_VERSION");

#[derive(Parser, Debug)]
#[command(name = "satjam", version = VERSION, about = "Jamming detection experiments on simulated OFDM telemetry")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Use the config's full-scale sample counts and sample length.
    #[arg(long)]
    pub full_scale: bool,
    /// Overrides every seed in the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory (overrides the config).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SplitArg {
    Train,
    Test,
}

impl From<SplitArg> for Split {
    fn from(s: SplitArg) -> Split {
        match s {
            SplitArg::Train => Split::Train,
            SplitArg::Test => Split::Test,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate the train and test datasets.
    Generate(Common),
    /// Train the configured detectors (generates datasets when missing).
    Train(Common),
    /// Evaluate trained detectors and write report.json.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "test")]
        split: SplitArg,
    },
    /// Write one sample's spectrogram as a PGM image.
    ExportSpectrogram {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        index: usize,
        #[arg(long, value_enum, default_value = "test")]
        split: SplitArg,
    },
    /// Train and evaluate both detectors at every SNR of the config's sweep.
    Reproduce(Common),
}

/// Process exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => 2,
        Error::Format { .. } => 3,
        Error::Training(_) => 4,
        Error::Io(_) => 5,
        _ => 6,
    }
}

/// Execution policy from `SATJAM_THREADS`: unset uses every core, `1` runs
/// sequentially, `n > 1` caps the worker pool at `n` threads.
pub fn exec_from_env() -> Result<Exec> {
    match std::env::var("SATJAM_THREADS") {
        Err(_) => Ok(Exec::Parallel),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(1) => Ok(Exec::Sequential),
            Ok(n) if n > 1 => {
                satjam_ml::exec::init_threads(n);
                Ok(Exec::Parallel)
            }
            _ => Err(Error::Config(format!("SATJAM_THREADS must be a positive integer, got '{v}'"))),
        },
    }
}

/// Wall-clock stage timings, written next to the deterministic outputs.
#[derive(Default)]
pub struct Timings {
    stages: Vec<(String, f64)>,
}

impl Timings {
    pub fn time<T>(&mut self, stage: impl Into<String>, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f()?;
        self.stages.push((stage.into(), start.elapsed().as_secs_f64()));
        Ok(out)
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let stages: Vec<_> = self.stages.iter().map(|(s, t)| json!({ "stage": s, "seconds": t })).collect();
        let total: f64 = self.stages.iter().map(|s| s.1).sum();
        let doc = json!({ "stages": stages, "total_seconds": total });
        std::fs::write(dir.join("timing.json"), serde_json::to_string_pretty(&doc).expect("json") + "\n")?;
        Ok(())
    }
}

pub struct Paths {
    pub dir: PathBuf,
}

impl Paths {
    pub fn dataset(&self, split: Split) -> PathBuf {
        self.dir.join(match split {
            Split::Train => "train.sjd",
            Split::Test => "test.sjd",
        })
    }

    pub fn model(&self, kind: DetectorKind) -> PathBuf {
        self.dir.join(format!("{}.sjm", kind.name()))
    }

    pub fn trace(&self) -> PathBuf {
        self.dir.join("cnn_trace.csv")
    }
}

fn prepare(cfg: &ExperimentConfig) -> Result<Paths> {
    std::fs::create_dir_all(&cfg.out_dir)?;
    std::fs::write(cfg.out_dir.join("config.json"), cfg.to_json() + "\n")?;
    Ok(Paths { dir: cfg.out_dir.clone() })
}

/// Loads a dataset from the output directory if it matches the config,
/// otherwise generates and saves it.
fn dataset(cfg: &ExperimentConfig, paths: &Paths, split: Split, exec: Exec, t: &mut Timings) -> Result<Dataset> {
    let path = paths.dataset(split);
    if path.exists() {
        let ds = Dataset::load(&path)?;
        let m = &ds.manifest;
        if m.scenario != cfg.scenario || m.pipeline != cfg.pipeline || m.split != split {
            return Err(Error::Config(format!(
                "{} was generated from a different configuration; remove it or pick another --out",
                path.display()
            )));
        }
        return Ok(ds);
    }
    let ds = t.time(format!("generate {split:?}"), || generate_split(&cfg.scenario, &cfg.pipeline, split, exec))?;
    ds.save(&path)?;
    Ok(ds)
}

pub fn cmd_generate(cfg: &ExperimentConfig, exec: Exec, t: &mut Timings) -> Result<(Dataset, Dataset)> {
    let paths = prepare(cfg)?;
    let train = dataset(cfg, &paths, Split::Train, exec, t)?;
    let test = dataset(cfg, &paths, Split::Test, exec, t)?;
    Ok((train, test))
}

pub fn cmd_train(cfg: &ExperimentConfig, exec: Exec, t: &mut Timings) -> Result<Vec<Detector>> {
    let paths = prepare(cfg)?;
    let train = dataset(cfg, &paths, Split::Train, exec, t)?;
    let mut out = Vec::new();
    for &kind in &cfg.detectors {
        let det = match kind {
            DetectorKind::Cnn => {
                let (net, trace) = t.time("train cnn", || cnn_train_dataset(&train, &cfg.cnn.arch, &cfg.cnn.train, exec))?;
                std::fs::write(paths.trace(), trace.to_csv())?;
                Detector::Cnn(net)
            }
            DetectorKind::PcaSvm => Detector::PcaSvm(t.time("train pca-svm", || pca_svm_train_dataset(&train, &cfg.pca_svm))?),
        };
        det.to_params().save(paths.model(kind))?;
        out.push(det);
    }
    Ok(out)
}

pub fn evaluate_detector(det: &Detector, ds: &Dataset, exec: Exec) -> Result<DetectorReport> {
    let predicted = det.predict(&ds.pixel_matrix(), exec)?;
    Ok(DetectorReport::new(det.name(), ds, &predicted))
}

pub fn cmd_evaluate(cfg: &ExperimentConfig, split: Split, exec: Exec, t: &mut Timings) -> Result<Report> {
    let paths = prepare(cfg)?;
    let mut detectors = Vec::new();
    for &kind in &cfg.detectors {
        let path = paths.model(kind);
        if !path.exists() {
            return Err(Error::Io(std::io::Error::new(
                std::io::ErrorKind::NotFound,
                format!("model {} not found; run `satjam train` first", path.display()),
            )));
        }
        detectors.push(Detector::from_params(&ModelParams::load(&path)?)?);
    }
    let ds = dataset(cfg, &paths, split, exec, t)?;
    let mut reports = Vec::new();
    for det in &detectors {
        reports.push(t.time(format!("evaluate {}", det.name()), || evaluate_detector(det, &ds, exec))?);
    }
    let report = Report {
        version: VERSION.to_string(),
        split: format!("{split:?}").to_lowercase(),
        config: cfg.clone(),
        detectors: reports,
    };
    std::fs::write(paths.dir.join("report.json"), report.to_json())?;
    Ok(report)
}

pub fn cmd_export_spectrogram(cfg: &ExperimentConfig, split: Split, index: usize) -> Result<PathBuf> {
    let n = cfg.scenario.count(split);
    if index >= n {
        return Err(Error::Config(format!("index {index} out of range for {n} samples")));
    }
    let paths = prepare(cfg)?;
    let tag = cfg.scenario.tag(index);
    let img = synthesize(&cfg.pipeline, &tag, sample_seed(cfg.scenario.seed, split, index))?;
    let name = format!("spectrogram_{}_{index}_{}.pgm", format!("{split:?}").to_lowercase(), tag.attack.name());
    let path = paths.dir.join(name);
    let mut file = std::io::BufWriter::new(std::fs::File::create(&path)?);
    img.write_pgm(&mut file)?;
    std::io::Write::flush(&mut file)?;
    Ok(path)
}

/// One train/evaluate cycle per sweep SNR, each in its own subdirectory.
pub fn cmd_reproduce(cfg: &ExperimentConfig, exec: Exec, t: &mut Timings) -> Result<ReproduceTable> {
    let sweep = cfg
        .sweep
        .clone()
        .ok_or_else(|| Error::Config("reproduce needs a sweep section in the config".into()))?;
    prepare(cfg)?;
    let mut rows = Vec::new();
    for (i, &snr) in sweep.snr_levels.iter().enumerate() {
        let mut sub = cfg.clone();
        sub.scenario.snr_levels = vec![snr];
        sub.sweep = None;
        sub.out_dir = cfg.out_dir.join(format!("snr_{snr}"));
        cmd_train(&sub, exec, t)?;
        let report = cmd_evaluate(&sub, Split::Test, exec, t)?;
        let acc = |name: &str| report.detectors.iter().find(|d| d.detector == name).map(|d| d.accuracy);
        rows.push(ReproduceRow {
            snr_db: snr,
            cnn: acc(DetectorKind::Cnn.name()),
            pca_svm: acc(DetectorKind::PcaSvm.name()),
            reference_cnn: sweep.reference.as_ref().map(|r| r.cnn[i]),
            reference_pca_svm: sweep.reference.as_ref().map(|r| r.pca_svm[i]),
        });
    }
    let table = ReproduceTable { version: VERSION.to_string(), config: cfg.clone(), rows };
    std::fs::write(cfg.out_dir.join("reproduce.json"), table.to_json())?;
    std::fs::write(cfg.out_dir.join("reproduce.csv"), table.to_csv())?;
    Ok(table)
}

fn resolve(c: &Common) -> Result<ExperimentConfig> {
    let o = Overrides { full_scale: c.full_scale, seed: c.seed, out_dir: c.out.clone() };
    ExperimentConfig::load(&c.config)?.resolve(&o)
}

/// Runs one CLI command, printing a short summary to stdout.
pub fn run(cli: Cli) -> Result<()> {
    let exec = exec_from_env()?;
    let mut t = Timings::default();
    let dir = match &cli.command {
        Command::Generate(c) => {
            let cfg = resolve(c)?;
            let (train, test) = cmd_generate(&cfg, exec, &mut t)?;
            println!("wrote {} train and {} test samples to {}", train.len(), test.len(), cfg.out_dir.display());
            cfg.out_dir
        }
        Command::Train(c) => {
            let cfg = resolve(c)?;
            for det in cmd_train(&cfg, exec, &mut t)? {
                println!("trained {} -> {}", det.name(), cfg.out_dir.display());
            }
            cfg.out_dir
        }
        Command::Evaluate { common, split } => {
            let cfg = resolve(common)?;
            print!("{}", cmd_evaluate(&cfg, (*split).into(), exec, &mut t)?.table());
            cfg.out_dir
        }
        Command::ExportSpectrogram { common, index, split } => {
            let cfg = resolve(common)?;
            println!("{}", cmd_export_spectrogram(&cfg, (*split).into(), *index)?.display());
            return Ok(());
        }
        Command::Reproduce(c) => {
            let cfg = resolve(c)?;
            print!("{}", cmd_reproduce(&cfg, exec, &mut t)?.table());
            cfg.out_dir
        }
    };
    t.write(&dir)
}
