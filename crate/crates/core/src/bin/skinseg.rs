use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use skinseg::config::PipelineConfig;
use skinseg::evalkit::{metrics_csv, LUT_DEFAULT_BINS};
use skinseg::pipeline::{
    cmd_baseline, cmd_eval, cmd_segment, cmd_train, load_lut, load_model, with_jobs,
    write_metrics_csv, BaselineRule, PixelSource, RunReport, TrainRequest,
};
use skinseg::skinmodel::TrainParams;

#[derive(Parser)]
#[command(name = "skinseg", version, about = "Skin segmentation by seeded ray diffusion")]
struct Cli {
    /// Pipeline config file (key=value lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Write intermediate rasters next to each mask.
    #[arg(long, global = true)]
    debug_artifacts: bool,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Config override, applied after the file; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a skin cluster model.
    Train(TrainArgs),
    /// Segment images with a trained model.
    Segment(SegmentArgs),
    /// Score masks against ground truth.
    Eval(EvalArgs),
    /// Run a pixel-wise baseline classifier.
    Baseline(BaselineArgs),
}

#[derive(Args)]
struct TrainArgs {
    /// Directory of training images.
    #[arg(long, requires = "gt", conflicts_with = "triplets")]
    images: Option<PathBuf>,
    /// Directory of ground-truth images matched to --images by name.
    #[arg(long)]
    gt: Option<PathBuf>,
    /// Text file of skin RGB triplets.
    #[arg(long)]
    triplets: Option<PathBuf>,
    /// Model output path (default: <out>/model.json).
    #[arg(long)]
    model_out: Option<PathBuf>,
    #[arg(long, default_value_t = TrainParams::default().tau_in)]
    tau_in: f64,
    #[arg(long, default_value_t = TrainParams::default().tau_out)]
    tau_out: f64,
    /// Use raw counts for the inner polygon.
    #[arg(long)]
    no_smoothing: bool,
    /// Also write a LUT baseline model here.
    #[arg(long)]
    lut_out: Option<PathBuf>,
    #[arg(long, default_value_t = LUT_DEFAULT_BINS)]
    lut_bins: usize,
}

#[derive(Args)]
struct SegmentArgs {
    /// Input PNG files or directories.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Model file (overrides model.path).
    #[arg(long)]
    model: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    masks: PathBuf,
    #[arg(long)]
    gt: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Rule {
    Daylight,
    Flashlight,
    Lut,
}

#[derive(Args)]
struct BaselineArgs {
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long, value_enum)]
    rule: Rule,
    /// LUT model (required for --rule lut).
    #[arg(long)]
    lut: Option<PathBuf>,
    /// Minimum bin probability for --rule lut.
    #[arg(long, default_value_t = 1e-5)]
    theta: f64,
}

fn load_config(cli: &Cli) -> skinseg::Result<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::from_file(p)?,
        None => PipelineConfig::default(),
    };
    for o in &cli.overrides {
        cfg.set_assignment(o)?;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    if cli.debug_artifacts {
        cfg.debug_artifacts = true;
    }
    Ok(cfg)
}

fn report_failures(report: &RunReport) -> ExitCode {
    for r in &report.images {
        match &r.error {
            Some(e) => eprintln!("FAILED {}: {e}", r.image.display()),
            None => println!("ok     {}", r.image.display()),
        }
    }
    if report.failures() > 0 {
        eprintln!("{} of {} images failed", report.failures(), report.images.len());
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn run(cli: Cli) -> skinseg::Result<ExitCode> {
    let mut cfg = load_config(&cli)?;
    match cli.command {
        Command::Train(a) => {
            let source = match (a.images, a.gt, a.triplets) {
                (Some(images), Some(ground_truth), None) => PixelSource::Annotated {
                    images,
                    ground_truth,
                },
                (None, None, Some(t)) => PixelSource::Triplets(t),
                _ => {
                    return Err(skinseg::Error::Config(
                        "train needs either --images with --gt, or --triplets".into(),
                    ))
                }
            };
            let req = TrainRequest {
                source,
                model_out: a
                    .model_out
                    .unwrap_or_else(|| cfg.output_dir.join("model.json")),
                params: TrainParams {
                    tau_in: a.tau_in,
                    tau_out: a.tau_out,
                    smoothing: !a.no_smoothing,
                },
                lut: a.lut_out.map(|p| (p, a.lut_bins)),
            };
            let (_, summary) = with_jobs(cli.jobs, || cmd_train(&req))??;
            println!("trained on {} skin pixels -> {}", summary.pixels, req.model_out.display());
            for (plane, inner, outer) in summary.vertex_counts {
                println!("{plane}: inner {inner} vertices, outer {outer} vertices");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Segment(a) => {
            if let Some(m) = a.model {
                cfg.model_path = Some(m);
            }
            let model_path = cfg
                .model_path
                .clone()
                .ok_or_else(|| skinseg::Error::Config("no model: pass --model or set model.path".into()))?;
            let model = load_model(&model_path)?;
            let report = with_jobs(cli.jobs, || cmd_segment(&a.inputs, &model, &cfg))??;
            Ok(report_failures(&report))
        }
        Command::Eval(a) => {
            let rows = cmd_eval(&a.masks, &a.gt)?;
            if let Some(out) = &cli.out {
                write_metrics_csv(&out.join("metrics.csv"), &rows)?;
            }
            print!("{}", metrics_csv(&rows));
            Ok(ExitCode::SUCCESS)
        }
        Command::Baseline(a) => {
            let rule = match a.rule {
                Rule::Daylight => BaselineRule::Daylight,
                Rule::Flashlight => BaselineRule::Flashlight,
                Rule::Lut => {
                    let path = a.lut.ok_or_else(|| {
                        skinseg::Error::Config("--rule lut requires --lut <model>".into())
                    })?;
                    BaselineRule::Lut {
                        model: load_lut(&path)?,
                        theta: a.theta,
                    }
                }
            };
            let report = with_jobs(cli.jobs, || cmd_baseline(&a.inputs, &rule, &cfg.output_dir))??;
            Ok(report_failures(&report))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
