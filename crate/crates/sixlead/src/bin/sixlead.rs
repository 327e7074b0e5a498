//! Command-line front end for the six-lead reconstruction pipeline.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sixlead::pipeline::{
    cmd_evaluate, cmd_explain, cmd_preprocess, cmd_reconstruct, cmd_sweep_lambda, cmd_synth,
    cmd_train, EvaluateCommand, ExplainCommand, PipelineError, ReconstructCommand, RunConfig,
    SynthCommand, TrainOptions,
};
use sixlead::synth::{IcmMapSpec, SynthConfig};

#[derive(Parser)]
#[command(
    name = "sixlead",
    version,
    about = "Reconstructs the frontal six-lead ECG from a single channel via globally optimal sparse ReLU models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic record (channels ICM, I, II)
    Synth(SynthArgs),
    /// Band-pass and decimate every channel of a record
    Preprocess(RunArgs),
    /// Fit the two lead models on the training window
    Train(TrainArgs),
    /// Predict leads I and II from the monitor channel and derive the rest
    Reconstruct(ReconstructArgs),
    /// Score a reconstruction against ground truth
    Evaluate(EvaluateArgs),
    /// Trace a model back to its anchoring training samples
    Explain(ExplainArgs),
    /// Fit across a grid of regularization weights
    #[command(name = "sweep-lambda")]
    SweepLambda(SweepArgs),
}

/// Flags shared by every command that runs the preprocessing + training
/// configuration. Flags override config-file keys, which override the
/// protocol defaults.
#[derive(Args)]
struct RunArgs {
    /// Key-value config file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input record CSV
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Input sample rate in Hz
    #[arg(long)]
    sample_rate: Option<f64>,
    /// Band-pass low cutoff in Hz
    #[arg(long)]
    low_cut: Option<f64>,
    /// Band-pass high cutoff in Hz
    #[arg(long)]
    high_cut: Option<f64>,
    /// Butterworth order per direction
    #[arg(long)]
    order: Option<usize>,
    /// Decimation factor
    #[arg(long)]
    decimate: Option<usize>,
    /// Anti-alias cutoff as a fraction of the post-decimation Nyquist
    #[arg(long)]
    guard_fraction: Option<f64>,
    /// Training window length in samples (post-decimation)
    #[arg(long)]
    train_len: Option<usize>,
    /// Test window length in samples (post-decimation)
    #[arg(long)]
    test_len: Option<usize>,
    /// Training window offset in samples (post-decimation)
    #[arg(long)]
    offset: Option<usize>,
    /// L1 regularization weight
    #[arg(long)]
    lambda: Option<f64>,
    /// KKT convergence tolerance
    #[arg(long)]
    kkt_tol: Option<f64>,
    /// Iteration budget
    #[arg(long)]
    max_iters: Option<usize>,
    /// accelerated_proximal or coordinate_descent
    #[arg(long)]
    algorithm: Option<String>,
    /// Seed echoed into manifests
    #[arg(long)]
    seed: Option<u64>,
}

impl RunArgs {
    fn build(&self) -> Result<RunConfig, PipelineError> {
        let mut config = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        let mut set = |key: &str, value: Option<String>| -> Result<(), PipelineError> {
            if let Some(v) = value {
                config.set(key, &v).map_err(|e| {
                    PipelineError::Config(format!("--{}: {e}", key.replace('_', "-")))
                })?;
            }
            Ok(())
        };
        set(
            "input",
            self.input.as_ref().map(|p| p.display().to_string()),
        )?;
        set(
            "out_dir",
            self.out_dir.as_ref().map(|p| p.display().to_string()),
        )?;
        set("sample_rate_hz", self.sample_rate.map(|v| v.to_string()))?;
        set("low_cut_hz", self.low_cut.map(|v| v.to_string()))?;
        set("high_cut_hz", self.high_cut.map(|v| v.to_string()))?;
        set("filter_order", self.order.map(|v| v.to_string()))?;
        set("decimate", self.decimate.map(|v| v.to_string()))?;
        set("guard_fraction", self.guard_fraction.map(|v| v.to_string()))?;
        set("train_len", self.train_len.map(|v| v.to_string()))?;
        set("test_len", self.test_len.map(|v| v.to_string()))?;
        set("train_offset", self.offset.map(|v| v.to_string()))?;
        set("lambda", self.lambda.map(|v| v.to_string()))?;
        set("kkt_tol", self.kkt_tol.map(|v| v.to_string()))?;
        set("max_iters", self.max_iters.map(|v| v.to_string()))?;
        set("algorithm", self.algorithm.clone())?;
        set("seed", self.seed.map(|v| v.to_string()))?;
        Ok(config)
    }
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Also write per-iteration objective traces as CSV
    #[arg(long)]
    trace: bool,
    /// Retrain on shifted training windows and report the metric spread
    #[arg(long, value_delimiter = ',')]
    shift_offsets: Vec<usize>,
    /// Also dump the training feature matrix as CSV
    #[arg(long)]
    dump_kernel: bool,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Heart rate in beats per minute
    #[arg(long)]
    bpm: Option<f64>,
    /// Duration in seconds
    #[arg(long)]
    duration: Option<f64>,
    /// Sample rate in Hz
    #[arg(long)]
    sample_rate: Option<f64>,
    /// Beat-to-beat RR jitter (fraction of nominal RR)
    #[arg(long)]
    jitter: Option<f64>,
    /// Additive lead noise (mV std)
    #[arg(long)]
    noise: Option<f64>,
    /// Monitor map preset: identity, strong, cubic, saturating, square
    #[arg(long, default_value = "identity")]
    map: String,
    /// Saturation level for the saturating map
    #[arg(long, default_value_t = 0.3)]
    sat_level: f64,
    /// Additive monitor-channel noise (mV std)
    #[arg(long, default_value_t = 0.0)]
    icm_noise: f64,
    /// Lead I coefficient of the monitor mix
    #[arg(long, default_value_t = 0.6)]
    alpha: f64,
    /// Lead II coefficient of the monitor mix
    #[arg(long, default_value_t = 0.4)]
    beta: f64,
}

#[derive(Args)]
struct ReconstructArgs {
    #[arg(long)]
    model_i: PathBuf,
    #[arg(long)]
    model_ii: PathBuf,
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Overrides the sample rate stored in the model metadata
    #[arg(long)]
    sample_rate: Option<f64>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Reconstructed six-lead CSV
    #[arg(long)]
    pred: PathBuf,
    /// Ground-truth six-lead CSV
    #[arg(long)]
    truth: PathBuf,
    /// Samples to skip from the front (e.g. the training window)
    #[arg(long, default_value_t = 0)]
    skip: usize,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ExplainArgs {
    #[arg(long)]
    model: PathBuf,
    /// The record the model was trained on (digest-checked)
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Comma-separated grid of nonnegative weights
    #[arg(long, value_delimiter = ',', required = true)]
    lambdas: Vec<f64>,
}

fn map_preset(name: &str, sat_level: f64, icm_noise: f64) -> Result<IcmMapSpec, PipelineError> {
    let spec = match name {
        "identity" => IcmMapSpec::identity(),
        "strong" => IcmMapSpec::strong_piecewise(),
        "cubic" => IcmMapSpec::cubic(),
        "saturating" => IcmMapSpec::saturating(sat_level),
        "square" => IcmMapSpec::square(),
        other => return Err(PipelineError::Config(format!(
            "unknown map preset `{other}` (expected identity, strong, cubic, saturating, square)"
        ))),
    };
    Ok(spec.with_noise(icm_noise))
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    match cli.command {
        Command::Synth(args) => {
            let mut config = SynthConfig::default();
            if let Some(v) = args.seed {
                config.seed = v;
            }
            if let Some(v) = args.bpm {
                config.heart_rate_bpm = v;
            }
            if let Some(v) = args.duration {
                config.duration_s = v;
            }
            if let Some(v) = args.sample_rate {
                config.sample_rate_hz = v;
            }
            if let Some(v) = args.jitter {
                config.hr_jitter = v;
            }
            if let Some(v) = args.noise {
                config.noise_std_mv = v;
            }
            let map = map_preset(&args.map, args.sat_level, args.icm_noise)?;
            let out = cmd_synth(&SynthCommand {
                config,
                map,
                mix: (args.alpha, args.beta),
                out_dir: args.out_dir,
            })?;
            println!("wrote {}", out.record_path.display());
            println!("wrote {}", out.echo_path.display());
        }
        Command::Preprocess(args) => {
            let config = args.build()?;
            let out = cmd_preprocess(&config)?;
            println!(
                "wrote {} ({} Hz)",
                out.record_path.display(),
                out.effective_rate_hz
            );
        }
        Command::Train(args) => {
            let config = args.run.build()?;
            let out = cmd_train(
                &config,
                &TrainOptions {
                    record_trace: args.trace,
                    shift_offsets: args.shift_offsets.clone(),
                    dump_kernel: args.dump_kernel,
                },
            )?;
            println!("wrote {}", out.model_i_path.display());
            println!("wrote {}", out.model_ii_path.display());
            println!("wrote {}", out.manifest_path.display());
            if let Some(path) = &out.shift_report_path {
                println!("wrote {}", path.display());
            }
            println!(
                "test pearson: I={:.6} II={:.6} (support {} / {})",
                out.pearson_i,
                out.pearson_ii,
                out.solution_i.support.len(),
                out.solution_ii.support.len()
            );
        }
        Command::Reconstruct(args) => {
            let out = cmd_reconstruct(&ReconstructCommand {
                model_i: args.model_i,
                model_ii: args.model_ii,
                input: args.input,
                out_dir: args.out_dir,
                sample_rate_override: args.sample_rate,
            })?;
            println!("wrote {}", out.csv_path.display());
            println!("wrote {}", out.svg_path.display());
            if let Some(path) = &out.truth_csv_path {
                println!("wrote {}", path.display());
            }
        }
        Command::Evaluate(args) => {
            let out = cmd_evaluate(&EvaluateCommand {
                predicted: args.pred,
                truth: args.truth,
                skip: args.skip,
                out_dir: args.out_dir,
            })?;
            for (lead, pearson, mse) in &out.report.per_lead {
                match pearson {
                    Some(r) => println!("{lead}: pearson={r:.6} mse={mse:.6e}"),
                    None => println!("{lead}: pearson=undefined mse={mse:.6e}"),
                }
            }
            println!("mean pearson: {:.6}", out.report.mean_pearson);
            for w in &out.report.warnings {
                eprintln!("warning: {w}");
            }
            println!("wrote {}", out.csv_path.display());
        }
        Command::Explain(args) => {
            let out = cmd_explain(&ExplainCommand {
                model: args.model,
                input: args.input,
                out_dir: args.out_dir,
            })?;
            println!(
                "{} neurons anchored at {} distinct training samples",
                out.report.rows.len(),
                out.report
                    .rows
                    .iter()
                    .flat_map(|r| r.indices.iter())
                    .collect::<std::collections::BTreeSet<_>>()
                    .len()
            );
            println!("wrote {}", out.breakpoints_csv_path.display());
            println!("wrote {}", out.curve_svg_path.display());
            println!("wrote {}", out.series_svg_path.display());
        }
        Command::SweepLambda(args) => {
            let config = args.run.build()?;
            let out = cmd_sweep_lambda(&config, &args.lambdas)?;
            for row in &out.rows {
                println!(
                    "lambda={:>10}: support I={} II={}",
                    row.lambda, row.support_i, row.support_ii
                );
            }
            println!("wrote {}", out.csv_path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
