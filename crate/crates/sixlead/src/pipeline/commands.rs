//! The seven pipeline commands. Each one reads and writes only documented
//! files under its output directory and is deterministic end to end.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::kernel::build_k;
use crate::leads::{self, derive_six, LeadReport, SixLeadFrame, LEAD_ORDER};
use crate::model::{extract_network, BreakpointReport, ReluNetwork};
use crate::plot::{self, Panel, Series};
use crate::preprocess::{
    apply_zscore, bandpass, decimate, fit_stats, split, FilterSpec, SplitSpec,
};
use crate::signal_io::{read_record, write_record, EcgRecord};
use crate::solver::{fit_traced, lambda_max, LassoSolution, SolverConfig};
use crate::synth::{generate_leads, synth_icm, IcmMapKind, IcmMapSpec, SynthConfig};

use super::config::RunConfig;
use super::manifest::{file_digest, RunManifest};
use super::{io_err, PipelineError};

// ---------------------------------------------------------------------------
// shared helpers
// ---------------------------------------------------------------------------

fn ensure_dir(path: &Path) -> Result<(), PipelineError> {
    std::fs::create_dir_all(path).map_err(|e| io_err(path, e))
}

fn read_record_file(path: &Path, rate: f64) -> Result<EcgRecord, PipelineError> {
    let file = std::fs::File::open(path).map_err(|e| io_err(path, e))?;
    Ok(read_record(file, rate)?)
}

fn write_record_file(record: &EcgRecord, path: &Path) -> Result<(), PipelineError> {
    let mut file = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    Ok(write_record(record, &mut file)?)
}

fn write_text(path: &Path, text: &str) -> Result<(), PipelineError> {
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

fn require_channel<'a>(record: &'a EcgRecord, label: &str) -> Result<&'a [f64], PipelineError> {
    record
        .channel(label)
        .ok_or_else(|| PipelineError::MissingChannel(label.to_string()))
}

/// Band-pass then decimate one channel with the run's parameters.
fn condition_channel(samples: &[f64], config: &RunConfig) -> Result<Vec<f64>, PipelineError> {
    let filtered = bandpass(samples, config.sample_rate_hz, &config.filter)?;
    Ok(decimate(
        &filtered,
        config.decimate_factor,
        config.guard_fraction,
    )?)
}

fn frame_to_record(frame: &SixLeadFrame) -> Result<EcgRecord, PipelineError> {
    let channels = LEAD_ORDER
        .iter()
        .map(|name| {
            (
                name.to_string(),
                frame.lead(name).expect("known lead").to_vec(),
            )
        })
        .collect();
    Ok(EcgRecord::new(frame.sample_rate_hz, channels)?)
}

fn record_to_frame(record: &EcgRecord) -> Result<SixLeadFrame, PipelineError> {
    for name in LEAD_ORDER {
        if record.channel(name).is_none() {
            return Err(PipelineError::MissingChannel(name.to_string()));
        }
    }
    Ok(SixLeadFrame {
        lead_i: record.channel("I").unwrap().to_vec(),
        lead_ii: record.channel("II").unwrap().to_vec(),
        lead_iii: record.channel("III").unwrap().to_vec(),
        avr: record.channel("aVR").unwrap().to_vec(),
        avl: record.channel("aVL").unwrap().to_vec(),
        avf: record.channel("aVF").unwrap().to_vec(),
        sample_rate_hz: record.sample_rate_hz(),
    })
}

fn pearson_or_nan(a: &[f64], b: &[f64]) -> f64 {
    leads::pearson(a, b).unwrap_or(f64::NAN)
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct SynthCommand {
    pub config: SynthConfig,
    pub map: IcmMapSpec,
    pub mix: (f64, f64),
    pub out_dir: PathBuf,
}

#[derive(Debug)]
pub struct SynthOutput {
    pub record_path: PathBuf,
    pub echo_path: PathBuf,
}

/// Writes `record.csv` (channels ICM, I, II) and `synth_config.txt`, a
/// complete echo of every generation parameter including the seed.
pub fn cmd_synth(cmd: &SynthCommand) -> Result<SynthOutput, PipelineError> {
    ensure_dir(&cmd.out_dir)?;
    let leads_record = generate_leads(&cmd.config)?;
    let icm = synth_icm(&leads_record, &cmd.map, cmd.mix, cmd.config.seed)?;

    let record = EcgRecord::new(
        cmd.config.sample_rate_hz,
        vec![
            ("ICM".to_string(), icm),
            ("I".to_string(), leads_record.channel("I").unwrap().to_vec()),
            (
                "II".to_string(),
                leads_record.channel("II").unwrap().to_vec(),
            ),
        ],
    )?;
    let record_path = cmd.out_dir.join("record.csv");
    write_record_file(&record, &record_path)?;

    let mut echo = String::from("sixlead-synth-config v1\n");
    let _ = writeln!(echo, "heart_rate_bpm {}", cmd.config.heart_rate_bpm);
    let _ = writeln!(echo, "duration_s {}", cmd.config.duration_s);
    let _ = writeln!(echo, "sample_rate_hz {}", cmd.config.sample_rate_hz);
    let _ = writeln!(echo, "hr_jitter {}", cmd.config.hr_jitter);
    let _ = writeln!(echo, "noise_std_mv {}", cmd.config.noise_std_mv);
    let _ = writeln!(echo, "seed {}", cmd.config.seed);
    let _ = writeln!(echo, "mix_alpha {}", cmd.mix.0);
    let _ = writeln!(echo, "mix_beta {}", cmd.mix.1);
    let _ = writeln!(echo, "icm_noise_std_mv {}", cmd.map.noise_std_mv);
    match &cmd.map.kind {
        IcmMapKind::PiecewiseLinearMonotone { knots } => {
            let knot_text: Vec<String> = knots.iter().map(|(x, y)| format!("{x}:{y}")).collect();
            let _ = writeln!(
                echo,
                "map piecewise_linear_monotone {}",
                knot_text.join(";")
            );
        }
        IcmMapKind::CubicSquash { linear, cubic } => {
            let _ = writeln!(echo, "map cubic_squash {linear} {cubic}");
        }
        IcmMapKind::Saturating { level } => {
            let _ = writeln!(echo, "map saturating {level}");
        }
        IcmMapKind::Square => {
            let _ = writeln!(echo, "map square");
        }
    }
    for (lead, shape) in [
        ("I", &cmd.config.beat_shape_i),
        ("II", &cmd.config.beat_shape_ii),
    ] {
        for c in shape {
            let _ = writeln!(
                echo,
                "beat {lead} {} {} {}",
                c.amplitude_mv, c.center_phase, c.width_phase
            );
        }
    }
    let echo_path = cmd.out_dir.join("synth_config.txt");
    write_text(&echo_path, &echo)?;

    Ok(SynthOutput {
        record_path,
        echo_path,
    })
}

// ---------------------------------------------------------------------------
// preprocess
// ---------------------------------------------------------------------------

#[derive(Debug)]
pub struct PreprocessOutput {
    pub record_path: PathBuf,
    pub echo_path: PathBuf,
    pub effective_rate_hz: f64,
}

/// Band-passes and decimates every channel of the input record; writes
/// `preprocessed.csv` at the post-decimation rate plus a parameter echo.
/// Standardization is not applied here: it belongs to training, which
/// fits statistics on the training window only.
pub fn cmd_preprocess(config: &RunConfig) -> Result<PreprocessOutput, PipelineError> {
    config.validate_for_run()?;
    ensure_dir(&config.out_dir)?;
    let record = read_record_file(&config.input, config.sample_rate_hz)?;
    let effective_rate = config.sample_rate_hz / config.decimate_factor as f64;

    let mut channels = Vec::new();
    for (label, samples) in record.channels() {
        channels.push((label.clone(), condition_channel(samples, config)?));
    }
    let out = EcgRecord::new(effective_rate, channels)?;
    let record_path = config.out_dir.join("preprocessed.csv");
    write_record_file(&out, &record_path)?;

    let mut echo = String::from("sixlead-preprocess-params v1\n");
    for (k, v) in config.key_values() {
        let _ = writeln!(echo, "{k} {v}");
    }
    let _ = writeln!(echo, "effective_rate_hz {effective_rate}");
    let echo_path = config.out_dir.join("preprocess_params.txt");
    write_text(&echo_path, &echo)?;

    Ok(PreprocessOutput {
        record_path,
        echo_path,
        effective_rate_hz: effective_rate,
    })
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

/// Output toggles for [`cmd_train`] beyond the run configuration.
#[derive(Debug, Clone, Default)]
pub struct TrainOptions {
    /// Write per-iteration objective traces as CSV.
    pub record_trace: bool,
    /// Retrain on shifted training windows and report the metric spread.
    pub shift_offsets: Vec<usize>,
    /// Dump the training feature matrix as CSV for inspection.
    pub dump_kernel: bool,
}

#[derive(Debug)]
pub struct TrainOutput {
    pub manifest: RunManifest,
    pub manifest_path: PathBuf,
    pub model_i_path: PathBuf,
    pub model_ii_path: PathBuf,
    pub model_i: ReluNetwork,
    pub model_ii: ReluNetwork,
    pub solution_i: LassoSolution,
    pub solution_ii: LassoSolution,
    pub pearson_i: f64,
    pub pearson_ii: f64,
    pub shift_report_path: Option<PathBuf>,
}

struct PreparedChannels {
    icm: Vec<f64>,
    lead_i: Vec<f64>,
    lead_ii: Vec<f64>,
    effective_rate: f64,
}

fn prepare_channels(
    record: &EcgRecord,
    config: &RunConfig,
) -> Result<PreparedChannels, PipelineError> {
    let icm = condition_channel(require_channel(record, "ICM")?, config)?;
    let lead_i = condition_channel(require_channel(record, "I")?, config)?;
    let lead_ii = condition_channel(require_channel(record, "II")?, config)?;
    Ok(PreparedChannels {
        icm,
        lead_i,
        lead_ii,
        effective_rate: config.sample_rate_hz / config.decimate_factor as f64,
    })
}

struct FittedLead {
    network: ReluNetwork,
    solution: LassoSolution,
    trace: Vec<f64>,
    pearson: f64,
    mse: f64,
}

/// Fits one target lead on the training window and scores it on the test
/// window in millivolts.
fn fit_lead(
    icm: &[f64],
    target: &[f64],
    offset: usize,
    split_spec: &SplitSpec,
    solver: &SolverConfig,
) -> Result<FittedLead, PipelineError> {
    if offset >= icm.len() {
        return Err(PipelineError::Config(format!(
            "train offset {offset} exceeds record length {}",
            icm.len()
        )));
    }
    let (icm_train, icm_test) = split(&icm[offset..], split_spec)?;
    let (target_train, target_test) = split(&target[offset..], split_spec)?;

    let icm_stats = fit_stats(icm_train)?;
    let target_stats = fit_stats(target_train)?;
    let icm_train_std = apply_zscore(icm_train, &icm_stats);
    let target_train_std = apply_zscore(target_train, &target_stats);

    let kernel = build_k(&icm_train_std)?;
    let (solution, trace) = fit_traced(&kernel, &target_train_std, solver)?;
    let network = extract_network(&solution, &kernel)?.with_stats(icm_stats, target_stats);

    let predicted_mv = network.predict_mv(icm_test);
    let pearson = pearson_or_nan(&predicted_mv, target_test);
    let mse = leads::mse(&predicted_mv, target_test)?;

    Ok(FittedLead {
        network,
        solution,
        trace,
        pearson,
        mse,
    })
}

fn attach_meta(network: &mut ReluNetwork, config: &RunConfig, digest: &str, target: &str) {
    network.set_meta("source_digest", digest);
    network.set_meta("target_lead", target);
    for (k, v) in config.key_values() {
        if k == "input" || k == "out_dir" {
            continue; // paths are not part of the model identity
        }
        network.set_meta(&k, &v);
    }
}

fn trace_csv(trace: &[f64]) -> String {
    let mut out = String::from("iteration,objective\n");
    for (i, f) in trace.iter().enumerate() {
        let _ = writeln!(out, "{i},{f}");
    }
    out
}

/// Trains the two lead models and writes models, manifest, and optional
/// objective traces, kernel dump, and shift-spread report.
pub fn cmd_train(config: &RunConfig, options: &TrainOptions) -> Result<TrainOutput, PipelineError> {
    let record_trace = options.record_trace;
    let shift_offsets: &[usize] = &options.shift_offsets;
    config.validate_for_run()?;
    ensure_dir(&config.out_dir)?;
    let digest = file_digest(&config.input)?;
    let record = read_record_file(&config.input, config.sample_rate_hz)?;
    let prepared = prepare_channels(&record, config)?;

    let fit_i = fit_lead(
        &prepared.icm,
        &prepared.lead_i,
        config.train_offset,
        &config.split,
        &config.solver,
    )?;
    let fit_ii = fit_lead(
        &prepared.icm,
        &prepared.lead_ii,
        config.train_offset,
        &config.split,
        &config.solver,
    )?;

    let mut model_i = fit_i.network.clone();
    let mut model_ii = fit_ii.network.clone();
    attach_meta(&mut model_i, config, &digest, "I");
    attach_meta(&mut model_ii, config, &digest, "II");

    let model_i_path = config.out_dir.join("f_i.model");
    let model_ii_path = config.out_dir.join("f_ii.model");
    model_i.save(&model_i_path)?;
    model_ii.save(&model_ii_path)?;

    if record_trace {
        write_text(
            &config.out_dir.join("f_i_trace.csv"),
            &trace_csv(&fit_i.trace),
        )?;
        write_text(
            &config.out_dir.join("f_ii_trace.csv"),
            &trace_csv(&fit_ii.trace),
        )?;
    }

    if options.dump_kernel {
        let (icm_train, _) = split(&prepared.icm[config.train_offset..], &config.split)?;
        let icm_stats = fit_stats(icm_train)?;
        let kernel = build_k(&apply_zscore(icm_train, &icm_stats))?;
        let mut csv = String::new();
        for i in 0..kernel.rows() {
            let row: Vec<String> = kernel.row(i).iter().map(|v| v.to_string()).collect();
            let _ = writeln!(csv, "{}", row.join(","));
        }
        write_text(&config.out_dir.join("kernel.csv"), &csv)?;
    }

    let mut manifest = RunManifest::new();
    manifest.extend(
        config
            .key_values()
            .into_iter()
            .map(|(k, v)| (format!("config.{k}"), v)),
    );
    manifest.push("input.digest", format!("sha256:{digest}"));
    manifest.push("data.input_samples", record.len());
    manifest.push("data.decimated_samples", prepared.icm.len());
    manifest.push("data.effective_rate_hz", prepared.effective_rate);
    for (name, fitted) in [("f_i", &fit_i), ("f_ii", &fit_ii)] {
        manifest.push(
            &format!("model.{name}.objective"),
            fitted.solution.objective,
        );
        manifest.push(
            &format!("model.{name}.kkt_residual"),
            fitted.solution.kkt_residual,
        );
        manifest.push(
            &format!("model.{name}.iterations"),
            fitted.solution.iterations,
        );
        manifest.push(
            &format!("model.{name}.support_size"),
            fitted.solution.support.len(),
        );
    }
    manifest.push("metrics.test.I.pearson", fit_i.pearson);
    manifest.push("metrics.test.I.mse", fit_i.mse);
    manifest.push("metrics.test.II.pearson", fit_ii.pearson);
    manifest.push("metrics.test.II.mse", fit_ii.mse);

    // Shift-spread report: retrain on shifted windows to expose the
    // sensitivity of the (deterministic) fit to training-segment placement.
    let shift_report_path = if shift_offsets.is_empty() {
        None
    } else {
        let offsets_text: Vec<String> = shift_offsets.iter().map(|o| o.to_string()).collect();
        manifest.push("shift.offsets", offsets_text.join(";"));
        let mut csv = String::from("offset,test_len,pearson_i,pearson_ii,mean_pearson\n");
        let mut means = Vec::new();
        for &offset in shift_offsets {
            let usable = prepared
                .icm
                .len()
                .checked_sub(offset + config.split.train_len)
                .ok_or_else(|| {
                    PipelineError::Config(format!(
                        "shift offset {offset} leaves no room for the training window"
                    ))
                })?;
            let test_len = config.split.test_len.min(usable);
            if test_len < 2 {
                return Err(PipelineError::Config(format!(
                    "shift offset {offset} leaves no test samples"
                )));
            }
            let shifted_split = SplitSpec {
                train_len: config.split.train_len,
                test_len,
            };
            let a = fit_lead(
                &prepared.icm,
                &prepared.lead_i,
                offset,
                &shifted_split,
                &config.solver,
            )?;
            let b = fit_lead(
                &prepared.icm,
                &prepared.lead_ii,
                offset,
                &shifted_split,
                &config.solver,
            )?;
            let mean = 0.5 * (a.pearson + b.pearson);
            means.push(mean);
            let _ = writeln!(
                csv,
                "{offset},{test_len},{},{},{}",
                a.pearson, b.pearson, mean
            );
        }
        let n = means.len() as f64;
        let mean_of_means = means.iter().sum::<f64>() / n;
        let spread_min = means.iter().cloned().fold(f64::INFINITY, f64::min);
        let spread_max = means.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let variance = means
            .iter()
            .map(|m| (m - mean_of_means).powi(2))
            .sum::<f64>()
            / n;
        let _ = writeln!(csv, "# spread_mean {mean_of_means}");
        let _ = writeln!(csv, "# spread_min {spread_min}");
        let _ = writeln!(csv, "# spread_max {spread_max}");
        let _ = writeln!(csv, "# spread_std {}", variance.sqrt());
        manifest.push("shift.spread_mean", mean_of_means);
        manifest.push("shift.spread_min", spread_min);
        manifest.push("shift.spread_max", spread_max);
        manifest.push("shift.spread_std", variance.sqrt());
        let path = config.out_dir.join("shift_report.csv");
        write_text(&path, &csv)?;
        Some(path)
    };

    let manifest_path = config.out_dir.join("run_manifest.txt");
    manifest.save(&manifest_path)?;

    Ok(TrainOutput {
        manifest,
        manifest_path,
        model_i_path,
        model_ii_path,
        model_i,
        model_ii,
        solution_i: fit_i.solution,
        solution_ii: fit_ii.solution,
        pearson_i: fit_i.pearson,
        pearson_ii: fit_ii.pearson,
        shift_report_path,
    })
}

// ---------------------------------------------------------------------------
// reconstruct
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct ReconstructCommand {
    pub model_i: PathBuf,
    pub model_ii: PathBuf,
    pub input: PathBuf,
    pub out_dir: PathBuf,
    /// Overrides the sample rate recorded in the models' metadata.
    pub sample_rate_override: Option<f64>,
}

#[derive(Debug)]
pub struct ReconstructOutput {
    pub frame: SixLeadFrame,
    pub csv_path: PathBuf,
    pub svg_path: PathBuf,
    pub truth: Option<SixLeadFrame>,
    pub truth_csv_path: Option<PathBuf>,
}

fn meta_value(network: &ReluNetwork, key: &str) -> Result<String, PipelineError> {
    network
        .meta()
        .get(key)
        .cloned()
        .ok_or_else(|| PipelineError::Config(format!("model metadata is missing `{key}`")))
}

fn meta_f64(network: &ReluNetwork, key: &str) -> Result<f64, PipelineError> {
    meta_value(network, key)?
        .parse()
        .map_err(|_| PipelineError::Config(format!("model metadata `{key}` is not a number")))
}

fn meta_usize(network: &ReluNetwork, key: &str) -> Result<usize, PipelineError> {
    meta_value(network, key)?
        .parse()
        .map_err(|_| PipelineError::Config(format!("model metadata `{key}` is not an integer")))
}

/// Reconstructs the preprocessing configuration a model was trained with.
fn config_from_meta(network: &ReluNetwork) -> Result<RunConfig, PipelineError> {
    Ok(RunConfig {
        sample_rate_hz: meta_f64(network, "sample_rate_hz")?,
        filter: FilterSpec {
            low_cut_hz: meta_f64(network, "low_cut_hz")?,
            high_cut_hz: meta_f64(network, "high_cut_hz")?,
            order: meta_usize(network, "filter_order")?,
        },
        decimate_factor: meta_usize(network, "decimate")?,
        guard_fraction: meta_f64(network, "guard_fraction")?,
        split: SplitSpec {
            train_len: meta_usize(network, "train_len")?,
            test_len: meta_usize(network, "test_len")?,
        },
        train_offset: meta_usize(network, "train_offset")?,
        ..RunConfig::default()
    })
}

fn six_lead_panels<'a>(
    pred_points: &'a [Vec<(f64, f64)>],
    truth_points: &'a [Vec<(f64, f64)>],
) -> Vec<Panel<'a>> {
    LEAD_ORDER
        .iter()
        .enumerate()
        .map(|(idx, name)| {
            let mut series = vec![Series {
                name: "predicted",
                points: &pred_points[idx],
            }];
            if !truth_points.is_empty() {
                series.push(Series {
                    name: "true",
                    points: &truth_points[idx],
                });
            }
            Panel {
                caption: name,
                series,
                markers: &[],
            }
        })
        .collect()
}

/// Predicts Leads I and II from the monitor channel with the two trained
/// models, derives the full frame, and writes CSV plus SVG. When the
/// input record also carries true Leads I and II, the same preprocessing
/// is applied to them and a ground-truth frame is emitted alongside.
pub fn cmd_reconstruct(cmd: &ReconstructCommand) -> Result<ReconstructOutput, PipelineError> {
    ensure_dir(&cmd.out_dir)?;
    let model_i = ReluNetwork::load(&cmd.model_i)?;
    let model_ii = ReluNetwork::load(&cmd.model_ii)?;

    if model_i.input_stats() != model_ii.input_stats() {
        return Err(PipelineError::StatsMismatch(
            "the two models carry different input standardization; they were not trained together"
                .into(),
        ));
    }
    let mut config = config_from_meta(&model_i)?;
    let config_ii = config_from_meta(&model_ii)?;
    if config != config_ii {
        return Err(PipelineError::StatsMismatch(
            "the two models carry different preprocessing parameters".into(),
        ));
    }
    if let Some(rate) = cmd.sample_rate_override {
        config.sample_rate_hz = rate;
    }

    let record = read_record_file(&cmd.input, config.sample_rate_hz)?;
    let icm = condition_channel(require_channel(&record, "ICM")?, &config)?;
    let effective_rate = config.sample_rate_hz / config.decimate_factor as f64;

    let pred_i = model_i.predict_mv(&icm);
    let pred_ii = model_ii.predict_mv(&icm);
    let frame = derive_six(&pred_i, &pred_ii, effective_rate)?;

    let csv_path = cmd.out_dir.join("reconstruction.csv");
    write_record_file(&frame_to_record(&frame)?, &csv_path)?;

    let (truth, truth_csv_path) = if record.channel("I").is_some() && record.channel("II").is_some()
    {
        let true_i = condition_channel(record.channel("I").unwrap(), &config)?;
        let true_ii = condition_channel(record.channel("II").unwrap(), &config)?;
        let truth_frame = derive_six(&true_i, &true_ii, effective_rate)?;
        let path = cmd.out_dir.join("truth_sixlead.csv");
        write_record_file(&frame_to_record(&truth_frame)?, &path)?;
        (Some(truth_frame), Some(path))
    } else {
        (None, None)
    };

    let pred_points: Vec<Vec<(f64, f64)>> = LEAD_ORDER
        .iter()
        .map(|name| plot::indexed(frame.lead(name).unwrap()))
        .collect();
    let truth_points: Vec<Vec<(f64, f64)>> = match &truth {
        Some(t) => LEAD_ORDER
            .iter()
            .map(|name| plot::indexed(t.lead(name).unwrap()))
            .collect(),
        None => Vec::new(),
    };
    let panels = six_lead_panels(&pred_points, &truth_points);
    let svg = plot::render("six-lead reconstruction", "sample", &panels);
    let svg_path = cmd.out_dir.join("reconstruction.svg");
    write_text(&svg_path, &svg)?;

    Ok(ReconstructOutput {
        frame,
        csv_path,
        svg_path,
        truth,
        truth_csv_path,
    })
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct EvaluateCommand {
    pub predicted: PathBuf,
    pub truth: PathBuf,
    /// Samples to drop from the front (e.g. the training window).
    pub skip: usize,
    pub out_dir: PathBuf,
}

#[derive(Debug)]
pub struct EvaluateOutput {
    pub report: LeadReport,
    pub csv_path: PathBuf,
    pub svg_path: PathBuf,
}

/// Scores a reconstructed six-lead CSV against a ground-truth six-lead
/// CSV; writes `report.csv` and an overlay SVG.
pub fn cmd_evaluate(cmd: &EvaluateCommand) -> Result<EvaluateOutput, PipelineError> {
    ensure_dir(&cmd.out_dir)?;
    // Rates are irrelevant for the metrics; read with a placeholder.
    let predicted = record_to_frame(&read_record_file(&cmd.predicted, 1.0)?)?;
    let truth = record_to_frame(&read_record_file(&cmd.truth, 1.0)?)?;
    if predicted.len() != truth.len() {
        return Err(PipelineError::Leads(leads::LeadsError::LengthMismatch(
            predicted.len(),
            truth.len(),
        )));
    }
    if cmd.skip + 2 > predicted.len() {
        return Err(PipelineError::Config(format!(
            "skip {} leaves fewer than 2 of {} samples",
            cmd.skip,
            predicted.len()
        )));
    }
    let rest = predicted.len() - cmd.skip;
    let predicted = predicted.slice(cmd.skip, rest)?;
    let truth = truth.slice(cmd.skip, rest)?;

    let report = leads::evaluate(&predicted, &truth)?;

    let mut csv = String::from("lead,pearson,mse\n");
    for (name, pearson, mse) in &report.per_lead {
        match pearson {
            Some(r) => {
                let _ = writeln!(csv, "{name},{r},{mse}");
            }
            None => {
                let _ = writeln!(csv, "{name},,{mse}");
            }
        }
    }
    let _ = writeln!(csv, "mean,{},", report.mean_pearson);
    for warning in &report.warnings {
        let _ = writeln!(csv, "# warning: {warning}");
    }
    let csv_path = cmd.out_dir.join("report.csv");
    write_text(&csv_path, &csv)?;

    let pred_points: Vec<Vec<(f64, f64)>> = LEAD_ORDER
        .iter()
        .map(|name| plot::indexed(predicted.lead(name).unwrap()))
        .collect();
    let truth_points: Vec<Vec<(f64, f64)>> = LEAD_ORDER
        .iter()
        .map(|name| plot::indexed(truth.lead(name).unwrap()))
        .collect();
    let panels = six_lead_panels(&pred_points, &truth_points);
    let svg = plot::render("predicted vs true leads", "sample", &panels);
    let svg_path = cmd.out_dir.join("evaluation.svg");
    write_text(&svg_path, &svg)?;

    Ok(EvaluateOutput {
        report,
        csv_path,
        svg_path,
    })
}

// ---------------------------------------------------------------------------
// explain
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct ExplainCommand {
    pub model: PathBuf,
    pub input: PathBuf,
    pub out_dir: PathBuf,
}

#[derive(Debug)]
pub struct ExplainOutput {
    pub report: BreakpointReport,
    pub train_std: Vec<f64>,
    pub train_mv: Vec<f64>,
    pub breakpoints_csv_path: PathBuf,
    pub curve_svg_path: PathBuf,
    pub series_svg_path: PathBuf,
}

/// Recovers the training window a model was fit on (verified by content
/// digest), links every neuron back to the samples anchoring it, and
/// emits the breakpoint table plus the function-curve and time-series
/// figures.
pub fn cmd_explain(cmd: &ExplainCommand) -> Result<ExplainOutput, PipelineError> {
    ensure_dir(&cmd.out_dir)?;
    let network = ReluNetwork::load(&cmd.model)?;

    let expected = meta_value(&network, "source_digest")?;
    let found = file_digest(&cmd.input)?;
    if expected != found {
        return Err(PipelineError::DigestMismatch { expected, found });
    }

    let config = config_from_meta(&network)?;
    let record = read_record_file(&cmd.input, config.sample_rate_hz)?;
    let icm = condition_channel(require_channel(&record, "ICM")?, &config)?;
    let offset = config.train_offset;
    if offset + config.split.train_len > icm.len() {
        return Err(PipelineError::Config(
            "training window exceeds record length".into(),
        ));
    }
    let train_mv = icm[offset..offset + config.split.train_len].to_vec();
    let train_std = apply_zscore(&train_mv, network.input_stats());

    let report = network.breakpoint_report(&train_std);

    let mut csv = String::from("breakpoint_std,breakpoint_mv,orientation,weight,count,indices\n");
    for row in &report.rows {
        let idx_text: Vec<String> = row.indices.iter().map(|i| i.to_string()).collect();
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            row.breakpoint,
            row.breakpoint_mv,
            row.orientation.as_str(),
            row.weight,
            row.indices.len(),
            idx_text.join(";")
        );
    }
    let breakpoints_csv_path = cmd.out_dir.join("breakpoints.csv");
    write_text(&breakpoints_csv_path, &csv)?;

    // learned transfer curve in millivolt units, breakpoints marked
    let (lo, hi) = train_mv
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let span = (hi - lo).max(1e-9);
    let (lo, hi) = (lo - 0.1 * span, hi + 0.1 * span);
    let xs: Vec<f64> = (0..400)
        .map(|i| lo + (hi - lo) * i as f64 / 399.0)
        .collect();
    let ys = network.predict_mv(&xs);
    let curve: Vec<(f64, f64)> = xs.iter().cloned().zip(ys).collect();
    let marker_x: Vec<f64> = report.rows.iter().map(|r| r.breakpoint_mv).collect();
    let marker_y = network.predict_mv(&marker_x);
    let markers: Vec<(f64, f64)> = marker_x.into_iter().zip(marker_y).collect();
    let target = meta_value(&network, "target_lead").unwrap_or_else(|_| "?".into());
    let curve_svg = plot::render(
        &format!("learned map to lead {target}"),
        "input (mV)",
        &[Panel {
            caption: "f(x) with breakpoints",
            series: vec![Series {
                name: "f",
                points: &curve,
            }],
            markers: &markers,
        }],
    );
    let curve_svg_path = cmd.out_dir.join("curve.svg");
    write_text(&curve_svg_path, &curve_svg)?;

    // training series with the anchoring samples highlighted
    let series_points = plot::indexed(&train_mv);
    let mut highlight: Vec<(f64, f64)> = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for row in &report.rows {
        for &i in &row.indices {
            if seen.insert(i) {
                highlight.push((i as f64, train_mv[i]));
            }
        }
    }
    let series_svg = plot::render(
        "training window with anchoring samples",
        "sample",
        &[Panel {
            caption: "monitor channel (mV)",
            series: vec![Series {
                name: "train",
                points: &series_points,
            }],
            markers: &highlight,
        }],
    );
    let series_svg_path = cmd.out_dir.join("training.svg");
    write_text(&series_svg_path, &series_svg)?;

    Ok(ExplainOutput {
        report,
        train_std,
        train_mv,
        breakpoints_csv_path,
        curve_svg_path,
        series_svg_path,
    })
}

// ---------------------------------------------------------------------------
// sweep-lambda
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub lambda: f64,
    pub support_i: usize,
    pub support_ii: usize,
    pub objective_i: f64,
    pub objective_ii: f64,
    pub pearson_i: Option<f64>,
    pub pearson_ii: Option<f64>,
}

#[derive(Debug)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    pub lambda_max_i: f64,
    pub lambda_max_ii: f64,
    pub csv_path: PathBuf,
    pub svg_path: PathBuf,
}

/// Fits both lead models across a grid of regularization weights and
/// reports support size, objective, and test correlation per weight.
pub fn cmd_sweep_lambda(config: &RunConfig, lambdas: &[f64]) -> Result<SweepOutput, PipelineError> {
    if lambdas.is_empty() {
        return Err(PipelineError::Config("empty lambda grid".into()));
    }
    config.validate_for_run()?;
    ensure_dir(&config.out_dir)?;
    let record = read_record_file(&config.input, config.sample_rate_hz)?;
    let prepared = prepare_channels(&record, config)?;

    // critical weights, for reference in the report
    let offset = config.train_offset;
    let (icm_train, _) = split(&prepared.icm[offset..], &config.split)?;
    let (i_train, _) = split(&prepared.lead_i[offset..], &config.split)?;
    let (ii_train, _) = split(&prepared.lead_ii[offset..], &config.split)?;
    let icm_stats = fit_stats(icm_train)?;
    let kernel = build_k(&apply_zscore(icm_train, &icm_stats))?;
    let lambda_max_i = lambda_max(&kernel, &apply_zscore(i_train, &fit_stats(i_train)?));
    let lambda_max_ii = lambda_max(&kernel, &apply_zscore(ii_train, &fit_stats(ii_train)?));

    let mut rows = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let solver = SolverConfig {
            lambda,
            ..config.solver.clone()
        };
        let a = fit_lead(
            &prepared.icm,
            &prepared.lead_i,
            offset,
            &config.split,
            &solver,
        )?;
        let b = fit_lead(
            &prepared.icm,
            &prepared.lead_ii,
            offset,
            &config.split,
            &solver,
        )?;
        rows.push(SweepRow {
            lambda,
            support_i: a.solution.support.len(),
            support_ii: b.solution.support.len(),
            objective_i: a.solution.objective,
            objective_ii: b.solution.objective,
            pearson_i: if a.pearson.is_nan() {
                None
            } else {
                Some(a.pearson)
            },
            pearson_ii: if b.pearson.is_nan() {
                None
            } else {
                Some(b.pearson)
            },
        });
    }

    let mut csv =
        String::from("lambda,support_i,support_ii,objective_i,objective_ii,pearson_i,pearson_ii\n");
    for r in &rows {
        let p1 = r.pearson_i.map(|v| v.to_string()).unwrap_or_default();
        let p2 = r.pearson_ii.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            r.lambda, r.support_i, r.support_ii, r.objective_i, r.objective_ii, p1, p2
        );
    }
    let _ = writeln!(csv, "# lambda_max_i {lambda_max_i}");
    let _ = writeln!(csv, "# lambda_max_ii {lambda_max_ii}");
    let csv_path = config.out_dir.join("sweep.csv");
    write_text(&csv_path, &csv)?;

    let log_lambda = |l: f64| if l > 0.0 { l.log10() } else { -12.0 };
    let support_points: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (log_lambda(r.lambda), r.support_i as f64))
        .collect();
    let support_points_ii: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (log_lambda(r.lambda), r.support_ii as f64))
        .collect();
    let pearson_points: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.pearson_i.map(|p| (log_lambda(r.lambda), p)))
        .collect();
    let pearson_points_ii: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.pearson_ii.map(|p| (log_lambda(r.lambda), p)))
        .collect();
    let svg = plot::render(
        "regularization sweep",
        "log10(lambda)",
        &[
            Panel {
                caption: "support size",
                series: vec![
                    Series {
                        name: "lead I",
                        points: &support_points,
                    },
                    Series {
                        name: "lead II",
                        points: &support_points_ii,
                    },
                ],
                markers: &[],
            },
            Panel {
                caption: "test pearson",
                series: vec![
                    Series {
                        name: "lead I",
                        points: &pearson_points,
                    },
                    Series {
                        name: "lead II",
                        points: &pearson_points_ii,
                    },
                ],
                markers: &[],
            },
        ],
    );
    let svg_path = config.out_dir.join("sweep.svg");
    write_text(&svg_path, &svg)?;

    Ok(SweepOutput {
        rows,
        lambda_max_i,
        lambda_max_ii,
        csv_path,
        svg_path,
    })
}
