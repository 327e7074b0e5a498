//! The learned predictor: a sparse sum of ReLU ramps anchored at training
//! values, plus an intercept.
//!
//! A solver solution maps one-to-one onto this form: every nonzero weight
//! becomes one neuron whose breakpoint is a training input value. That
//! correspondence is what makes the model auditable. [`ReluNetwork::trace`]
//! accounts for a prediction neuron by neuron, and
//! [`ReluNetwork::breakpoint_report`] points each neuron back at the exact
//! training samples that anchor it.
//!
//! Networks carry the standardization statistics of the signals they were
//! trained on, so callers can move between standardized units (all internal
//! math) and millivolts (all reporting).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::kernel::{KernelMatrix, Orientation};
use crate::preprocess::ZScoreStats;
use crate::solver::LassoSolution;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("solution has {z_len} weights but kernel has {cols} columns")]
    SupportMismatch { z_len: usize, cols: usize },
    #[error("model text line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("non-finite parameter in model")]
    NonFinite,
    #[error("duplicate neuron: {orientation} ramp at breakpoint {breakpoint}")]
    DuplicateNeuron {
        orientation: String,
        breakpoint: f64,
    },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// One ReLU ramp: `weight * (x - breakpoint)_+` (rising) or
/// `weight * (breakpoint - x)_+` (falling).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neuron {
    pub breakpoint: f64,
    pub orientation: Orientation,
    pub weight: f64,
}

impl Neuron {
    fn activation(&self, x: f64) -> f64 {
        match self.orientation {
            Orientation::Rising => (x - self.breakpoint).max(0.0),
            Orientation::Falling => (self.breakpoint - x).max(0.0),
        }
    }
}

/// Piecewise-linear predictor with explicit breakpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct ReluNetwork {
    neurons: Vec<Neuron>,
    intercept: f64,
    input_stats: ZScoreStats,
    output_stats: ZScoreStats,
    meta: BTreeMap<String, String>,
}

/// Conventional dense parameters of the same network: `w1`, `b1` per
/// neuron in the hidden layer, `w2` output weights, `b2` output bias.
/// First-layer weights are exactly plus or minus one.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoLayerWeights {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

impl TwoLayerWeights {
    /// Standard forward pass `sum_j w2_j * relu(w1_j * x + b1_j) + b2`.
    pub fn forward(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for j in 0..self.w1.len() {
            let pre = self.w1[j] * x + self.b1[j];
            acc += self.w2[j] * pre.max(0.0);
        }
        acc + self.b2
    }
}

/// Per-neuron accounting of one prediction.
#[derive(Debug, Clone)]
pub struct PredictionTrace {
    pub input: f64,
    pub entries: Vec<TraceEntry>,
    pub intercept: f64,
    pub output: f64,
    /// Largest breakpoint at or below the input, if any.
    pub bracket_below: Option<f64>,
    /// Smallest breakpoint strictly above the input, if any.
    pub bracket_above: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct TraceEntry {
    pub breakpoint: f64,
    pub orientation: Orientation,
    pub weight: f64,
    pub activation: f64,
    pub contribution: f64,
    /// True when the pre-activation is strictly positive.
    pub active: bool,
}

/// One row of the explainability report: a neuron and the training-series
/// time indices whose value anchors it.
#[derive(Debug, Clone)]
pub struct BreakpointRow {
    /// Breakpoint in standardized input units.
    pub breakpoint: f64,
    /// Breakpoint mapped back to millivolts through the input stats.
    pub breakpoint_mv: f64,
    pub orientation: Orientation,
    pub weight: f64,
    /// Indices i with `train_inputs[i] == breakpoint`, ascending.
    pub indices: Vec<usize>,
}

#[derive(Debug, Clone, Default)]
pub struct BreakpointReport {
    pub rows: Vec<BreakpointRow>,
}

/// Builds the explicit network from a solver solution: one neuron per
/// nonzero weight, rising columns first, each anchored at its kernel
/// breakpoint. Standardization defaults to identity; attach real stats
/// with [`ReluNetwork::with_stats`].
pub fn extract_network(
    solution: &LassoSolution,
    kernel: &KernelMatrix,
) -> Result<ReluNetwork, ModelError> {
    if solution.z.len() != kernel.cols() {
        return Err(ModelError::SupportMismatch {
            z_len: solution.z.len(),
            cols: kernel.cols(),
        });
    }
    let mut neurons = Vec::with_capacity(solution.support.len());
    for &j in &solution.support {
        if j >= kernel.cols() {
            return Err(ModelError::SupportMismatch {
                z_len: solution.z.len(),
                cols: kernel.cols(),
            });
        }
        let (bp_index, orientation) = kernel.column_meta(j);
        neurons.push(Neuron {
            breakpoint: kernel.breakpoints()[bp_index],
            orientation,
            weight: solution.z[j],
        });
    }
    Ok(ReluNetwork {
        neurons,
        intercept: solution.t,
        input_stats: ZScoreStats::identity(),
        output_stats: ZScoreStats::identity(),
        meta: BTreeMap::new(),
    })
}

impl ReluNetwork {
    /// Constructs a network directly from parts; used by deserialization
    /// and tests.
    pub fn from_parts(
        neurons: Vec<Neuron>,
        intercept: f64,
        input_stats: ZScoreStats,
        output_stats: ZScoreStats,
    ) -> Result<Self, ModelError> {
        let finite = neurons
            .iter()
            .all(|n| n.breakpoint.is_finite() && n.weight.is_finite())
            && intercept.is_finite()
            && input_stats.mean.is_finite()
            && input_stats.std.is_finite()
            && output_stats.mean.is_finite()
            && output_stats.std.is_finite();
        if !finite {
            return Err(ModelError::NonFinite);
        }
        for (i, n) in neurons.iter().enumerate() {
            if neurons[..i]
                .iter()
                .any(|m| m.breakpoint == n.breakpoint && m.orientation == n.orientation)
            {
                return Err(ModelError::DuplicateNeuron {
                    orientation: n.orientation.as_str().to_string(),
                    breakpoint: n.breakpoint,
                });
            }
        }
        Ok(Self {
            neurons,
            intercept,
            input_stats,
            output_stats,
            meta: BTreeMap::new(),
        })
    }

    pub fn with_stats(mut self, input: ZScoreStats, output: ZScoreStats) -> Self {
        self.input_stats = input;
        self.output_stats = output;
        self
    }

    pub fn neurons(&self) -> &[Neuron] {
        &self.neurons
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    pub fn input_stats(&self) -> &ZScoreStats {
        &self.input_stats
    }

    pub fn output_stats(&self) -> &ZScoreStats {
        &self.output_stats
    }

    pub fn meta(&self) -> &BTreeMap<String, String> {
        &self.meta
    }

    pub fn set_meta(&mut self, key: &str, value: &str) {
        self.meta.insert(key.to_string(), value.to_string());
    }

    /// Pointwise evaluation in standardized units. Piecewise linear and
    /// continuous, with natural linear tails beyond the breakpoint range.
    pub fn predict_one(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for n in &self.neurons {
            acc += n.weight * n.activation(x);
        }
        acc + self.intercept
    }

    pub fn predict(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.predict_one(x)).collect()
    }

    /// Evaluation in millivolts: standardizes the input, predicts, and
    /// de-standardizes the output.
    pub fn predict_mv(&self, xs_mv: &[f64]) -> Vec<f64> {
        xs_mv
            .iter()
            .map(|&x| {
                let z = (x - self.input_stats.mean) / self.input_stats.std;
                self.predict_one(z) * self.output_stats.std + self.output_stats.mean
            })
            .collect()
    }

    /// Dense first/second layer parameters equivalent to this network.
    /// Rising ramps map to `w1 = +1, b1 = -breakpoint`; falling ramps to
    /// `w1 = -1, b1 = +breakpoint`.
    pub fn export_weights(&self) -> TwoLayerWeights {
        let m = self.neurons.len();
        let mut w1 = Vec::with_capacity(m);
        let mut b1 = Vec::with_capacity(m);
        let mut w2 = Vec::with_capacity(m);
        for n in &self.neurons {
            match n.orientation {
                Orientation::Rising => {
                    w1.push(1.0);
                    b1.push(-n.breakpoint);
                }
                Orientation::Falling => {
                    w1.push(-1.0);
                    b1.push(n.breakpoint);
                }
            }
            w2.push(n.weight);
        }
        TwoLayerWeights {
            w1,
            b1,
            w2,
            b2: self.intercept,
        }
    }

    /// Per-neuron accounting of `predict_one(x)`. Contributions are
    /// accumulated in the same order as prediction, so their sum plus the
    /// intercept reproduces the output bit for bit.
    pub fn trace(&self, x: f64) -> PredictionTrace {
        let mut entries = Vec::with_capacity(self.neurons.len());
        let mut acc = 0.0;
        for n in &self.neurons {
            let activation = n.activation(x);
            let contribution = n.weight * activation;
            acc += contribution;
            entries.push(TraceEntry {
                breakpoint: n.breakpoint,
                orientation: n.orientation,
                weight: n.weight,
                activation,
                contribution,
                active: activation > 0.0,
            });
        }
        let output = acc + self.intercept;

        let mut below: Option<f64> = None;
        let mut above: Option<f64> = None;
        for n in &self.neurons {
            let b = n.breakpoint;
            if b <= x && below.is_none_or(|cur| b > cur) {
                below = Some(b);
            }
            if b > x && above.is_none_or(|cur| b < cur) {
                above = Some(b);
            }
        }

        PredictionTrace {
            input: x,
            entries,
            intercept: self.intercept,
            output,
            bracket_below: below,
            bracket_above: above,
        }
    }

    /// Links every neuron to the training samples holding its breakpoint
    /// value. `train_inputs` must be the standardized training series the
    /// model was fit on; matching is exact because breakpoints are copied,
    /// not recomputed, from those values.
    pub fn breakpoint_report(&self, train_inputs: &[f64]) -> BreakpointReport {
        let rows = self
            .neurons
            .iter()
            .map(|n| {
                let indices = train_inputs
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| v == n.breakpoint)
                    .map(|(i, _)| i)
                    .collect();
                BreakpointRow {
                    breakpoint: n.breakpoint,
                    breakpoint_mv: n.breakpoint * self.input_stats.std + self.input_stats.mean,
                    orientation: n.orientation,
                    weight: n.weight,
                    indices,
                }
            })
            .collect();
        BreakpointReport { rows }
    }

    /// Serializes to the versioned plain-text model format. Floats use the
    /// shortest representation that parses back to the identical value, so
    /// serialization is lossless and byte-deterministic.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("sixlead-model v1\n");
        for (key, value) in &self.meta {
            let _ = writeln!(out, "meta {key} {value}");
        }
        let _ = writeln!(out, "input_mean {}", self.input_stats.mean);
        let _ = writeln!(out, "input_std {}", self.input_stats.std);
        let _ = writeln!(out, "output_mean {}", self.output_stats.mean);
        let _ = writeln!(out, "output_std {}", self.output_stats.std);
        let _ = writeln!(out, "intercept {}", self.intercept);
        let _ = writeln!(out, "neurons {}", self.neurons.len());
        for n in &self.neurons {
            let _ = writeln!(
                out,
                "neuron {} {} {}",
                n.orientation.as_str(),
                n.breakpoint,
                n.weight
            );
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, ModelError> {
        let bad = |line: usize, message: &str| ModelError::Format {
            line,
            message: message.to_string(),
        };
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, "sixlead-model v1")) => {}
            Some((i, other)) => {
                return Err(bad(i + 1, &format!("unknown header `{other}`")));
            }
            None => return Err(bad(1, "empty model text")),
        }

        let mut meta = BTreeMap::new();
        let mut fields: BTreeMap<&str, f64> = BTreeMap::new();
        let mut neurons = Vec::new();
        let mut declared: Option<usize> = None;

        for (idx, raw) in lines {
            let line_no = idx + 1;
            let line = raw.trim_end();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.splitn(2, ' ');
            let key = parts.next().unwrap_or_default();
            let rest = parts.next().unwrap_or_default();
            match key {
                "meta" => {
                    let mut kv = rest.splitn(2, ' ');
                    let k = kv.next().unwrap_or_default();
                    if k.is_empty() {
                        return Err(bad(line_no, "meta line needs a key"));
                    }
                    meta.insert(k.to_string(), kv.next().unwrap_or_default().to_string());
                }
                "input_mean" | "input_std" | "output_mean" | "output_std" | "intercept" => {
                    let value: f64 = rest
                        .trim()
                        .parse()
                        .map_err(|_| bad(line_no, &format!("bad number `{rest}`")))?;
                    let canonical = match key {
                        "input_mean" => "input_mean",
                        "input_std" => "input_std",
                        "output_mean" => "output_mean",
                        "output_std" => "output_std",
                        _ => "intercept",
                    };
                    fields.insert(canonical, value);
                }
                "neurons" => {
                    declared = Some(
                        rest.trim()
                            .parse()
                            .map_err(|_| bad(line_no, &format!("bad neuron count `{rest}`")))?,
                    );
                }
                "neuron" => {
                    let parts: Vec<&str> = rest.split_whitespace().collect();
                    if parts.len() != 3 {
                        return Err(bad(
                            line_no,
                            "neuron line needs orientation, breakpoint, weight",
                        ));
                    }
                    let orientation = match parts[0] {
                        "rising" => Orientation::Rising,
                        "falling" => Orientation::Falling,
                        other => {
                            return Err(bad(line_no, &format!("unknown orientation `{other}`")))
                        }
                    };
                    let breakpoint: f64 = parts[1]
                        .parse()
                        .map_err(|_| bad(line_no, &format!("bad breakpoint `{}`", parts[1])))?;
                    let weight: f64 = parts[2]
                        .parse()
                        .map_err(|_| bad(line_no, &format!("bad weight `{}`", parts[2])))?;
                    neurons.push(Neuron {
                        breakpoint,
                        orientation,
                        weight,
                    });
                }
                other => return Err(bad(line_no, &format!("unknown directive `{other}`"))),
            }
        }

        let get = |name: &str| -> Result<f64, ModelError> {
            fields
                .get(name)
                .copied()
                .ok_or_else(|| bad(0, &format!("missing field `{name}`")))
        };
        if let Some(count) = declared {
            if count != neurons.len() {
                return Err(bad(
                    0,
                    &format!("declared {count} neurons, found {}", neurons.len()),
                ));
            }
        }
        let mut network = Self::from_parts(
            neurons,
            get("intercept")?,
            ZScoreStats {
                mean: get("input_mean")?,
                std: get("input_std")?,
            },
            ZScoreStats {
                mean: get("output_mean")?,
                std: get("output_std")?,
            },
        )?;
        network.meta = meta;
        Ok(network)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<(), ModelError> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ModelError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_text(&text)
    }
}
