//! Run configuration: a flat key-value file plus CLI overrides.
//!
//! The format is one `key = value` per line, `#` comments, unknown keys
//! rejected so typos cannot silently fall back to defaults. CLI flags
//! override file values; defaults are the standard protocol (500 Hz input,
//! 0.5-150 Hz band-pass of order 2, decimation by 2, 125/1125 split,
//! lambda 0.01).

use std::path::{Path, PathBuf};

use crate::preprocess::{FilterSpec, SplitSpec};
use crate::solver::{Algorithm, SolverConfig};

use super::PipelineError;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: PathBuf,
    pub out_dir: PathBuf,
    pub sample_rate_hz: f64,
    pub filter: FilterSpec,
    pub decimate_factor: usize,
    pub guard_fraction: f64,
    pub split: SplitSpec,
    pub train_offset: usize,
    pub solver: SolverConfig,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: PathBuf::new(),
            out_dir: PathBuf::from("out"),
            sample_rate_hz: 500.0,
            filter: FilterSpec::default(),
            decimate_factor: 2,
            guard_fraction: 0.9,
            split: SplitSpec {
                train_len: 125,
                test_len: 1125,
            },
            train_offset: 0,
            solver: SolverConfig::default(),
            seed: 42,
        }
    }
}

impl RunConfig {
    /// Parses a config file and applies it over the defaults.
    pub fn from_file(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| super::io_err(path, e))?;
        let mut config = Self::default();
        config.apply_text(&text)?;
        Ok(config)
    }

    /// Applies `key = value` lines over the current values.
    pub fn apply_text(&mut self, text: &str) -> Result<(), PipelineError> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                PipelineError::Config(format!("line {}: expected `key = value`", idx + 1))
            })?;
            self.set(key.trim(), value.trim())
                .map_err(|e| PipelineError::Config(format!("line {}: {e}", idx + 1)))?;
        }
        Ok(())
    }

    /// Sets one configuration key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let parse_f64 =
            |v: &str| -> Result<f64, String> { v.parse().map_err(|_| format!("bad number `{v}`")) };
        let parse_usize = |v: &str| -> Result<usize, String> {
            v.parse().map_err(|_| format!("bad integer `{v}`"))
        };
        match key {
            "input" => self.input = PathBuf::from(value),
            "out_dir" => self.out_dir = PathBuf::from(value),
            "sample_rate_hz" => self.sample_rate_hz = parse_f64(value)?,
            "low_cut_hz" => self.filter.low_cut_hz = parse_f64(value)?,
            "high_cut_hz" => self.filter.high_cut_hz = parse_f64(value)?,
            "filter_order" => self.filter.order = parse_usize(value)?,
            "decimate" => self.decimate_factor = parse_usize(value)?,
            "guard_fraction" => self.guard_fraction = parse_f64(value)?,
            "train_len" => self.split.train_len = parse_usize(value)?,
            "test_len" => self.split.test_len = parse_usize(value)?,
            "train_offset" => self.train_offset = parse_usize(value)?,
            "lambda" => self.solver.lambda = parse_f64(value)?,
            "kkt_tol" => self.solver.kkt_tol = parse_f64(value)?,
            "max_iters" => self.solver.max_iters = parse_usize(value)?,
            "algorithm" => {
                self.solver.algorithm =
                    Algorithm::parse(value).ok_or_else(|| format!("unknown algorithm `{value}`"))?
            }
            "seed" => self.seed = value.parse().map_err(|_| format!("bad seed `{value}`"))?,
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }

    /// Every tunable as ordered `(key, value)` pairs; this is what the
    /// manifest records, so nothing that affects outputs can hide.
    pub fn key_values(&self) -> Vec<(String, String)> {
        vec![
            ("input".into(), self.input.display().to_string()),
            ("out_dir".into(), self.out_dir.display().to_string()),
            ("sample_rate_hz".into(), self.sample_rate_hz.to_string()),
            ("low_cut_hz".into(), self.filter.low_cut_hz.to_string()),
            ("high_cut_hz".into(), self.filter.high_cut_hz.to_string()),
            ("filter_order".into(), self.filter.order.to_string()),
            ("decimate".into(), self.decimate_factor.to_string()),
            ("guard_fraction".into(), self.guard_fraction.to_string()),
            ("train_len".into(), self.split.train_len.to_string()),
            ("test_len".into(), self.split.test_len.to_string()),
            ("train_offset".into(), self.train_offset.to_string()),
            ("lambda".into(), self.solver.lambda.to_string()),
            ("kkt_tol".into(), self.solver.kkt_tol.to_string()),
            ("max_iters".into(), self.solver.max_iters.to_string()),
            (
                "algorithm".into(),
                self.solver.algorithm.as_str().to_string(),
            ),
            ("seed".into(), self.seed.to_string()),
        ]
    }

    pub fn validate_for_run(&self) -> Result<(), PipelineError> {
        if self.input.as_os_str().is_empty() {
            return Err(PipelineError::Config(
                "no input record; pass --input or set `input` in the config file".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_values_override_defaults() {
        let mut config = RunConfig::default();
        config
            .apply_text("# comment\nlambda = 0.5\ntrain_len = 50\nalgorithm = coordinate_descent\n")
            .unwrap();
        assert_eq!(config.solver.lambda, 0.5);
        assert_eq!(config.split.train_len, 50);
        assert_eq!(config.solver.algorithm, Algorithm::CoordinateDescent);
        // untouched keys keep protocol defaults
        assert_eq!(config.split.test_len, 1125);
        assert_eq!(config.filter.low_cut_hz, 0.5);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut config = RunConfig::default();
        let err = config.apply_text("lambada = 0.5\n").unwrap_err();
        assert!(err.to_string().contains("unknown key"));
    }

    #[test]
    fn malformed_lines_are_rejected() {
        let mut config = RunConfig::default();
        assert!(config.apply_text("just words\n").is_err());
        assert!(config.apply_text("lambda = abc\n").is_err());
    }

    #[test]
    fn defaults_match_protocol_constants() {
        let c = RunConfig::default();
        assert_eq!(c.sample_rate_hz, 500.0);
        assert_eq!(c.filter.low_cut_hz, 0.5);
        assert_eq!(c.filter.high_cut_hz, 150.0);
        assert_eq!(c.filter.order, 2);
        assert_eq!(c.decimate_factor, 2);
        assert_eq!(c.split.train_len, 125);
        assert_eq!(c.split.test_len, 1125);
        assert_eq!(c.solver.lambda, 0.01);
    }
}
