//! Reading and writing multi-channel ECG records as plain CSV.
//!
//! The on-disk dialect is deliberately minimal: comma separator, `.` decimal
//! point, LF or CRLF line endings, a mandatory header row, and no quoting.
//! The first column is a time index and is ignored on read; every other
//! column is one channel in millivolts. Channel labels are restricted to
//! `[A-Za-z0-9_]` so no escaping is ever needed. The sample rate is not part
//! of the file; it travels in the run configuration or as a CLI flag.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};

use thiserror::Error;

/// Errors raised while validating, reading, or writing records.
#[derive(Debug, Error)]
pub enum SignalIoError {
    #[error("missing header")]
    MissingHeader,
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("invalid channel label `{0}` (allowed: [A-Za-z0-9_], non-empty)")]
    InvalidLabel(String),
    #[error("duplicate channel label `{0}`")]
    DuplicateLabel(String),
    #[error("line {line}: expected {expected} columns, found {found}")]
    RaggedRow {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: non-numeric cell `{cell}`")]
    NonNumericCell { line: usize, cell: String },
    #[error("non-finite sample in channel `{channel}` at index {index}")]
    NonFiniteSample { channel: String, index: usize },
    #[error("record needs at least 2 samples per channel, got {0}")]
    TooShort(usize),
    #[error("channel `{label}` has {len} samples, expected {expected}")]
    UnequalLengths {
        label: String,
        len: usize,
        expected: usize,
    },
    #[error("record has no channels")]
    NoChannels,
    #[error("sample rate must be positive and finite, got {0}")]
    InvalidSampleRate(f64),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// A validated multi-channel sampled waveform.
///
/// All channels share one sample count (at least 2), labels are unique and
/// non-empty, every sample is finite, and the sample rate is positive. The
/// constructor is the only way to build one, so downstream code can rely on
/// those invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct EcgRecord {
    sample_rate_hz: f64,
    channels: Vec<(String, Vec<f64>)>,
}

impl EcgRecord {
    pub fn new(
        sample_rate_hz: f64,
        channels: Vec<(String, Vec<f64>)>,
    ) -> Result<Self, SignalIoError> {
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(SignalIoError::InvalidSampleRate(sample_rate_hz));
        }
        if channels.is_empty() {
            return Err(SignalIoError::NoChannels);
        }
        let expected = channels[0].1.len();
        if expected < 2 {
            return Err(SignalIoError::TooShort(expected));
        }
        for (label, samples) in &channels {
            validate_label(label)?;
            if samples.len() != expected {
                return Err(SignalIoError::UnequalLengths {
                    label: label.clone(),
                    len: samples.len(),
                    expected,
                });
            }
            if let Some(index) = samples.iter().position(|v| !v.is_finite()) {
                return Err(SignalIoError::NonFiniteSample {
                    channel: label.clone(),
                    index,
                });
            }
        }
        for (i, (label, _)) in channels.iter().enumerate() {
            if channels[..i].iter().any(|(other, _)| other == label) {
                return Err(SignalIoError::DuplicateLabel(label.clone()));
            }
        }
        Ok(Self {
            sample_rate_hz,
            channels,
        })
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    /// Shared sample count of every channel.
    pub fn len(&self) -> usize {
        self.channels[0].1.len()
    }

    pub fn is_empty(&self) -> bool {
        false // invariant: at least 2 samples
    }

    pub fn channels(&self) -> &[(String, Vec<f64>)] {
        &self.channels
    }

    pub fn labels(&self) -> Vec<&str> {
        self.channels.iter().map(|(l, _)| l.as_str()).collect()
    }

    pub fn channel(&self, label: &str) -> Option<&[f64]> {
        self.channels
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, s)| s.as_slice())
    }
}

fn validate_label(label: &str) -> Result<(), SignalIoError> {
    let ok = !label.is_empty() && label.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if ok {
        Ok(())
    } else {
        Err(SignalIoError::InvalidLabel(label.to_string()))
    }
}

/// Parses a record from the documented CSV dialect.
///
/// Channel order is preserved from the header. Errors carry the 1-based
/// line number of the first offending row.
pub fn read_record<R: Read>(source: R, sample_rate_hz: f64) -> Result<EcgRecord, SignalIoError> {
    let reader = BufReader::new(source);
    let mut lines = reader.lines();

    let header = match lines.next() {
        Some(line) => line?,
        None => return Err(SignalIoError::MissingHeader),
    };
    let header = header.trim_end_matches('\r');
    if header.is_empty() {
        return Err(SignalIoError::MissingHeader);
    }
    let columns: Vec<&str> = header.split(',').collect();
    if columns.len() < 2 {
        return Err(SignalIoError::MalformedHeader(format!(
            "expected a time column plus at least one channel, found {} column(s)",
            columns.len()
        )));
    }
    let labels: Vec<String> = columns[1..].iter().map(|s| s.to_string()).collect();
    for label in &labels {
        validate_label(label)?;
    }
    for (i, label) in labels.iter().enumerate() {
        if labels[..i].contains(label) {
            return Err(SignalIoError::DuplicateLabel(label.clone()));
        }
    }

    let ncols = columns.len();
    let mut samples: Vec<Vec<f64>> = vec![Vec::new(); labels.len()];
    for (row_idx, line) in lines.enumerate() {
        let line_no = row_idx + 2; // 1-based, header is line 1
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != ncols {
            return Err(SignalIoError::RaggedRow {
                line: line_no,
                expected: ncols,
                found: cells.len(),
            });
        }
        for (col, cell) in cells.iter().enumerate() {
            let value: f64 = cell
                .trim()
                .parse()
                .map_err(|_| SignalIoError::NonNumericCell {
                    line: line_no,
                    cell: cell.to_string(),
                })?;
            if col == 0 {
                continue; // time column is ignored for computation
            }
            if !value.is_finite() {
                return Err(SignalIoError::NonFiniteSample {
                    channel: labels[col - 1].clone(),
                    index: samples[col - 1].len(),
                });
            }
            samples[col - 1].push(value);
        }
    }

    let channels = labels.into_iter().zip(samples).collect();
    EcgRecord::new(sample_rate_hz, channels)
}

/// Writes a record in the documented CSV dialect.
///
/// The time column holds `i / sample_rate` seconds. Values are printed with
/// the shortest decimal representation that parses back to the identical
/// f64, so a read of the written bytes reproduces the record exactly.
pub fn write_record<W: Write>(record: &EcgRecord, sink: &mut W) -> Result<(), SignalIoError> {
    let mut out = String::new();
    out.push('t');
    for (label, _) in record.channels() {
        out.push(',');
        out.push_str(label);
    }
    out.push('\n');
    let rate = record.sample_rate_hz();
    for i in 0..record.len() {
        let _ = write!(out, "{}", i as f64 / rate);
        for (_, samples) in record.channels() {
            let _ = write!(out, ",{}", samples[i]);
        }
        out.push('\n');
    }
    sink.write_all(out.as_bytes())?;
    Ok(())
}
