//! Signal conditioning: band-pass filtering, standardization, decimation,
//! and train/test segmentation.
//!
//! The band-pass is a Butterworth high-pass cascaded with a Butterworth
//! low-pass, each realized as second-order sections from a bilinear
//! transform with frequency prewarping, and applied forward-backward for
//! zero phase. Edges are handled with odd-reflection padding sized from
//! the filter's impulse-response settle length plus exact steady-state
//! initialization, so short training windows stay free of edge transients.
//!
//! Decimation low-passes at a guard fraction of the post-decimation
//! Nyquist before taking every k-th sample; the band-pass ceiling may
//! exceed that Nyquist, so the guard is not redundant.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PreprocessError {
    #[error("cutoffs infeasible: need 0 < low ({low}) < high ({high}) < Nyquist ({nyquist}) Hz")]
    InfeasibleCutoffs { low: f64, high: f64, nyquist: f64 },
    #[error("filter order must be in 1..=8, got {0}")]
    BadOrder(usize),
    #[error("signal too short for edge padding: {len} samples, need more than {min}")]
    SignalTooShort { len: usize, min: usize },
    #[error("zero variance: segment is constant")]
    ZeroVariance,
    #[error("segment needs at least 2 samples, got {0}")]
    SegmentTooShort(usize),
    #[error("decimation factor must be at least 1")]
    ZeroFactor,
    #[error("signal shorter than decimation factor ({len} < {factor})")]
    ShorterThanFactor { len: usize, factor: usize },
    #[error("guard fraction must be in (0, 1], got {0}")]
    BadGuardFraction(f64),
    #[error("split ({train} + {test}) exceeds signal length {len}")]
    SplitTooLong {
        train: usize,
        test: usize,
        len: usize,
    },
    #[error("split lengths must be positive")]
    EmptySplitSegment,
}

/// Band-pass corner frequencies and per-direction Butterworth order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    pub low_cut_hz: f64,
    pub high_cut_hz: f64,
    pub order: usize,
}

impl Default for FilterSpec {
    fn default() -> Self {
        Self {
            low_cut_hz: 0.5,
            high_cut_hz: 150.0,
            order: 2,
        }
    }
}

/// Mean and population standard deviation of a training segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZScoreStats {
    pub mean: f64,
    pub std: f64,
}

impl ZScoreStats {
    /// Identity standardization (mean 0, std 1).
    pub fn identity() -> Self {
        Self {
            mean: 0.0,
            std: 1.0,
        }
    }
}

/// Contiguous train/test prefix lengths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSpec {
    pub train_len: usize,
    pub test_len: usize,
}

/// Zero-phase Butterworth band-pass. Output has the same length as the
/// input; DC is removed and content outside the band is attenuated by the
/// squared single-pass magnitude response.
pub fn bandpass(
    signal: &[f64],
    sample_rate_hz: f64,
    spec: &FilterSpec,
) -> Result<Vec<f64>, PreprocessError> {
    let nyquist = sample_rate_hz / 2.0;
    if !(spec.low_cut_hz > 0.0 && spec.low_cut_hz < spec.high_cut_hz && spec.high_cut_hz < nyquist)
    {
        return Err(PreprocessError::InfeasibleCutoffs {
            low: spec.low_cut_hz,
            high: spec.high_cut_hz,
            nyquist,
        });
    }
    if spec.order == 0 || spec.order > 8 {
        return Err(PreprocessError::BadOrder(spec.order));
    }
    let mut sections = design_butterworth(spec.order, spec.low_cut_hz, sample_rate_hz, Kind::High)?;
    sections.extend(design_butterworth(
        spec.order,
        spec.high_cut_hz,
        sample_rate_hz,
        Kind::Low,
    )?);
    filtfilt(&sections, signal)
}

/// Mean and population standard deviation; rejects constant segments.
pub fn fit_stats(segment: &[f64]) -> Result<ZScoreStats, PreprocessError> {
    if segment.len() < 2 {
        return Err(PreprocessError::SegmentTooShort(segment.len()));
    }
    let n = segment.len() as f64;
    let mean = segment.iter().sum::<f64>() / n;
    let var = segment.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    if std == 0.0 {
        return Err(PreprocessError::ZeroVariance);
    }
    Ok(ZScoreStats { mean, std })
}

pub fn apply_zscore(signal: &[f64], stats: &ZScoreStats) -> Vec<f64> {
    signal
        .iter()
        .map(|v| (v - stats.mean) / stats.std)
        .collect()
}

pub fn invert_zscore(signal: &[f64], stats: &ZScoreStats) -> Vec<f64> {
    signal.iter().map(|v| v * stats.std + stats.mean).collect()
}

/// Keeps every `factor`-th sample after an anti-alias low-pass at
/// `guard_fraction` of the post-decimation Nyquist. Factor 1 is the
/// identity (no filtering).
pub fn decimate(
    signal: &[f64],
    factor: usize,
    guard_fraction: f64,
) -> Result<Vec<f64>, PreprocessError> {
    if factor == 0 {
        return Err(PreprocessError::ZeroFactor);
    }
    if signal.len() < factor {
        return Err(PreprocessError::ShorterThanFactor {
            len: signal.len(),
            factor,
        });
    }
    if factor == 1 {
        return Ok(signal.to_vec());
    }
    if !(guard_fraction > 0.0 && guard_fraction <= 1.0) {
        return Err(PreprocessError::BadGuardFraction(guard_fraction));
    }
    // Work at a nominal unit sample rate; only the cutoff ratio matters.
    let cutoff = guard_fraction / (2.0 * factor as f64);
    let sections = design_butterworth(4, cutoff, 1.0, Kind::Low)?;
    let smoothed = filtfilt(&sections, signal)?;
    Ok(smoothed.iter().step_by(factor).copied().collect())
}

/// Slices the leading `train_len` samples and the following `test_len`
/// samples. Values are borrowed, never copied or transformed.
pub fn split<'a>(
    signal: &'a [f64],
    spec: &SplitSpec,
) -> Result<(&'a [f64], &'a [f64]), PreprocessError> {
    if spec.train_len == 0 || spec.test_len == 0 {
        return Err(PreprocessError::EmptySplitSegment);
    }
    let end = spec.train_len + spec.test_len;
    if end > signal.len() {
        return Err(PreprocessError::SplitTooLong {
            train: spec.train_len,
            test: spec.test_len,
            len: signal.len(),
        });
    }
    Ok((&signal[..spec.train_len], &signal[spec.train_len..end]))
}

// ---------------------------------------------------------------------------
// Butterworth design and zero-phase application
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
enum Kind {
    Low,
    High,
}

/// One second-order section, denominator normalized to a0 = 1.
/// First-order sections set b2 = a2 = 0.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Sos {
    b0: f64,
    b1: f64,
    b2: f64,
    a1: f64,
    a2: f64,
}

impl Sos {
    fn dc_gain(&self) -> f64 {
        (self.b0 + self.b1 + self.b2) / (1.0 + self.a1 + self.a2)
    }

    /// Largest pole modulus of this section.
    fn pole_radius(&self) -> f64 {
        if self.a2 == 0.0 {
            return self.a1.abs();
        }
        let disc = self.a1 * self.a1 - 4.0 * self.a2;
        if disc >= 0.0 {
            let root = disc.sqrt();
            let r1 = (-self.a1 + root) / 2.0;
            let r2 = (-self.a1 - root) / 2.0;
            r1.abs().max(r2.abs())
        } else {
            self.a2.sqrt() // conjugate pair: |p|^2 = a2
        }
    }

    /// Magnitude of the section response at angular frequency `omega`
    /// (radians per sample).
    fn magnitude_at(&self, omega: f64) -> f64 {
        let (c1, s1) = (omega.cos(), omega.sin());
        let (c2, s2) = ((2.0 * omega).cos(), (2.0 * omega).sin());
        let num_re = self.b0 + self.b1 * c1 + self.b2 * c2;
        let num_im = -(self.b1 * s1 + self.b2 * s2);
        let den_re = 1.0 + self.a1 * c1 + self.a2 * c2;
        let den_im = -(self.a1 * s1 + self.a2 * s2);
        (num_re * num_re + num_im * num_im).sqrt() / (den_re * den_re + den_im * den_im).sqrt()
    }
}

#[derive(Debug, Clone, Copy)]
struct Complex {
    re: f64,
    im: f64,
}

impl Complex {
    fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    fn add(self, o: Complex) -> Complex {
        Complex::new(self.re + o.re, self.im + o.im)
    }

    fn sub(self, o: Complex) -> Complex {
        Complex::new(self.re - o.re, self.im - o.im)
    }

    fn div(self, o: Complex) -> Complex {
        let d = o.re * o.re + o.im * o.im;
        Complex::new(
            (self.re * o.re + self.im * o.im) / d,
            (self.im * o.re - self.re * o.im) / d,
        )
    }

    fn scale(self, s: f64) -> Complex {
        Complex::new(self.re * s, self.im * s)
    }

    fn abs2(self) -> f64 {
        self.re * self.re + self.im * self.im
    }
}

/// Butterworth low- or high-pass of the given order as a cascade of
/// second-order sections, each normalized to unit gain at its passband
/// reference (DC for low-pass, Nyquist for high-pass).
fn design_butterworth(
    order: usize,
    cutoff_hz: f64,
    sample_rate_hz: f64,
    kind: Kind,
) -> Result<Vec<Sos>, PreprocessError> {
    if order == 0 || order > 8 {
        return Err(PreprocessError::BadOrder(order));
    }
    let warped = 2.0 * sample_rate_hz * (std::f64::consts::PI * cutoff_hz / sample_rate_hz).tan();
    let two_fs = 2.0 * sample_rate_hz;

    // Analog prototype poles on the unit circle, left half-plane.
    let analog_pole = |k: usize| -> Complex {
        let theta =
            std::f64::consts::PI * (2.0 * k as f64 + order as f64 + 1.0) / (2.0 * order as f64);
        let unit = Complex::new(theta.cos(), theta.sin());
        match kind {
            Kind::Low => unit.scale(warped),
            Kind::High => Complex::new(warped, 0.0).div(unit),
        }
    };
    let bilinear = |s: Complex| -> Complex {
        Complex::new(two_fs, 0.0)
            .add(s)
            .div(Complex::new(two_fs, 0.0).sub(s))
    };

    let mut sections = Vec::new();
    let pairs = order / 2;
    for k in 0..pairs {
        let z = bilinear(analog_pole(k)); // conjugate partner is implicit
        let a1 = -2.0 * z.re;
        let a2 = z.abs2();
        sections.push(normalized_section(kind, a1, a2));
    }
    if order % 2 == 1 {
        // Middle pole is real: theta = pi, prototype pole -1.
        let z = bilinear(analog_pole(order / 2));
        debug_assert!(z.im.abs() < 1e-12);
        sections.push(normalized_first_order(kind, -z.re));
    }
    Ok(sections)
}

fn normalized_section(kind: Kind, a1: f64, a2: f64) -> Sos {
    let (b, reference_gain) = match kind {
        // zeros at z = -1; unit gain at z = 1
        Kind::Low => ([1.0, 2.0, 1.0], (1.0 + a1 + a2) / 4.0),
        // zeros at z = +1; unit gain at z = -1
        Kind::High => ([1.0, -2.0, 1.0], (1.0 - a1 + a2) / 4.0),
    };
    Sos {
        b0: b[0] * reference_gain,
        b1: b[1] * reference_gain,
        b2: b[2] * reference_gain,
        a1,
        a2,
    }
}

fn normalized_first_order(kind: Kind, a1: f64) -> Sos {
    let (b, reference_gain) = match kind {
        Kind::Low => ([1.0, 1.0], (1.0 + a1) / 2.0),
        Kind::High => ([1.0, -1.0], (1.0 - a1) / 2.0),
    };
    Sos {
        b0: b[0] * reference_gain,
        b1: b[1] * reference_gain,
        b2: 0.0,
        a1,
        a2: 0.0,
    }
}

/// Single-pass cascade in transposed direct form II, with states seeded to
/// their steady-state response for a constant input equal to `x[0]`.
fn sosfilt(sections: &[Sos], x: &[f64]) -> Vec<f64> {
    let mut states: Vec<(f64, f64)> = Vec::with_capacity(sections.len());
    let mut level = if x.is_empty() { 0.0 } else { x[0] };
    for s in sections {
        let y = s.dc_gain() * level;
        states.push(((y - s.b0 * level), (s.b2 * level - s.a2 * y)));
        level = y;
    }

    let mut out = x.to_vec();
    for (s, st) in sections.iter().zip(states.iter_mut()) {
        let (mut s1, mut s2) = *st;
        for v in out.iter_mut() {
            let xin = *v;
            let y = s.b0 * xin + s1;
            s1 = s.b1 * xin - s.a1 * y + s2;
            s2 = s.b2 * xin - s.a2 * y;
            *v = y;
        }
        *st = (s1, s2);
    }
    out
}

/// Forward-backward application with odd-reflection padding.
pub(crate) fn filtfilt(sections: &[Sos], x: &[f64]) -> Result<Vec<f64>, PreprocessError> {
    let state_len = 2 * sections.len();
    let min_len = 3 * state_len;
    if x.len() <= min_len {
        return Err(PreprocessError::SignalTooShort {
            len: x.len(),
            min: min_len,
        });
    }

    let pad = settle_length(sections).saturating_mul(3).min(x.len() - 1);
    let n = x.len();
    let mut ext = Vec::with_capacity(n + 2 * pad);
    let first = x[0];
    let last = x[n - 1];
    for i in (1..=pad).rev() {
        ext.push(2.0 * first - x[i]);
    }
    ext.extend_from_slice(x);
    for i in 1..=pad {
        ext.push(2.0 * last - x[n - 1 - i]);
    }

    let mut forward = sosfilt(sections, &ext);
    forward.reverse();
    let mut backward = sosfilt(sections, &forward);
    backward.reverse();
    Ok(backward[pad..pad + n].to_vec())
}

/// Samples for the impulse response envelope to decay to 1e-3, estimated
/// from the largest pole modulus.
fn settle_length(sections: &[Sos]) -> usize {
    let radius = sections
        .iter()
        .map(|s| s.pole_radius())
        .fold(0.0f64, f64::max);
    if radius <= 0.0 {
        return 1;
    }
    let r = radius.min(1.0 - 1e-12);
    ((1e-3f64).ln() / r.ln()).ceil().max(1.0) as usize
}

/// Squared magnitude of the full zero-phase band-pass at `freq_hz`; this
/// is the amplitude ratio a sinusoid experiences after forward-backward
/// filtering. Exposed for verification against measured attenuation.
pub fn bandpass_gain_at(
    freq_hz: f64,
    sample_rate_hz: f64,
    spec: &FilterSpec,
) -> Result<f64, PreprocessError> {
    let mut sections = design_butterworth(spec.order, spec.low_cut_hz, sample_rate_hz, Kind::High)?;
    sections.extend(design_butterworth(
        spec.order,
        spec.high_cut_hz,
        sample_rate_hz,
        Kind::Low,
    )?);
    let omega = 2.0 * std::f64::consts::PI * freq_hz / sample_rate_hz;
    let single: f64 = sections.iter().map(|s| s.magnitude_at(omega)).product();
    Ok(single * single)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sine(freq: f64, fs: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * freq * i as f64 / fs).sin())
            .collect()
    }

    /// Amplitude of a known-frequency sinusoid over the central half of
    /// the signal, by quadrature projection.
    fn central_amplitude(x: &[f64], freq: f64, fs: f64) -> f64 {
        let (a, b) = (x.len() / 4, 3 * x.len() / 4);
        let mut s = 0.0;
        let mut c = 0.0;
        for (i, v) in x.iter().enumerate().take(b).skip(a) {
            let w = 2.0 * std::f64::consts::PI * freq * i as f64 / fs;
            s += v * w.sin();
            c += v * w.cos();
        }
        let m = (b - a) as f64;
        2.0 * (s * s + c * c).sqrt() / m
    }

    #[test]
    fn constant_signal_is_killed() {
        let x = vec![1.0; 5000];
        let y = bandpass(&x, 500.0, &FilterSpec::default()).unwrap();
        assert_eq!(y.len(), x.len());
        let max = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(max < 0.01, "max abs {max}");
    }

    #[test]
    fn passband_sinusoid_keeps_amplitude() {
        let fs = 500.0;
        let x = sine(10.0, fs, 5000);
        let y = bandpass(&x, fs, &FilterSpec::default()).unwrap();
        let amp = central_amplitude(&y, 10.0, fs);
        assert!((0.99..=1.01).contains(&amp), "amplitude {amp}");
        // forward-backward application leaves no phase shift
        let (a, b) = (y.len() / 4, 3 * y.len() / 4);
        let mut in_phase = 0.0;
        let mut quadrature = 0.0;
        for (i, v) in y.iter().enumerate().take(b).skip(a) {
            let w = 2.0 * std::f64::consts::PI * 10.0 * i as f64 / fs;
            in_phase += v * w.sin();
            quadrature += v * w.cos();
        }
        let phase = quadrature.atan2(in_phase);
        assert!(phase.abs() < 1e-3, "phase shift {phase} rad");
        // measured attenuation matches the squared magnitude response
        let expected = bandpass_gain_at(10.0, fs, &FilterSpec::default()).unwrap();
        assert!(
            (amp - expected).abs() < 5e-3,
            "amp {amp} vs gain {expected}"
        );
        // warping is negligible this deep in the passband: the analytic
        // prototype magnitude agrees too
        let analog = 1.0 / (1.0 + (0.5f64 / 10.0).powi(4)) / (1.0 + (10.0f64 / 150.0).powi(4));
        assert!((expected - analog).abs() < 1e-3);
    }

    #[test]
    fn stopband_sinusoid_is_attenuated() {
        let fs = 500.0;
        let x = sine(200.0, fs, 5000);
        let y = bandpass(&x, fs, &FilterSpec::default()).unwrap();
        let amp = central_amplitude(&y, 200.0, fs);
        assert!(amp < 0.2, "amplitude {amp}");
        let expected = bandpass_gain_at(200.0, fs, &FilterSpec::default()).unwrap();
        assert!(
            (amp - expected).abs() < 5e-3,
            "amp {amp} vs gain {expected}"
        );
        // bilinear design can only attenuate faster than the unwarped
        // analog prototype above the cutoff
        let analog = 1.0 / (1.0 + (200.0f64 / 150.0).powi(4));
        assert!(amp <= analog);
    }

    /// Bidirectional band-pass gain from the closed-form Butterworth
    /// magnitude with bilinear prewarping; independent of the coefficient
    /// path used by the implementation.
    fn analytic_gain(freq: f64, fs: f64, spec: &FilterSpec) -> f64 {
        let w = |f: f64| (std::f64::consts::PI * f / fs).tan();
        let r_low = w(spec.low_cut_hz) / w(freq);
        let r_high = w(freq) / w(spec.high_cut_hz);
        let n = 2 * spec.order as i32;
        1.0 / (1.0 + r_low.powi(n)) / (1.0 + r_high.powi(n))
    }

    #[test]
    fn design_matches_analytic_magnitude() {
        for order in 1..=5 {
            let spec = FilterSpec {
                low_cut_hz: 1.0,
                high_cut_hz: 40.0,
                order,
            };
            for freq in [0.2, 1.0, 3.0, 10.0, 40.0, 100.0, 200.0] {
                let designed = bandpass_gain_at(freq, 500.0, &spec).unwrap();
                let analytic = analytic_gain(freq, 500.0, &spec);
                assert!(
                    (designed - analytic).abs() <= 1e-9,
                    "order {order} at {freq} Hz: {designed} vs {analytic}"
                );
            }
            // the half-power landmarks fall out of the same identity
            let at_low = bandpass_gain_at(1.0, 500.0, &spec).unwrap();
            let at_high = bandpass_gain_at(40.0, 500.0, &spec).unwrap();
            assert!((at_low - 0.5).abs() < 0.01, "order {order}: {at_low}");
            assert!((at_high - 0.5).abs() < 0.01, "order {order}: {at_high}");
        }
    }

    #[test]
    fn infeasible_cutoffs_are_rejected() {
        let err = bandpass(&vec![0.0; 100], 200.0, &FilterSpec::default()).unwrap_err();
        assert!(matches!(err, PreprocessError::InfeasibleCutoffs { .. }));
        let err = bandpass(
            &vec![0.0; 100],
            500.0,
            &FilterSpec {
                low_cut_hz: 50.0,
                high_cut_hz: 10.0,
                order: 2,
            },
        )
        .unwrap_err();
        assert!(matches!(err, PreprocessError::InfeasibleCutoffs { .. }));
    }

    #[test]
    fn too_short_signal_is_rejected() {
        let err = bandpass(&[0.0; 12], 500.0, &FilterSpec::default()).unwrap_err();
        assert!(matches!(err, PreprocessError::SignalTooShort { .. }));
    }

    #[test]
    fn bandpass_is_linear() {
        let fs = 500.0;
        let x = sine(7.0, fs, 2000);
        let y = sine(31.0, fs, 2000);
        let (a, b) = (1.7, -0.4);
        let combined: Vec<f64> = x.iter().zip(&y).map(|(xi, yi)| a * xi + b * yi).collect();
        let spec = FilterSpec::default();
        let fc = bandpass(&combined, fs, &spec).unwrap();
        let fx = bandpass(&x, fs, &spec).unwrap();
        let fy = bandpass(&y, fs, &spec).unwrap();
        let scale = fc.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..fc.len() {
            let lhs = fc[i];
            let rhs = a * fx[i] + b * fy[i];
            assert!(
                (lhs - rhs).abs() <= 1e-9 * scale.max(1.0),
                "at {i}: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn fit_stats_examples() {
        let s = fit_stats(&[1.0, 3.0]).unwrap();
        assert_eq!(s.mean, 2.0);
        assert_eq!(s.std, 1.0);

        assert!(matches!(
            fit_stats(&[5.0, 5.0, 5.0]).unwrap_err(),
            PreprocessError::ZeroVariance
        ));

        let s = fit_stats(&[0.0, 0.0, 3.0, 3.0]).unwrap();
        assert_eq!(s.mean, 1.5);
        assert_eq!(s.std, 1.5);

        assert!(matches!(
            fit_stats(&[1.0]).unwrap_err(),
            PreprocessError::SegmentTooShort(1)
        ));
    }

    #[test]
    fn zscore_examples() {
        let stats = ZScoreStats {
            mean: 3.0,
            std: 1.0,
        };
        assert_eq!(apply_zscore(&[2.0, 4.0], &stats), vec![-1.0, 1.0]);
        let x = [0.5, -2.0, 7.0];
        assert_eq!(apply_zscore(&x, &ZScoreStats::identity()), x.to_vec());
    }

    #[test]
    fn standardized_segment_has_unit_stats() {
        let x: Vec<f64> = (0..500)
            .map(|i| (i as f64 * 0.37).sin() * 2.5 + 1.2)
            .collect();
        let stats = fit_stats(&x).unwrap();
        let z = apply_zscore(&x, &stats);
        let zs = fit_stats(&z).unwrap();
        assert!(zs.mean.abs() < 1e-10);
        assert!((zs.std - 1.0).abs() < 1e-10);
    }

    #[test]
    fn decimate_lengths_and_identity() {
        let x: Vec<f64> = (0..2500).map(|i| i as f64).collect();
        let y = decimate(&x, 2, 0.9).unwrap();
        assert_eq!(y.len(), 1250);

        let short = vec![1.0, 2.0, 3.0];
        assert_eq!(decimate(&short, 1, 0.9).unwrap(), short);

        // output length is ceil(len / factor)
        let odd: Vec<f64> = (0..2501).map(|i| i as f64).collect();
        assert_eq!(decimate(&odd, 2, 0.9).unwrap().len(), 1251);

        assert!(matches!(
            decimate(&short, 0, 0.9).unwrap_err(),
            PreprocessError::ZeroFactor
        ));
    }

    #[test]
    fn decimated_sinusoid_keeps_amplitude() {
        let fs = 500.0;
        let x = sine(5.0, fs, 2000); // 4 s
        let y = decimate(&x, 2, 0.9).unwrap();
        assert_eq!(y.len(), 1000);
        // compare against a dense regeneration at the new rate
        let amp = central_amplitude(&y, 5.0, 250.0);
        assert!((amp - 1.0).abs() < 0.01, "amplitude {amp}");
        let reference = sine(5.0, 250.0, 1000);
        let mid = 250..750;
        for i in mid {
            assert!((y[i] - reference[i]).abs() < 0.02, "sample {i}");
        }
    }

    #[test]
    fn split_examples() {
        let x: Vec<f64> = (0..1250).map(|i| i as f64).collect();
        let (train, test) = split(
            &x,
            &SplitSpec {
                train_len: 125,
                test_len: 1125,
            },
        )
        .unwrap();
        assert_eq!(train.len(), 125);
        assert_eq!(test.len(), 1125);
        assert_eq!(train[0], 0.0);
        assert_eq!(test[0], 125.0);

        let small: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let (a, b) = split(
            &small,
            &SplitSpec {
                train_len: 2,
                test_len: 8,
            },
        )
        .unwrap();
        assert_eq!(a, &small[..2]);
        assert_eq!(b, &small[2..]);

        assert!(matches!(
            split(
                &small,
                &SplitSpec {
                    train_len: 9,
                    test_len: 2
                }
            )
            .unwrap_err(),
            PreprocessError::SplitTooLong { .. }
        ));
    }

    proptest! {
        #[test]
        fn zscore_roundtrip(
            x in proptest::collection::vec(-100.0f64..100.0, 2..200),
        ) {
            let stats = match fit_stats(&x) {
                Ok(s) => s,
                Err(_) => return Ok(()), // constant draw
            };
            let back = invert_zscore(&apply_zscore(&x, &stats), &stats);
            for (orig, rt) in x.iter().zip(&back) {
                prop_assert!((orig - rt).abs() <= 1e-12 * orig.abs().max(1.0));
            }
        }
    }
}
