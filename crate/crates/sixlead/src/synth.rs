//! Deterministic synthetic ECG generator.
//!
//! Beats are sums of Gaussian bumps (P, Q, R, S, T) laid out in beat phase
//! and repeated at jittered RR intervals; the single-channel "monitor"
//! signal is a configurable pointwise map of a fixed linear mix of Leads I
//! and II, plus optional noise. Because the map acts on instantaneous
//! values, a monotone choice guarantees that the mix is recoverable from
//! the monitor signal alone, which is exactly the regime the training
//! pipeline is built for. A deliberately non-injective `square` map ships
//! for negative testing.
//!
//! All randomness comes from the pinned generator in [`crate::rng`], so a
//! seed fully determines every sample.

use thiserror::Error;

use crate::rng::SplitMix64;
use crate::signal_io::EcgRecord;

const TAG_JITTER: u64 = 1;
const TAG_NOISE_I: u64 = 2;
const TAG_NOISE_II: u64 = 3;
const TAG_NOISE_ICM: u64 = 4;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("invalid map spec: {0}")]
    InvalidMap(String),
    #[error("record is missing channel `{0}`")]
    MissingChannel(String),
    #[error(transparent)]
    Record(#[from] crate::signal_io::SignalIoError),
}

/// One Gaussian bump of a beat template, positioned in beat phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianComponent {
    pub amplitude_mv: f64,
    /// Center in [0, 1) of the beat cycle.
    pub center_phase: f64,
    /// Standard deviation in phase units; must be positive.
    pub width_phase: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub heart_rate_bpm: f64,
    pub duration_s: f64,
    pub sample_rate_hz: f64,
    pub beat_shape_i: Vec<GaussianComponent>,
    pub beat_shape_ii: Vec<GaussianComponent>,
    /// Beat-to-beat RR standard deviation as a fraction of the nominal RR.
    pub hr_jitter: f64,
    pub noise_std_mv: f64,
    pub seed: u64,
}

/// Default Lead I beat template: P, Q, R, S, T bumps.
pub fn default_beat_shape_i() -> Vec<GaussianComponent> {
    vec![
        GaussianComponent {
            amplitude_mv: 0.12,
            center_phase: 0.16,
            width_phase: 0.035,
        },
        GaussianComponent {
            amplitude_mv: -0.12,
            center_phase: 0.37,
            width_phase: 0.012,
        },
        GaussianComponent {
            amplitude_mv: 1.00,
            center_phase: 0.40,
            width_phase: 0.016,
        },
        GaussianComponent {
            amplitude_mv: -0.18,
            center_phase: 0.43,
            width_phase: 0.012,
        },
        GaussianComponent {
            amplitude_mv: 0.30,
            center_phase: 0.62,
            width_phase: 0.055,
        },
    ]
}

/// Default Lead II template: the Lead I template scaled by 1.5. Keeping
/// the two leads proportional makes any fixed mix of them a function of
/// either lead, so the generated instance is exactly recoverable by a
/// pointwise model when the monitor map is monotone.
pub fn default_beat_shape_ii() -> Vec<GaussianComponent> {
    default_beat_shape_i()
        .into_iter()
        .map(|c| GaussianComponent {
            amplitude_mv: c.amplitude_mv * 1.5,
            ..c
        })
        .collect()
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            heart_rate_bpm: 120.0,
            duration_s: 5.0,
            sample_rate_hz: 500.0,
            beat_shape_i: default_beat_shape_i(),
            beat_shape_ii: default_beat_shape_ii(),
            hr_jitter: 0.05,
            noise_std_mv: 0.0,
            seed: 42,
        }
    }
}

impl SynthConfig {
    fn validate(&self) -> Result<(), SynthError> {
        let bad = |msg: String| Err(SynthError::InvalidConfig(msg));
        if !(self.heart_rate_bpm > 0.0 && self.heart_rate_bpm.is_finite()) {
            return bad(format!(
                "heart_rate_bpm must be positive, got {}",
                self.heart_rate_bpm
            ));
        }
        if !(self.sample_rate_hz > 0.0 && self.sample_rate_hz.is_finite()) {
            return bad(format!(
                "sample_rate_hz must be positive, got {}",
                self.sample_rate_hz
            ));
        }
        let samples = (self.duration_s * self.sample_rate_hz).round();
        if samples.is_nan() || samples < 2.0 {
            return bad(format!(
                "duration x rate yields {samples} samples, need at least 2"
            ));
        }
        if self.hr_jitter < 0.0 || self.noise_std_mv < 0.0 {
            return bad("jitter and noise must be nonnegative".to_string());
        }
        for (label, shape) in [("I", &self.beat_shape_i), ("II", &self.beat_shape_ii)] {
            if shape.is_empty() {
                return bad(format!("beat shape for lead {label} is empty"));
            }
            for c in shape {
                if c.width_phase.is_nan() || c.width_phase <= 0.0 {
                    return bad(format!("lead {label}: width must be positive"));
                }
                if !(0.0..1.0).contains(&c.center_phase) {
                    return bad(format!("lead {label}: center phase must be in [0, 1)"));
                }
            }
        }
        Ok(())
    }

    pub fn sample_count(&self) -> usize {
        (self.duration_s * self.sample_rate_hz).round() as usize
    }
}

/// Beat template value at phase `phi` in [0, 1). Neighbor-period images
/// keep components near the cycle boundary continuous across beats.
fn beat_value(shape: &[GaussianComponent], phi: f64) -> f64 {
    let mut acc = 0.0;
    for c in shape {
        for image in [-1.0, 0.0, 1.0] {
            let d = (phi - c.center_phase - image) / c.width_phase;
            acc += c.amplitude_mv * (-0.5 * d * d).exp();
        }
    }
    acc
}

/// Generates Leads I and II on a shared jittered beat grid.
/// Deterministic given the config (including its seed).
pub fn generate_leads(config: &SynthConfig) -> Result<EcgRecord, SynthError> {
    config.validate()?;
    let n = config.sample_count();
    let nominal_rr = config.sample_rate_hz * 60.0 / config.heart_rate_bpm; // samples

    let mut jitter = SplitMix64::substream(config.seed, TAG_JITTER);
    let mut noise_i = SplitMix64::substream(config.seed, TAG_NOISE_I);
    let mut noise_ii = SplitMix64::substream(config.seed, TAG_NOISE_II);

    let mut lead_i = Vec::with_capacity(n);
    let mut lead_ii = Vec::with_capacity(n);

    let mut beat_start = 0.0f64;
    let mut beat_len = next_rr(nominal_rr, config.hr_jitter, &mut jitter);
    for i in 0..n {
        let t = i as f64;
        while t >= beat_start + beat_len {
            beat_start += beat_len;
            beat_len = next_rr(nominal_rr, config.hr_jitter, &mut jitter);
        }
        let phi = (t - beat_start) / beat_len;
        let mut vi = beat_value(&config.beat_shape_i, phi);
        let mut vii = beat_value(&config.beat_shape_ii, phi);
        if config.noise_std_mv > 0.0 {
            vi += config.noise_std_mv * noise_i.normal();
            vii += config.noise_std_mv * noise_ii.normal();
        }
        lead_i.push(vi);
        lead_ii.push(vii);
    }

    Ok(EcgRecord::new(
        config.sample_rate_hz,
        vec![("I".to_string(), lead_i), ("II".to_string(), lead_ii)],
    )?)
}

fn next_rr(nominal: f64, jitter: f64, rng: &mut SplitMix64) -> f64 {
    if jitter == 0.0 {
        return nominal;
    }
    nominal * (1.0 + jitter * rng.normal()).max(0.2)
}

/// Pointwise map applied to the lead mix to form the monitor channel.
#[derive(Debug, Clone, PartialEq)]
pub enum IcmMapKind {
    /// Linear interpolation through strictly increasing knots, extended
    /// linearly beyond the ends. Monotone, hence invertible.
    PiecewiseLinearMonotone { knots: Vec<(f64, f64)> },
    /// `g(v) = linear * v + cubic * v^3`; monotone for nonnegative
    /// coefficients not both zero.
    CubicSquash { linear: f64, cubic: f64 },
    /// `g(v) = level * tanh(v / level)`; monotone, saturates at +-level.
    Saturating { level: f64 },
    /// `g(v) = v^2`. Non-injective on sign changes; exists so the failure
    /// mode of pointwise recovery can be demonstrated, not asserted.
    Square,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IcmMapSpec {
    pub kind: IcmMapKind,
    pub noise_std_mv: f64,
}

impl IcmMapSpec {
    /// Exact identity map (unit linear term, no cubic term).
    pub fn identity() -> Self {
        Self {
            kind: IcmMapKind::CubicSquash {
                linear: 1.0,
                cubic: 0.0,
            },
            noise_std_mv: 0.0,
        }
    }

    /// The documented "strong" nonlinearity: unit slope inside
    /// [-0.25, 0.25] mV, slope ~0.26 outside. Compresses beat peaks hard
    /// enough that no single line fits the lead map well, while keeping
    /// the inverse slope (about 3.8) mild enough that monitor noise is
    /// not blown up.
    pub fn strong_piecewise() -> Self {
        Self {
            kind: IcmMapKind::PiecewiseLinearMonotone {
                knots: vec![(-3.0, -0.975), (-0.25, -0.25), (0.25, 0.25), (3.0, 0.975)],
            },
            noise_std_mv: 0.0,
        }
    }

    pub fn cubic() -> Self {
        Self {
            kind: IcmMapKind::CubicSquash {
                linear: 0.0,
                cubic: 1.0,
            },
            noise_std_mv: 0.0,
        }
    }

    pub fn saturating(level: f64) -> Self {
        Self {
            kind: IcmMapKind::Saturating { level },
            noise_std_mv: 0.0,
        }
    }

    pub fn square() -> Self {
        Self {
            kind: IcmMapKind::Square,
            noise_std_mv: 0.0,
        }
    }

    pub fn with_noise(mut self, noise_std_mv: f64) -> Self {
        self.noise_std_mv = noise_std_mv;
        self
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |msg: String| Err(SynthError::InvalidMap(msg));
        if !(self.noise_std_mv >= 0.0 && self.noise_std_mv.is_finite()) {
            return bad(format!(
                "noise must be nonnegative, got {}",
                self.noise_std_mv
            ));
        }
        match &self.kind {
            IcmMapKind::PiecewiseLinearMonotone { knots } => {
                if knots.len() < 2 {
                    return bad("piecewise map needs at least 2 knots".to_string());
                }
                for pair in knots.windows(2) {
                    let input_ok = pair[1].0 > pair[0].0;
                    let output_ok = pair[1].1 > pair[0].1;
                    if !input_ok {
                        return bad("knot inputs must be strictly increasing".to_string());
                    }
                    if !output_ok {
                        return bad("knot outputs must be strictly increasing".to_string());
                    }
                }
            }
            IcmMapKind::CubicSquash { linear, cubic } => {
                if *linear < 0.0 || *cubic < 0.0 || (*linear == 0.0 && *cubic == 0.0) {
                    return bad(
                        "cubic map needs nonnegative coefficients, not both zero".to_string()
                    );
                }
            }
            IcmMapKind::Saturating { level } => {
                if level.is_nan() || *level <= 0.0 {
                    return bad(format!("saturation level must be positive, got {level}"));
                }
            }
            IcmMapKind::Square => {}
        }
        Ok(())
    }

    /// Evaluates the noiseless map.
    pub fn apply(&self, v: f64) -> f64 {
        match &self.kind {
            IcmMapKind::PiecewiseLinearMonotone { knots } => {
                let first = knots[0];
                let last = knots[knots.len() - 1];
                if v <= first.0 {
                    let next = knots[1];
                    let slope = (next.1 - first.1) / (next.0 - first.0);
                    return first.1 + slope * (v - first.0);
                }
                if v >= last.0 {
                    let prev = knots[knots.len() - 2];
                    let slope = (last.1 - prev.1) / (last.0 - prev.0);
                    return last.1 + slope * (v - last.0);
                }
                let idx = knots.partition_point(|(x, _)| *x <= v);
                let (x0, y0) = knots[idx - 1];
                let (x1, y1) = knots[idx];
                y0 + (y1 - y0) / (x1 - x0) * (v - x0)
            }
            IcmMapKind::CubicSquash { linear, cubic } => linear * v + cubic * (v * v * v),
            IcmMapKind::Saturating { level } => level * (v / level).tanh(),
            IcmMapKind::Square => v * v,
        }
    }
}

/// Forms the monitor channel `g(alpha * I + beta * II) + noise` over a
/// record containing Leads I and II. Deterministic given `seed`.
pub fn synth_icm(
    leads: &EcgRecord,
    map: &IcmMapSpec,
    mix: (f64, f64),
    seed: u64,
) -> Result<Vec<f64>, SynthError> {
    map.validate()?;
    let lead_i = leads
        .channel("I")
        .ok_or_else(|| SynthError::MissingChannel("I".to_string()))?;
    let lead_ii = leads
        .channel("II")
        .ok_or_else(|| SynthError::MissingChannel("II".to_string()))?;
    let (alpha, beta) = mix;
    let mut noise = SplitMix64::substream(seed, TAG_NOISE_ICM);
    let icm = lead_i
        .iter()
        .zip(lead_ii)
        .map(|(&a, &b)| {
            let mut v = map.apply(alpha * a + beta * b);
            if map.noise_std_mv > 0.0 {
                v += map.noise_std_mv * noise.normal();
            }
            v
        })
        .collect();
    Ok(icm)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noiseless(bpm: f64, duration: f64, rate: f64) -> SynthConfig {
        SynthConfig {
            heart_rate_bpm: bpm,
            duration_s: duration,
            sample_rate_hz: rate,
            hr_jitter: 0.0,
            noise_std_mv: 0.0,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn noiseless_periodic_config_is_exactly_periodic() {
        let rec = generate_leads(&noiseless(60.0, 2.0, 250.0)).unwrap();
        assert_eq!(rec.len(), 500);
        let i = rec.channel("I").unwrap();
        let ii = rec.channel("II").unwrap();
        for k in 0..250 {
            assert_eq!(i[k], i[k + 250], "lead I sample {k}");
            assert_eq!(ii[k], ii[k + 250], "lead II sample {k}");
        }
        // the beat is not degenerate
        let max = i.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(max > 0.5);
    }

    #[test]
    fn same_seed_reproduces_samples() {
        let config = SynthConfig {
            hr_jitter: 0.08,
            noise_std_mv: 0.05,
            ..SynthConfig::default()
        };
        let a = generate_leads(&config).unwrap();
        let b = generate_leads(&config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn doubling_amplitudes_doubles_signal() {
        let base = noiseless(75.0, 2.0, 250.0);
        let mut doubled = base.clone();
        for c in doubled
            .beat_shape_i
            .iter_mut()
            .chain(doubled.beat_shape_ii.iter_mut())
        {
            c.amplitude_mv *= 2.0;
        }
        let a = generate_leads(&base).unwrap();
        let b = generate_leads(&doubled).unwrap();
        for (x, y) in a.channel("I").unwrap().iter().zip(b.channel("I").unwrap()) {
            assert_eq!(*y, 2.0 * x);
        }
    }

    #[test]
    fn identity_map_reproduces_lead_one() {
        let rec = generate_leads(&noiseless(90.0, 2.0, 250.0)).unwrap();
        let icm = synth_icm(&rec, &IcmMapSpec::identity(), (1.0, 0.0), 5).unwrap();
        assert_eq!(icm, rec.channel("I").unwrap());
    }

    #[test]
    fn cubic_map_cubes_lead_one() {
        let rec = generate_leads(&noiseless(90.0, 2.0, 250.0)).unwrap();
        let icm = synth_icm(&rec, &IcmMapSpec::cubic(), (1.0, 0.0), 5).unwrap();
        for (out, v) in icm.iter().zip(rec.channel("I").unwrap()) {
            assert_eq!(*out, v * v * v);
        }
    }

    #[test]
    fn monotone_map_keeps_mix_single_valued() {
        let rec = generate_leads(&SynthConfig {
            hr_jitter: 0.05,
            ..SynthConfig::default()
        })
        .unwrap();
        let (alpha, beta) = (0.6, 0.4);
        let icm = synth_icm(&rec, &IcmMapSpec::strong_piecewise(), (alpha, beta), 5).unwrap();
        let i = rec.channel("I").unwrap();
        let ii = rec.channel("II").unwrap();
        let mut pairs: Vec<(f64, f64)> = icm
            .iter()
            .zip(i.iter().zip(ii))
            .map(|(&m, (&a, &b))| (m, alpha * a + beta * b))
            .collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for w in pairs.windows(2) {
            assert!(
                w[1].1 >= w[0].1 - 1e-12,
                "mix not single-valued in monitor value: {w:?}"
            );
        }
    }

    #[test]
    fn square_map_is_not_single_valued() {
        let rec = generate_leads(&noiseless(90.0, 2.0, 250.0)).unwrap();
        let icm = synth_icm(&rec, &IcmMapSpec::square(), (1.0, 0.0), 5).unwrap();
        let i = rec.channel("I").unwrap();
        let mut pairs: Vec<(f64, f64)> = icm.iter().zip(i).map(|(&m, &v)| (m, v)).collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let violated = pairs.windows(2).any(|w| w[1].1 < w[0].1 - 1e-9);
        assert!(
            violated,
            "square map should not be invertible on signed signals"
        );
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(generate_leads(&SynthConfig {
            heart_rate_bpm: 0.0,
            ..SynthConfig::default()
        })
        .is_err());
        assert!(generate_leads(&SynthConfig {
            beat_shape_i: vec![],
            ..SynthConfig::default()
        })
        .is_err());

        let bad = IcmMapSpec {
            kind: IcmMapKind::PiecewiseLinearMonotone {
                knots: vec![(0.0, 1.0), (1.0, 0.5)],
            },
            noise_std_mv: 0.0,
        };
        assert!(bad.validate().is_err());
        assert!(IcmMapSpec::saturating(-1.0).validate().is_err());
    }

    #[test]
    fn strong_preset_is_valid_and_monotone() {
        let spec = IcmMapSpec::strong_piecewise();
        spec.validate().unwrap();
        let mut prev = f64::NEG_INFINITY;
        let mut v = -4.0;
        while v < 4.0 {
            let g = spec.apply(v);
            assert!(g > prev);
            prev = g;
            v += 0.01;
        }
    }
}
