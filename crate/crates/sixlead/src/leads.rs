//! Frontal-plane lead derivation and reconstruction metrics.
//!
//! Leads I and II span the frontal plane, so the remaining four leads are
//! fixed linear combinations:
//!
//! ```text
//! III = II - I
//! aVR = -(I + II) / 2
//! aVL = (I - III) / 2
//! aVF = (II + III) / 2
//! ```
//!
//! aVL is computed literally as `(I - III) / 2` rather than the algebraic
//! shortcut `I - II/2`; the equivalence is covered by tests. Evaluation
//! runs in millivolts so mean squared error stays clinically meaningful;
//! Pearson correlation is unit-free either way.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LeadsError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("undefined correlation: input is constant")]
    UndefinedCorrelation,
    #[error("need at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("constant regressor: slope is undefined")]
    ConstantRegressor,
    #[error("lead set mismatch: missing `{0}`")]
    MissingLead(String),
}

pub const LEAD_ORDER: [&str; 6] = ["I", "II", "III", "aVR", "aVL", "aVF"];

/// Time-aligned frontal six-lead frame in millivolts.
#[derive(Debug, Clone, PartialEq)]
pub struct SixLeadFrame {
    pub lead_i: Vec<f64>,
    pub lead_ii: Vec<f64>,
    pub lead_iii: Vec<f64>,
    pub avr: Vec<f64>,
    pub avl: Vec<f64>,
    pub avf: Vec<f64>,
    pub sample_rate_hz: f64,
}

impl SixLeadFrame {
    pub fn len(&self) -> usize {
        self.lead_i.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lead_i.is_empty()
    }

    pub fn lead(&self, name: &str) -> Option<&[f64]> {
        match name {
            "I" => Some(&self.lead_i),
            "II" => Some(&self.lead_ii),
            "III" => Some(&self.lead_iii),
            "aVR" => Some(&self.avr),
            "aVL" => Some(&self.avl),
            "aVF" => Some(&self.avf),
            _ => None,
        }
    }

    /// Checks the Einthoven identities this frame is built on. Returns the
    /// worst violation of (III - (II - I), I + III - II, aVR + aVL + aVF).
    pub fn identity_residuals(&self) -> (f64, f64, f64) {
        let mut worst = (0.0f64, 0.0f64, 0.0f64);
        for i in 0..self.len() {
            let d1 = (self.lead_iii[i] - (self.lead_ii[i] - self.lead_i[i])).abs();
            let d2 = (self.lead_i[i] + self.lead_iii[i] - self.lead_ii[i]).abs();
            let d3 = (self.avr[i] + self.avl[i] + self.avf[i]).abs();
            worst.0 = worst.0.max(d1);
            worst.1 = worst.1.max(d2);
            worst.2 = worst.2.max(d3);
        }
        worst
    }

    /// Restricts the frame to samples `[skip, skip + len)`.
    pub fn slice(&self, skip: usize, len: usize) -> Result<SixLeadFrame, LeadsError> {
        let end = skip + len;
        if end > self.len() {
            return Err(LeadsError::LengthMismatch(end, self.len()));
        }
        Ok(SixLeadFrame {
            lead_i: self.lead_i[skip..end].to_vec(),
            lead_ii: self.lead_ii[skip..end].to_vec(),
            lead_iii: self.lead_iii[skip..end].to_vec(),
            avr: self.avr[skip..end].to_vec(),
            avl: self.avl[skip..end].to_vec(),
            avf: self.avf[skip..end].to_vec(),
            sample_rate_hz: self.sample_rate_hz,
        })
    }
}

/// Derives the full frontal frame from Leads I and II.
pub fn derive_six(
    lead_i: &[f64],
    lead_ii: &[f64],
    sample_rate_hz: f64,
) -> Result<SixLeadFrame, LeadsError> {
    if lead_i.len() != lead_ii.len() {
        return Err(LeadsError::LengthMismatch(lead_i.len(), lead_ii.len()));
    }
    let n = lead_i.len();
    let mut lead_iii = Vec::with_capacity(n);
    let mut avr = Vec::with_capacity(n);
    let mut avl = Vec::with_capacity(n);
    let mut avf = Vec::with_capacity(n);
    for (&a, &b) in lead_i.iter().zip(lead_ii) {
        let c = b - a;
        lead_iii.push(c);
        avr.push(-(a + b) / 2.0);
        avl.push((a - c) / 2.0);
        avf.push((b + c) / 2.0);
    }
    Ok(SixLeadFrame {
        lead_i: lead_i.to_vec(),
        lead_ii: lead_ii.to_vec(),
        lead_iii,
        avr,
        avl,
        avf,
        sample_rate_hz,
    })
}

/// Sample Pearson correlation coefficient. Errors on constant inputs
/// instead of propagating NaN.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64, LeadsError> {
    if a.len() != b.len() {
        return Err(LeadsError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < 2 {
        return Err(LeadsError::TooShort {
            needed: 2,
            got: a.len(),
        });
    }
    let n = a.len() as f64;
    let mean_a = a.iter().sum::<f64>() / n;
    let mean_b = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        let dx = x - mean_a;
        let dy = y - mean_b;
        cov += dx * dy;
        var_a += dx * dx;
        var_b += dy * dy;
    }
    if var_a == 0.0 || var_b == 0.0 {
        return Err(LeadsError::UndefinedCorrelation);
    }
    Ok((cov / (var_a.sqrt() * var_b.sqrt())).clamp(-1.0, 1.0))
}

/// Mean of squared differences.
pub fn mse(a: &[f64], b: &[f64]) -> Result<f64, LeadsError> {
    if a.len() != b.len() {
        return Err(LeadsError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(LeadsError::TooShort { needed: 1, got: 0 });
    }
    let sum: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum();
    Ok(sum / a.len() as f64)
}

/// Ordinary least squares line `y = slope * x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearModel {
    pub slope: f64,
    pub intercept: f64,
}

pub fn linreg_fit(x: &[f64], y: &[f64]) -> Result<LinearModel, LeadsError> {
    if x.len() != y.len() {
        return Err(LeadsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(LeadsError::TooShort {
            needed: 2,
            got: x.len(),
        });
    }
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mean_x;
        sxx += dx * dx;
        sxy += dx * (yi - mean_y);
    }
    if sxx == 0.0 {
        return Err(LeadsError::ConstantRegressor);
    }
    let slope = sxy / sxx;
    Ok(LinearModel {
        slope,
        intercept: mean_y - slope * mean_x,
    })
}

pub fn linreg_predict(model: &LinearModel, x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|&v| model.slope * v + model.intercept)
        .collect()
}

/// Per-lead reconstruction quality against ground truth.
#[derive(Debug, Clone)]
pub struct LeadReport {
    /// `(lead, pearson, mse)`; `pearson` is None when either signal is
    /// constant and the correlation is undefined.
    pub per_lead: Vec<(String, Option<f64>, f64)>,
    /// Mean Pearson over the leads where it is defined.
    pub mean_pearson: f64,
    pub warnings: Vec<String>,
}

/// Scores a predicted frame against ground truth: per-lead Pearson and
/// MSE plus the mean Pearson. Constant leads are excluded from the mean
/// with a warning rather than poisoning it with NaN.
pub fn evaluate(predicted: &SixLeadFrame, truth: &SixLeadFrame) -> Result<LeadReport, LeadsError> {
    if predicted.len() != truth.len() {
        return Err(LeadsError::LengthMismatch(predicted.len(), truth.len()));
    }
    let mut per_lead = Vec::with_capacity(6);
    let mut warnings = Vec::new();
    let mut defined = Vec::new();
    for name in LEAD_ORDER {
        let p = predicted.lead(name).expect("known lead");
        let t = truth.lead(name).expect("known lead");
        let err = mse(p, t)?;
        let r = match pearson(p, t) {
            Ok(r) => {
                defined.push(r);
                Some(r)
            }
            Err(LeadsError::UndefinedCorrelation) => {
                warnings.push(format!(
                    "lead {name}: correlation undefined (constant signal), excluded from mean"
                ));
                None
            }
            Err(other) => return Err(other),
        };
        per_lead.push((name.to_string(), r, err));
    }
    let mean_pearson = if defined.is_empty() {
        f64::NAN
    } else {
        defined.iter().sum::<f64>() / defined.len() as f64
    };
    Ok(LeadReport {
        per_lead,
        mean_pearson,
        warnings,
    })
}
