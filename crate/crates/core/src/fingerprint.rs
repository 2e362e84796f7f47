//! Optimal fingerprinting, OLS variant: observations regressed on simulated
//! response patterns without an intercept. Errors in the fingerprints
//! themselves are ignored.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::regress::{check_level, coef_ci, ols_fit, DesignMatrix};
use crate::statcf::ChangeEstimate;

/// Relative floor on interval half-widths. Without it a noiseless fit has a
/// standard error made of rounding noise, and "contains 1" becomes a coin flip.
const RESOLUTION: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct FingerprintSet {
    pub fingerprints: Vec<(String, Vec<f64>)>,
    pub observation: Vec<f64>,
    /// Invertible n×n matrix applied to both sides before fitting.
    pub prewhitening: Option<DMatrix<f64>>,
    pub max_fingerprints: usize,
}

impl FingerprintSet {
    pub fn new(fingerprints: Vec<(String, Vec<f64>)>, observation: Vec<f64>) -> Self {
        Self {
            fingerprints,
            observation,
            prewhitening: None,
            max_fingerprints: 2,
        }
    }

    pub fn with_prewhitening(mut self, p: DMatrix<f64>) -> Self {
        self.prewhitening = Some(p);
        self
    }

    fn validate(&self) -> Result<()> {
        let n = self.observation.len();
        let k = self.fingerprints.len();
        if k == 0 || k > self.max_fingerprints {
            return Err(Error::InvalidArgument(format!(
                "{k} fingerprints given, between 1 and {} allowed",
                self.max_fingerprints
            )));
        }
        for (name, f) in &self.fingerprints {
            if f.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "fingerprint `{name}` has length {}, observations have {n}",
                    f.len()
                )));
            }
        }
        if let Some(p) = &self.prewhitening {
            if p.nrows() != n || p.ncols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "prewhitening matrix is {}x{}, expected {n}x{n}",
                    p.nrows(),
                    p.ncols()
                )));
            }
            if !p.clone().lu().is_invertible() {
                return Err(Error::InvalidArgument("prewhitening matrix is singular".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFactor {
    pub name: String,
    pub estimate: f64,
    pub ci: (f64, f64),
    /// The interval excludes 0.
    pub detected: bool,
    /// Detected and the interval contains 1.
    pub attributed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFactors {
    pub level: f64,
    pub factors: Vec<ScalingFactor>,
}

pub fn of_fit(set: &FingerprintSet, level: f64) -> Result<ScalingFactors> {
    check_level(level)?;
    set.validate()?;
    let whiten = |v: &[f64]| -> Vec<f64> {
        match &set.prewhitening {
            Some(p) => (p * DVector::from_column_slice(v)).iter().copied().collect(),
            None => v.to_vec(),
        }
    };
    let cols = set
        .fingerprints
        .iter()
        .map(|(n, f)| (n.clone(), whiten(f)))
        .collect();
    let y = whiten(&set.observation);
    let fit = ols_fit(&DesignMatrix::new(cols, false)?, &y)?;
    let factors = set
        .fingerprints
        .iter()
        .map(|(name, _)| {
            let b = fit.coefficient(name)?;
            let (lo, hi) = coef_ci(&fit, name, level)?;
            let floor = RESOLUTION * b.abs().max(1.0);
            let ci = (lo.min(b - floor), hi.max(b + floor));
            let detected = ci.0 > 0.0 || ci.1 < 0.0;
            Ok(ScalingFactor {
                name: name.clone(),
                estimate: b,
                ci,
                detected,
                attributed: detected && ci.0 <= 1.0 && 1.0 <= ci.1,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ScalingFactors { level, factors })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub fingerprint_detected: bool,
    pub fingerprint_attributed: bool,
    pub counterfactual_significant: bool,
    pub concordant: bool,
    pub text: String,
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

/// Side-by-side summary of a fingerprint fit and a counterfactual change.
/// Numbers are reported, not reconciled: the frameworks answer different
/// questions in different units.
pub fn of_compare_with_statcf(of: &ScalingFactors, cf: &ChangeEstimate) -> Comparison {
    let detected = of.factors.iter().any(|s| s.detected);
    let attributed = of.factors.iter().any(|s| s.attributed);
    let significant = cf.p_value < 1.0 - cf.level;
    let concordant = detected == significant;
    let mut text = String::new();
    text.push_str("Fingerprinting: two tests per scaling factor (detection H0: beta = 0; attribution: interval consistent with 1).\n");
    for s in &of.factors {
        text.push_str(&format!(
            "  {}: beta = {:.4} ({:.0}% CI {:.4} to {:.4}), detected: {}, attributed: {}\n",
            s.name,
            s.estimate,
            of.level * 100.0,
            s.ci.0,
            s.ci.1,
            yes_no(s.detected),
            yes_no(s.attributed)
        ));
    }
    text.push_str("Statistical counterfactual: one test (H0: delta = 0), in response units.\n");
    text.push_str(&format!(
        "  delta = {:.4} ({:.0}% CI {:.4} to {:.4}), p = {:.3e}, significant: {}\n",
        cf.delta,
        cf.level * 100.0,
        cf.ci.0,
        cf.ci.1,
        cf.p_value,
        yes_no(significant)
    ));
    text.push_str(if concordant {
        if detected {
            "Concordant: both frameworks detect a signal.\n"
        } else {
            "Concordant: neither framework detects a signal.\n"
        }
    } else if significant {
        "Discordant: the counterfactual change is significant but no fingerprint is detected.\n"
    } else {
        "Discordant: a fingerprint is detected but the counterfactual change is not significant.\n"
    });
    Comparison {
        fingerprint_detected: detected,
        fingerprint_attributed: attributed,
        counterfactual_significant: significant,
        concordant,
        text,
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}
