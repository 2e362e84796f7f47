//! Report structure and writers. Output is byte-identical for identical
//! inputs: no timestamps, ordered containers, fixed float formatting.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::InferenceConfig;
use crate::data::Dataset;
use crate::error::Result;
use crate::fingerprint::{Comparison, ScalingFactors};
use crate::granger::{GcResult, InformationCriterion};
use crate::pipeline::fitted_mean;
use crate::statcf::{CounterfactualModel, ErrorFamily, InferenceMethod, Scenario};
use crate::synth::ExperimentReport;
use crate::extremes::RiskRatio;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantityRow {
    pub name: String,
    pub best_estimate: f64,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
    pub p_value: Option<f64>,
    pub units: String,
    pub method: Option<InferenceMethod>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefRow {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitDiagnostics {
    pub family: ErrorFamily,
    pub n: usize,
    pub span: (i32, i32),
    pub dropped_years: Vec<i32>,
    pub include_intercept: bool,
    pub r_squared: Option<f64>,
    pub residual_sd: Option<f64>,
    pub dof: Option<usize>,
    pub condition_number: Option<f64>,
    pub scale: Option<f64>,
    pub shape: Option<f64>,
    pub log_likelihood: Option<f64>,
    pub iterations: Option<usize>,
    pub coefficients: Vec<CoefRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrangerRow {
    pub target: String,
    pub cause: Vec<String>,
    pub conditioning: Vec<String>,
    pub order: usize,
    pub selected_by: Option<InformationCriterion>,
    pub result: GcResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FingerprintRow {
    pub name: String,
    pub scaling: ScalingFactors,
    pub comparison: Option<Comparison>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskRatioRow {
    pub name: String,
    pub factual: String,
    pub counterfactual: String,
    pub threshold: f64,
    pub result: RiskRatio,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DataFile {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub tool_version: String,
    pub config_sha256: Option<String>,
    pub data_files: Vec<DataFile>,
    pub seed: Option<u64>,
    pub level: f64,
    pub method: InferenceMethod,
    pub replicates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub table: Vec<QuantityRow>,
    pub fit: Option<FitDiagnostics>,
    pub scenarios: Vec<Scenario>,
    pub granger: Vec<GrangerRow>,
    pub fingerprint: Vec<FingerprintRow>,
    pub risk_ratios: Vec<RiskRatioRow>,
    pub synth: Option<ExperimentReport>,
    pub warnings: Vec<String>,
    pub provenance: Provenance,
}

impl Report {
    pub fn new(command: &str, inference: &InferenceConfig) -> Self {
        Self {
            command: command.to_string(),
            table: Vec::new(),
            fit: None,
            scenarios: Vec::new(),
            granger: Vec::new(),
            fingerprint: Vec::new(),
            risk_ratios: Vec::new(),
            synth: None,
            warnings: Vec::new(),
            provenance: Provenance {
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                config_sha256: None,
                data_files: Vec::new(),
                seed: None,
                level: inference.level,
                method: inference.method,
                replicates: inference.replicates,
            },
        }
    }

    pub fn row(&self, name: &str) -> Option<&QuantityRow> {
        self.table.iter().find(|r| r.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(std::io::Error::from)?;
        s.push('\n');
        Ok(s)
    }

    /// Plain-text summary for the terminal.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        if let Some(f) = &self.fit {
            let _ = write!(s, "fit: {:?} family, n = {}, span {}-{}", f.family, f.n, f.span.0, f.span.1);
            if let Some(r2) = f.r_squared {
                let _ = write!(s, ", r2 = {r2:.4}");
            }
            if let Some(sd) = f.residual_sd {
                let _ = write!(s, ", residual sd = {sd:.4}");
            }
            s.push('\n');
        }
        if !self.table.is_empty() {
            let _ = writeln!(s, "{:<22} {:>12} {:>12} {:>12} {:>10}  units", "quantity", "estimate", "ci_lo", "ci_hi", "p");
            for r in &self.table {
                let _ = writeln!(
                    s,
                    "{:<22} {:>12.4} {:>12} {:>12} {:>10}  {}",
                    r.name,
                    r.best_estimate,
                    opt(r.ci_lo, 4),
                    opt(r.ci_hi, 4),
                    r.p_value.map(|p| format!("{p:.2e}")).unwrap_or_else(|| "-".into()),
                    r.units
                );
            }
        }
        for g in &self.granger {
            let _ = writeln!(
                s,
                "granger {} -> {} | [{}], p = {}: F = {:.4}, p = {:.3e}, {:?}, TE = {:.4e} nats",
                g.cause.join("+"),
                g.target,
                g.conditioning.join(", "),
                g.order,
                g.result.f_statistic,
                g.result.p_value,
                g.result.decision,
                g.result.gaussian_te
            );
        }
        for f in &self.fingerprint {
            for sf in &f.scaling.factors {
                let _ = writeln!(
                    s,
                    "fingerprint {} / {}: beta = {:.4} [{:.4}, {:.4}], detected {}, attributed {}",
                    f.name, sf.name, sf.estimate, sf.ci.0, sf.ci.1, sf.detected, sf.attributed
                );
            }
            if let Some(c) = &f.comparison {
                s.push_str(&c.text);
            }
        }
        for r in &self.risk_ratios {
            let _ = write!(s, "risk ratio {}: RR = {:.4} (p1 = {:.3e}, p0 = {:.3e})", r.name, r.result.value, r.result.p_factual, r.result.p_counterfactual);
            if let (Some(ci), Some(p)) = (r.result.ci, r.result.p_value_rr1) {
                let _ = write!(s, ", CI [{:.4}, {:.4}], p(RR=1) = {p:.3e}", ci.0, ci.1);
            }
            s.push('\n');
        }
        if let Some(x) = &self.synth {
            let _ = writeln!(
                s,
                "synth: {} rejection rate {:.4} +/- {:.4} ({} / {})",
                x.description, x.rejection_rate, x.mc_standard_error, x.rejections, x.replicates
            );
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        s
    }
}

fn opt(v: Option<f64>, digits: usize) -> String {
    v.map(|x| format!("{x:.digits$}")).unwrap_or_else(|| "-".into())
}

/// Fixed-width scientific notation with 15 significant digits.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.14e}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_else(|| "NA".into())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Writes `report.json` and flat CSV tables into `dir`; returns the paths.
pub fn write_outputs(report: &Report, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |name: &str, body: String| -> Result<()> {
        let p = dir.join(name);
        fs::write(&p, body)?;
        written.push(p);
        Ok(())
    };
    put("report.json", report.to_json()?)?;
    if !report.table.is_empty() {
        let mut s = String::from("name,best_estimate,ci_lo,ci_hi,p_value,units\n");
        for r in &report.table {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                csv_field(&r.name),
                fmt_num(r.best_estimate),
                fmt_opt(r.ci_lo),
                fmt_opt(r.ci_hi),
                fmt_opt(r.p_value),
                csv_field(&r.units)
            );
        }
        put("table.csv", s)?;
    }
    if let Some(f) = &report.fit {
        let mut s = String::from("name,estimate,std_error,ci_lo,ci_hi,p_value\n");
        for c in &f.coefficients {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                csv_field(&c.name),
                fmt_num(c.estimate),
                fmt_num(c.std_error),
                fmt_num(c.ci_lo),
                fmt_num(c.ci_hi),
                fmt_num(c.p_value)
            );
        }
        put("coefficients.csv", s)?;
    }
    if !report.granger.is_empty() {
        let mut s = String::from(
            "target,cause,conditioning,order,f_statistic,p_value,dof_num,dof_den,rss_unrestricted,rss_restricted,gaussian_te,decision\n",
        );
        for g in &report.granger {
            let r = &g.result;
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                csv_field(&g.target),
                csv_field(&g.cause.join(";")),
                csv_field(&g.conditioning.join(";")),
                g.order,
                fmt_num(r.f_statistic),
                fmt_num(r.p_value),
                fmt_num(r.dof.0),
                fmt_num(r.dof.1),
                fmt_num(r.rss_unrestricted),
                fmt_num(r.rss_restricted),
                fmt_num(r.gaussian_te),
                match r.decision {
                    crate::granger::Decision::Reject => "reject",
                    crate::granger::Decision::FailToReject => "fail_to_reject",
                }
            );
        }
        put("granger.csv", s)?;
    }
    if !report.fingerprint.is_empty() {
        let mut s = String::from("test,fingerprint,estimate,ci_lo,ci_hi,detected,attributed\n");
        for f in &report.fingerprint {
            for sf in &f.scaling.factors {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{}",
                    csv_field(&f.name),
                    csv_field(&sf.name),
                    fmt_num(sf.estimate),
                    fmt_num(sf.ci.0),
                    fmt_num(sf.ci.1),
                    sf.detected,
                    sf.attributed
                );
            }
        }
        put("fingerprint.csv", s)?;
    }
    if !report.risk_ratios.is_empty() {
        let mut s = String::from("name,threshold,rr,p_factual,p_counterfactual,ci_lo,ci_hi,p_value_rr1\n");
        for r in &report.risk_ratios {
            let x = &r.result;
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                csv_field(&r.name),
                fmt_num(r.threshold),
                fmt_num(x.value),
                fmt_num(x.p_factual),
                fmt_num(x.p_counterfactual),
                fmt_opt(x.ci.map(|c| c.0)),
                fmt_opt(x.ci.map(|c| c.1)),
                fmt_opt(x.p_value_rr1)
            );
        }
        put("risk_ratios.csv", s)?;
    }
    if let Some(x) = &report.synth {
        let s = format!(
            "description,replicates,rejections,rejection_rate,mc_standard_error,mean_f,alpha\n{},{},{},{},{},{},{}\n",
            csv_field(&x.description),
            x.replicates,
            x.rejections,
            fmt_num(x.rejection_rate),
            fmt_num(x.mc_standard_error),
            fmt_num(x.mean_f),
            fmt_num(x.alpha)
        );
        put("synth.csv", s)?;
    }
    Ok(written)
}

fn year_table(times: &[i32], header: &[&str], cols: &[Vec<f64>]) -> String {
    let mut s = String::from("year");
    for h in header {
        s.push(',');
        s.push_str(&csv_field(h));
    }
    s.push('\n');
    for (i, t) in times.iter().enumerate() {
        let _ = write!(s, "{t}");
        for c in cols {
            let _ = write!(s, ",{}", fmt_num(c[i]));
        }
        s.push('\n');
    }
    s
}

/// Time-series data behind the figures, one CSV per panel:
/// `response.csv`, `forcing.csv` (the `forcing` series), one file per
/// remaining covariate, and `fitted.csv` (observed, fitted, residual).
pub fn emit_plot_data(
    dataset: &Dataset,
    model: &CounterfactualModel,
    forcing: &[String],
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let times = dataset.times();
    let mut written = Vec::new();
    let mut put = |name: String, body: String| -> Result<()> {
        let p = dir.join(name);
        fs::write(&p, body)?;
        written.push(p);
        Ok(())
    };
    let resp = dataset.response();
    let y = resp.dense();
    put("response.csv".into(), year_table(times, &[resp.name()], std::slice::from_ref(&y)))?;

    let forcing_series: Vec<_> = forcing.iter().filter_map(|n| dataset.series(n)).collect();
    if !forcing_series.is_empty() {
        let names: Vec<&str> = forcing_series.iter().map(|s| s.name()).collect();
        let cols: Vec<Vec<f64>> = forcing_series.iter().map(|s| s.dense()).collect();
        put("forcing.csv".into(), year_table(times, &names, &cols))?;
    }
    for (s, _) in dataset.covariates() {
        if forcing.iter().any(|f| f == s.name()) {
            continue;
        }
        put(format!("{}.csv", s.name()), year_table(times, &[s.name()], &[s.dense()]))?;
    }
    let fitted = fitted_mean(model);
    let resid: Vec<f64> = y.iter().zip(&fitted).map(|(o, f)| o - f).collect();
    put(
        "fitted.csv".into(),
        year_table(times, &["observed", "fitted", "residual"], &[y, fitted, resid]),
    )?;
    Ok(written)
}
