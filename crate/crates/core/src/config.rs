//! Declarative analysis configuration (TOML).
//!
//! File paths are resolved relative to the directory holding the config.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::CovariateRole;
use crate::error::{Error, Result};
use crate::granger::InformationCriterion;
use crate::statcf::{ErrorFamily, InferenceMethod};
use crate::synth::{Edge, GraphKind, Node};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub response: Option<ResponseConfig>,
    #[serde(default)]
    pub covariates: Vec<CovariateConfig>,
    #[serde(default)]
    pub auxiliary: Vec<SeriesConfig>,
    #[serde(default)]
    pub error_family: ErrorFamily,
    #[serde(default = "yes")]
    pub include_intercept: bool,
    #[serde(default)]
    pub scenarios: ScenarioConfig,
    #[serde(default)]
    pub tests: TestsConfig,
    #[serde(default)]
    pub inference: InferenceConfig,
    pub synth: Option<SynthConfig>,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    Anomalies([i32; 2]),
    BaselineShift(i32),
    SumWith(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResponseConfig {
    #[serde(default = "response_name")]
    pub name: String,
    pub path: String,
    #[serde(default)]
    pub unit: String,
    pub anomaly_baseline: Option<[i32; 2]>,
    #[serde(default)]
    pub transforms: Vec<Transform>,
}

fn response_name() -> String {
    "response".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovariateConfig {
    pub name: String,
    /// Short label used in report row names; defaults to `name`.
    pub label: Option<String>,
    pub path: String,
    pub role: CovariateRole,
    #[serde(default)]
    pub unit: String,
    #[serde(default)]
    pub transforms: Vec<Transform>,
}

impl CovariateConfig {
    pub fn label(&self) -> &str {
        self.label.as_deref().unwrap_or(&self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesConfig {
    pub name: String,
    pub path: String,
    #[serde(default)]
    pub unit: String,
    #[serde(default)]
    pub transforms: Vec<Transform>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub pi_pd: Option<PiPdScenarios>,
    #[serde(default)]
    pub custom: Vec<CustomScenario>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiPdScenarios {
    pub anthropogenic: String,
    #[serde(default = "pi_window")]
    pub pi_window: [i32; 2],
    #[serde(default = "pd_year")]
    pub pd_year: i32,
}

fn pi_window() -> [i32; 2] {
    [1900, 1929]
}

fn pd_year() -> i32 {
    2015
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomScenario {
    pub name: String,
    pub values: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct TestsConfig {
    #[serde(default)]
    pub deltas: Vec<DeltaTest>,
    pub factor_deltas: Option<FactorDeltaTest>,
    #[serde(default)]
    pub granger: Vec<GrangerTest>,
    #[serde(default)]
    pub fingerprint: Vec<FingerprintTest>,
    #[serde(default)]
    pub risk_ratios: Vec<RiskRatioTest>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeltaTest {
    pub label: String,
    pub from: String,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorDeltaTest {
    pub split: String,
    #[serde(default)]
    pub components: Vec<ComponentSpec>,
    #[serde(default)]
    pub ranges: Vec<RangeSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    pub label: String,
    pub series: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSpec {
    pub label: String,
    pub covariate: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrangerTest {
    pub target: String,
    pub cause: Vec<String>,
    #[serde(default)]
    pub conditioning: Vec<String>,
    pub order: Option<usize>,
    pub select: Option<OrderSelection>,
    #[serde(default = "alpha")]
    pub alpha: f64,
    #[serde(default = "yes")]
    pub include_intercept: bool,
}

fn alpha() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderSelection {
    pub p_max: usize,
    pub criterion: InformationCriterion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FingerprintTest {
    pub name: String,
    /// Dataset series used as observations; defaults to the response.
    pub observation: Option<String>,
    pub fingerprints: Vec<FingerprintSource>,
    /// Label of a `deltas` entry to compare against.
    pub compare_with: Option<String>,
}

/// Exactly one of `path`, `series` or `fitted` selects the vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FingerprintSource {
    pub name: String,
    pub path: Option<String>,
    pub series: Option<String>,
    /// Use the fitted counterfactual-model mean.
    #[serde(default)]
    pub fitted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiskRatioTest {
    pub name: String,
    pub factual: String,
    pub counterfactual: String,
    pub threshold: f64,
    /// Bootstrap replicates for the RR = 1 test; omitted means point estimate only.
    pub replicates: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InferenceConfig {
    #[serde(default = "analytic")]
    pub method: InferenceMethod,
    #[serde(default = "replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "level")]
    pub level: f64,
}

fn analytic() -> InferenceMethod {
    InferenceMethod::Analytic
}

fn replicates() -> usize {
    2000
}

fn level() -> f64 {
    0.95
}

impl Default for InferenceConfig {
    fn default() -> Self {
        Self {
            method: analytic(),
            replicates: replicates(),
            seed: 0,
            level: level(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    pub graph: GraphKind,
    #[serde(default)]
    pub direct: f64,
    #[serde(default = "synth_length")]
    pub length: usize,
    #[serde(default = "synth_replicates")]
    pub replicates: usize,
    #[serde(default = "alpha")]
    pub alpha: f64,
    /// Falls back to the inference seed.
    pub seed: Option<u64>,
    pub test: SynthTest,
    #[serde(default)]
    pub nodes: Vec<Node>,
    #[serde(default)]
    pub edges: Vec<Edge>,
    /// Also write one simulated dataset as CSVs.
    #[serde(default)]
    pub export: bool,
}

fn synth_length() -> usize {
    500
}

fn synth_replicates() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthTest {
    pub target: String,
    pub cause: Vec<String>,
    #[serde(default)]
    pub conditioning: Vec<String>,
    #[serde(default = "one")]
    pub order: usize,
}

fn one() -> usize {
    1
}

impl AnalysisConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: AnalysisConfig =
            toml::from_str(text).map_err(|e| Error::ConfigInvalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and validates a config, returning it with its base directory.
    pub fn load(path: impl AsRef<Path>) -> Result<(Self, PathBuf)> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let cfg = Self::parse(&text)?;
        let base = path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        Ok((cfg, base))
    }

    pub fn validate(&self) -> Result<()> {
        let lvl = self.inference.level;
        if !(lvl > 0.0 && lvl < 1.0) {
            return Err(Error::InvalidArgument(format!("level must lie in (0, 1), got {lvl}"))
                .at("inference.level"));
        }
        let mut names: Vec<&str> = self.scenarios.custom.iter().map(|s| s.name.as_str()).collect();
        if self.scenarios.pi_pd.is_some() {
            names.extend(["PI", "PD"]);
        }
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(Error::ConfigInvalid(format!("scenario name `{n}` is not unique"))
                    .at("scenarios"));
            }
        }
        let mut series: Vec<&str> = self.response.iter().map(|r| r.name.as_str()).collect();
        series.extend(self.covariates.iter().map(|c| c.name.as_str()));
        series.extend(self.auxiliary.iter().map(|c| c.name.as_str()));
        for (i, n) in series.iter().enumerate() {
            if series[..i].contains(n) {
                return Err(Error::ConfigInvalid(format!("series name `{n}` is not unique")));
            }
        }
        for (i, f) in self.tests.fingerprint.iter().enumerate() {
            for (j, s) in f.fingerprints.iter().enumerate() {
                let k = s.path.is_some() as u8 + s.series.is_some() as u8 + s.fitted as u8;
                if k != 1 {
                    return Err(Error::ConfigInvalid(
                        "set exactly one of path, series or fitted".into(),
                    )
                    .at(format!("tests.fingerprint[{i}].fingerprints[{j}]")));
                }
            }
        }
        for (i, g) in self.tests.granger.iter().enumerate() {
            if g.order.is_some() == g.select.is_some() {
                return Err(Error::ConfigInvalid("set exactly one of order or select".into())
                    .at(format!("tests.granger[{i}]")));
            }
        }
        Ok(())
    }

    /// Every data file the config references, in order of first mention.
    pub fn data_paths(&self) -> Vec<&str> {
        fn with_sums<'a>(path: &'a str, ts: &'a [Transform], out: &mut Vec<&'a str>) {
            out.push(path);
            for t in ts {
                if let Transform::SumWith(p) = t {
                    out.push(p);
                }
            }
        }
        let mut paths: Vec<&str> = Vec::new();
        if let Some(r) = &self.response {
            with_sums(&r.path, &r.transforms, &mut paths);
        }
        for c in &self.covariates {
            with_sums(&c.path, &c.transforms, &mut paths);
        }
        for c in &self.auxiliary {
            with_sums(&c.path, &c.transforms, &mut paths);
        }
        for f in &self.tests.fingerprint {
            paths.extend(f.fingerprints.iter().filter_map(|s| s.path.as_deref()));
        }
        let mut dedup: Vec<&str> = Vec::new();
        for p in paths {
            if !dedup.contains(&p) {
                dedup.push(p);
            }
        }
        dedup
    }
}
