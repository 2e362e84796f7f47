//! Config-driven analysis runs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::config::{AnalysisConfig, FingerprintSource, Transform};
use crate::data::{anomalies, baseline_shift, CovariateRole, Dataset, TimeSeries};
use crate::error::{Error, Result};
use crate::extremes::{gev_fit, risk_ratio, test_rr_one};
use crate::fingerprint::{of_compare_with_statcf, of_fit, FingerprintSet};
use crate::granger::{gc_test, select_order, VarSpec};
use crate::io::read_csv;
use crate::report::{
    CoefRow, DataFile, FingerprintRow, FitDiagnostics, GrangerRow, Provenance, QuantityRow,
    Report, RiskRatioRow,
};
use crate::statcf::{
    bootstrap_delta, delta, factor_deltas, fit_statcf, fit_statcf_gev, make_paper_scenarios,
    ChangeEstimate, CounterfactualModel, ErrorFamily, FactorSpec, InferenceMethod, ModelFit,
    Scenario,
};
use crate::synth::{run_size_power, simulate, CausalGraphSpec, GraphKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Fit,
    Attribute,
    Granger,
    Fingerprint,
    Simulate,
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Fit => "fit",
            Command::Attribute => "attribute",
            Command::Granger => "granger",
            Command::Fingerprint => "fingerprint",
            Command::Simulate => "simulate",
            Command::Report => "report",
        }
    }
}

/// Command-line overrides of `[inference]`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub level: Option<f64>,
}

/// Everything a run produced, ready for writing.
#[derive(Debug)]
pub struct RunOutput {
    pub report: Report,
    pub dataset: Option<Dataset>,
    pub model: Option<CounterfactualModel>,
    /// Series grouped as forcing components in plot output.
    pub forcing: Vec<String>,
    pub simulated: Option<Dataset>,
}

/// Reads files once each, hashing them for provenance.
struct Loader {
    base: PathBuf,
    cache: BTreeMap<String, (TimeSeries, String)>,
}

impl Loader {
    fn new(base: &Path) -> Self {
        Self {
            base: base.to_path_buf(),
            cache: BTreeMap::new(),
        }
    }

    fn load(&mut self, rel: &str) -> Result<TimeSeries> {
        if let Some((s, _)) = self.cache.get(rel) {
            return Ok(s.clone());
        }
        let bytes = std::fs::read(self.base.join(rel)).map_err(|e| Error::from(e).at(rel))?;
        let stem = Path::new(rel)
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let s = read_csv(bytes.as_slice(), stem).map_err(|e| e.at(rel))?;
        self.cache.insert(rel.to_string(), (s.clone(), sha256_hex(&bytes)));
        Ok(s)
    }

    fn files(&self, order: &[&str]) -> Vec<DataFile> {
        order
            .iter()
            .filter_map(|p| {
                self.cache.get(*p).map(|(_, h)| DataFile {
                    path: p.to_string(),
                    sha256: h.clone(),
                })
            })
            .collect()
    }

    fn series(&mut self, path: &str, transforms: &[Transform], name: &str, unit: &str) -> Result<TimeSeries> {
        let mut s = self.load(path)?;
        for t in transforms {
            s = match t {
                Transform::Anomalies([a, b]) => anomalies(&s, *a, *b)?,
                Transform::BaselineShift(y) => baseline_shift(&s, *y)?,
                Transform::SumWith(p) => s.add(&self.load(p)?),
            };
        }
        Ok(s.with_name(name).with_unit(unit))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn build_dataset(cfg: &AnalysisConfig, loader: &mut Loader) -> Result<Dataset> {
    let r = cfg
        .response
        .as_ref()
        .ok_or_else(|| Error::ConfigInvalid("a [response] table is required".into()))?;
    let mut response = loader
        .series(&r.path, &r.transforms, &r.name, &r.unit)
        .map_err(|e| e.at(format!("response ({})", r.path)))?;
    if let Some([a, b]) = r.anomaly_baseline {
        response = anomalies(&response, a, b).map_err(|e| e.at("response.anomaly_baseline"))?;
    }
    let mut covariates = Vec::new();
    for (i, c) in cfg.covariates.iter().enumerate() {
        let s = loader
            .series(&c.path, &c.transforms, &c.name, &c.unit)
            .map_err(|e| e.at(format!("covariates[{i}] ({})", c.name)))?;
        covariates.push((s, c.role));
    }
    let mut auxiliary = Vec::new();
    for (i, c) in cfg.auxiliary.iter().enumerate() {
        let s = loader
            .series(&c.path, &c.transforms, &c.name, &c.unit)
            .map_err(|e| e.at(format!("auxiliary[{i}] ({})", c.name)))?;
        auxiliary.push(s);
    }
    Dataset::new(response, covariates, auxiliary)
}

fn scenarios(cfg: &AnalysisConfig, ds: &Dataset) -> Result<Vec<Scenario>> {
    let mut out = Vec::new();
    if let Some(p) = &cfg.scenarios.pi_pd {
        let (pi, pd) = make_paper_scenarios(
            ds,
            &p.anthropogenic,
            (p.pi_window[0], p.pi_window[1]),
            p.pd_year,
        )
        .map_err(|e| e.at("scenarios.pi_pd"))?;
        out.push(pi);
        out.push(pd);
    }
    let names = ds.covariate_names();
    for (i, c) in cfg.scenarios.custom.iter().enumerate() {
        let s = Scenario::new(c.name.clone(), c.values.clone());
        s.check_covers(&names)
            .map_err(|e| e.at(format!("scenarios.custom[{i}]")))?;
        out.push(s);
    }
    Ok(out)
}

fn find<'a>(scenarios: &'a [Scenario], name: &str, at: &str) -> Result<&'a Scenario> {
    scenarios
        .iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::ConfigInvalid(format!("unknown scenario `{name}`")).at(at))
}

fn change_row(name: String, units: &str, c: &ChangeEstimate) -> QuantityRow {
    QuantityRow {
        name,
        best_estimate: c.delta,
        ci_lo: Some(c.ci.0),
        ci_hi: Some(c.ci.1),
        p_value: Some(c.p_value),
        units: units.to_string(),
        method: Some(c.method),
    }
}

fn per_unit(response: &str, covariate: &str) -> String {
    match (response.is_empty(), covariate.is_empty()) {
        (true, true) => String::new(),
        (false, true) => response.to_string(),
        (true, false) => format!("per {covariate}"),
        (false, false) => format!("{response} per {covariate}"),
    }
}

fn coefficient_rows(model: &CounterfactualModel, level: f64) -> Result<Vec<CoefRow>> {
    let (names, est, var, dof): (Vec<String>, Vec<f64>, Vec<f64>, Option<usize>) = match model.fit() {
        ModelFit::Gaussian(f) => (
            f.names.clone(),
            f.coefficients.clone(),
            (0..f.names.len()).map(|i| f.coef_covariance[(i, i)]).collect(),
            Some(f.dof),
        ),
        ModelFit::Gev(g) => (
            g.names.clone(),
            g.location_coefficients.clone(),
            (0..g.names.len()).map(|i| g.coef_covariance[(i, i)]).collect(),
            None,
        ),
    };
    names
        .into_iter()
        .zip(est)
        .zip(var)
        .map(|((name, b), v)| {
            let se = v.max(0.0).sqrt();
            let (ci, p) = crate::statcf::interval_and_p(b, se, dof, level)?;
            Ok(CoefRow {
                name,
                estimate: b,
                std_error: se,
                ci_lo: ci.0,
                ci_hi: ci.1,
                p_value: p,
            })
        })
        .collect()
}

fn diagnostics(model: &CounterfactualModel, level: f64) -> Result<FitDiagnostics> {
    let ds = model.dataset();
    let mut d = FitDiagnostics {
        family: model.error_family(),
        n: ds.len(),
        span: ds.span(),
        dropped_years: ds.dropped().to_vec(),
        include_intercept: model.include_intercept(),
        r_squared: None,
        residual_sd: None,
        dof: None,
        condition_number: None,
        scale: None,
        shape: None,
        log_likelihood: None,
        iterations: None,
        coefficients: coefficient_rows(model, level)?,
    };
    match model.fit() {
        ModelFit::Gaussian(f) => {
            d.r_squared = Some(f.r_squared);
            d.residual_sd = Some(f.residual_sd);
            d.dof = Some(f.dof);
            d.condition_number = Some(f.condition_number);
        }
        ModelFit::Gev(g) => {
            d.scale = Some(g.scale);
            d.shape = Some(g.shape);
            d.log_likelihood = Some(g.log_likelihood);
            d.iterations = Some(g.iterations);
        }
    }
    Ok(d)
}

fn fingerprint_vector(
    src: &FingerprintSource,
    ds: &Dataset,
    model: Option<&CounterfactualModel>,
    loader: &mut Loader,
) -> Result<Vec<f64>> {
    if src.fitted {
        let m = model.ok_or_else(|| Error::ConfigInvalid("no fitted model available".into()))?;
        return Ok(fitted_mean(m));
    }
    let s = match (&src.path, &src.series) {
        (Some(p), _) => loader.load(p)?,
        (_, Some(n)) => ds
            .series(n)
            .cloned()
            .ok_or_else(|| Error::ConfigInvalid(format!("unknown series `{n}`")))?,
        _ => unreachable!("validated"),
    };
    ds.times()
        .iter()
        .map(|&t| {
            s.get(t).ok_or_else(|| {
                Error::DimensionMismatch(format!("fingerprint `{}` has no value for {t}", src.name))
            })
        })
        .collect()
}

/// Fitted response mean per year: `m̂(t)` or the GEV location.
pub fn fitted_mean(model: &CounterfactualModel) -> Vec<f64> {
    match model.fit() {
        ModelFit::Gaussian(f) => f.fitted.clone(),
        ModelFit::Gev(g) => {
            let ds = model.dataset();
            (0..ds.len())
                .map(|i| {
                    g.location_coefficients[0]
                        + ds
                            .covariates()
                            .iter()
                            .enumerate()
                            .map(|(j, (s, _))| g.location_coefficients[j + 1] * s.dense()[i])
                            .sum::<f64>()
                })
                .collect()
        }
    }
}

struct SynthRun {
    graph: CausalGraphSpec,
    test: VarSpec,
    alpha: f64,
    replicates: usize,
    seed: u64,
    export: bool,
}

fn synth_spec(cfg: &AnalysisConfig) -> Option<SynthRun> {
    let s = cfg.synth.as_ref()?;
    let seed = s.seed.unwrap_or(cfg.inference.seed);
    let graph = match s.graph {
        GraphKind::MediatorPlusDirect => CausalGraphSpec::mediator(s.direct, s.length, seed),
        GraphKind::Confounder => CausalGraphSpec::confounder(s.direct, s.length, seed),
        GraphKind::ConfounderPlusIndependent => {
            CausalGraphSpec::confounder_plus_independent(s.direct, s.length, seed)
        }
        GraphKind::Custom => CausalGraphSpec::custom(s.nodes.clone(), s.edges.clone(), s.length, seed),
    };
    let var = VarSpec {
        order: s.test.order,
        target: s.test.target.clone(),
        candidate_cause: s.test.cause.clone(),
        conditioning: s.test.conditioning.clone(),
        include_intercept: true,
    };
    Some(SynthRun {
        graph,
        test: var,
        alpha: s.alpha,
        replicates: s.replicates,
        seed,
        export: s.export,
    })
}

/// Runs `command` against a loaded config.
pub fn run(cfg: &AnalysisConfig, base: &Path, command: Command, over: Overrides) -> Result<RunOutput> {
    let mut inference = cfg.inference.clone();
    if let Some(s) = over.seed {
        inference.seed = s;
    }
    if let Some(l) = over.level {
        if !(l > 0.0 && l < 1.0) {
            return Err(Error::InvalidArgument(format!("level must lie in (0, 1), got {l}")));
        }
        inference.level = l;
    }
    let level = inference.level;
    let mut loader = Loader::new(base);
    let mut report = Report::new(command.name(), &inference);
    let mut out = RunOutput {
        report: Report::new(command.name(), &inference),
        dataset: None,
        model: None,
        forcing: Vec::new(),
        simulated: None,
    };

    if command == Command::Simulate {
        let sr = synth_spec(cfg)
            .ok_or_else(|| Error::ConfigInvalid("simulate needs a [synth] table".into()))?;
        let master = over.seed.unwrap_or(sr.seed);
        report.synth = Some(
            run_size_power(&sr.graph, &sr.test, sr.alpha, sr.replicates, master)
                .map_err(|e| e.at("synth"))?,
        );
        if sr.export {
            out.simulated = Some(simulate(&sr.graph.with_seed(master)).map_err(|e| e.at("synth"))?);
        }
        report.provenance = provenance(cfg, &loader, Some(master), &inference);
        out.report = report;
        return Ok(out);
    }

    let ds = build_dataset(cfg, &mut loader)?;
    let needs_model = matches!(
        command,
        Command::Fit | Command::Attribute | Command::Fingerprint | Command::Report
    );
    let model = if needs_model {
        let m = match cfg.error_family {
            ErrorFamily::Gaussian => fit_statcf(&ds, cfg.include_intercept)?,
            ErrorFamily::Gev => {
                report.warnings.push(format!(
                    "GEV error family applied to `{}`: the GEV is the limit law for block maxima, and annual means are not maxima",
                    ds.response().name()
                ));
                if !cfg.include_intercept {
                    report
                        .warnings
                        .push("include_intercept = false is ignored by the GEV family".into());
                }
                fit_statcf_gev(&ds)?
            }
        };
        Some(m)
    } else {
        None
    };

    let resp_unit = ds.response().unit().to_string();
    let labels: BTreeMap<&str, &str> = cfg
        .covariates
        .iter()
        .map(|c| (c.name.as_str(), c.label()))
        .collect();
    let all_scenarios = scenarios(cfg, &ds)?;

    if let Some(model) = &model {
        let diag = diagnostics(model, level)?;
        for c in &diag.coefficients {
            if c.name == crate::regress::INTERCEPT {
                continue;
            }
            let unit = ds.covariate(&c.name).map(|s| s.unit()).unwrap_or("");
            report.table.push(QuantityRow {
                name: format!("beta_{}", labels.get(c.name.as_str()).unwrap_or(&c.name.as_str())),
                best_estimate: c.estimate,
                ci_lo: Some(c.ci_lo),
                ci_hi: Some(c.ci_hi),
                p_value: Some(c.p_value),
                units: per_unit(&resp_unit, unit),
                method: Some(InferenceMethod::Analytic),
            });
        }
        report.fit = Some(diag);
        report.scenarios = all_scenarios.clone();
    }

    let mut named_deltas: BTreeMap<String, ChangeEstimate> = BTreeMap::new();
    if matches!(command, Command::Attribute | Command::Report | Command::Fingerprint) {
        let model = model.as_ref().expect("fitted");
        for (i, d) in cfg.tests.deltas.iter().enumerate() {
            let at = format!("tests.deltas[{i}]");
            let s1 = find(&all_scenarios, &d.from, &at)?;
            let s2 = find(&all_scenarios, &d.to, &at)?;
            let est = match (inference.method, model.error_family()) {
                (InferenceMethod::Bootstrap, ErrorFamily::Gaussian) => bootstrap_delta(
                    model,
                    s1,
                    s2,
                    inference.replicates,
                    inference.seed,
                    level,
                ),
                (InferenceMethod::Bootstrap, ErrorFamily::Gev) => {
                    report.warnings.push(format!(
                        "{at}: bootstrap inference is Gaussian-only; analytic interval reported"
                    ));
                    delta(model, s1, s2, level)
                }
                _ => delta(model, s1, s2, level),
            }
            .map_err(|e| e.at(at.clone()))?;
            named_deltas.insert(d.label.clone(), est.clone());
            if command != Command::Fingerprint {
                report.table.push(change_row(format!("delta_{}", d.label), &resp_unit, &est));
            }
        }
    }

    if matches!(command, Command::Attribute | Command::Report) {
        let model = model.as_ref().expect("fitted");
        if let Some(f) = &cfg.tests.factor_deltas {
            let p = cfg.scenarios.pi_pd.as_ref().ok_or_else(|| {
                Error::ConfigInvalid("factor_deltas needs [scenarios.pi_pd] for its windows".into())
                    .at("tests.factor_deltas")
            })?;
            let spec = FactorSpec {
                split_covariate: f.split.clone(),
                components: f.components.iter().map(|c| (c.label.clone(), c.series.clone())).collect(),
                ranges: f.ranges.iter().map(|c| (c.label.clone(), c.covariate.clone())).collect(),
            };
            let rows = factor_deltas(model, &spec, (p.pi_window[0], p.pi_window[1]), p.pd_year, level)
                .map_err(|e| e.at("tests.factor_deltas"))?;
            for (label, est) in rows {
                report.table.push(change_row(format!("delta_{label}"), &resp_unit, &est));
            }
            out.forcing.extend(f.components.iter().map(|c| c.series.clone()));
            out.forcing.push(f.split.clone());
        }

        let mut gev_cache = None;
        for (i, r) in cfg.tests.risk_ratios.iter().enumerate() {
            let at = format!("tests.risk_ratios[{i}]");
            let fact = find(&all_scenarios, &r.factual, &at)?;
            let cf = find(&all_scenarios, &r.counterfactual, &at)?;
            let result = match r.replicates {
                Some(b) => test_rr_one(&ds, fact, cf, r.threshold, b, inference.seed, level),
                None => {
                    if gev_cache.is_none() {
                        gev_cache = Some(match model.gev() {
                            Some(g) => g.clone(),
                            None => gev_fit(&ds).map_err(|e| e.at(at.clone()))?,
                        });
                    }
                    risk_ratio(gev_cache.as_ref().unwrap(), fact, cf, r.threshold)
                }
            }
            .map_err(|e| e.at(at.clone()))?;
            report.risk_ratios.push(RiskRatioRow {
                name: r.name.clone(),
                factual: r.factual.clone(),
                counterfactual: r.counterfactual.clone(),
                threshold: r.threshold,
                result,
            });
        }
        if !cfg.tests.risk_ratios.is_empty() && model.error_family() == ErrorFamily::Gaussian {
            report.warnings.push(
                "risk ratios use a GEV fit of the response; annual means are not block maxima".into(),
            );
        }
    }

    if let Some(model) = &model {
        let (units, value) = match model.fit() {
            ModelFit::Gaussian(f) => (resp_unit.clone(), f.residual_sd),
            ModelFit::Gev(g) => (format!("{resp_unit} (GEV scale)").trim().to_string(), g.scale),
        };
        report.table.push(QuantityRow {
            name: "internal_variability".into(),
            best_estimate: value,
            ci_lo: None,
            ci_hi: None,
            p_value: None,
            units,
            method: None,
        });
    }

    if matches!(command, Command::Granger | Command::Report) {
        for (i, g) in cfg.tests.granger.iter().enumerate() {
            let at = format!("tests.granger[{i}]");
            let mut spec = VarSpec {
                order: g.order.unwrap_or(1),
                target: g.target.clone(),
                candidate_cause: g.cause.clone(),
                conditioning: g.conditioning.clone(),
                include_intercept: g.include_intercept,
            };
            let mut selected_by = None;
            if let Some(sel) = &g.select {
                spec.order = select_order(&ds, &spec, sel.p_max, sel.criterion).map_err(|e| e.at(at.clone()))?;
                selected_by = Some(sel.criterion);
            }
            let result = gc_test(&ds, &spec, g.alpha).map_err(|e| e.at(at.clone()))?;
            report.granger.push(GrangerRow {
                target: spec.target,
                cause: spec.candidate_cause,
                conditioning: spec.conditioning,
                order: spec.order,
                selected_by,
                result,
            });
        }
    }

    if matches!(command, Command::Fingerprint | Command::Report) {
        for (i, f) in cfg.tests.fingerprint.iter().enumerate() {
            let at = format!("tests.fingerprint[{i}]");
            let mut run = || -> Result<FingerprintRow> {
                let obs = match &f.observation {
                    Some(n) => ds
                        .series(n)
                        .ok_or_else(|| Error::ConfigInvalid(format!("unknown series `{n}`")))?
                        .dense(),
                    None => ds.response().dense(),
                };
                let fps = f
                    .fingerprints
                    .iter()
                    .map(|s| Ok((s.name.clone(), fingerprint_vector(s, &ds, model.as_ref(), &mut loader)?)))
                    .collect::<Result<Vec<_>>>()?;
                let factors = of_fit(&FingerprintSet::new(fps, obs), level)?;
                let comparison = match &f.compare_with {
                    Some(label) => Some(of_compare_with_statcf(
                        &factors,
                        named_deltas.get(label).ok_or_else(|| {
                            Error::ConfigInvalid(format!("no deltas entry labelled `{label}`"))
                        })?,
                    )),
                    None => None,
                };
                Ok(FingerprintRow {
                    name: f.name.clone(),
                    scaling: factors,
                    comparison,
                })
            };
            report.fingerprint.push(run().map_err(|e| e.at(at))?);
        }
    }

    if command == Command::Report {
        if let Some(sr) = synth_spec(cfg) {
            let master = over.seed.unwrap_or(sr.seed);
            report.synth = Some(
                run_size_power(&sr.graph, &sr.test, sr.alpha, sr.replicates, master)
                    .map_err(|e| e.at("synth"))?,
            );
            if sr.export {
                out.simulated = Some(simulate(&sr.graph.with_seed(master)).map_err(|e| e.at("synth"))?);
            }
        }
    }

    if out.forcing.is_empty() {
        out.forcing = ds
            .auxiliary()
            .iter()
            .map(|s| s.name().to_string())
            .chain(
                ds.covariates()
                    .iter()
                    .filter(|(_, r)| *r == CovariateRole::Forced)
                    .map(|(s, _)| s.name().to_string()),
            )
            .collect();
    }
    report.provenance = provenance(cfg, &loader, Some(inference.seed), &inference);
    out.report = report;
    out.dataset = Some(ds);
    out.model = model;
    Ok(out)
}

fn provenance(
    cfg: &AnalysisConfig,
    loader: &Loader,
    seed: Option<u64>,
    inference: &crate::config::InferenceConfig,
) -> Provenance {
    Provenance {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config_sha256: None,
        data_files: loader.files(&cfg.data_paths()),
        seed,
        level: inference.level,
        method: inference.method,
        replicates: inference.replicates,
    }
}

/// Loads `path`, runs `command` and records the config hash.
pub fn run_file(path: &Path, command: Command, over: Overrides) -> Result<RunOutput> {
    let wrap = |e: Error| e.at(path.display().to_string());
    let bytes = std::fs::read(path).map_err(|e| wrap(e.into()))?;
    let (cfg, base) = AnalysisConfig::load(path).map_err(wrap)?;
    let mut out = run(&cfg, &base, command, over).map_err(wrap)?;
    out.report.provenance.config_sha256 = Some(sha256_hex(&bytes));
    Ok(out)
}
