//! Statistical counterfactual model: regression of the response on forcing
//! and driver covariates, evaluated at scenarios that need not have occurred.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{climatological_mean, series_range, Dataset};
use crate::dist::{self, quantile_sorted};
use crate::error::{Error, Result};
use crate::extremes::{self, tail_p_value, GevFit};
use crate::regress::{self, check_level, DesignMatrix, FitResult, LeastSquares, INTERCEPT};
use crate::seeding::replicate_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ErrorFamily {
    #[default]
    Gaussian,
    Gev,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InferenceMethod {
    Analytic,
    Bootstrap,
}

/// One value per covariate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub assignment: BTreeMap<String, f64>,
}

impl Scenario {
    pub fn new(name: impl Into<String>, values: impl IntoIterator<Item = (String, f64)>) -> Self {
        Self {
            name: name.into(),
            assignment: values.into_iter().collect(),
        }
    }

    /// Checks that the assignment covers exactly `names`.
    pub fn check_covers(&self, names: &[&str]) -> Result<()> {
        let missing: Vec<&str> = names
            .iter()
            .copied()
            .filter(|n| !self.assignment.contains_key(*n))
            .collect();
        let extra: Vec<&str> = self
            .assignment
            .keys()
            .map(String::as_str)
            .filter(|k| !names.contains(k))
            .collect();
        if missing.is_empty() && extra.is_empty() {
            return Ok(());
        }
        let mut detail = Vec::new();
        if !missing.is_empty() {
            detail.push(format!("missing {}", missing.join(", ")));
        }
        if !extra.is_empty() {
            detail.push(format!("unknown {}", extra.join(", ")));
        }
        Err(Error::IncompleteScenario {
            scenario: self.name.clone(),
            detail: detail.join("; "),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChangeEstimate {
    pub delta: f64,
    pub ci: (f64, f64),
    pub p_value: f64,
    pub method: InferenceMethod,
    pub level: f64,
}

#[derive(Debug, Clone)]
pub enum ModelFit {
    Gaussian(FitResult),
    Gev(GevFit),
}

#[derive(Debug, Clone)]
pub struct CounterfactualModel {
    dataset: Dataset,
    include_intercept: bool,
    fit: ModelFit,
    solver: Option<LeastSquares>,
}

impl CounterfactualModel {
    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    pub fn include_intercept(&self) -> bool {
        self.include_intercept
    }

    pub fn error_family(&self) -> ErrorFamily {
        match self.fit {
            ModelFit::Gaussian(_) => ErrorFamily::Gaussian,
            ModelFit::Gev(_) => ErrorFamily::Gev,
        }
    }

    pub fn fit(&self) -> &ModelFit {
        &self.fit
    }

    pub fn gaussian(&self) -> Option<&FitResult> {
        match &self.fit {
            ModelFit::Gaussian(f) => Some(f),
            ModelFit::Gev(_) => None,
        }
    }

    pub fn gev(&self) -> Option<&GevFit> {
        match &self.fit {
            ModelFit::Gev(f) => Some(f),
            ModelFit::Gaussian(_) => None,
        }
    }

    pub fn covariate_names(&self) -> Vec<&str> {
        self.dataset.covariate_names()
    }

    /// Covariate coefficients, their covariance, and the reference dof
    /// (`None` for the asymptotic normal of the GEV likelihood).
    fn slopes(&self) -> (Vec<f64>, DMatrix<f64>, Option<usize>) {
        let names = self.covariate_names();
        match &self.fit {
            ModelFit::Gaussian(f) => {
                let idx: Vec<usize> = names.iter().map(|n| f.index(n).unwrap()).collect();
                let b = idx.iter().map(|&i| f.coefficients[i]).collect();
                let cov = f.coef_covariance.select_rows(&idx).select_columns(&idx);
                (b, cov, Some(f.dof))
            }
            ModelFit::Gev(g) => {
                let idx: Vec<usize> = names.iter().map(|n| g.index(n).unwrap()).collect();
                let b = idx.iter().map(|&i| g.location_coefficients[i]).collect();
                let cov = extremes::location_covariance(g)
                    .select_rows(&idx)
                    .select_columns(&idx);
                (b, cov, None)
            }
        }
    }

    fn intercept(&self) -> f64 {
        match &self.fit {
            ModelFit::Gaussian(f) => f.coefficient(INTERCEPT).unwrap_or(0.0),
            ModelFit::Gev(g) => g.location_coefficients[0],
        }
    }

    fn contrast(&self, s1: &Scenario, s2: &Scenario) -> Result<Vec<f64>> {
        let names = self.covariate_names();
        s1.check_covers(&names)?;
        s2.check_covers(&names)?;
        Ok(names
            .iter()
            .map(|n| s2.assignment[*n] - s1.assignment[*n])
            .collect())
    }
}

fn covariate_design(dataset: &Dataset, include_intercept: bool) -> Result<DesignMatrix> {
    DesignMatrix::new(
        dataset
            .covariates()
            .iter()
            .map(|(s, _)| (s.name().to_string(), s.dense()))
            .collect(),
        include_intercept,
    )
}

/// Gaussian fit; `include_intercept` selects estimated vs fixed-zero m_0.
pub fn fit_statcf(dataset: &Dataset, include_intercept: bool) -> Result<CounterfactualModel> {
    if dataset.covariates().is_empty() {
        return Err(Error::InsufficientData(
            "the counterfactual model needs at least one covariate".into(),
        ));
    }
    let solver = LeastSquares::new(covariate_design(dataset, include_intercept)?)?;
    let fit = solver.fit(&dataset.response().dense())?;
    Ok(CounterfactualModel {
        dataset: dataset.clone(),
        include_intercept,
        fit: ModelFit::Gaussian(fit),
        solver: Some(solver),
    })
}

/// GEV errors with the location linear in the covariates.
pub fn fit_statcf_gev(dataset: &Dataset) -> Result<CounterfactualModel> {
    if dataset.covariates().is_empty() {
        return Err(Error::InsufficientData(
            "the counterfactual model needs at least one covariate".into(),
        ));
    }
    let fit = extremes::gev_fit(dataset)?;
    Ok(CounterfactualModel {
        dataset: dataset.clone(),
        include_intercept: true,
        fit: ModelFit::Gev(fit),
        solver: None,
    })
}

/// Expected response (GEV: location) under a scenario.
pub fn scenario_mean(model: &CounterfactualModel, s: &Scenario) -> Result<f64> {
    let names = model.covariate_names();
    s.check_covers(&names)?;
    let (b, _, _) = model.slopes();
    Ok(model.intercept()
        + names
            .iter()
            .zip(&b)
            .map(|(n, bj)| bj * s.assignment[*n])
            .sum::<f64>())
}

/// Pre-industrial and present-day scenarios.
///
/// PI sets `anthropogenic` to its mean over `pi_window`; PD sets it to its
/// value in `pd_year`. Every other covariate takes its full-span mean.
pub fn make_paper_scenarios(
    dataset: &Dataset,
    anthropogenic: &str,
    pi_window: (i32, i32),
    pd_year: i32,
) -> Result<(Scenario, Scenario)> {
    let ant = dataset
        .covariate(anthropogenic)
        .ok_or_else(|| Error::UnknownCoefficient(anthropogenic.to_string()))?;
    let (first, last) = dataset.span();
    let ant_pi = climatological_mean(ant, pi_window.0, pi_window.1)?;
    let ant_pd = ant.get(pd_year).ok_or(Error::WindowOutOfRange {
        start: pd_year,
        end: pd_year,
        first,
        last,
    })?;
    let mut pi = BTreeMap::new();
    let mut pd = BTreeMap::new();
    for (s, _) in dataset.covariates() {
        if s.name() == anthropogenic {
            pi.insert(s.name().to_string(), ant_pi);
            pd.insert(s.name().to_string(), ant_pd);
        } else {
            let m = climatological_mean(s, first, last)?;
            pi.insert(s.name().to_string(), m);
            pd.insert(s.name().to_string(), m);
        }
    }
    Ok((
        Scenario {
            name: "PI".into(),
            assignment: pi,
        },
        Scenario {
            name: "PD".into(),
            assignment: pd,
        },
    ))
}

fn interval(estimate: f64, se: f64, dof: Option<usize>, level: f64) -> Result<(f64, f64)> {
    match dof {
        Some(d) => regress::t_interval(estimate, se, d, level),
        None => {
            check_level(level)?;
            let z = dist::normal_quantile_upper((1.0 + level) / 2.0);
            Ok((estimate - z * se, estimate + z * se))
        }
    }
}

fn p_value(estimate: f64, se: f64, dof: Option<usize>) -> f64 {
    match dof {
        Some(d) => regress::t_statistic(estimate, se, 0.0, d).1,
        None if se == 0.0 => {
            if estimate == 0.0 {
                1.0
            } else {
                0.0
            }
        }
        None => dist::normal_two_sided_p(estimate / se),
    }
}

pub(crate) fn interval_and_p(
    estimate: f64,
    se: f64,
    dof: Option<usize>,
    level: f64,
) -> Result<((f64, f64), f64)> {
    Ok((interval(estimate, se, dof, level)?, p_value(estimate, se, dof)))
}

/// `m(s2) − m(s1)` with an analytic interval from `cᵀ Cov(β̂) c`.
pub fn delta(
    model: &CounterfactualModel,
    s1: &Scenario,
    s2: &Scenario,
    level: f64,
) -> Result<ChangeEstimate> {
    check_level(level)?;
    let c = model.contrast(s1, s2)?;
    let (b, cov, dof) = model.slopes();
    let d: f64 = b.iter().zip(&c).map(|(bj, cj)| bj * cj).sum();
    let mut var = 0.0;
    for i in 0..c.len() {
        for j in 0..c.len() {
            var += c[i] * cov[(i, j)] * c[j];
        }
    }
    let se = var.max(0.0).sqrt();
    Ok(ChangeEstimate {
        delta: d,
        ci: interval(d, se, dof, level)?,
        p_value: p_value(d, se, dof),
        method: InferenceMethod::Analytic,
        level,
    })
}

/// Which covariates to decompose into forcing- and driver-specific changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorSpec {
    /// Covariate whose coefficient rescales the component changes.
    pub split_covariate: String,
    /// (label, auxiliary series) pairs whose PD-minus-PI change is rescaled.
    pub components: Vec<(String, String)>,
    /// (label, covariate) pairs whose max-minus-min range is rescaled.
    pub ranges: Vec<(String, String)>,
}

/// Coefficient-rescaled changes. Each carries the interval of its
/// coefficient multiplied by the same factor and the coefficient's p-value.
pub fn factor_deltas(
    model: &CounterfactualModel,
    spec: &FactorSpec,
    pi_window: (i32, i32),
    pd_year: i32,
    level: f64,
) -> Result<Vec<(String, ChangeEstimate)>> {
    check_level(level)?;
    let ds = model.dataset();
    let (first, last) = ds.span();
    let mut out = Vec::new();
    let scaled = |covariate: &str, factor: f64| -> Result<ChangeEstimate> {
        let names = model.covariate_names();
        let j = names
            .iter()
            .position(|n| *n == covariate)
            .ok_or_else(|| Error::UnknownCoefficient(covariate.to_string()))?;
        let (b, cov, dof) = model.slopes();
        let se = cov[(j, j)].max(0.0).sqrt();
        let (lo, hi) = interval(b[j], se, dof, level)?;
        let (lo, hi) = if factor >= 0.0 {
            (lo * factor, hi * factor)
        } else {
            (hi * factor, lo * factor)
        };
        Ok(ChangeEstimate {
            delta: b[j] * factor,
            ci: (lo, hi),
            p_value: p_value(b[j], se, dof),
            method: InferenceMethod::Analytic,
            level,
        })
    };
    for (label, aux) in &spec.components {
        let s = ds
            .auxiliary()
            .iter()
            .find(|s| s.name() == aux)
            .ok_or_else(|| Error::MissingAuxiliarySeries(aux.clone()))?;
        let pi = climatological_mean(s, pi_window.0, pi_window.1)?;
        let pd = s.get(pd_year).ok_or(Error::WindowOutOfRange {
            start: pd_year,
            end: pd_year,
            first,
            last,
        })?;
        out.push((label.clone(), scaled(&spec.split_covariate, pd - pi)?));
    }
    for (label, cov) in &spec.ranges {
        let s = ds
            .covariate(cov)
            .ok_or_else(|| Error::UnknownCoefficient(cov.clone()))?;
        let (lo, hi) = series_range(s)?;
        out.push((label.clone(), scaled(cov, hi - lo)?));
    }
    Ok(out)
}

/// Parametric residual bootstrap of `m(s2) − m(s1)`.
///
/// Replicate `b` draws `y* = m̂(t) + σ̂ ε` from its own seeded stream and
/// refits through the cached factorization. The interval is the percentile
/// interval; the p-value is twice the smaller tail mass at zero.
pub fn bootstrap_delta(
    model: &CounterfactualModel,
    s1: &Scenario,
    s2: &Scenario,
    replicates: usize,
    seed: u64,
    level: f64,
) -> Result<ChangeEstimate> {
    check_level(level)?;
    if replicates < 200 {
        return Err(Error::TooFewReplicates {
            got: replicates,
            min: 200,
        });
    }
    let (ModelFit::Gaussian(fit), Some(solver)) = (&model.fit, &model.solver) else {
        return Err(Error::InvalidArgument(
            "bootstrap_delta requires the Gaussian error family".into(),
        ));
    };
    let c = model.contrast(s1, s2)?;
    let names = model.covariate_names();
    let idx: Vec<usize> = names.iter().map(|n| fit.index(n).unwrap()).collect();
    let point: f64 = idx.iter().zip(&c).map(|(&i, cj)| fit.coefficients[i] * cj).sum();
    let sigma = fit.residual_sd;
    let mut draws: Vec<f64> = (0..replicates as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = replicate_rng(seed, b);
            let ystar: Vec<f64> = fit
                .fitted
                .iter()
                .map(|m| {
                    let e: f64 = StandardNormal.sample(&mut rng);
                    m + sigma * e
                })
                .collect();
            let beta = solver.coefficients(&ystar)?;
            Ok(idx.iter().zip(&c).map(|(&i, cj)| beta[i] * cj).sum())
        })
        .collect::<Result<_>>()?;
    let p = tail_p_value(&draws);
    draws.sort_by(f64::total_cmp);
    let a = (1.0 - level) / 2.0;
    Ok(ChangeEstimate {
        delta: point,
        ci: (quantile_sorted(&draws, a), quantile_sorted(&draws, 1.0 - a)),
        p_value: p,
        method: InferenceMethod::Bootstrap,
        level,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{CovariateRole, TimeSeries};
    use crate::regress::t_test_zero;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dataset(y: &[f64], covs: &[(&str, Vec<f64>)]) -> Dataset {
        Dataset::new(
            TimeSeries::from_values("y", "degC", 1900, y),
            covs.iter()
                .map(|(n, v)| (TimeSeries::from_values(*n, "", 1900, v), CovariateRole::Forced))
                .collect(),
            vec![],
        )
        .unwrap()
    }

    fn noisy(seed: u64, n: usize) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a: Vec<f64> = (0..n).map(|i| i as f64 / n as f64 + rng.random::<f64>() * 0.1).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        let y: Vec<f64> = (0..n)
            .map(|i| 0.2 + 0.8 * a[i] - 0.3 * b[i] + 0.1 * (rng.random::<f64>() - 0.5))
            .collect();
        dataset(&y, &[("a", a), ("b", b)])
    }

    fn scen(name: &str, a: f64, b: f64) -> Scenario {
        Scenario::new(name, [("a".to_string(), a), ("b".to_string(), b)])
    }

    #[test]
    fn response_equal_to_covariate() {
        let a: Vec<f64> = (0..12).map(|i| (i as f64).sin()).collect();
        let b: Vec<f64> = (0..12).map(|i| (i as f64 * 0.7).cos()).collect();
        let m = fit_statcf(&dataset(&a, &[("a", a.clone()), ("b", b)]), true).unwrap();
        let f = m.gaussian().unwrap();
        assert!((f.coefficient("a").unwrap() - 1.0).abs() < 1e-12);
        assert!(f.coefficient("b").unwrap().abs() < 1e-12);
        assert!(f.residual_sd < 1e-12);
    }

    #[test]
    fn exact_synthetic_recovery() {
        let a: Vec<f64> = (0..20).map(|i| i as f64 * 0.3).collect();
        let b: Vec<f64> = (0..20).map(|i| ((i * i) % 7) as f64).collect();
        let y: Vec<f64> = (0..20).map(|i| 5.0 + 2.0 * a[i] + 3.0 * b[i]).collect();
        let m = fit_statcf(&dataset(&y, &[("a", a), ("b", b)]), true).unwrap();
        let f = m.gaussian().unwrap();
        assert!((f.coefficient(INTERCEPT).unwrap() - 5.0).abs() < 1e-12);
        assert!((f.coefficient("a").unwrap() - 2.0).abs() < 1e-12);
        assert!((f.coefficient("b").unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn scenario_means() {
        let m = fit_statcf(&noisy(1, 40), true).unwrap();
        let f = m.gaussian().unwrap();
        let zero = scenario_mean(&m, &scen("z", 0.0, 0.0)).unwrap();
        assert!((zero - f.coefficient(INTERCEPT).unwrap()).abs() < 1e-15);
        let lo = scenario_mean(&m, &scen("l", 0.3, 0.1)).unwrap();
        let hi = scenario_mean(&m, &scen("h", 0.8, 0.1)).unwrap();
        assert!((hi - lo - 0.5 * f.coefficient("a").unwrap()).abs() < 1e-14);
        let partial = Scenario::new("p", [("a".to_string(), 1.0)]);
        let e = scenario_mean(&m, &partial).unwrap_err();
        assert!(matches!(e, Error::IncompleteScenario { .. }));
        let mut extra = scen("x", 0.0, 0.0);
        extra.assignment.insert("c".into(), 1.0);
        assert!(scenario_mean(&m, &extra).is_err());
    }

    #[test]
    fn paper_scenarios_constant_covariates() {
        let ds = dataset(&[1.0, 2.0, 3.0, 5.0], &[("a", vec![2.0; 4]), ("b", vec![1.0, 2.0, 3.0, 4.0])]);
        let (pi, pd) = make_paper_scenarios(&ds, "a", (1900, 1901), 1903).unwrap();
        assert_eq!(pi.assignment, pd.assignment);
        assert_eq!(pi.assignment["b"], 2.5);
        let (pi, pd) = make_paper_scenarios(&ds, "b", (1900, 1902), 1901).unwrap();
        assert_eq!(pi.assignment["b"], 2.0);
        assert_eq!(pd.assignment["b"], 2.0);
        assert!(make_paper_scenarios(&ds, "b", (1890, 1902), 1901).is_err());
        assert!(make_paper_scenarios(&ds, "b", (1900, 1902), 2001).is_err());
    }

    #[test]
    fn identical_scenarios_give_zero() {
        let m = fit_statcf(&noisy(2, 40), true).unwrap();
        let s = scen("s", 0.4, 0.2);
        let d = delta(&m, &s, &s, 0.95).unwrap();
        assert_eq!(d.delta, 0.0);
        assert_eq!(d.p_value, 1.0);
        assert_eq!(d.ci, (0.0, 0.0));
        let b = bootstrap_delta(&m, &s, &s, 200, 1, 0.95).unwrap();
        assert_eq!((b.delta, b.ci, b.p_value), (0.0, (0.0, 0.0), 1.0));
        assert!(matches!(
            bootstrap_delta(&m, &s, &s, 199, 1, 0.95),
            Err(Error::TooFewReplicates { .. })
        ));
    }

    #[test]
    fn single_covariate_contrast_matches_t_test() {
        let m = fit_statcf(&noisy(3, 50), true).unwrap();
        let d = delta(&m, &scen("1", 0.1, 0.0), &scen("2", 0.9, 0.0), 0.95).unwrap();
        let t = t_test_zero(m.gaussian().unwrap(), "a").unwrap();
        assert!((d.p_value - t.p_value).abs() < 1e-10);
        let (lo, hi) = regress::coef_ci(m.gaussian().unwrap(), "a", 0.95).unwrap();
        assert!((d.ci.0 - 0.8 * lo).abs() < 1e-12 && (d.ci.1 - 0.8 * hi).abs() < 1e-12);
    }

    #[test]
    fn factor_deltas_rescale() {
        let n = 30;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a: Vec<f64> = (0..n).map(|i| i as f64 / 10.0 + 0.2 * rng.random::<f64>()).collect();
        let flat = vec![1.5; n];
        let y: Vec<f64> = a.iter().map(|v| v + 0.05 * rng.random::<f64>()).collect();
        let comp: Vec<f64> = (0..n).map(|i| 0.5 * i as f64).collect();
        let ds = Dataset::new(
            TimeSeries::from_values("y", "", 1900, &y),
            vec![
                (TimeSeries::from_values("a", "", 1900, &a), CovariateRole::Forced),
                (TimeSeries::from_values("k", "", 1900, &comp.iter().map(|c| (c * 7.0) % 3.0).collect::<Vec<_>>()), CovariateRole::Driver),
            ],
            vec![TimeSeries::from_values("g", "", 1900, &comp), TimeSeries::from_values("f", "", 1900, &flat)],
        )
        .unwrap();
        let m = fit_statcf(&ds, true).unwrap();
        let spec = FactorSpec {
            split_covariate: "a".into(),
            components: vec![("G".into(), "g".into()), ("F".into(), "f".into())],
            ranges: vec![("K".into(), "k".into())],
        };
        let out = factor_deltas(&m, &spec, (1900, 1909), 1929, 0.95).unwrap();
        let ba = m.gaussian().unwrap().coefficient("a").unwrap();
        // g: PD 14.5, PI mean 2.25
        assert!((out[0].1.delta - ba * 12.25).abs() < 1e-12);
        assert_eq!(out[1].1.delta, 0.0);
        let (lo, hi) = series_range(ds.covariate("k").unwrap()).unwrap();
        let bk = m.gaussian().unwrap().coefficient("k").unwrap();
        assert!((out[2].1.delta - bk * (hi - lo)).abs() < 1e-12);
        let pa = t_test_zero(m.gaussian().unwrap(), "a").unwrap().p_value;
        assert_eq!(out[0].1.p_value, pa);
        for (_, e) in &out {
            assert!(e.ci.0 <= e.delta && e.delta <= e.ci.1);
        }
        let bad = FactorSpec {
            components: vec![("X".into(), "nope".into())],
            ..spec
        };
        assert!(matches!(
            factor_deltas(&m, &bad, (1900, 1909), 1929, 0.95),
            Err(Error::MissingAuxiliarySeries(_))
        ));
    }

    #[test]
    fn bootstrap_is_reproducible() {
        let m = fit_statcf(&noisy(4, 60), true).unwrap();
        let (s1, s2) = (scen("1", 0.0, 0.0), scen("2", 1.0, 0.5));
        let a = bootstrap_delta(&m, &s1, &s2, 300, 99, 0.9).unwrap();
        let b = bootstrap_delta(&m, &s1, &s2, 300, 99, 0.9).unwrap();
        assert_eq!(a, b);
        let an = delta(&m, &s1, &s2, 0.9).unwrap();
        assert_eq!(a.delta, an.delta);
        assert!(a.ci.0 < a.delta && a.delta < a.ci.1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn delta_is_additive_and_antisymmetric(seed in any::<u64>(), v in prop::array::uniform6(-3.0f64..3.0)) {
            let m = fit_statcf(&noisy(seed, 30), true).unwrap();
            let (s1, s2, s3) = (scen("1", v[0], v[1]), scen("2", v[2], v[3]), scen("3", v[4], v[5]));
            let d12 = delta(&m, &s1, &s2, 0.95).unwrap().delta;
            let d23 = delta(&m, &s2, &s3, 0.95).unwrap().delta;
            let d13 = delta(&m, &s1, &s3, 0.95).unwrap().delta;
            let d21 = delta(&m, &s2, &s1, 0.95).unwrap().delta;
            prop_assert!((d13 - (d12 + d23)).abs() <= 1e-12 * (1.0 + d13.abs()));
            prop_assert_eq!(d12, -d21);
        }

        #[test]
        fn intercept_cancels(seed in any::<u64>(), v in prop::array::uniform4(-3.0f64..3.0)) {
            let m = fit_statcf(&noisy(seed, 30), true).unwrap();
            let (s1, s2) = (scen("1", v[0], v[1]), scen("2", v[2], v[3]));
            let d = delta(&m, &s1, &s2, 0.95).unwrap().delta;
            let via_means = scenario_mean(&m, &s2).unwrap() - scenario_mean(&m, &s1).unwrap();
            prop_assert!((d - via_means).abs() <= 1e-12 * (1.0 + d.abs()));
        }
    }
}
