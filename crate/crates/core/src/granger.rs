//! Granger-causality tests on lagged least-squares designs.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::regress::{f_test_nested, ols_fit, rss_gap, DesignMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarSpec {
    pub order: usize,
    pub target: String,
    pub candidate_cause: Vec<String>,
    #[serde(default)]
    pub conditioning: Vec<String>,
    #[serde(default = "default_true")]
    pub include_intercept: bool,
}

fn default_true() -> bool {
    true
}

impl VarSpec {
    pub fn new(target: impl Into<String>, cause: impl Into<String>, order: usize) -> Self {
        Self {
            order,
            target: target.into(),
            candidate_cause: vec![cause.into()],
            conditioning: Vec::new(),
            include_intercept: true,
        }
    }

    pub fn conditioned_on(mut self, z: impl Into<String>) -> Self {
        self.conditioning.push(z.into());
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.order < 1 {
            return Err(Error::InvalidArgument("VAR order must be at least 1".into()));
        }
        if self.candidate_cause.is_empty() {
            return Err(Error::InvalidArgument("no candidate cause given".into()));
        }
        if self.candidate_cause.contains(&self.target) || self.conditioning.contains(&self.target)
        {
            return Err(Error::InvalidArgument(format!(
                "target `{}` cannot also be a cause or conditioning series",
                self.target
            )));
        }
        if let Some(z) = self.conditioning.iter().find(|z| self.candidate_cause.contains(z)) {
            return Err(Error::InvalidArgument(format!(
                "`{z}` is both a candidate cause and a conditioning series"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Reject,
    FailToReject,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GcResult {
    pub f_statistic: f64,
    pub p_value: f64,
    pub rss_unrestricted: f64,
    pub rss_restricted: f64,
    pub dof: (f64, f64),
    pub alpha: f64,
    pub decision: Decision,
    /// Gaussian transfer entropy from the candidate causes to the target, nats.
    pub gaussian_te: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InformationCriterion {
    Aic,
    Bic,
}

fn lag_name(series: &str, lag: usize) -> String {
    format!("{series}.l{lag}")
}

fn series_values(dataset: &Dataset, name: &str) -> Result<Vec<f64>> {
    dataset
        .series(name)
        .map(|s| s.dense())
        .ok_or_else(|| Error::InvalidArgument(format!("series `{name}` not in dataset")))
}

/// Unrestricted design with lags 1..=`order` over rows `first_row..T`.
fn lagged(
    dataset: &Dataset,
    spec: &VarSpec,
    order: usize,
    first_row: usize,
) -> Result<(DesignMatrix, Vec<String>, Vec<f64>)> {
    let t = dataset.len();
    let others = spec.candidate_cause.len() + spec.conditioning.len();
    let rows = t.saturating_sub(first_row);
    let needed = first_row + others + 5;
    if rows < needed {
        return Err(Error::InsufficientData(format!(
            "{rows} usable rows after lagging, need at least {needed}"
        )));
    }
    let target = series_values(dataset, &spec.target)?;
    let mut cols = Vec::new();
    let mut cause_cols = Vec::new();
    let groups = std::iter::once((&spec.target, false))
        .chain(spec.candidate_cause.iter().map(|c| (c, true)))
        .chain(spec.conditioning.iter().map(|z| (z, false)));
    for (name, is_cause) in groups {
        let v = series_values(dataset, name)?;
        for lag in 1..=order {
            let col_name = lag_name(name, lag);
            if is_cause {
                cause_cols.push(col_name.clone());
            }
            cols.push((col_name, (first_row..t).map(|r| v[r - lag]).collect()));
        }
    }
    let y = target[first_row..].to_vec();
    Ok((DesignMatrix::new(cols, spec.include_intercept)?, cause_cols, y))
}

/// Designs for the unrestricted and restricted models and the shared response.
///
/// Rows are t = p+1..T. The restricted design is the unrestricted one with
/// every candidate-cause lag removed.
pub fn build_lagged_design(
    dataset: &Dataset,
    spec: &VarSpec,
) -> Result<(DesignMatrix, DesignMatrix, Vec<f64>)> {
    spec.validate()?;
    let (full, cause_cols, y) = lagged(dataset, spec, spec.order, spec.order)?;
    let drop: Vec<&str> = cause_cols.iter().map(String::as_str).collect();
    let restricted = full.without(&drop)?;
    Ok((full, restricted, y))
}

/// `½ ln(RSS_r / RSS_u)` in nats.
pub fn gaussian_transfer_entropy(rss_restricted: f64, rss_unrestricted: f64) -> Result<f64> {
    if !(rss_restricted > 0.0
        && rss_unrestricted > 0.0
        && rss_restricted >= rss_unrestricted
        && rss_restricted.is_finite())
    {
        return Err(Error::InvalidRss {
            restricted: rss_restricted,
            unrestricted: rss_unrestricted,
        });
    }
    Ok(0.5 * (rss_restricted / rss_unrestricted).ln())
}

pub fn gc_test(dataset: &Dataset, spec: &VarSpec, alpha: f64) -> Result<GcResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let (full, restricted, y) = build_lagged_design(dataset, spec)?;
    let fu = ols_fit(&full, &y)?;
    let fr = ols_fit(&restricted, &y)?;
    let test = f_test_nested(&fu, &fr)?;
    let gap = rss_gap(&fu, &fr);
    // ln(RSS_r/RSS_u) written as ln1p(gap/RSS_u): exact zero when nothing is gained
    let te = if gap == 0.0 {
        0.0
    } else if fu.rss == 0.0 {
        f64::INFINITY
    } else {
        0.5 * (gap / fu.rss).ln_1p()
    };
    Ok(GcResult {
        f_statistic: test.statistic,
        p_value: test.p_value,
        rss_unrestricted: fu.rss,
        rss_restricted: fu.rss + gap,
        dof: (
            test.dof_numerator.unwrap_or(0.0),
            test.dof_denominator.unwrap_or(0.0),
        ),
        alpha,
        decision: if test.p_value < alpha {
            Decision::Reject
        } else {
            Decision::FailToReject
        },
        gaussian_te: te,
    })
}

/// Order in 1..=`p_max` minimizing the criterion on the unrestricted model.
///
/// Every candidate is fit on rows `p_max+1..T` so criteria are comparable.
/// Ties go to the smaller order.
pub fn select_order(
    dataset: &Dataset,
    spec: &VarSpec,
    p_max: usize,
    criterion: InformationCriterion,
) -> Result<usize> {
    if p_max < 1 {
        return Err(Error::InvalidArgument("p_max must be at least 1".into()));
    }
    let mut probe = spec.clone();
    probe.order = p_max;
    probe.validate()?;
    let mut best = (1, f64::INFINITY);
    for p in 1..=p_max {
        let (design, _, y) = lagged(dataset, spec, p, p_max)?;
        let fit = ols_fit(&design, &y)?;
        let n = y.len() as f64;
        let k = (y.len() - fit.dof) as f64;
        let penalty = match criterion {
            InformationCriterion::Aic => 2.0 * k,
            InformationCriterion::Bic => k * n.ln(),
        };
        let score = n * (fit.rss / n).ln() + penalty;
        if score < best.1 {
            best = (p, score);
        }
    }
    Ok(best.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{CovariateRole, TimeSeries};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn ds(series: &[(&str, Vec<f64>)]) -> Dataset {
        let (y, rest) = series.split_first().unwrap();
        Dataset::new(
            TimeSeries::from_values(y.0, "", 0, &y.1),
            rest.iter()
                .map(|(n, v)| (TimeSeries::from_values(*n, "", 0, v), CovariateRole::Driver))
                .collect(),
            vec![],
        )
        .unwrap()
    }

    fn driven(n: usize, b: f64, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut y = vec![0.0; n];
        let x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        for t in 1..n {
            let e: f64 = StandardNormal.sample(&mut rng);
            y[t] = 0.5 * y[t - 1] + b * x[t - 1] + e;
        }
        ds(&[("y", y), ("x", x)])
    }

    #[test]
    fn design_shapes() {
        let d = ds(&[("y", (0..10).map(|i| i as f64).collect()), ("x", (0..10).map(|i| (i * i) as f64).collect())]);
        let spec = VarSpec::new("y", "x", 2);
        let (u, r, y) = build_lagged_design(&d, &spec).unwrap();
        assert_eq!(y.len(), 8);
        assert_eq!(u.rows(), 8);
        assert_eq!(u.cols(), 5);
        assert_eq!(r.cols(), 3);
        assert_eq!(u.column("x.l2").unwrap()[0], 0.0);
        assert_eq!(u.column("y.l1").unwrap()[0], 1.0);
        for name in r.column_names() {
            assert_eq!(u.column(name), r.column(name));
        }
        assert!(matches!(
            build_lagged_design(&d, &VarSpec::new("y", "x", 3)),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn constant_cause_is_collinear() {
        let mut d = driven(50, 0.0, 1);
        d = Dataset::new(
            d.response().clone(),
            vec![(TimeSeries::from_values("x", "", 0, &[2.0; 50]), CovariateRole::Driver)],
            vec![],
        )
        .unwrap();
        let e = gc_test(&d, &VarSpec::new("y", "x", 1), 0.05).unwrap_err();
        assert!(matches!(e, Error::IllConditioned { .. }));
    }

    #[test]
    fn zero_cause_gives_zero_f() {
        let base = driven(60, 0.0, 2);
        let d = Dataset::new(
            base.response().clone(),
            vec![(TimeSeries::from_values("x", "", 0, &[0.0; 60]), CovariateRole::Driver)],
            vec![],
        )
        .unwrap();
        let r = gc_test(&d, &VarSpec::new("y", "x", 2), 0.05).unwrap();
        assert_eq!(r.f_statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert_eq!(r.gaussian_te, 0.0);
        assert_eq!(r.decision, Decision::FailToReject);
    }

    #[test]
    fn strong_edge_rejects() {
        let r = gc_test(&driven(500, 0.8, 3), &VarSpec::new("y", "x", 1), 0.05).unwrap();
        assert!(r.p_value < 1e-6);
        assert_eq!(r.decision, Decision::Reject);
        assert!(r.rss_restricted >= r.rss_unrestricted);
    }

    #[test]
    fn te_examples() {
        assert_eq!(gaussian_transfer_entropy(3.0, 3.0).unwrap(), 0.0);
        assert!((gaussian_transfer_entropy(2.0, 1.0).unwrap() - 0.5 * 2f64.ln()).abs() < 1e-15);
        let e2 = 2f64.exp();
        assert!((gaussian_transfer_entropy(e2, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(gaussian_transfer_entropy(1.0, 2.0).is_err());
        assert!(gaussian_transfer_entropy(0.0, 0.0).is_err());
    }

    #[test]
    fn spec_validation() {
        let d = driven(50, 0.0, 4);
        let mut s = VarSpec::new("y", "y", 1);
        assert!(gc_test(&d, &s, 0.05).is_err());
        s = VarSpec::new("y", "x", 0);
        assert!(gc_test(&d, &s, 0.05).is_err());
        s = VarSpec::new("y", "x", 1).conditioned_on("x");
        assert!(gc_test(&d, &s, 0.05).is_err());
        s = VarSpec::new("y", "nope", 1);
        assert!(gc_test(&d, &s, 0.05).is_err());
    }

    #[test]
    fn order_selection() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 1000;
        let mut y = vec![0.0; n];
        let x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        for t in 2..n {
            let e: f64 = StandardNormal.sample(&mut rng);
            y[t] = 0.2 * y[t - 1] + 0.6 * y[t - 2] + e;
        }
        let d = ds(&[("y", y), ("x", x)]);
        let spec = VarSpec::new("y", "x", 1);
        assert_eq!(select_order(&d, &spec, 6, InformationCriterion::Bic).unwrap(), 2);
        assert_eq!(select_order(&d, &spec, 1, InformationCriterion::Aic).unwrap(), 1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn affine_invariance(seed in any::<u64>(), a in prop_oneof![-5.0f64..-0.1, 0.1f64..5.0], b in -10.0f64..10.0, c in prop_oneof![-5.0f64..-0.1, 0.1f64..5.0], d in -10.0f64..10.0) {
            let base = driven(120, 0.2, seed);
            let x: Vec<f64> = base.covariate("x").unwrap().dense().iter().map(|v| a * v + b).collect();
            let y: Vec<f64> = base.response().dense().iter().map(|v| c * v + d).collect();
            let moved = ds(&[("y", y), ("x", x)]);
            let spec = VarSpec::new("y", "x", 2);
            let r0 = gc_test(&base, &spec, 0.05).unwrap();
            let r1 = gc_test(&moved, &spec, 0.05).unwrap();
            prop_assert!((r0.p_value - r1.p_value).abs() <= 1e-10 * r0.p_value.max(1e-300) + 1e-14);
            prop_assert_eq!(r0.decision, r1.decision);
        }

        #[test]
        fn nested_monotonicity_and_te(seed in any::<u64>(), b in -1.0f64..1.0, p in 1usize..4) {
            let r = gc_test(&driven(80, b, seed), &VarSpec::new("y", "x", p), 0.05).unwrap();
            prop_assert!(r.rss_restricted >= r.rss_unrestricted);
            prop_assert!(r.gaussian_te >= 0.0);
            prop_assert_eq!(r.gaussian_te == 0.0, r.f_statistic == 0.0);
        }
    }
}
