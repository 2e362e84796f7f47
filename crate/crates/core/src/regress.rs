//! Ordinary least squares with coefficient inference.
//!
//! Solves through Householder QR of the design; `XᵀX` is never formed or
//! inverted. Columns that are identically zero carry no information and are
//! kept as inert placeholders: coefficient 0, variance 0, no residual dof.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::dist;
use crate::error::{Error, Result};

pub const INTERCEPT: &str = "(Intercept)";
pub const DEFAULT_CONDITION_THRESHOLD: f64 = 1e8;

#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    x: DMatrix<f64>,
    names: Vec<String>,
    intercept: bool,
}

impl DesignMatrix {
    /// Builds a design from named columns, prepending a column of ones when
    /// `with_intercept` is set.
    pub fn new(columns: Vec<(String, Vec<f64>)>, with_intercept: bool) -> Result<Self> {
        let n = match columns.first() {
            Some((_, c)) => c.len(),
            None if with_intercept => {
                return Err(Error::InvalidArgument(
                    "intercept-only design needs a row count; use DesignMatrix::intercept_only"
                        .into(),
                ))
            }
            None => return Err(Error::InvalidArgument("design has no columns".into())),
        };
        let mut names = Vec::with_capacity(columns.len() + 1);
        let mut data = Vec::with_capacity(n * (columns.len() + 1));
        if with_intercept {
            names.push(INTERCEPT.to_string());
            data.extend(std::iter::repeat(1.0).take(n));
        }
        for (name, col) in columns {
            if col.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "column `{name}` has {} rows, expected {n}",
                    col.len()
                )));
            }
            if col.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "column `{name}` has non-finite entries"
                )));
            }
            if names.contains(&name) {
                return Err(Error::InvalidArgument(format!("duplicate column `{name}`")));
            }
            names.push(name);
            data.extend(col);
        }
        let k = names.len();
        Ok(Self {
            x: DMatrix::from_vec(n, k, data),
            names,
            intercept: with_intercept,
        })
    }

    pub fn intercept_only(n: usize) -> Self {
        Self {
            x: DMatrix::from_element(n, 1, 1.0),
            names: vec![INTERCEPT.to_string()],
            intercept: true,
        }
    }

    pub fn rows(&self) -> usize {
        self.x.nrows()
    }

    pub fn cols(&self) -> usize {
        self.x.ncols()
    }

    pub fn column_names(&self) -> &[String] {
        &self.names
    }

    pub fn has_intercept(&self) -> bool {
        self.intercept
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        self.column_index(name)
            .map(|j| self.x.column(j).iter().copied().collect())
    }

    /// A copy with the named columns removed.
    pub fn without(&self, drop: &[&str]) -> Result<DesignMatrix> {
        for d in drop {
            if self.column_index(d).is_none() {
                return Err(Error::UnknownCoefficient(d.to_string()));
            }
        }
        let keep: Vec<usize> = (0..self.cols())
            .filter(|&j| !drop.contains(&self.names[j].as_str()))
            .collect();
        Ok(Self {
            x: self.x.select_columns(&keep),
            names: keep.iter().map(|&j| self.names[j].clone()).collect(),
            intercept: self.intercept && !drop.contains(&INTERCEPT),
        })
    }

    fn active_columns(&self) -> Vec<usize> {
        (0..self.cols())
            .filter(|&j| self.x.column(j).iter().any(|&v| v != 0.0))
            .collect()
    }

    /// 2-norm condition number of the column-normalized design, ignoring
    /// all-zero columns.
    pub fn condition_number(&self) -> f64 {
        condition_of(&self.x.select_columns(&self.active_columns()))
    }
}

fn condition_of(x: &DMatrix<f64>) -> f64 {
    if x.ncols() == 0 {
        return 1.0;
    }
    let mut z = x.clone();
    for mut c in z.column_iter_mut() {
        let norm = c.norm();
        c /= norm;
    }
    let sv = z.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OlsOptions {
    pub condition_threshold: f64,
}

impl Default for OlsOptions {
    fn default() -> Self {
        Self {
            condition_threshold: DEFAULT_CONDITION_THRESHOLD,
        }
    }
}

/// A factorized design, reusable across many responses.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    design: Arc<DesignMatrix>,
    active: Vec<usize>,
    /// Householder factorization of the active columns.
    qr: nalgebra::linalg::QR<f64, nalgebra::Dyn, nalgebra::Dyn>,
    r: DMatrix<f64>,
    r_inv: DMatrix<f64>,
    condition: f64,
}

impl LeastSquares {
    pub fn new(design: DesignMatrix) -> Result<Self> {
        Self::with_options(design, OlsOptions::default())
    }

    pub fn with_options(design: DesignMatrix, opts: OlsOptions) -> Result<Self> {
        let active = design.active_columns();
        let xa = design.x.select_columns(&active);
        let n = design.rows();
        let k = active.len();
        if n < k + 1 {
            return Err(Error::InsufficientData(format!(
                "{n} observations for {k} estimated coefficients leaves no residual degrees of freedom"
            )));
        }
        let condition = condition_of(&xa);
        if condition.is_nan() || condition >= opts.condition_threshold {
            let constant: Vec<&str> = active
                .iter()
                .filter(|&&j| !(design.intercept && j == 0))
                .filter(|&&j| {
                    let c = design.x.column(j);
                    c.iter().all(|&v| v == c[0])
                })
                .map(|&j| design.names[j].as_str())
                .collect();
            let detail = if design.intercept && !constant.is_empty() {
                format!(
                    "; constant predictor(s) {} collinear with the intercept",
                    constant.join(", ")
                )
            } else {
                String::new()
            };
            return Err(Error::IllConditioned {
                condition,
                threshold: opts.condition_threshold,
                detail,
            });
        }
        let qr = xa.qr();
        let r = qr.r();
        let r_inv = r
            .solve_upper_triangular(&DMatrix::identity(k, k))
            .ok_or_else(|| Error::IllConditioned {
                condition: f64::INFINITY,
                threshold: opts.condition_threshold,
                detail: "; triangular factor is singular".into(),
            })?;
        Ok(Self {
            design: Arc::new(design),
            active,
            qr,
            r,
            r_inv,
            condition,
        })
    }

    pub fn design(&self) -> &DesignMatrix {
        &self.design
    }

    pub fn dof(&self) -> usize {
        self.design.rows() - self.active.len()
    }

    pub fn condition_number(&self) -> f64 {
        self.condition
    }

    /// Coefficients only, for resampling loops.
    pub fn coefficients(&self, y: &[f64]) -> Result<Vec<f64>> {
        let n = self.design.rows();
        if y.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "response has {} values, design has {n} rows",
                y.len()
            )));
        }
        let mut qty = DVector::from_column_slice(y);
        self.qr.q_tr_mul(&mut qty);
        let k = self.active.len();
        let rhs = qty.rows(0, k).into_owned();
        let b = self
            .r
            .solve_upper_triangular(&rhs)
            .expect("triangular factor checked at construction");
        let mut beta = vec![0.0; self.design.cols()];
        for (i, &j) in self.active.iter().enumerate() {
            beta[j] = b[i];
        }
        Ok(beta)
    }

    pub fn fit(&self, y: &[f64]) -> Result<FitResult> {
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("response has non-finite values".into()));
        }
        let beta = self.coefficients(y)?;
        let x = &self.design.x;
        let n = x.nrows();
        let fitted_v = x * DVector::from_column_slice(&beta);
        let fitted: Vec<f64> = fitted_v.iter().copied().collect();
        let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
        let rss: f64 = residuals.iter().map(|e| e * e).sum();
        let dof = self.dof();
        let sigma2 = rss / dof as f64;

        let k = self.design.cols();
        let ka = self.active.len();
        let cov_a = &self.r_inv * self.r_inv.transpose() * sigma2;
        let mut cov = DMatrix::zeros(k, k);
        for a in 0..ka {
            for b in 0..ka {
                cov[(self.active[a], self.active[b])] = cov_a[(a, b)];
            }
        }

        let tss: f64 = if self.design.intercept {
            let mean = y.iter().sum::<f64>() / n as f64;
            y.iter().map(|v| (v - mean) * (v - mean)).sum()
        } else {
            y.iter().map(|v| v * v).sum()
        };
        let r_squared = if tss > 0.0 {
            (1.0 - rss / tss).clamp(0.0, 1.0)
        } else if rss == 0.0 {
            1.0
        } else {
            0.0
        };

        Ok(FitResult {
            names: self.design.names.clone(),
            coefficients: beta,
            coef_covariance: cov,
            residual_sd: sigma2.sqrt(),
            rss,
            r_squared,
            dof,
            residuals,
            fitted,
            condition_number: self.condition,
            y: y.to_vec(),
            design: Arc::clone(&self.design),
        })
    }
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub coef_covariance: DMatrix<f64>,
    pub residual_sd: f64,
    pub rss: f64,
    pub r_squared: f64,
    pub dof: usize,
    pub residuals: Vec<f64>,
    pub fitted: Vec<f64>,
    pub condition_number: f64,
    y: Vec<f64>,
    design: Arc<DesignMatrix>,
}

impl FitResult {
    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn response(&self) -> &[f64] {
        &self.y
    }

    pub fn design(&self) -> &DesignMatrix {
        &self.design
    }

    pub fn has_intercept(&self) -> bool {
        self.design.intercept
    }

    pub fn index(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownCoefficient(name.to_string()))
    }

    pub fn coefficient(&self, name: &str) -> Result<f64> {
        Ok(self.coefficients[self.index(name)?])
    }

    pub fn std_error(&self, name: &str) -> Result<f64> {
        let j = self.index(name)?;
        Ok(self.coef_covariance[(j, j)].max(0.0).sqrt())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub null_description: String,
    pub dof_numerator: Option<f64>,
    pub dof_denominator: Option<f64>,
}

pub fn ols_fit(design: &DesignMatrix, y: &[f64]) -> Result<FitResult> {
    ols_fit_with(design, y, OlsOptions::default())
}

pub fn ols_fit_with(design: &DesignMatrix, y: &[f64], opts: OlsOptions) -> Result<FitResult> {
    if y.len() != design.rows() {
        return Err(Error::DimensionMismatch(format!(
            "response has {} values, design has {} rows",
            y.len(),
            design.rows()
        )));
    }
    LeastSquares::with_options(design.clone(), opts)?.fit(y)
}

pub(crate) fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "confidence level must lie in (0, 1), got {level}"
        )))
    }
}

/// Symmetric Student-t interval `estimate ± t·se`.
pub fn t_interval(estimate: f64, se: f64, dof: usize, level: f64) -> Result<(f64, f64)> {
    check_level(level)?;
    if se == 0.0 {
        return Ok((estimate, estimate));
    }
    let half = dist::t_quantile_upper((1.0 + level) / 2.0, dof as f64) * se;
    Ok((estimate - half, estimate + half))
}

/// Two-sided t statistic and p-value for `estimate == value`.
pub fn t_statistic(estimate: f64, se: f64, value: f64, dof: usize) -> (f64, f64) {
    let diff = estimate - value;
    if se == 0.0 {
        if diff == 0.0 {
            return (0.0, 1.0);
        }
        return (diff.signum() * f64::INFINITY, 0.0);
    }
    let t = diff / se;
    (t, dist::t_two_sided_p(t, dof as f64))
}

pub fn coef_ci(fit: &FitResult, name: &str, level: f64) -> Result<(f64, f64)> {
    let b = fit.coefficient(name)?;
    t_interval(b, fit.std_error(name)?, fit.dof, level)
}

pub fn t_test_zero(fit: &FitResult, name: &str) -> Result<TestResult> {
    t_test_value(fit, name, 0.0)
}

pub fn t_test_value(fit: &FitResult, name: &str, value: f64) -> Result<TestResult> {
    let (t, p) = t_statistic(fit.coefficient(name)?, fit.std_error(name)?, value, fit.dof);
    Ok(TestResult {
        statistic: t,
        p_value: p,
        null_description: format!("{name} = {value}"),
        dof_numerator: None,
        dof_denominator: Some(fit.dof as f64),
    })
}

/// Nested-model F test of `reduced` against `full`.
///
/// The RSS gap is computed as `‖e_r − e_u‖²`, which equals `RSS_r − RSS_u`
/// for nested least squares but does not suffer cancellation.
pub fn f_test_nested(full: &FitResult, reduced: &FitResult) -> Result<TestResult> {
    if full.n() != reduced.n() || full.y != reduced.y {
        return Err(Error::NotNested("models were fit to different responses".into()));
    }
    let missing: Vec<&String> = reduced
        .names
        .iter()
        .filter(|n| !full.names.contains(n))
        .collect();
    if !missing.is_empty() {
        return Err(Error::NotNested(format!(
            "reduced model has predictors absent from the full model: {missing:?}"
        )));
    }
    if reduced.names.len() >= full.names.len() {
        return Err(Error::NotNested(
            "reduced predictors must be a strict subset of the full predictors".into(),
        ));
    }
    for name in &reduced.names {
        if full.design.column(name) != reduced.design.column(name) {
            return Err(Error::NotNested(format!(
                "column `{name}` differs between the two designs"
            )));
        }
    }
    let dropped: Vec<&String> = full
        .names
        .iter()
        .filter(|n| !reduced.names.contains(n))
        .collect();
    let null_description = format!(
        "coefficients of {} are all zero",
        dropped.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")
    );
    let gap = rss_gap(full, reduced);
    let q = reduced.dof - full.dof;
    let d2 = full.dof as f64;
    let (statistic, p_value) = if q == 0 || gap == 0.0 {
        (0.0, 1.0)
    } else if full.rss == 0.0 {
        (f64::INFINITY, 0.0)
    } else {
        let f = (gap / q as f64) / (full.rss / d2);
        (f, dist::f_sf(f, q as f64, d2))
    };
    Ok(TestResult {
        statistic,
        p_value,
        null_description,
        dof_numerator: Some(q as f64),
        dof_denominator: Some(d2),
    })
}

/// `‖e_r − e_u‖²`, the drop in RSS from reduced to full.
pub(crate) fn rss_gap(full: &FitResult, reduced: &FitResult) -> f64 {
    full.residuals
        .iter()
        .zip(&reduced.residuals)
        .map(|(u, r)| (r - u) * (r - u))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn design(cols: &[(&str, Vec<f64>)], intercept: bool) -> DesignMatrix {
        DesignMatrix::new(
            cols.iter().map(|(n, c)| (n.to_string(), c.clone())).collect(),
            intercept,
        )
        .unwrap()
    }

    #[test]
    fn exact_line() {
        let d = design(&[("x", vec![0.0, 1.0, 2.0])], true);
        let f = ols_fit(&d, &[1.0, 2.0, 3.0]).unwrap();
        assert!((f.coefficient(INTERCEPT).unwrap() - 1.0).abs() < 1e-14);
        assert!((f.coefficient("x").unwrap() - 1.0).abs() < 1e-14);
        assert!(f.rss < 1e-28);
        assert!((f.r_squared - 1.0).abs() < 1e-14);
    }

    #[test]
    fn constant_response_intercept_only() {
        let d = DesignMatrix::intercept_only(5);
        let f = ols_fit(&d, &[3.5; 5]).unwrap();
        assert!((f.coefficients[0] - 3.5).abs() < 1e-13);
        assert!(f.residual_sd < 1e-13);
    }

    #[test]
    fn hand_solved_normal_equations() {
        // Sxx = 5, Sxy = 4.5, slope 0.9, intercept 2.25 - 0.9*1.5 = 0.9.
        let d = design(&[("x", vec![0.0, 1.0, 2.0, 3.0])], true);
        let f = ols_fit(&d, &[1.0, 2.0, 2.0, 4.0]).unwrap();
        assert!((f.coefficient("x").unwrap() - 0.9).abs() < 1e-14);
        assert!((f.coefficient(INTERCEPT).unwrap() - 0.9).abs() < 1e-14);
        // residuals 0.1, 0.2, -0.7, 0.4
        assert!((f.rss - 0.7).abs() < 1e-14);
        assert_eq!(f.dof, 2);
    }

    #[test]
    fn collinear_columns_are_flagged() {
        let x: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let z: Vec<f64> = x.iter().map(|v| -2.0 * v).collect();
        let d = design(&[("a", x), ("b", z)], true);
        assert!(matches!(
            ols_fit(&d, &[0.0; 20]),
            Err(Error::IllConditioned { .. })
        ));
        let d = design(&[("c", vec![4.0; 10])], true);
        let e = ols_fit(&d, &[1.0; 10]).unwrap_err();
        assert!(e.to_string().contains("constant"), "{e}");
    }

    #[test]
    fn insufficient_dof() {
        let d = design(&[("x", vec![0.0, 1.0])], true);
        assert!(matches!(ols_fit(&d, &[1.0, 2.0]), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn ci_collapses_for_perfect_fit() {
        let d = design(&[("x", vec![0.0, 1.0, 2.0, 3.0])], true);
        let f = ols_fit(&d, &[1.0, 3.0, 5.0, 7.0]).unwrap();
        let (lo, hi) = coef_ci(&f, "x", 0.95).unwrap();
        assert!((lo - 2.0).abs() < 1e-12 && (hi - 2.0).abs() < 1e-12);
        assert!(coef_ci(&f, "nope", 0.95).is_err());
        assert!(coef_ci(&f, "x", 1.0).is_err());
    }

    #[test]
    fn interval_from_table_quantile() {
        let (lo, hi) = t_interval(1.0, 0.5, 10, 0.95).unwrap();
        assert!((hi - (1.0 + 2.228_138_851_986 * 0.5)).abs() < 1e-9);
        assert!((lo - (1.0 - 2.228_138_851_986 * 0.5)).abs() < 1e-9);
        let (t, p) = t_statistic(1.5, 0.25, 1.0, 20);
        assert_eq!(t, 2.0);
        // P(|T_20| > 2) = 0.0592655...
        assert!((p - 0.059_265_535_446_57).abs() < 1e-10);
        let (t, p) = t_statistic(2.228_138_851_986, 1.0, 0.0, 10);
        assert!((t - 2.228_138_851_986).abs() < 1e-15);
        assert!((p - 0.05).abs() < 1e-11);
    }

    #[test]
    fn zero_column_adds_nothing() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<f64> = (0..30).map(|_| rng.random::<f64>()).collect();
        let y: Vec<f64> = x.iter().map(|v| v + rng.random::<f64>()).collect();
        let full = design(&[("x", x.clone()), ("z", vec![0.0; 30])], true);
        let reduced = design(&[("x", x)], true);
        let fu = ols_fit(&full, &y).unwrap();
        let fr = ols_fit(&reduced, &y).unwrap();
        assert_eq!(fu.coefficient("z").unwrap(), 0.0);
        assert_eq!(fu.dof, fr.dof);
        let t = f_test_nested(&fu, &fr).unwrap();
        assert_eq!(t.statistic, 0.0);
        assert_eq!(t.p_value, 1.0);
        let tz = t_test_zero(&fu, "z").unwrap();
        assert_eq!(tz.p_value, 1.0);
    }

    #[test]
    fn nesting_is_checked() {
        let a = design(&[("x", vec![1.0, 2.0, 4.0, 3.0])], true);
        let b = design(&[("w", vec![1.0, 0.0, 4.0, 3.0])], true);
        let y = [1.0, 2.0, 3.0, 5.0];
        let fa = ols_fit(&a, &y).unwrap();
        let fb = ols_fit(&b, &y).unwrap();
        assert!(matches!(f_test_nested(&fa, &fb), Err(Error::NotNested(_))));
        assert!(matches!(f_test_nested(&fa, &fa), Err(Error::NotNested(_))));
        let fc = ols_fit(&DesignMatrix::intercept_only(4), &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!(matches!(f_test_nested(&fa, &fc), Err(Error::NotNested(_))));
    }

    fn random_problem(seed: u64, n: usize, k: usize) -> (Vec<(String, Vec<f64>)>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cols: Vec<(String, Vec<f64>)> = (0..k)
            .map(|j| (format!("x{j}"), (0..n).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect()))
            .collect();
        let y = (0..n)
            .map(|i| cols.iter().map(|(_, c)| c[i]).sum::<f64>() * 0.3 + rng.random::<f64>())
            .collect();
        (cols, y)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn residuals_are_orthogonal(seed in any::<u64>(), n in 8usize..60, k in 1usize..5) {
            let (cols, y) = random_problem(seed, n, k);
            let d = DesignMatrix::new(cols, true).unwrap();
            let f = ols_fit(&d, &y).unwrap();
            for c in d.matrix().column_iter() {
                let dot: f64 = c.iter().zip(&f.residuals).map(|(a, b)| a * b).sum();
                prop_assert!(dot.abs() < 1e-8 * n as f64);
            }
            let rss: f64 = f.residuals.iter().map(|e| e * e).sum();
            prop_assert!((rss - f.rss).abs() <= 1e-10 * f.rss.max(1e-300));
            prop_assert!((f.residual_sd - (f.rss / f.dof as f64).sqrt()).abs() < 1e-15);
            prop_assert!((0.0..=1.0).contains(&f.r_squared));
        }

        #[test]
        fn single_drop_f_equals_t_squared(seed in any::<u64>(), n in 8usize..80, k in 1usize..5, drop in 0usize..5) {
            let (cols, y) = random_problem(seed, n, k);
            let name = cols[drop % k].0.clone();
            let d = DesignMatrix::new(cols, true).unwrap();
            let full = ols_fit(&d, &y).unwrap();
            let reduced = ols_fit(&d.without(&[name.as_str()]).unwrap(), &y).unwrap();
            let f = f_test_nested(&full, &reduced).unwrap();
            let t = t_test_zero(&full, &name).unwrap();
            prop_assert!((f.p_value - t.p_value).abs() < 1e-10);
            prop_assert!((f.statistic - t.statistic * t.statistic).abs() <= 1e-10 * f.statistic.max(1.0));
        }

        #[test]
        fn column_scaling_invariance(seed in any::<u64>(), n in 8usize..60, k in 1usize..4, c in prop_oneof![-1e3f64..-1e-3, 1e-3f64..1e3]) {
            let (cols, y) = random_problem(seed, n, k);
            let mut scaled = cols.clone();
            for v in scaled[0].1.iter_mut() { *v *= c; }
            let a = ols_fit(&DesignMatrix::new(cols, true).unwrap(), &y).unwrap();
            let b = ols_fit(&DesignMatrix::new(scaled, true).unwrap(), &y).unwrap();
            let rel = |u: f64, v: f64| (u - v).abs() <= 1e-10 * u.abs().max(v.abs()).max(1e-12);
            prop_assert!(rel(a.coefficient("x0").unwrap(), c * b.coefficient("x0").unwrap()));
            prop_assert!(rel(a.rss, b.rss));
            prop_assert!(rel(a.r_squared, b.r_squared));
            for (u, v) in a.fitted.iter().zip(&b.fitted) {
                prop_assert!((u - v).abs() <= 1e-10 * (1.0 + u.abs()));
            }
            for name in &a.names {
                let pa = t_test_zero(&a, name).unwrap().p_value;
                let pb = t_test_zero(&b, name).unwrap().p_value;
                prop_assert!(rel(pa, pb));
            }
        }
    }
}
