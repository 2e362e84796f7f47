//! GEV error family with covariate-dependent location.
//!
//! Location is linear in the covariates; scale and shape are constant.
//! Parameters are estimated by maximum likelihood with a damped Newton
//! (Levenberg-Marquardt) iteration on the mean negative log-likelihood,
//! using the analytic gradient and a finite-difference Hessian.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::Open01;
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::data::Dataset;
use crate::dist::quantile_sorted;
use crate::error::{Error, Result};
use crate::regress::{check_level, DesignMatrix, LeastSquares};
use crate::seeding::replicate_rng;
use crate::statcf::Scenario;

const SHAPE_FLOOR: f64 = -0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GevOptions {
    pub min_observations: usize,
    /// Convergence tolerance on the Euclidean norm of the mean-nll gradient.
    pub gradient_tolerance: f64,
    pub max_iterations: usize,
}

impl Default for GevOptions {
    fn default() -> Self {
        Self {
            min_observations: 20,
            gradient_tolerance: 1e-8,
            max_iterations: 200,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GevFit {
    /// Location coefficient names, intercept first.
    pub names: Vec<String>,
    pub location_coefficients: Vec<f64>,
    pub scale: f64,
    pub shape: f64,
    pub log_likelihood: f64,
    /// Log-likelihood at the probability-weighted-moment starting values.
    pub start_log_likelihood: f64,
    /// Inverse observed information over (location..., scale, shape).
    #[serde(skip)]
    pub coef_covariance: DMatrix<f64>,
    pub iterations: usize,
    pub n: usize,
}

impl GevFit {
    pub fn covariate_names(&self) -> &[String] {
        &self.names[1..]
    }

    pub fn location(&self, s: &Scenario) -> Result<f64> {
        let names: Vec<&str> = self.covariate_names().iter().map(String::as_str).collect();
        s.check_covers(&names)?;
        Ok(self.location_coefficients[0]
            + names
                .iter()
                .zip(&self.location_coefficients[1..])
                .map(|(n, b)| b * s.assignment[*n])
                .sum::<f64>())
    }

    pub fn index(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownCoefficient(name.to_string()))
    }

    fn theta(&self) -> Vec<f64> {
        let mut th = self.location_coefficients.clone();
        th.push(self.scale.ln());
        th.push(self.shape);
        th
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskRatio {
    pub value: f64,
    pub p_factual: f64,
    pub p_counterfactual: f64,
    pub ci: Option<(f64, f64)>,
    pub p_value_rr1: Option<f64>,
    pub level: Option<f64>,
    pub replicates_used: Option<usize>,
    pub replicates_failed: Option<usize>,
}

/// `(y^(-ξ) - 1)/ξ` with `y = -ln(1 - 1/period)`, the standardized quantile.
fn standard_return_level(xi: f64, period: f64) -> f64 {
    let ln_y = (-(-1.0 / period).ln_1p()).ln();
    if xi == 0.0 {
        -ln_y
    } else {
        (-xi * ln_y).exp_m1() / xi
    }
}

/// `ln(1 + ξz)/ξ`, continuous through ξ = 0.
fn log_term(xi: f64, z: f64) -> f64 {
    if xi == 0.0 {
        z
    } else {
        (xi * z).ln_1p() / xi
    }
}

pub fn gev_return_level(mu: f64, sigma: f64, xi: f64, period: f64) -> Result<f64> {
    if !(period.is_finite() && period > 1.0) {
        return Err(Error::InvalidPeriod(period));
    }
    Ok(mu + sigma * standard_return_level(xi, period))
}

/// P(Y > x) for GEV(μ, σ, ξ).
pub fn gev_exceedance(mu: f64, sigma: f64, xi: f64, x: f64) -> f64 {
    let z = (x - mu) / sigma;
    if 1.0 + xi * z <= 0.0 {
        // below the lower endpoint when ξ > 0, above the upper one when ξ < 0
        return if xi > 0.0 { 1.0 } else { 0.0 };
    }
    let e = (-log_term(xi, z)).exp();
    -(-e).exp_m1()
}

/// Draws by inverse CDF.
pub fn gev_sample(mu: f64, sigma: f64, xi: f64, rng: &mut impl Rng) -> f64 {
    let u: f64 = rng.sample(Open01);
    let ln_e = (-u.ln()).ln();
    let q = if xi == 0.0 {
        -ln_e
    } else {
        (-xi * ln_e).exp_m1() / xi
    };
    mu + sigma * q
}

pub fn return_level(fit: &GevFit, s: &Scenario, period: f64) -> Result<f64> {
    gev_return_level(fit.location(s)?, fit.scale, fit.shape, period)
}

pub fn exceedance_prob(fit: &GevFit, s: &Scenario, threshold: f64) -> Result<f64> {
    Ok(gev_exceedance(fit.location(s)?, fit.scale, fit.shape, threshold))
}

pub fn risk_ratio(
    fit: &GevFit,
    factual: &Scenario,
    counterfactual: &Scenario,
    threshold: f64,
) -> Result<RiskRatio> {
    let p_f = exceedance_prob(fit, factual, threshold)?;
    let p_c = exceedance_prob(fit, counterfactual, threshold)?;
    if p_c < 1e-300 {
        return Err(Error::ZeroDenominator(p_c));
    }
    Ok(RiskRatio {
        value: p_f / p_c,
        p_factual: p_f,
        p_counterfactual: p_c,
        ci: None,
        p_value_rr1: None,
        level: None,
        replicates_used: None,
        replicates_failed: None,
    })
}

/// Design with an intercept column and one column per covariate.
fn location_design(dataset: &Dataset) -> Result<DesignMatrix> {
    if dataset.covariates().is_empty() {
        return Ok(DesignMatrix::intercept_only(dataset.len()));
    }
    DesignMatrix::new(
        dataset
            .covariates()
            .iter()
            .map(|(s, _)| (s.name().to_string(), s.dense()))
            .collect(),
        true,
    )
}

pub fn gev_fit(dataset: &Dataset) -> Result<GevFit> {
    gev_fit_with(dataset, GevOptions::default())
}

pub fn gev_fit_with(dataset: &Dataset, opts: GevOptions) -> Result<GevFit> {
    let design = location_design(dataset)?;
    let y = dataset.response().dense();
    let problem = Problem::new(&design, &y, opts)?;
    let start = problem.start_values(&design)?;
    problem.fit_from(start, design.column_names().to_vec())
}

struct Problem<'a> {
    /// Row-major covariate matrix including the intercept column.
    x: Vec<f64>,
    p: usize,
    y: &'a [f64],
    opts: GevOptions,
}

impl<'a> Problem<'a> {
    fn new(design: &DesignMatrix, y: &'a [f64], opts: GevOptions) -> Result<Self> {
        let n = y.len();
        if n < opts.min_observations {
            return Err(Error::InsufficientData(format!(
                "GEV fit needs at least {} observations, got {n}",
                opts.min_observations
            )));
        }
        if design.rows() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} design rows for {n} observations",
                design.rows()
            )));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("response has non-finite values".into()));
        }
        let m = design.matrix();
        let p = m.ncols();
        let mut x = Vec::with_capacity(n * p);
        for i in 0..n {
            for j in 0..p {
                x.push(m[(i, j)]);
            }
        }
        Ok(Self { x, p, y, opts })
    }

    fn n(&self) -> usize {
        self.y.len()
    }

    fn mu(&self, i: usize, beta: &[f64]) -> f64 {
        self.x[i * self.p..(i + 1) * self.p]
            .iter()
            .zip(beta)
            .map(|(a, b)| a * b)
            .sum()
    }

    fn nll(&self, th: &[f64]) -> f64 {
        let p = self.p;
        let (beta, ln_sigma, xi) = (&th[..p], th[p], th[p + 1]);
        if xi <= SHAPE_FLOOR || !ln_sigma.is_finite() {
            return f64::INFINITY;
        }
        let sigma = ln_sigma.exp();
        let mut total = 0.0;
        for i in 0..self.n() {
            let z = (self.y[i] - self.mu(i, beta)) / sigma;
            let u = xi * z;
            if 1.0 + u <= 0.0 {
                return f64::INFINITY;
            }
            let l = log_term(xi, z);
            total += ln_sigma + u.ln_1p() + l + (-l).exp();
        }
        total / self.n() as f64
    }

    /// Mean-nll gradient; `None` outside the support.
    fn grad(&self, th: &[f64]) -> Option<Vec<f64>> {
        let p = self.p;
        let (beta, ln_sigma, xi) = (&th[..p], th[p], th[p + 1]);
        if xi <= SHAPE_FLOOR {
            return None;
        }
        let sigma = ln_sigma.exp();
        let mut g = vec![0.0; p + 2];
        for i in 0..self.n() {
            let z = (self.y[i] - self.mu(i, beta)) / sigma;
            let u = xi * z;
            let t = 1.0 + u;
            if t <= 0.0 {
                return None;
            }
            let l = log_term(xi, z);
            let w = (-l).exp();
            let dz = (1.0 + xi - w) / t;
            let row = &self.x[i * p..(i + 1) * p];
            for j in 0..p {
                g[j] -= dz * row[j] / sigma;
            }
            g[p] += 1.0 - z * dz;
            // (z/t - L)/ξ, by series when ξz is small
            let h = if u.abs() < 1e-3 {
                let mut s = 0.0;
                let mut pow = 1.0;
                for k in 1..=6 {
                    s += k as f64 / (k + 1) as f64 * pow;
                    pow *= -u;
                }
                -z * z * s
            } else {
                (z / t - l) / xi
            };
            g[p + 1] += (1.0 - w) * h + z / t;
        }
        let n = self.n() as f64;
        g.iter_mut().for_each(|v| *v /= n);
        Some(g)
    }

    fn hessian(&self, th: &[f64]) -> Option<DMatrix<f64>> {
        let d = th.len();
        let mut h = DMatrix::zeros(d, d);
        for j in 0..d {
            let mut step = 1e-5 * th[j].abs().max(1.0);
            let mut col = None;
            for _ in 0..4 {
                let mut a = th.to_vec();
                let mut b = th.to_vec();
                a[j] += step;
                b[j] -= step;
                if let (Some(ga), Some(gb)) = (self.grad(&a), self.grad(&b)) {
                    col = Some((ga, gb, step));
                    break;
                }
                step /= 10.0;
            }
            let (ga, gb, step) = col?;
            for i in 0..d {
                h[(i, j)] = (ga[i] - gb[i]) / (2.0 * step);
            }
        }
        Some((&h + h.transpose()) * 0.5)
    }

    /// Probability-weighted-moment start on OLS-detrended data.
    fn start_values(&self, design: &DesignMatrix) -> Result<Vec<f64>> {
        let ls = LeastSquares::new(design.clone())?;
        let mut beta = ls.coefficients(self.y)?;
        let mut resid: Vec<f64> = (0..self.n())
            .map(|i| self.y[i] - self.mu(i, &beta))
            .collect();
        resid.sort_by(f64::total_cmp);
        let n = resid.len() as f64;
        let (mut b0, mut b1, mut b2) = (0.0, 0.0, 0.0);
        for (i, &v) in resid.iter().enumerate() {
            let i = i as f64;
            b0 += v;
            b1 += v * i / (n - 1.0);
            b2 += v * i * (i - 1.0) / ((n - 1.0) * (n - 2.0));
        }
        b0 /= n;
        b1 /= n;
        b2 /= n;
        let l2 = 2.0 * b1 - b0;
        let c = l2 / (3.0 * b2 - b0) - 2f64.ln() / 3f64.ln();
        let mut k = 7.8590 * c + 2.9554 * c * c;
        let mut sigma;
        let mut mu;
        if k.is_finite() && k.abs() > 1e-6 {
            k = k.clamp(-0.4, 0.4);
            let g = gamma(1.0 + k);
            sigma = l2 * k / (g * (1.0 - 2f64.powf(-k)));
            mu = b0 + sigma * (g - 1.0) / k;
        } else {
            k = 0.0;
            sigma = l2 / 2f64.ln();
            mu = b0 - 0.577_215_664_901_532_9 * sigma;
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            let var = resid.iter().map(|v| (v - b0) * (v - b0)).sum::<f64>() / (n - 1.0);
            k = 0.0;
            sigma = (var.sqrt() * 6f64.sqrt() / std::f64::consts::PI).max(1e-8);
            mu = b0 - 0.577_215_664_901_532_9 * sigma;
        }
        beta[0] += mu;
        let mut th = beta;
        th.push(sigma.ln());
        th.push(-k);
        if !self.nll(&th).is_finite() {
            let p = self.p;
            th[p + 1] = 0.0;
        }
        Ok(th)
    }

    fn fit_from(&self, start: Vec<f64>, names: Vec<String>) -> Result<GevFit> {
        let p = self.p;
        let mut th = start;
        let mut f = self.nll(&th);
        if !f.is_finite() {
            return Err(Error::SupportViolation(
                "starting values place observations outside the support".into(),
            ));
        }
        let start_f = f;
        let mut g = self.grad(&th).expect("finite nll implies feasible gradient");
        let mut lambda = 1e-3;
        let mut iterations = 0;
        let tol = self.opts.gradient_tolerance;
        while norm(&g) >= tol {
            if iterations >= self.opts.max_iterations {
                return Err(Error::NonConvergence(format!(
                    "gradient norm {:.3e} after {iterations} iterations",
                    norm(&g)
                )));
            }
            iterations += 1;
            let h = self.hessian(&th).ok_or_else(|| {
                Error::SupportViolation("Hessian step left the support".into())
            })?;
            let gv = DVector::from_column_slice(&g);
            let mut accepted = false;
            while lambda < 1e20 {
                let mut a = h.clone();
                for i in 0..a.nrows() {
                    a[(i, i)] += lambda * h[(i, i)].abs().max(1e-8);
                }
                let Some(chol) = a.cholesky() else {
                    lambda = (lambda * 10.0).max(1e-8);
                    continue;
                };
                let delta = chol.solve(&(-&gv));
                let trial: Vec<f64> = th.iter().zip(delta.iter()).map(|(a, b)| a + b).collect();
                let ft = self.nll(&trial);
                if ft.is_finite() {
                    let gt = self.grad(&trial);
                    let improves = ft < f
                        || (ft - f <= 1e-12 * (1.0 + f.abs())
                            && gt.as_ref().is_some_and(|gt| norm(gt) < norm(&g)));
                    if let (true, Some(gt)) = (improves, gt) {
                        th = trial;
                        f = ft;
                        g = gt;
                        lambda = (lambda / 10.0).max(1e-12);
                        accepted = true;
                        break;
                    }
                }
                lambda = (lambda * 10.0).max(1e-8);
            }
            if !accepted {
                return Err(Error::NonConvergence(format!(
                    "no descent step from gradient norm {:.3e}",
                    norm(&g)
                )));
            }
        }
        let n = self.n();
        let cov = match self.hessian(&th).map(|h| h * n as f64).and_then(|h| h.try_inverse()) {
            Some(inv) => {
                let mut j = DMatrix::identity(p + 2, p + 2);
                j[(p, p)] = th[p].exp();
                &j * inv * &j
            }
            None => DMatrix::from_element(p + 2, p + 2, f64::NAN),
        };
        Ok(GevFit {
            names,
            location_coefficients: th[..p].to_vec(),
            scale: th[p].exp(),
            shape: th[p + 1],
            log_likelihood: -f * n as f64,
            start_log_likelihood: -start_f * n as f64,
            coef_covariance: cov,
            iterations,
            n,
        })
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Parametric bootstrap test of H0: RR = 1.
///
/// Replicates are drawn from the fitted GEV at the observed covariate
/// history, refit, and summarized on the log-RR scale. Replicates whose
/// refit fails are dropped and counted; more than 10% failures aborts.
#[allow(clippy::too_many_arguments)]
pub fn test_rr_one(
    dataset: &Dataset,
    factual: &Scenario,
    counterfactual: &Scenario,
    threshold: f64,
    replicates: usize,
    seed: u64,
    level: f64,
) -> Result<RiskRatio> {
    check_level(level)?;
    if replicates < 500 {
        return Err(Error::TooFewReplicates {
            got: replicates,
            min: 500,
        });
    }
    let opts = GevOptions::default();
    let design = location_design(dataset)?;
    let y = dataset.response().dense();
    let problem = Problem::new(&design, &y, opts)?;
    let fit = problem.fit_from(problem.start_values(&design)?, design.column_names().to_vec())?;
    let mut rr = risk_ratio(&fit, factual, counterfactual, threshold)?;
    let theta = fit.theta();
    let mu: Vec<f64> = (0..y.len())
        .map(|i| problem.mu(i, &fit.location_coefficients))
        .collect();

    let draws: Vec<Option<f64>> = (0..replicates as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = replicate_rng(seed, b);
            let ystar: Vec<f64> = mu
                .iter()
                .map(|&m| gev_sample(m, fit.scale, fit.shape, &mut rng))
                .collect();
            let prob = Problem {
                x: problem.x.clone(),
                p: problem.p,
                y: &ystar,
                opts,
            };
            let refit = prob.fit_from(theta.clone(), fit.names.clone()).ok()?;
            let star = risk_ratio(&refit, factual, counterfactual, threshold).ok()?;
            let l = star.value.ln();
            l.is_finite().then_some(l)
        })
        .collect();
    let mut logs: Vec<f64> = draws.into_iter().flatten().collect();
    let failed = replicates - logs.len();
    if failed * 10 > replicates {
        return Err(Error::NonConvergence(format!(
            "{failed} of {replicates} bootstrap refits failed"
        )));
    }
    logs.sort_by(f64::total_cmp);
    let a = (1.0 - level) / 2.0;
    let lo = quantile_sorted(&logs, a).exp();
    let hi = quantile_sorted(&logs, 1.0 - a).exp();
    rr.ci = Some((lo, hi));
    rr.p_value_rr1 = Some(tail_p_value(&logs));
    rr.level = Some(level);
    rr.replicates_used = Some(logs.len());
    rr.replicates_failed = Some(failed);
    Ok(rr)
}

/// Two-sided bootstrap p-value for a null value of 0: twice the smaller
/// tail mass at or beyond zero.
pub(crate) fn tail_p_value(draws: &[f64]) -> f64 {
    let le = draws.iter().filter(|&&d| d <= 0.0).count();
    let ge = draws.iter().filter(|&&d| d >= 0.0).count();
    (2.0 * le.min(ge) as f64 / draws.len() as f64).min(1.0)
}

/// Location-coefficient view used for scenario contrasts.
pub(crate) fn location_covariance(fit: &GevFit) -> DMatrix<f64> {
    let p = fit.location_coefficients.len();
    fit.coef_covariance.view((0, 0), (p, p)).into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regress::INTERCEPT;
    use crate::data::{CovariateRole, TimeSeries};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scen(pairs: &[(&str, f64)]) -> Scenario {
        Scenario::new("s", pairs.iter().map(|(k, v)| (k.to_string(), *v)))
    }

    fn gumbel_fit(covs: &[&str], loc: Vec<f64>) -> GevFit {
        let mut names = vec![INTERCEPT.to_string()];
        names.extend(covs.iter().map(|s| s.to_string()));
        GevFit {
            names,
            location_coefficients: loc,
            scale: 1.0,
            shape: 0.0,
            log_likelihood: 0.0,
            start_log_likelihood: 0.0,
            coef_covariance: DMatrix::zeros(1, 1),
            iterations: 0,
            n: 0,
        }
    }

    #[test]
    fn closed_form_gumbel() {
        let rl = gev_return_level(0.0, 1.0, 0.0, 2.0).unwrap();
        assert!((rl - (-(2f64.ln()).ln())).abs() < 1e-15);
        assert!((rl - 0.366_512_920_581_664_3).abs() < 1e-15);
        let p = gev_exceedance(0.0, 1.0, 0.0, 2.0);
        assert!((p - (1.0 - (-(-2f64).exp()).exp())).abs() < 1e-15);
        assert!((p - 0.126_576_981_506_883_4).abs() < 1e-13);
    }

    #[test]
    fn invalid_periods() {
        for p in [1.0, 0.5, f64::INFINITY, f64::NAN] {
            assert!(matches!(
                gev_return_level(0.0, 1.0, 0.1, p),
                Err(Error::InvalidPeriod(_))
            ));
        }
    }

    #[test]
    fn outside_support() {
        // ξ > 0: lower endpoint μ - σ/ξ = -5
        assert_eq!(gev_exceedance(0.0, 1.0, 0.2, -6.0), 1.0);
        // ξ < 0: upper endpoint μ + σ/|ξ| = 5
        assert_eq!(gev_exceedance(0.0, 1.0, -0.2, 6.0), 0.0);
        assert_eq!(gev_exceedance(0.0, 1.0, 0.0, -1e6), 1.0);
    }

    #[test]
    fn inversion_and_monotonicity() {
        for &xi in &[-0.2, 0.0, 0.3] {
            let mut prev = f64::NEG_INFINITY;
            for &p in &[2.0, 10.0, 100.0, 1000.0] {
                let rl = gev_return_level(1.0, 0.7, xi, p).unwrap();
                assert!(rl > prev);
                prev = rl;
                assert!((gev_exceedance(1.0, 0.7, xi, rl) - 1.0 / p).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn location_shift_and_ratios() {
        let fit = gumbel_fit(&["x"], vec![0.0, 0.5]);
        let a = return_level(&fit, &scen(&[("x", 0.0)]), 20.0).unwrap();
        let b = return_level(&fit, &scen(&[("x", 1.0)]), 20.0).unwrap();
        assert!((b - a - 0.5).abs() < 1e-14);
        let rr = risk_ratio(&fit, &scen(&[("x", 1.0)]), &scen(&[("x", 0.0)]), 2.0).unwrap();
        let expect = (1.0 - (-(-1.5f64).exp()).exp()) / (1.0 - (-(-2f64).exp()).exp());
        assert!((rr.value - expect).abs() < 1e-14);
        let same = risk_ratio(&fit, &scen(&[("x", 1.0)]), &scen(&[("x", 1.0)]), 2.0).unwrap();
        assert_eq!(same.value, 1.0);
        assert!(exceedance_prob(&fit, &scen(&[("y", 1.0)]), 0.0).is_err());
        let far = risk_ratio(&fit, &scen(&[("x", 0.0)]), &scen(&[("x", -2000.0)]), 2.0);
        assert!(matches!(far, Err(Error::ZeroDenominator(_))));
    }

    fn sample_dataset(n: usize, seed: u64, shift: f64, slope: f64, xi: f64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..n).map(|i| i as f64 / n as f64 - 0.5).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|xv| gev_sample(shift + slope * xv, 1.0, xi, &mut rng))
            .collect();
        let covs = vec![(TimeSeries::from_values("x", "", 0, &x), CovariateRole::Forced)];
        Dataset::new(TimeSeries::from_values("y", "", 0, &y), covs, vec![]).unwrap()
    }

    #[test]
    fn gumbel_recovery_no_covariates() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let y: Vec<f64> = (0..5000).map(|_| gev_sample(0.0, 1.0, 0.0, &mut rng)).collect();
        let ds = Dataset::new(TimeSeries::from_values("y", "", 0, &y), vec![], vec![]).unwrap();
        let f = gev_fit(&ds).unwrap();
        assert!(f.location_coefficients[0].abs() < 0.05);
        assert!((f.scale - 1.0).abs() < 0.05);
        assert!(f.shape.abs() < 0.05);
        assert!(f.log_likelihood >= f.start_log_likelihood);
    }

    #[test]
    fn shift_equivariance() {
        let ds = sample_dataset(300, 5, 0.0, 1.0, 0.1);
        let shifted: Vec<f64> = ds.response().dense().iter().map(|v| v + 3.25).collect();
        let ds2 = ds.with_response_values(&shifted).unwrap();
        let a = gev_fit(&ds).unwrap();
        let b = gev_fit(&ds2).unwrap();
        assert!((b.location_coefficients[0] - a.location_coefficients[0] - 3.25).abs() < 1e-6);
        assert!((b.location_coefficients[1] - a.location_coefficients[1]).abs() < 1e-6);
        assert!((b.scale - a.scale).abs() < 1e-6);
        assert!((b.shape - a.shape).abs() < 1e-6);
    }

    #[test]
    fn location_trend_recovery() {
        let ds = sample_dataset(10_000, 9, 0.0, 2.0, -0.1);
        let f = gev_fit(&ds).unwrap();
        let se = f.coef_covariance[(1, 1)].sqrt();
        assert!((f.location_coefficients[1] - 2.0).abs() < 4.0 * se, "{f:?}");
        assert!(se < 0.1);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let ds = sample_dataset(60, 3, 0.2, 1.0, 0.25);
        let design = location_design(&ds).unwrap();
        let y = ds.response().dense();
        let prob = Problem::new(&design, &y, GevOptions::default()).unwrap();
        for th in [vec![0.1, 0.8, 0.05, 0.2], vec![0.0, 1.0, -0.1, 1e-7], vec![0.0, 1.0, -0.1, 0.0]] {
            let g = prob.grad(&th).unwrap();
            for j in 0..th.len() {
                let h = 1e-6;
                let mut a = th.clone();
                let mut b = th.clone();
                a[j] += h;
                b[j] -= h;
                let fd = (prob.nll(&a) - prob.nll(&b)) / (2.0 * h);
                assert!((fd - g[j]).abs() < 1e-6, "j={j} fd={fd} g={}", g[j]);
            }
        }
    }

    #[test]
    fn too_few_observations() {
        let ds = sample_dataset(10, 1, 0.0, 1.0, 0.0);
        assert!(matches!(gev_fit(&ds), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn rr_test_identical_scenarios() {
        let ds = sample_dataset(80, 21, 0.0, 0.0, 0.0);
        let s = scen(&[("x", 0.3)]);
        let rr = test_rr_one(&ds, &s, &s, 1.5, 500, 4, 0.95).unwrap();
        let (lo, hi) = rr.ci.unwrap();
        assert!(lo <= 1.0 && hi >= 1.0);
        assert_eq!(rr.p_value_rr1, Some(1.0));
        assert!(matches!(
            test_rr_one(&ds, &s, &s, 1.5, 100, 4, 0.95),
            Err(Error::TooFewReplicates { .. })
        ));
    }

    #[test]
    fn rr_test_is_deterministic() {
        let ds = sample_dataset(60, 2, 0.0, 1.0, 0.0);
        let f = scen(&[("x", 0.5)]);
        let c = scen(&[("x", -0.5)]);
        let a = test_rr_one(&ds, &f, &c, 1.5, 500, 77, 0.9).unwrap();
        let b = test_rr_one(&ds, &f, &c, 1.5, 500, 77, 0.9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tail_rule() {
        assert_eq!(tail_p_value(&[0.0, 0.0]), 1.0);
        assert_eq!(tail_p_value(&[1.0, 2.0, 3.0, -1.0]), 0.5);
        assert_eq!(tail_p_value(&[1.0, 2.0]), 0.0);
    }
}
