//! C ABI over `climattr`.
//!
//! Every fallible function returns a [`ClimattrStatus`]; on failure the
//! message is available from [`climattr_last_error`] on the same thread.
//! Handles are opaque and must be released with their `_free` function.
//! Arrays are passed as pointer + length; missing values are NaN.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use climattr::data::{CovariateRole, Dataset, TimeSeries};
use climattr::extremes::{gev_exceedance, gev_return_level};
use climattr::granger::{gaussian_transfer_entropy, gc_test, Decision, VarSpec};
use climattr::pipeline::{run_file, Command, Overrides};
use climattr::regress::{ols_fit, DesignMatrix, FitResult};
use climattr::report::write_outputs;
use climattr::statcf::{delta, fit_statcf, fit_statcf_gev, CounterfactualModel, Scenario};
use climattr::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClimattrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DataError = 3,
    NumericalError = 4,
    IoError = 5,
    Panic = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> ClimattrStatus {
    match e {
        _ if e.is_numerical() => ClimattrStatus::NumericalError,
        Error::Io(_) => ClimattrStatus::IoError,
        Error::Config { source, .. } => status_of(source),
        Error::InvalidArgument(_)
        | Error::UnknownCoefficient(_)
        | Error::TooFewReplicates { .. }
        | Error::InvalidPeriod(_)
        | Error::DimensionMismatch(_)
        | Error::NotNested(_) => ClimattrStatus::InvalidArgument,
        _ => ClimattrStatus::DataError,
    }
}

enum Fail {
    Null(&'static str),
    Arg(String),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> ClimattrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ClimattrStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            ClimattrStatus::NullPointer
        }
        Ok(Err(Fail::Arg(msg))) => {
            set_error(msg);
            ClimattrStatus::InvalidArgument
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            ClimattrStatus::Panic
        }
    }
}

unsafe fn slice<'a>(p: *const f64, n: usize, what: &'static str) -> Result<&'a [f64], Fail> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn string(p: *const c_char, what: &'static str) -> Result<String, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(str::to_owned)
        .map_err(|_| Fail::Arg(format!("{what} is not valid UTF-8")))
}

unsafe fn strings(p: *const *const c_char, n: usize, what: &'static str) -> Result<Vec<String>, Fail> {
    if n == 0 {
        return Ok(Vec::new());
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    std::slice::from_raw_parts(p, n)
        .iter()
        .map(|&s| string(s, what))
        .collect()
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

fn series(name: &str, first_year: i32, values: &[f64]) -> Result<TimeSeries, Fail> {
    let times = (0..values.len() as i32).map(|i| first_year + i).collect();
    let vals = values.iter().map(|v| (!v.is_nan()).then_some(*v)).collect();
    Ok(TimeSeries::new(name, "", times, vals)?)
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn climattr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn climattr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Annual series collected before alignment.
pub struct ClimattrDataset {
    response: TimeSeries,
    covariates: Vec<(TimeSeries, CovariateRole)>,
    auxiliary: Vec<TimeSeries>,
}

impl ClimattrDataset {
    fn build(&self) -> Result<Dataset, Error> {
        Dataset::new(
            self.response.clone(),
            self.covariates.clone(),
            self.auxiliary.clone(),
        )
    }
}

/// Starts a dataset from an annual response series beginning at `first_year`.
#[no_mangle]
pub unsafe extern "C" fn climattr_dataset_new(
    name: *const c_char,
    first_year: i32,
    values: *const f64,
    len: usize,
    out_dataset: *mut *mut ClimattrDataset,
) -> ClimattrStatus {
    guard(|| {
        let out_dataset = out(out_dataset, "out_dataset")?;
        let name = string(name, "name")?;
        let response = series(&name, first_year, slice(values, len, "values")?)?;
        *out_dataset = Box::into_raw(Box::new(ClimattrDataset {
            response,
            covariates: Vec::new(),
            auxiliary: Vec::new(),
        }));
        Ok(())
    })
}

/// Adds a covariate. `role` is 0 for a forced covariate, 1 for a driver.
#[no_mangle]
pub unsafe extern "C" fn climattr_dataset_add_covariate(
    dataset: *mut ClimattrDataset,
    name: *const c_char,
    first_year: i32,
    values: *const f64,
    len: usize,
    role: i32,
) -> ClimattrStatus {
    guard(|| {
        let ds = out(dataset, "dataset")?;
        let role = match role {
            0 => CovariateRole::Forced,
            1 => CovariateRole::Driver,
            r => return Err(Fail::Arg(format!("unknown covariate role {r}"))),
        };
        let s = series(&string(name, "name")?, first_year, slice(values, len, "values")?)?;
        ds.covariates.push((s, role));
        Ok(())
    })
}

/// Adds an auxiliary series (carried along, not regressed on).
#[no_mangle]
pub unsafe extern "C" fn climattr_dataset_add_auxiliary(
    dataset: *mut ClimattrDataset,
    name: *const c_char,
    first_year: i32,
    values: *const f64,
    len: usize,
) -> ClimattrStatus {
    guard(|| {
        let ds = out(dataset, "dataset")?;
        let s = series(&string(name, "name")?, first_year, slice(values, len, "values")?)?;
        ds.auxiliary.push(s);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn climattr_dataset_free(dataset: *mut ClimattrDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// Summary statistics of a least-squares fit.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct ClimattrFitSummary {
    pub r_squared: f64,
    pub residual_sd: f64,
    pub rss: f64,
    pub condition_number: f64,
    pub dof: usize,
    pub n: usize,
    pub n_coefficients: usize,
}

pub struct ClimattrFit {
    fit: FitResult,
}

/// Least squares on an n x k row-major predictor matrix. With an intercept
/// the coefficient vector has k + 1 entries, intercept first.
#[no_mangle]
pub unsafe extern "C" fn climattr_ols_fit(
    x: *const f64,
    n: usize,
    k: usize,
    y: *const f64,
    with_intercept: bool,
    out_fit: *mut *mut ClimattrFit,
) -> ClimattrStatus {
    guard(|| {
        let out_fit = out(out_fit, "out_fit")?;
        let x = slice(x, n * k, "x")?;
        let y = slice(y, n, "y")?;
        let cols = (0..k)
            .map(|j| (format!("x{}", j + 1), (0..n).map(|i| x[i * k + j]).collect()))
            .collect();
        let fit = ols_fit(&DesignMatrix::new(cols, with_intercept)?, y)?;
        *out_fit = Box::into_raw(Box::new(ClimattrFit { fit }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn climattr_fit_summary(
    fit: *const ClimattrFit,
    out_summary: *mut ClimattrFitSummary,
) -> ClimattrStatus {
    guard(|| {
        let f = &fit.as_ref().ok_or(Fail::Null("fit"))?.fit;
        *out(out_summary, "out_summary")? = ClimattrFitSummary {
            r_squared: f.r_squared,
            residual_sd: f.residual_sd,
            rss: f.rss,
            condition_number: f.condition_number,
            dof: f.dof,
            n: f.n(),
            n_coefficients: f.coefficients.len(),
        };
        Ok(())
    })
}

/// Copies coefficients and their standard errors; either output may be NULL.
/// `len` must equal the number of coefficients.
#[no_mangle]
pub unsafe extern "C" fn climattr_fit_coefficients(
    fit: *const ClimattrFit,
    out_coefficients: *mut f64,
    out_std_errors: *mut f64,
    len: usize,
) -> ClimattrStatus {
    guard(|| {
        let f = &fit.as_ref().ok_or(Fail::Null("fit"))?.fit;
        let k = f.coefficients.len();
        if len != k {
            return Err(Fail::Arg(format!("buffer length {len}, fit has {k} coefficients")));
        }
        if !out_coefficients.is_null() {
            std::slice::from_raw_parts_mut(out_coefficients, k).copy_from_slice(&f.coefficients);
        }
        if !out_std_errors.is_null() {
            let se = std::slice::from_raw_parts_mut(out_std_errors, k);
            for (i, s) in se.iter_mut().enumerate() {
                *s = f.coef_covariance[(i, i)].max(0.0).sqrt();
            }
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn climattr_fit_free(fit: *mut ClimattrFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}

pub struct ClimattrModel {
    model: CounterfactualModel,
}

/// Fits the counterfactual regression. `family` is 0 for Gaussian errors,
/// 1 for GEV (which always carries a location intercept).
#[no_mangle]
pub unsafe extern "C" fn climattr_statcf_fit(
    dataset: *const ClimattrDataset,
    include_intercept: bool,
    family: i32,
    out_model: *mut *mut ClimattrModel,
) -> ClimattrStatus {
    guard(|| {
        let out_model = out(out_model, "out_model")?;
        let ds = dataset.as_ref().ok_or(Fail::Null("dataset"))?.build()?;
        let model = match family {
            0 => fit_statcf(&ds, include_intercept)?,
            1 => fit_statcf_gev(&ds)?,
            f => return Err(Fail::Arg(format!("unknown error family {f}"))),
        };
        *out_model = Box::into_raw(Box::new(ClimattrModel { model }));
        Ok(())
    })
}

/// A scenario change with its interval and two-sided p-value.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct ClimattrChange {
    pub delta: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub p_value: f64,
}

/// `m(s2) - m(s1)` where both scenarios assign `values1[i]` / `values2[i]`
/// to covariate `names[i]`.
#[no_mangle]
pub unsafe extern "C" fn climattr_model_delta(
    model: *const ClimattrModel,
    names: *const *const c_char,
    values1: *const f64,
    values2: *const f64,
    len: usize,
    level: f64,
    out_change: *mut ClimattrChange,
) -> ClimattrStatus {
    guard(|| {
        let m = &model.as_ref().ok_or(Fail::Null("model"))?.model;
        let names = strings(names, len, "names")?;
        let v1 = slice(values1, len, "values1")?;
        let v2 = slice(values2, len, "values2")?;
        let s1 = Scenario::new("s1", names.iter().cloned().zip(v1.iter().copied()));
        let s2 = Scenario::new("s2", names.into_iter().zip(v2.iter().copied()));
        let d = delta(m, &s1, &s2, level)?;
        *out(out_change, "out_change")? = ClimattrChange {
            delta: d.delta,
            ci_lo: d.ci.0,
            ci_hi: d.ci.1,
            p_value: d.p_value,
        };
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn climattr_model_free(model: *mut ClimattrModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct ClimattrGcResult {
    pub f_statistic: f64,
    pub p_value: f64,
    pub rss_unrestricted: f64,
    pub rss_restricted: f64,
    pub dof_numerator: f64,
    pub dof_denominator: f64,
    pub gaussian_te: f64,
    pub reject: bool,
}

/// Conditional Granger-causality F-test on series of `dataset`.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn climattr_gc_test(
    dataset: *const ClimattrDataset,
    target: *const c_char,
    causes: *const *const c_char,
    n_causes: usize,
    conditioning: *const *const c_char,
    n_conditioning: usize,
    order: usize,
    alpha: f64,
    out_result: *mut ClimattrGcResult,
) -> ClimattrStatus {
    guard(|| {
        let ds = dataset.as_ref().ok_or(Fail::Null("dataset"))?.build()?;
        let spec = VarSpec {
            order,
            target: string(target, "target")?,
            candidate_cause: strings(causes, n_causes, "causes")?,
            conditioning: strings(conditioning, n_conditioning, "conditioning")?,
            include_intercept: true,
        };
        let r = gc_test(&ds, &spec, alpha)?;
        *out(out_result, "out_result")? = ClimattrGcResult {
            f_statistic: r.f_statistic,
            p_value: r.p_value,
            rss_unrestricted: r.rss_unrestricted,
            rss_restricted: r.rss_restricted,
            dof_numerator: r.dof.0,
            dof_denominator: r.dof.1,
            gaussian_te: r.gaussian_te,
            reject: r.decision == Decision::Reject,
        };
        Ok(())
    })
}

/// `0.5 ln(rss_restricted / rss_unrestricted)`.
#[no_mangle]
pub unsafe extern "C" fn climattr_gaussian_te(
    rss_restricted: f64,
    rss_unrestricted: f64,
    out_te: *mut f64,
) -> ClimattrStatus {
    guard(|| {
        *out(out_te, "out_te")? = gaussian_transfer_entropy(rss_restricted, rss_unrestricted)?;
        Ok(())
    })
}

/// Level exceeded with probability 1/period under GEV(mu, sigma, xi).
#[no_mangle]
pub unsafe extern "C" fn climattr_gev_return_level(
    mu: f64,
    sigma: f64,
    xi: f64,
    period: f64,
    out_level: *mut f64,
) -> ClimattrStatus {
    guard(|| {
        let out_level = out(out_level, "out_level")?;
        if sigma.is_nan() || sigma <= 0.0 {
            return Err(Fail::Arg(format!("scale must be positive, got {sigma}")));
        }
        *out_level = gev_return_level(mu, sigma, xi, period)?;
        Ok(())
    })
}

/// P(X > x) under GEV(mu, sigma, xi).
#[no_mangle]
pub unsafe extern "C" fn climattr_gev_exceedance(
    mu: f64,
    sigma: f64,
    xi: f64,
    x: f64,
    out_probability: *mut f64,
) -> ClimattrStatus {
    guard(|| {
        let out_probability = out(out_probability, "out_probability")?;
        if sigma.is_nan() || sigma <= 0.0 {
            return Err(Fail::Arg(format!("scale must be positive, got {sigma}")));
        }
        *out_probability = gev_exceedance(mu, sigma, xi, x);
        Ok(())
    })
}

/// Runs a config file as the CLI would (`command` is one of fit, attribute,
/// granger, fingerprint, simulate, report) and writes outputs to `out_dir`.
#[no_mangle]
pub unsafe extern "C" fn climattr_run_config(
    config_path: *const c_char,
    command: *const c_char,
    out_dir: *const c_char,
) -> ClimattrStatus {
    guard(|| {
        let path = string(config_path, "config_path")?;
        let cmd = match string(command, "command")?.as_str() {
            "fit" => Command::Fit,
            "attribute" => Command::Attribute,
            "granger" => Command::Granger,
            "fingerprint" => Command::Fingerprint,
            "simulate" => Command::Simulate,
            "report" => Command::Report,
            c => return Err(Fail::Arg(format!("unknown command `{c}`"))),
        };
        let dir = string(out_dir, "out_dir")?;
        let run = run_file(Path::new(&path), cmd, Overrides::default())?;
        write_outputs(&run.report, Path::new(&dir))?;
        Ok(())
    })
}
