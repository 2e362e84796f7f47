//! Year-indexed series, alignment and covariate transforms.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    name: String,
    unit: String,
    times: Vec<i32>,
    values: Vec<Option<f64>>,
}

impl TimeSeries {
    /// Builds a series; `times` must be strictly increasing.
    pub fn new(
        name: impl Into<String>,
        unit: impl Into<String>,
        times: Vec<i32>,
        values: Vec<Option<f64>>,
    ) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if let Some(w) = times.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(format!(
                "years must be strictly increasing ({} followed by {})",
                w[0], w[1]
            )));
        }
        Ok(Self {
            name: name.into(),
            unit: unit.into(),
            times,
            values,
        })
    }

    /// A complete series starting at `first_year`.
    pub fn from_values(
        name: impl Into<String>,
        unit: impl Into<String>,
        first_year: i32,
        values: &[f64],
    ) -> Self {
        let times = (0..values.len() as i32).map(|i| first_year + i).collect();
        Self {
            name: name.into(),
            unit: unit.into(),
            times,
            values: values.iter().copied().map(Some).collect(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn unit(&self) -> &str {
        &self.unit
    }

    pub fn times(&self) -> &[i32] {
        &self.times
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_unit(mut self, unit: impl Into<String>) -> Self {
        self.unit = unit.into();
        self
    }

    pub fn first_year(&self) -> Option<i32> {
        self.times.first().copied()
    }

    pub fn last_year(&self) -> Option<i32> {
        self.times.last().copied()
    }

    /// Value at `year`, `None` if the year is absent or flagged missing.
    pub fn get(&self, year: i32) -> Option<f64> {
        self.times
            .binary_search(&year)
            .ok()
            .and_then(|i| self.values[i])
    }

    pub fn is_complete(&self) -> bool {
        self.values.iter().all(Option::is_some)
    }

    /// Values with missing entries as NaN. Aligned series never contain any.
    pub fn dense(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.unwrap_or(f64::NAN)).collect()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> TimeSeries {
        TimeSeries {
            name: self.name.clone(),
            unit: self.unit.clone(),
            times: self.times.clone(),
            values: self.values.iter().map(|v| v.map(&f)).collect(),
        }
    }

    /// Pointwise sum over the common years; missing in either gives missing.
    pub fn add(&self, other: &TimeSeries) -> TimeSeries {
        let (times, values) = self
            .times
            .iter()
            .zip(&self.values)
            .filter_map(|(&t, v)| {
                other.times.binary_search(&t).ok().map(|j| {
                    let sum = match (v, other.values[j]) {
                        (Some(a), Some(b)) => Some(a + b),
                        _ => None,
                    };
                    (t, sum)
                })
            })
            .unzip();
        TimeSeries {
            name: self.name.clone(),
            unit: self.unit.clone(),
            times,
            values,
        }
    }

    fn restrict(&self, years: &[i32]) -> TimeSeries {
        TimeSeries {
            name: self.name.clone(),
            unit: self.unit.clone(),
            times: years.to_vec(),
            values: years.iter().map(|&y| self.get(y)).collect(),
        }
    }

    fn window(&self, start: i32, end: i32) -> Result<Vec<f64>> {
        let out_of_range = || Error::WindowOutOfRange {
            start,
            end,
            first: self.first_year().unwrap_or(0),
            last: self.last_year().unwrap_or(0),
        };
        let (first, last) = match (self.first_year(), self.last_year()) {
            (Some(f), Some(l)) => (f, l),
            _ => return Err(out_of_range()),
        };
        if start > end || start < first || end > last {
            return Err(out_of_range());
        }
        let vals: Vec<f64> = self
            .times
            .iter()
            .zip(&self.values)
            .filter(|(&t, _)| t >= start && t <= end)
            .filter_map(|(_, v)| *v)
            .collect();
        if vals.is_empty() {
            return Err(out_of_range());
        }
        Ok(vals)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CovariateRole {
    Forced,
    Driver,
}

/// Series restricted to a common, complete set of years.
#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    pub series: Vec<TimeSeries>,
    pub span: (i32, i32),
    /// Years inside the overlap dropped because some series was missing there.
    pub dropped: Vec<i32>,
}

/// Intersects year ranges and drops rows where any series is missing.
pub fn align(series: &[TimeSeries]) -> Result<Alignment> {
    if series.len() < 2 {
        return Err(Error::InvalidArgument(
            "alignment needs at least two series".into(),
        ));
    }
    let mut lo = i32::MIN;
    let mut hi = i32::MAX;
    for s in series {
        match (s.first_year(), s.last_year()) {
            (Some(f), Some(l)) => {
                lo = lo.max(f);
                hi = hi.min(l);
            }
            _ => return Err(Error::EmptyOverlap),
        }
    }
    if lo > hi {
        return Err(Error::EmptyOverlap);
    }
    let candidates: BTreeSet<i32> = series
        .iter()
        .flat_map(|s| s.times.iter().copied())
        .filter(|&t| t >= lo && t <= hi)
        .collect();
    let (kept, dropped): (Vec<i32>, Vec<i32>) = candidates
        .into_iter()
        .partition(|&t| series.iter().all(|s| s.get(t).is_some()));
    if kept.is_empty() {
        return Err(Error::EmptyOverlap);
    }
    Ok(Alignment {
        series: series.iter().map(|s| s.restrict(&kept)).collect(),
        span: (kept[0], kept[kept.len() - 1]),
        dropped,
    })
}

/// Response plus role-tagged covariates on one common time vector.
///
/// Auxiliary series ride along through alignment but are not regressors.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    response: TimeSeries,
    covariates: Vec<(TimeSeries, CovariateRole)>,
    auxiliary: Vec<TimeSeries>,
    span: (i32, i32),
    dropped: Vec<i32>,
}

impl Dataset {
    pub fn new(
        response: TimeSeries,
        covariates: Vec<(TimeSeries, CovariateRole)>,
        auxiliary: Vec<TimeSeries>,
    ) -> Result<Self> {
        let mut names = BTreeSet::new();
        let all = std::iter::once(&response)
            .chain(covariates.iter().map(|(s, _)| s))
            .chain(auxiliary.iter());
        for s in all {
            if !names.insert(s.name().to_string()) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate series name `{}`",
                    s.name()
                )));
            }
        }
        let mut all: Vec<TimeSeries> = Vec::with_capacity(1 + covariates.len() + auxiliary.len());
        all.push(response);
        all.extend(covariates.iter().map(|(s, _)| s.clone()));
        all.extend(auxiliary);
        let (aligned, span, dropped) = if all.len() == 1 {
            let s = all.pop().unwrap();
            let keep: Vec<i32> = s
                .times
                .iter()
                .zip(&s.values)
                .filter(|(_, v)| v.is_some())
                .map(|(&t, _)| t)
                .collect();
            let dropped = s.times.iter().copied().filter(|t| s.get(*t).is_none()).collect();
            if keep.is_empty() {
                return Err(Error::EmptySeries(s.name.clone()));
            }
            let span = (keep[0], keep[keep.len() - 1]);
            (vec![s.restrict(&keep)], span, dropped)
        } else {
            let a = align(&all)?;
            (a.series, a.span, a.dropped)
        };
        let mut it = aligned.into_iter();
        let response = it.next().unwrap();
        let covariates = covariates
            .iter()
            .map(|(_, role)| (it.next().unwrap(), *role))
            .collect();
        let auxiliary = it.collect();
        Ok(Self {
            response,
            covariates,
            auxiliary,
            span,
            dropped,
        })
    }

    pub fn response(&self) -> &TimeSeries {
        &self.response
    }

    pub fn covariates(&self) -> &[(TimeSeries, CovariateRole)] {
        &self.covariates
    }

    pub fn auxiliary(&self) -> &[TimeSeries] {
        &self.auxiliary
    }

    pub fn span(&self) -> (i32, i32) {
        self.span
    }

    pub fn dropped(&self) -> &[i32] {
        &self.dropped
    }

    pub fn times(&self) -> &[i32] {
        self.response.times()
    }

    pub fn len(&self) -> usize {
        self.response.len()
    }

    pub fn is_empty(&self) -> bool {
        self.response.is_empty()
    }

    pub fn covariate_names(&self) -> Vec<&str> {
        self.covariates.iter().map(|(s, _)| s.name()).collect()
    }

    pub fn covariate(&self, name: &str) -> Option<&TimeSeries> {
        self.covariates
            .iter()
            .map(|(s, _)| s)
            .find(|s| s.name() == name)
    }

    pub fn role(&self, name: &str) -> Option<CovariateRole> {
        self.covariates
            .iter()
            .find(|(s, _)| s.name() == name)
            .map(|(_, r)| *r)
    }

    /// Looks a series up by name among response, covariates and auxiliaries.
    pub fn series(&self, name: &str) -> Option<&TimeSeries> {
        if self.response.name() == name {
            return Some(&self.response);
        }
        self.covariate(name)
            .or_else(|| self.auxiliary.iter().find(|s| s.name() == name))
    }

    /// Replaces the response values, keeping names and years.
    pub fn with_response_values(&self, values: &[f64]) -> Result<Dataset> {
        if values.len() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} response values for {} rows",
                values.len(),
                self.len()
            )));
        }
        let mut out = self.clone();
        out.response.values = values.iter().copied().map(Some).collect();
        Ok(out)
    }
}

/// Subtracts the mean over `[start, end]`.
pub fn anomalies(s: &TimeSeries, start: i32, end: i32) -> Result<TimeSeries> {
    let m = climatological_mean(s, start, end)?;
    Ok(s.map(|v| v - m))
}

/// Subtracts the value at `ref_year`, so the result is exactly zero there.
pub fn baseline_shift(s: &TimeSeries, ref_year: i32) -> Result<TimeSeries> {
    let r = s.get(ref_year).ok_or(Error::YearNotFound(ref_year))?;
    Ok(s.map(|v| v - r))
}

/// Arithmetic mean of the observed values in `[start, end]`.
pub fn climatological_mean(s: &TimeSeries, start: i32, end: i32) -> Result<f64> {
    let vals = s.window(start, end)?;
    Ok(vals.iter().sum::<f64>() / vals.len() as f64)
}

/// Minimum and maximum of the observed values.
pub fn series_range(s: &TimeSeries) -> Result<(f64, f64)> {
    let mut it = s.values.iter().filter_map(|v| *v);
    let first = it.next().ok_or_else(|| Error::EmptySeries(s.name.clone()))?;
    Ok(it.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ts(first: i32, vals: &[f64]) -> TimeSeries {
        TimeSeries::from_values("s", "u", first, vals)
    }

    #[test]
    fn rejects_unsorted_years() {
        let r = TimeSeries::new("a", "", vec![2000, 1999], vec![Some(1.0), Some(2.0)]);
        assert!(r.is_err());
        let r = TimeSeries::new("a", "", vec![2000, 2000], vec![Some(1.0), Some(2.0)]);
        assert!(r.is_err());
    }

    #[test]
    fn align_intersects_spans() {
        let a = ts(1900, &vec![0.0; 116]).with_name("a");
        let b = ts(1950, &vec![0.0; 71]).with_name("b");
        let al = align(&[a, b]).unwrap();
        assert_eq!(al.span, (1950, 2015));
        assert_eq!(al.series[0].len(), 66);
        assert!(al.dropped.is_empty());
    }

    #[test]
    fn align_identity_case() {
        let a = ts(1900, &vec![1.0; 116]).with_name("a");
        let b = ts(1900, &vec![2.0; 116]).with_name("b");
        let al = align(&[a.clone(), b]).unwrap();
        assert_eq!(al.span, (1900, 2015));
        assert_eq!(al.dropped.len(), 0);
        assert_eq!(al.series[0], a);
    }

    #[test]
    fn align_drops_missing_rows() {
        let a = ts(1900, &[0.0; 11]).with_name("a");
        let times: Vec<i32> = (1900..=1910).collect();
        let vals = times
            .iter()
            .map(|&t| if t == 1905 { None } else { Some(1.0) })
            .collect();
        let b = TimeSeries::new("b", "", times, vals).unwrap();
        let al = align(&[a, b]).unwrap();
        assert_eq!(al.series[0].len(), 10);
        assert_eq!(al.dropped, vec![1905]);
        assert!(al.series[1].get(1905).is_none());
    }

    #[test]
    fn align_disjoint_is_error() {
        let a = ts(1900, &[0.0; 5]).with_name("a");
        let b = ts(2000, &[0.0; 5]).with_name("b");
        assert!(matches!(align(&[a, b]), Err(Error::EmptyOverlap)));
    }

    #[test]
    fn anomaly_examples() {
        let s = ts(2000, &[1.0, 2.0, 3.0]);
        assert_eq!(anomalies(&s, 2000, 2002).unwrap().dense(), vec![-1.0, 0.0, 1.0]);
        let s = ts(2000, &[2.0, 4.0, 6.0, 8.0]);
        assert_eq!(
            anomalies(&s, 2000, 2001).unwrap().dense(),
            vec![-1.0, 1.0, 3.0, 5.0]
        );
        let c = ts(2000, &[4.25; 7]);
        assert!(anomalies(&c, 2001, 2004).unwrap().dense().iter().all(|&v| v == 0.0));
        assert!(matches!(
            anomalies(&s, 1999, 2001),
            Err(Error::WindowOutOfRange { .. })
        ));
        assert!(anomalies(&s, 2002, 2001).is_err());
    }

    #[test]
    fn baseline_examples() {
        let s = ts(1900, &[5.0, 7.0, 9.0]);
        assert_eq!(baseline_shift(&s, 1900).unwrap().dense(), vec![0.0, 2.0, 4.0]);
        let s = ts(1900, &[3.0, 1.0, 2.0]);
        assert_eq!(baseline_shift(&s, 1901).unwrap().get(1901), Some(0.0));
        assert!(matches!(baseline_shift(&s, 1800), Err(Error::YearNotFound(1800))));
    }

    #[test]
    fn means_and_ranges() {
        assert_eq!(climatological_mean(&ts(1, &[1.0, 2.0, 3.0]), 1, 3).unwrap(), 2.0);
        assert_eq!(climatological_mean(&ts(1, &[0.3; 9]), 2, 5).unwrap(), 0.3);
        assert_eq!(series_range(&ts(1, &[3.0, 1.0, 2.0])).unwrap(), (1.0, 3.0));
        assert_eq!(series_range(&ts(1, &[7.0; 4])).unwrap(), (7.0, 7.0));
        let empty = TimeSeries::new("e", "", vec![1], vec![None]).unwrap();
        assert!(series_range(&empty).is_err());
    }

    #[test]
    fn dataset_rejects_duplicate_names() {
        let a = ts(1, &[1.0, 2.0]).with_name("x");
        let b = ts(1, &[1.0, 2.0]).with_name("x");
        assert!(Dataset::new(a, vec![(b, CovariateRole::Forced)], vec![]).is_err());
    }

    fn arb_series(name: &'static str) -> impl Strategy<Value = TimeSeries> {
        (1890i32..1910, prop::collection::vec(prop::option::weighted(0.9, -5.0f64..5.0), 1..40))
            .prop_map(move |(first, vals)| {
                let times = (0..vals.len() as i32).map(|i| first + i).collect();
                TimeSeries::new(name, "u", times, vals).unwrap()
            })
    }

    proptest! {
        #[test]
        fn align_is_idempotent(a in arb_series("a"), b in arb_series("b"), c in arb_series("c")) {
            if let Ok(once) = align(&[a, b, c]) {
                let twice = align(&once.series).unwrap();
                prop_assert_eq!(&twice.series, &once.series);
                prop_assert_eq!(twice.span, once.span);
                prop_assert!(twice.dropped.is_empty());
            }
        }

        #[test]
        fn anomaly_mean_is_zero(vals in prop::collection::vec(-100.0f64..100.0, 2..60), w in 0usize..30, len in 1usize..30) {
            let s = ts(1900, &vals);
            let start = 1900 + (w % vals.len()) as i32;
            let end = (start + len as i32 - 1).min(1900 + vals.len() as i32 - 1);
            let a = anomalies(&s, start, end).unwrap();
            prop_assert!(climatological_mean(&a, start, end).unwrap().abs() < 1e-12);
        }

        #[test]
        fn baseline_is_exactly_zero(vals in prop::collection::vec(-1e6f64..1e6, 1..50), k in 0usize..50) {
            let s = ts(1950, &vals);
            let y = 1950 + (k % vals.len()) as i32;
            prop_assert_eq!(baseline_shift(&s, y).unwrap().get(y), Some(0.0));
        }

        #[test]
        fn range_is_permutation_invariant(vals in prop::collection::vec(-1e3f64..1e3, 1..50), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut shuffled = vals.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(series_range(&ts(0, &vals)).unwrap(), series_range(&ts(0, &shuffled)).unwrap());
        }
    }
}
