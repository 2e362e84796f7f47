//! Linear-Gaussian lagged causal graphs and size/power experiments.
//!
//! The shipped graph constructors use illustrative coefficients; the causal
//! structure (mediator, confounder, independent factor) is what matters.

use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{CovariateRole, Dataset, TimeSeries};
use crate::error::{Error, Result};
use crate::granger::{gc_test, Decision, VarSpec};
use crate::seeding::{child_seed, replicate_rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphKind {
    MediatorPlusDirect,
    Confounder,
    ConfounderPlusIndependent,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub name: String,
    pub noise_sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub from: String,
    pub to: String,
    pub lag: usize,
    pub coefficient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausalGraphSpec {
    pub kind: GraphKind,
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    pub length: usize,
    pub seed: u64,
}

fn node(name: &str) -> Node {
    Node {
        name: name.into(),
        noise_sd: 1.0,
    }
}

fn edge(from: &str, to: &str, lag: usize, coefficient: f64) -> Edge {
    Edge {
        from: from.into(),
        to: to.into(),
        lag,
        coefficient,
    }
}

impl CausalGraphSpec {
    pub fn custom(nodes: Vec<Node>, edges: Vec<Edge>, length: usize, seed: u64) -> Self {
        Self {
            kind: GraphKind::Custom,
            nodes,
            edges,
            length,
            seed,
        }
    }

    /// X → Z → Y with an optional direct X → Y edge (omitted when `direct`
    /// is 0). Z also varies on its own, so it is both a mediator and an
    /// independent cause of Y.
    pub fn mediator(direct: f64, length: usize, seed: u64) -> Self {
        let mut edges = vec![edge("X", "Z", 1, 0.6), edge("Z", "Y", 1, 0.6)];
        if direct != 0.0 {
            edges.push(edge("X", "Y", 1, direct));
        }
        Self {
            kind: GraphKind::MediatorPlusDirect,
            nodes: vec![node("X"), node("Z"), node("Y")],
            edges,
            length,
            seed,
        }
    }

    /// X ← Z → Y with a persistent Z and an optional X → Y edge.
    ///
    /// Z must carry memory for its lagged effect on X to line up with its
    /// effect on Y; without it the confounding is invisible at lag 1.
    pub fn confounder(direct: f64, length: usize, seed: u64) -> Self {
        let mut edges = vec![
            edge("Z", "Z", 1, 0.8),
            edge("Z", "X", 1, 0.7),
            edge("Z", "Y", 1, 0.7),
        ];
        if direct != 0.0 {
            edges.push(edge("X", "Y", 1, direct));
        }
        Self {
            kind: GraphKind::Confounder,
            nodes: vec![node("Z"), node("X"), node("Y")],
            edges,
            length,
            seed,
        }
    }

    /// The confounder graph plus an independent cause W → Y.
    pub fn confounder_plus_independent(direct: f64, length: usize, seed: u64) -> Self {
        let mut g = Self::confounder(direct, length, seed);
        g.kind = GraphKind::ConfounderPlusIndependent;
        g.nodes.push(node("W"));
        g.edges.push(edge("W", "W", 1, 0.5));
        g.edges.push(edge("W", "Y", 1, 0.5));
        g
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    fn index(&self, name: &str) -> Result<usize> {
        self.nodes
            .iter()
            .position(|n| n.name == name)
            .ok_or_else(|| Error::InvalidArgument(format!("edge references unknown node `{name}`")))
    }

    pub fn max_lag(&self) -> usize {
        self.edges.iter().map(|e| e.lag).max().unwrap_or(0)
    }

    /// Spectral radius of the VAR companion matrix.
    pub fn spectral_radius(&self) -> Result<f64> {
        let k = self.nodes.len();
        let l = self.max_lag();
        if l == 0 {
            return Ok(0.0);
        }
        let mut c = DMatrix::zeros(k * l, k * l);
        for e in &self.edges {
            let (from, to) = (self.index(&e.from)?, self.index(&e.to)?);
            c[(to, (e.lag - 1) * k + from)] += e.coefficient;
        }
        for i in k..k * l {
            c[(i, i - k)] = 1.0;
        }
        // Unbounded Schur iteration can stall (e.g. on nilpotent companions).
        match c.clone().try_schur(f64::EPSILON, 10_000) {
            Some(s) => Ok(s
                .complex_eigenvalues()
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max)),
            None => Ok(gelfand_radius(c)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::InvalidArgument("graph has no nodes".into()));
        }
        if self.length < 1 {
            return Err(Error::InvalidArgument("series length must be positive".into()));
        }
        for (i, n) in self.nodes.iter().enumerate() {
            if self.nodes[..i].iter().any(|m| m.name == n.name) {
                return Err(Error::InvalidArgument(format!("duplicate node `{}`", n.name)));
            }
            if !(n.noise_sd > 0.0 && n.noise_sd.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "node `{}` needs a positive finite noise sd",
                    n.name
                )));
            }
        }
        for e in &self.edges {
            self.index(&e.from)?;
            self.index(&e.to)?;
            if e.lag < 1 {
                return Err(Error::InvalidArgument(format!(
                    "edge {} -> {} has lag 0; only lagged edges are allowed",
                    e.from, e.to
                )));
            }
            if !e.coefficient.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "edge {} -> {} has a non-finite coefficient",
                    e.from, e.to
                )));
            }
        }
        let rho = self.spectral_radius()?;
        if rho >= 1.0 {
            return Err(Error::NonStationary(rho));
        }
        Ok(())
    }
}

/// `lim ||C^m||^(1/m)` by repeated squaring with rescaling.
fn gelfand_radius(mut m: DMatrix<f64>) -> f64 {
    let mut log_scale = 0.0;
    let mut power = 1.0;
    for _ in 0..60 {
        let n = m.norm();
        if n == 0.0 {
            return 0.0;
        }
        m /= n;
        log_scale += n.ln();
        m = &m * &m;
        log_scale *= 2.0;
        power *= 2.0;
    }
    let n = m.norm();
    if n == 0.0 {
        0.0
    } else {
        ((log_scale + n.ln()) / power).exp()
    }
}

/// Runs the recursion and discards a burn-in of 10 × the maximum lag.
///
/// Y is the response when present, otherwise the first node; every other
/// node becomes a driver covariate. Years run from 1.
pub fn simulate(spec: &CausalGraphSpec) -> Result<Dataset> {
    spec.validate()?;
    let k = spec.nodes.len();
    let burn = 10 * spec.max_lag();
    let total = burn + spec.length;
    let incoming: Vec<Vec<(usize, usize, f64)>> = (0..k)
        .map(|to| {
            spec.edges
                .iter()
                .filter(|e| spec.index(&e.to).ok() == Some(to))
                .map(|e| (spec.index(&e.from).unwrap(), e.lag, e.coefficient))
                .collect()
        })
        .collect();
    let mut rng = replicate_rng(spec.seed, 0);
    let mut v = vec![vec![0.0; total]; k];
    for t in 0..total {
        for j in 0..k {
            let mut x: f64 = incoming[j]
                .iter()
                .filter(|(_, lag, _)| *lag <= t)
                .map(|(src, lag, c)| c * v[*src][t - lag])
                .sum();
            let e: f64 = StandardNormal.sample(&mut rng);
            x += spec.nodes[j].noise_sd * e;
            v[j][t] = x;
        }
    }
    let series: Vec<TimeSeries> = spec
        .nodes
        .iter()
        .zip(&v)
        .map(|(n, vals)| TimeSeries::from_values(n.name.clone(), "", 1, &vals[burn..]))
        .collect();
    let ri = spec.nodes.iter().position(|n| n.name == "Y").unwrap_or(0);
    let mut response = None;
    let mut covariates = Vec::new();
    for (i, s) in series.into_iter().enumerate() {
        if i == ri {
            response = Some(s);
        } else {
            covariates.push((s, CovariateRole::Driver));
        }
    }
    Dataset::new(response.unwrap(), covariates, vec![])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub description: String,
    pub replicates: usize,
    pub rejections: usize,
    pub rejection_rate: f64,
    /// `sqrt(r (1 - r) / replicates)`.
    pub mc_standard_error: f64,
    pub mean_f: f64,
    pub alpha: f64,
}

/// Repeats simulate + Granger test with seeds derived from `master_seed`.
pub fn run_size_power(
    spec: &CausalGraphSpec,
    var_spec: &VarSpec,
    alpha: f64,
    replicates: usize,
    master_seed: u64,
) -> Result<ExperimentReport> {
    if replicates < 100 {
        return Err(Error::TooFewReplicates {
            got: replicates,
            min: 100,
        });
    }
    spec.validate()?;
    let results: Vec<(bool, f64)> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let ds = simulate(&spec.with_seed(child_seed(master_seed, r)))?;
            let gc = gc_test(&ds, var_spec, alpha)?;
            Ok((gc.decision == Decision::Reject, gc.f_statistic))
        })
        .collect::<Result<_>>()?;
    let rejections = results.iter().filter(|(r, _)| *r).count();
    let rate = rejections as f64 / replicates as f64;
    let mean_f = results.iter().map(|(_, f)| f).sum::<f64>() / replicates as f64;
    let cond = if var_spec.conditioning.is_empty() {
        String::from("unconditioned")
    } else {
        format!("conditioned on {}", var_spec.conditioning.join(", "))
    };
    Ok(ExperimentReport {
        description: format!(
            "{:?} graph, T={}, test {} -> {} at order {}, {cond}",
            spec.kind,
            spec.length,
            var_spec.candidate_cause.join(", "),
            var_spec.target,
            var_spec.order
        ),
        replicates,
        rejections,
        rejection_rate: rate,
        mc_standard_error: (rate * (1.0 - rate) / replicates as f64).sqrt(),
        mean_f,
        alpha,
    })
}
