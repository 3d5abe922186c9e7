//! Monte-Carlo sweeps over synthetic configurations and checks of the KS
//! tail behaviour against its theoretical approximations.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acm::{a0, generate, tau, AcmConfig};
use crate::cluster::LabelVector;
use crate::error::{Error, Result};
use crate::ks::{build_null_table, default_null_draws, ks_of_standardized, NullTable};
use crate::matrix::mean_sd;
use crate::pipeline::{run, Method, PipelineOptions, ThresholdRule};
use crate::rng::{self, derive_seed, Domain};

/// A method column of a simulation table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimMethod {
    /// IF-PCA with the HC threshold.
    Ifpca1,
    /// IF-PCA with `t = sqrt(2 q log p)` for every `q` of the configuration.
    Ifpca2,
    Other(Method),
}

impl fmt::Display for SimMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimMethod::Ifpca1 => f.write_str("ifpca1"),
            SimMethod::Ifpca2 => f.write_str("ifpca2"),
            SimMethod::Other(m) => m.fmt(f),
        }
    }
}

impl FromStr for SimMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ifpca1" => Ok(SimMethod::Ifpca1),
            "ifpca2" => Ok(SimMethod::Ifpca2),
            other => other.parse().map(SimMethod::Other),
        }
    }
}

pub const DEFAULT_METHODS: [SimMethod; 2] = [SimMethod::Ifpca1, SimMethod::Ifpca2];

#[derive(Debug, Clone)]
pub struct SimulateOptions {
    pub reps: usize,
    pub seed: u64,
    pub methods: Vec<SimMethod>,
    /// Simulated null size per distinct `n`; `None` means `max(10^6, 100 p)`.
    pub null_draws: Option<usize>,
    pub replicates: usize,
}

impl Default for SimulateOptions {
    fn default() -> Self {
        Self { reps: 100, seed: 0, methods: DEFAULT_METHODS.to_vec(), null_draws: None, replicates: 30 }
    }
}

/// One line of a simulation table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimRow {
    pub experiment: String,
    pub setting: String,
    pub method: String,
    pub mean_error: f64,
    pub sd_error: f64,
    pub reps: usize,
    /// Runs where the threshold left nothing selected; they are scored as
    /// if every sample were put in one cluster.
    #[serde(skip)]
    pub empty_runs: usize,
}

fn run_labels(x: &crate::matrix::DataMatrix, opts: &PipelineOptions, null: Option<&NullTable>) -> Result<Option<LabelVector>> {
    match run(x, opts, null) {
        Ok(r) => Ok(Some(r.label_vector())),
        Err(Error::EmptySelection { .. } | Error::NoEligibleIndex) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Error of every method column on one data set, in column order.
fn one_rep(
    cfg: &AcmConfig,
    columns: &[(String, PipelineOptions)],
    null: Option<&NullTable>,
    data_seed: u64,
) -> Result<Vec<(f64, bool)>> {
    let (x, truth) = generate(cfg, data_seed)?;
    columns
        .iter()
        .map(|(_, opts)| {
            let labels = run_labels(&x, opts, null)?;
            let empty = labels.is_none();
            let labels = labels.unwrap_or_else(|| LabelVector::new(vec![1; x.n()], cfg.k).expect("k >= 1"));
            Ok((crate::cluster::hamming_error(&labels, &truth.y, cfg.k)?, empty))
        })
        .collect()
}

fn method_columns(cfg: &AcmConfig, opts: &SimulateOptions) -> Vec<(String, PipelineOptions)> {
    let base = PipelineOptions { replicates: opts.replicates, hc_fallback: true, ..PipelineOptions::simulation(cfg.k) };
    let mut out = Vec::new();
    for m in &opts.methods {
        match m {
            SimMethod::Ifpca1 => out.push(("ifpca1".to_string(), base.clone())),
            SimMethod::Ifpca2 => {
                for &q in &cfg.fixed_q {
                    let label = if cfg.fixed_q.len() == 1 { "ifpca2".to_string() } else { format!("ifpca2(q={q})") };
                    out.push((label, PipelineOptions { threshold: ThresholdRule::FixedQ { q }, ..base.clone() }));
                }
            }
            SimMethod::Other(method) => out.push((method.to_string(), PipelineOptions { method: *method, ..base.clone() })),
        }
    }
    out
}

/// Seed of repetition `rep` of configuration `index` in a sweep.
pub fn rep_seed(master: u64, index: usize, rep: usize) -> u64 {
    derive_seed(derive_seed(master, Domain::SimulationRep, index as u64), Domain::SimulationRep, rep as u64)
}

/// Runs `opts.reps` data sets per configuration and summarizes the Hamming
/// errors per method. One null table is simulated per distinct `n` and shared.
pub fn simulate(experiment: &str, configs: &[AcmConfig], opts: &SimulateOptions) -> Result<Vec<SimRow>> {
    simulate_with_nulls(experiment, configs, opts, &mut BTreeMap::new())
}

/// [`simulate`] with a cache of null tables keyed by `n`; missing tables are
/// simulated and added.
pub fn simulate_with_nulls(
    experiment: &str,
    configs: &[AcmConfig],
    opts: &SimulateOptions,
    nulls: &mut BTreeMap<usize, NullTable>,
) -> Result<Vec<SimRow>> {
    if opts.reps == 0 {
        return Err(Error::InvalidConfig("reps must be positive".into()));
    }
    if opts.methods.is_empty() {
        return Err(Error::InvalidConfig("no methods requested".into()));
    }
    let needs_null = opts.methods.contains(&SimMethod::Ifpca1)
        || opts.methods.iter().any(|m| matches!(m, SimMethod::Other(Method::IfKmeans | Method::IfHier)));
    let mut rows = Vec::new();
    for (ci, cfg) in configs.iter().enumerate() {
        cfg.validate()?;
        let n = cfg.n();
        if needs_null && !nulls.contains_key(&n) {
            let draws = opts.null_draws.unwrap_or_else(|| default_null_draws(cfg.p));
            nulls.insert(n, build_null_table(n, draws, derive_seed(opts.seed, Domain::NullDraw, n as u64))?);
        }
        let columns: Vec<(String, PipelineOptions)> = method_columns(cfg, opts)
            .into_iter()
            .map(|(name, o)| (name, PipelineOptions { seed: rep_seed(opts.seed, ci, usize::MAX), ..o }))
            .collect();
        let null = nulls.get(&n);
        let per_rep: Vec<Vec<(f64, bool)>> = (0..opts.reps)
            .into_par_iter()
            .map(|rep| {
                let cols: Vec<(String, PipelineOptions)> = columns
                    .iter()
                    .map(|(name, o)| (name.clone(), PipelineOptions { seed: rep_seed(o.seed, rep, 0), ..o.clone() }))
                    .collect();
                one_rep(cfg, &cols, null, rep_seed(opts.seed, ci, rep))
            })
            .collect::<Result<_>>()?;
        for (c, (name, _)) in columns.iter().enumerate() {
            let errs: Vec<f64> = per_rep.iter().map(|r| r[c].0).collect();
            let (mean, sd) = mean_sd(&errs);
            rows.push(SimRow {
                experiment: experiment.to_string(),
                setting: cfg.setting.clone(),
                method: name.clone(),
                mean_error: mean,
                sd_error: if errs.len() > 1 { sd } else { 0.0 },
                reps: opts.reps,
                empty_runs: per_rep.iter().filter(|r| r[c].1).count(),
            });
        }
    }
    Ok(rows)
}

/// Header `experiment,setting,method,mean_error,sd_error,reps`.
pub fn write_sim_csv<W: Write>(rows: &[SimRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::InvalidInput(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// `(sqrt(2) a0)^-1 exp(-t^2 / (2 a0^2))`, the lower envelope of the KS null
/// survival function; twice this is the upper envelope.
pub fn null_tail_approx(t: f64) -> f64 {
    let a = a0();
    (-t * t / (2.0 * a * a)).exp() / (2f64.sqrt() * a)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullTailRow {
    pub t: f64,
    pub empirical_survival: f64,
    pub theory_lower: f64,
    pub theory_upper: f64,
    pub ratio: f64,
    /// Null draws with `psi >= t`.
    pub hits: usize,
}

pub fn null_tail_rows(table: &NullTable, grid: &[f64]) -> Vec<NullTailRow> {
    grid.iter()
        .map(|&t| {
            let s = table.survival(t);
            let lower = null_tail_approx(t);
            NullTailRow {
                t,
                empirical_survival: s,
                theory_lower: lower,
                theory_upper: 2.0 * lower,
                ratio: s / lower,
                hits: (s * table.len() as f64).round() as usize,
            }
        })
        .collect()
}

pub fn write_null_tail_csv<W: Write>(rows: &[NullTailRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "t,empirical_survival,theory_lower,theory_upper,ratio")?;
    for r in rows {
        writeln!(out, "{},{:e},{:e},{:e},{}", r.t, r.empirical_survival, r.theory_lower, r.theory_upper, r.ratio)?;
    }
    Ok(())
}

/// A single useful feature: class weights and standardized contrast means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AltSpec {
    pub delta: Vec<f64>,
    pub m: Vec<f64>,
}

impl AltSpec {
    pub fn validate(&self) -> Result<()> {
        if self.delta.is_empty() || self.delta.len() != self.m.len() {
            return Err(Error::InvalidConfig("alt spec needs matching delta and m".into()));
        }
        if self.delta.iter().any(|&d| !(d > 0.0)) || (self.delta.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig("alt delta must be positive and sum to 1".into()));
        }
        if self.m.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidConfig("alt m must be finite".into()));
        }
        Ok(())
    }

    pub fn tau(&self, n: usize) -> f64 {
        tau(&self.m, &self.delta, n)
    }
}

/// KS scores of `reps` independent useful features: each sample draws its
/// class from `delta` and its value from `N(m_class, 1)`; the column is
/// standardized before scoring.
pub fn alt_draws(spec: &AltSpec, n: usize, reps: usize, seed: u64) -> Result<Vec<f64>> {
    spec.validate()?;
    if n < 2 {
        return Err(Error::InvalidInput("alt draws need n >= 2".into()));
    }
    let mut out: Vec<f64> = (0..reps)
        .into_par_iter()
        .map_init(
            || vec![0.0; n],
            |col, i| {
                let mut rng = rng::stream(seed, Domain::AltDraw, i as u64);
                for v in col.iter_mut() {
                    let u: f64 = rng.random();
                    let mut acc = 0.0;
                    let mut cls = spec.delta.len() - 1;
                    for (k, d) in spec.delta.iter().enumerate() {
                        acc += d;
                        if u < acc {
                            cls = k;
                            break;
                        }
                    }
                    *v = spec.m[cls] + rng.sample::<f64, _>(StandardNormal);
                }
                let (mean, sd) = mean_sd(col);
                for v in col.iter_mut() {
                    *v = (*v - mean) / sd;
                }
                ks_of_standardized(col)
            },
        )
        .collect();
    out.sort_by(f64::total_cmp);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AltTailRow {
    pub t: f64,
    pub empirical_miss: f64,
    pub bound: f64,
}

/// `P(psi <= t)` from sorted alternative draws against
/// `K exp(-(tau - t)^2 / (2 K a0^2))`.
pub fn alt_tail_rows(sorted: &[f64], spec: &AltSpec, n: usize, grid: &[f64]) -> Vec<AltTailRow> {
    let k = spec.delta.len() as f64;
    let tau = spec.tau(n);
    let a = a0();
    grid.iter()
        .map(|&t| AltTailRow {
            t,
            empirical_miss: sorted.partition_point(|&v| v <= t) as f64 / sorted.len() as f64,
            bound: k * (-(tau - t).powi(2) / (2.0 * k * a * a)).exp(),
        })
        .collect()
}

pub fn write_alt_tail_csv<W: Write>(rows: &[AltTailRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "t,empirical_miss,bound")?;
    for r in rows {
        writeln!(out, "{},{:e},{:e}", r.t, r.empirical_miss, r.bound)?;
    }
    Ok(())
}
