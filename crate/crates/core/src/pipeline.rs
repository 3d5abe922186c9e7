//! End-to-end clustering: screening, thresholding, post-selection PCA and
//! k-means, plus the plain baselines it is compared against.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::acm::threshold_fixed;
use crate::cluster::{hamming_error, hierarchical_complete, kmeans, Init, KmeansOptions, LabelVector};
use crate::error::{Error, Result};
use crate::hc::{hc_threshold, HcResult};
use crate::ks::{
    build_null_table, default_null_draws, ks_scores, normalize_scores, pvalues, select_features, KsScores, NormMode,
    Normalization, NullTable,
};
use crate::matrix::{standardize_columns, ConstantColumns, DataMatrix, Matrix, StandardizedMatrix};
use crate::svd::{entrywise_truncate, truncated_left_svd, SvdOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Screening, threshold, post-selection PCA, k-means.
    #[default]
    Ifpca,
    /// PCA on all features, then k-means.
    Pca,
    Kmeans,
    #[serde(rename = "kmeanspp")]
    KmeansPp,
    Hier,
    /// Screening and threshold, then k-means on the retained columns.
    IfKmeans,
    /// Screening and threshold, then complete-linkage clustering on the retained columns.
    IfHier,
}

impl Method {
    pub const ALL: [Method; 7] =
        [Method::Ifpca, Method::Pca, Method::Kmeans, Method::KmeansPp, Method::Hier, Method::IfKmeans, Method::IfHier];

    pub fn name(self) -> &'static str {
        match self {
            Method::Ifpca => "ifpca",
            Method::Pca => "pca",
            Method::Kmeans => "kmeans",
            Method::KmeansPp => "kmeanspp",
            Method::Hier => "hier",
            Method::IfKmeans => "if-kmeans",
            Method::IfHier => "if-hier",
        }
    }

    pub fn screens(self) -> bool {
        matches!(self, Method::Ifpca | Method::IfKmeans | Method::IfHier)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown method `{s}`")))
    }
}

/// How the screening cut-off is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum ThresholdRule {
    Hc,
    Fixed { t: f64 },
    /// `t = sqrt(2 q log p)`.
    FixedQ { q: f64 },
}

impl ThresholdRule {
    pub fn validate(self) -> Result<()> {
        match self {
            ThresholdRule::Fixed { t } if !t.is_finite() => {
                Err(Error::InvalidConfig(format!("fixed threshold must be finite, got {t}")))
            }
            ThresholdRule::FixedQ { q } if !(q > 0.0 && q.is_finite()) => {
                Err(Error::InvalidConfig(format!("fixed-q needs q > 0, got {q}")))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for ThresholdRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThresholdRule::Hc => f.write_str("hc"),
            ThresholdRule::Fixed { t } => write!(f, "fixed:{t}"),
            ThresholdRule::FixedQ { q } => write!(f, "fixed-q:{q}"),
        }
    }
}

/// Parses `hc`, `fixed:<t>` or `fixed-q:<q>`.
impl FromStr for ThresholdRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let num = |v: &str| v.parse::<f64>().map_err(|_| Error::InvalidInput(format!("bad threshold value `{v}`")));
        let rule = if s == "hc" {
            ThresholdRule::Hc
        } else if let Some(v) = s.strip_prefix("fixed:") {
            ThresholdRule::Fixed { t: num(v)? }
        } else if let Some(v) = s.strip_prefix("fixed-q:") {
            ThresholdRule::FixedQ { q: num(v)? }
        } else {
            return Err(Error::InvalidInput(format!("unknown threshold rule `{s}`")));
        };
        rule.validate().map_err(|e| Error::InvalidInput(e.to_string()))?;
        Ok(rule)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineOptions {
    pub k: usize,
    pub method: Method,
    pub normalization: NormMode,
    pub threshold: ThresholdRule,
    /// Clip embedding entries to `log(p)/sqrt(n)` in absolute value.
    pub truncate: bool,
    /// Size of the simulated null when no table is supplied; `None` means
    /// `max(10^6, 100 p)`.
    pub null_draws: Option<usize>,
    pub null_seed: u64,
    pub replicates: usize,
    pub seed: u64,
    /// Drop the p-value floor from the HC constraints if nothing is eligible.
    pub hc_fallback: bool,
    pub constant_columns: ConstantColumns,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            k: 2,
            method: Method::Ifpca,
            normalization: NormMode::MeanStd,
            threshold: ThresholdRule::Hc,
            truncate: false,
            null_draws: None,
            null_seed: 0,
            replicates: 30,
            seed: 0,
            hc_fallback: false,
            constant_columns: ConstantColumns::Error,
        }
    }
}

impl PipelineOptions {
    /// Defaults for synthetic data: raw scores, no renormalization.
    pub fn simulation(k: usize) -> Self {
        Self { k, normalization: NormMode::None, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let min_k = if matches!(self.method, Method::Ifpca | Method::Pca) { 2 } else { 1 };
        if self.k < min_k {
            return Err(Error::InvalidConfig(format!("method {} needs K >= {min_k}", self.method)));
        }
        if self.replicates == 0 {
            return Err(Error::InvalidConfig("replicates must be positive".into()));
        }
        if self.null_draws == Some(0) {
            return Err(Error::InvalidConfig("null_draws must be positive".into()));
        }
        self.threshold.validate()
    }

    fn kmeans_options(&self, init: Init) -> KmeansOptions {
        KmeansOptions { replicates: self.replicates, seed: self.seed, init, ..KmeansOptions::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HcSummary {
    pub j_hat: usize,
    pub max_hc: f64,
    pub n_eligible: usize,
    pub used_fallback: bool,
}

/// Wall-clock seconds per stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub standardize: f64,
    pub null_table: f64,
    pub screening: f64,
    pub embedding: f64,
    pub clustering: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub method: Method,
    pub n: usize,
    pub p: usize,
    pub k: usize,
    /// Cluster of every sample, `1..=k`.
    pub labels: Vec<usize>,
    /// Retained features as 1-based column numbers of the input.
    pub selected: Vec<usize>,
    pub n_selected: usize,
    pub threshold: Option<f64>,
    pub j_hat: Option<usize>,
    pub hc: Option<HcSummary>,
    pub normalization: Option<Normalization>,
    pub singular_values: Vec<f64>,
    pub warnings: Vec<String>,
    pub error_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
    pub config: PipelineOptions,
}

impl RunReport {
    pub fn label_vector(&self) -> LabelVector {
        LabelVector::new(self.labels.clone(), self.k).expect("report labels are valid")
    }

    /// Fills `error_rate` with the Hamming error against `truth`.
    pub fn with_truth(mut self, truth: &LabelVector) -> Result<Self> {
        let k = self.k.max(truth.k());
        self.error_rate = Some(hamming_error(&self.label_vector(), truth, k)?);
        Ok(self)
    }

    pub fn without_timings(mut self) -> Self {
        self.timings = None;
        self
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Outcome of the screening half of the pipeline.
#[derive(Debug, Clone)]
pub struct Screening {
    pub raw: KsScores,
    pub scores: KsScores,
    pub hc: Option<HcResult>,
    pub threshold: f64,
    /// Columns of `W` (0-based) with `score >= threshold`.
    pub selected: Vec<usize>,
}

/// KS scoring, normalization and thresholding of a standardized matrix.
/// A null table is only needed for the HC rule or `Lower50`.
pub fn screen(w: &StandardizedMatrix, opts: &PipelineOptions, null: Option<&NullTable>) -> Result<Screening> {
    let raw = ks_scores(w);
    let scores = normalize_scores(&raw, opts.normalization, null)?;
    let p = w.p();
    let (threshold, hc) = match opts.threshold {
        ThresholdRule::Fixed { t } => (t, None),
        ThresholdRule::FixedQ { q } => (threshold_fixed(q, p), None),
        ThresholdRule::Hc => {
            let null = null.ok_or_else(|| Error::InvalidInput("the HC rule needs a null table".into()))?;
            let reference = null.reference_for(opts.normalization)?;
            let pv = pvalues(&scores, &reference);
            let hc = hc_threshold(&pv, &scores, w.n(), opts.hc_fallback)?;
            (hc.t_hc, Some(hc))
        }
    };
    let selected = select_features(&scores, threshold)?.indices;
    Ok(Screening { raw, scores, hc, threshold, selected })
}

fn needs_null(opts: &PipelineOptions) -> bool {
    opts.method.screens() && (opts.threshold == ThresholdRule::Hc || opts.normalization == NormMode::Lower50)
}

/// Runs `opts.method` on `x`. When the method needs a simulated null and
/// `null` is `None`, one is built from `opts.null_draws` and `opts.null_seed`.
pub fn run(x: &DataMatrix, opts: &PipelineOptions, null: Option<&NullTable>) -> Result<RunReport> {
    opts.validate()?;
    let (n, k) = (x.n(), opts.k);
    if k > n {
        return Err(Error::InvalidK { k, n });
    }
    let start = Instant::now();
    let mut timings = Timings::default();
    let mut warnings = Vec::new();

    let mut clock = Instant::now();
    let w = standardize_columns(x, opts.constant_columns)?;
    timings.standardize = clock.elapsed().as_secs_f64();
    if w.dropped_any() {
        warnings.push(format!("dropped {} constant column(s)", x.p() - w.p()));
    }
    let p = w.p();

    let built;
    let null = match null {
        Some(t) if needs_null(opts) && t.n != n => {
            return Err(Error::InvalidInput(format!("null table was simulated for n = {}, data has n = {n}", t.n)));
        }
        Some(t) => Some(t),
        None if needs_null(opts) => {
            clock = Instant::now();
            built = build_null_table(n, opts.null_draws.unwrap_or_else(|| default_null_draws(p)), opts.null_seed)?;
            timings.null_table = clock.elapsed().as_secs_f64();
            Some(&built)
        }
        None => None,
    };

    let mut report = RunReport {
        method: opts.method,
        n,
        p: x.p(),
        k,
        labels: Vec::new(),
        selected: Vec::new(),
        n_selected: 0,
        threshold: None,
        j_hat: None,
        hc: None,
        normalization: None,
        singular_values: Vec::new(),
        warnings: Vec::new(),
        error_rate: None,
        timings: None,
        config: opts.clone(),
    };

    let columns: Vec<usize> = if opts.method.screens() {
        clock = Instant::now();
        let s = screen(&w, opts, null)?;
        timings.screening = clock.elapsed().as_secs_f64();
        report.threshold = Some(s.threshold);
        report.normalization = Some(s.scores.normalization);
        if let Some(hc) = &s.hc {
            report.j_hat = Some(hc.j_hat);
            report.hc = Some(HcSummary {
                j_hat: hc.j_hat,
                max_hc: hc.max_hc(),
                n_eligible: hc.eligible.len(),
                used_fallback: hc.used_fallback,
            });
            if hc.used_fallback {
                warnings.push("HC constraint set was empty; used the fallback without the p-value floor".into());
            }
        }
        s.selected
    } else {
        (0..p).collect()
    };
    let post: Matrix = if columns.len() == p { w.matrix().clone() } else { w.matrix().select_columns(&columns) };

    let labels = match opts.method {
        Method::Ifpca | Method::Pca => {
            clock = Instant::now();
            let mut emb = truncated_left_svd(&post, k - 1, &SvdOptions::default())?;
            if emb.degenerate_gap {
                warnings.push(format!("singular values {} and {} are nearly tied", k - 1, k));
            }
            if opts.truncate {
                emb = entrywise_truncate(&emb, (p as f64).ln() / (n as f64).sqrt());
            }
            timings.embedding = clock.elapsed().as_secs_f64();
            report.singular_values = emb.singular_values.clone();
            clock = Instant::now();
            let labels = kmeans(&emb.vectors, k, &opts.kmeans_options(Init::Uniform))?.labels;
            timings.clustering = clock.elapsed().as_secs_f64();
            labels
        }
        Method::Kmeans | Method::IfKmeans | Method::KmeansPp => {
            let init = if opts.method == Method::KmeansPp { Init::PlusPlus } else { Init::Uniform };
            clock = Instant::now();
            let labels = kmeans(&post, k, &opts.kmeans_options(init))?.labels;
            timings.clustering = clock.elapsed().as_secs_f64();
            labels
        }
        Method::Hier | Method::IfHier => {
            clock = Instant::now();
            let labels = hierarchical_complete(&post, k)?;
            timings.clustering = clock.elapsed().as_secs_f64();
            labels
        }
    };

    let original = w.original_index();
    report.selected = columns.iter().map(|&j| original[j] + 1).collect();
    report.n_selected = columns.len();
    report.labels = labels.labels().to_vec();
    report.warnings = warnings;
    timings.total = start.elapsed().as_secs_f64();
    report.timings = Some(timings);
    Ok(report)
}

/// IF-PCA with the Higher-Criticism threshold.
pub fn if_hct_pca(x: &DataMatrix, opts: &PipelineOptions, null: Option<&NullTable>) -> Result<RunReport> {
    run(x, &PipelineOptions { method: Method::Ifpca, threshold: ThresholdRule::Hc, ..opts.clone() }, null)
}

/// IF-PCA with a given threshold `t` on the (normalized) scores.
pub fn if_pca_fixed(x: &DataMatrix, k: usize, t: f64, opts: &PipelineOptions) -> Result<RunReport> {
    run(x, &PipelineOptions { k, method: Method::Ifpca, threshold: ThresholdRule::Fixed { t }, ..opts.clone() }, None)
}

/// PCA on every standardized feature followed by k-means.
pub fn classical_pca(x: &DataMatrix, k: usize, opts: &PipelineOptions) -> Result<RunReport> {
    run(x, &PipelineOptions { k, method: Method::Pca, ..opts.clone() }, None)
}

/// Screening followed by k-means or hierarchical clustering on the retained
/// columns directly.
pub fn if_hct_variant(x: &DataMatrix, opts: &PipelineOptions, null: Option<&NullTable>) -> Result<RunReport> {
    if !matches!(opts.method, Method::IfKmeans | Method::IfHier) {
        return Err(Error::InvalidConfig(format!("{} is not a screening variant", opts.method)));
    }
    run(x, opts, null)
}

pub fn baseline(x: &DataMatrix, k: usize, method: Method, opts: &PipelineOptions) -> Result<RunReport> {
    if !matches!(method, Method::Kmeans | Method::KmeansPp | Method::Hier) {
        return Err(Error::InvalidConfig(format!("{method} is not a baseline")));
    }
    run(x, &PipelineOptions { k, method, ..opts.clone() }, None)
}
