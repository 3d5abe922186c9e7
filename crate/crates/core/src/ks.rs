//! Kolmogorov-Smirnov feature screening.
//!
//! Each standardized column is scored by `sqrt(n) * sup_t |F_n(t) - Phi(t)|`.
//! Scores can be renormalized against an empirical null, converted to
//! p-values through a Monte-Carlo null table, and thresholded into a
//! feature set.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{mean_sd, StandardizedMatrix};
use crate::rng::{self, Domain};

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// KS score of values that have already been standardized.
///
/// Uses the closed form over order statistics
/// `max_i max(i/n - Phi(w_(i)), Phi(w_(i)) - (i-1)/n)`.
pub fn ks_of_standardized(v: &[f64]) -> f64 {
    let mut sorted = v.to_vec();
    ks_sorting_in_place(&mut sorted)
}

fn ks_sorting_in_place(buf: &mut [f64]) -> f64 {
    // inputs are finite, so partial_cmp is total here and sorts faster
    buf.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let n = buf.len() as f64;
    let mut sup = 0.0f64;
    for (i, &w) in buf.iter().enumerate() {
        let phi = normal_cdf(w);
        let above = (i + 1) as f64 / n - phi;
        let below = phi - i as f64 / n;
        sup = sup.max(above).max(below);
    }
    n.sqrt() * sup
}

/// Renormalization applied to a score vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormMode {
    #[default]
    None,
    MeanStd,
    MedMad,
    Lower50,
}

impl std::str::FromStr for NormMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "meanstd" => Ok(Self::MeanStd),
            "medmad" => Ok(Self::MedMad),
            "lower50" => Ok(Self::Lower50),
            other => Err(Error::InvalidInput(format!("unknown normalization `{other}`"))),
        }
    }
}

/// The normalization that produced a score vector: `score* = (score - center) / scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub mode: NormMode,
    pub center: f64,
    pub scale: f64,
}

impl Normalization {
    pub const IDENTITY: Normalization = Normalization { mode: NormMode::None, center: 0.0, scale: 1.0 };

    fn apply(&self, x: f64) -> f64 {
        (x - self.center) / self.scale
    }
}

/// Per-feature KS scores.
#[derive(Debug, Clone, PartialEq)]
pub struct KsScores {
    pub scores: Vec<f64>,
    pub n: usize,
    pub normalization: Normalization,
}

impl KsScores {
    pub fn p(&self) -> usize {
        self.scores.len()
    }
}

pub fn ks_scores(w: &StandardizedMatrix) -> KsScores {
    let m = w.matrix();
    let scores = (0..m.cols()).into_par_iter().map(|j| ks_of_standardized(m.column(j))).collect();
    KsScores { scores, n: w.n(), normalization: Normalization::IDENTITY }
}

const MAD_CONSISTENCY: f64 = 1.4826;

fn median_of_sorted(s: &[f64]) -> f64 {
    let m = s.len();
    if m % 2 == 1 {
        s[m / 2]
    } else {
        0.5 * (s[m / 2 - 1] + s[m / 2])
    }
}

fn median(x: &[f64]) -> f64 {
    let mut s = x.to_vec();
    s.sort_unstable_by(f64::total_cmp);
    median_of_sorted(&s)
}

fn median_mad(x: &[f64]) -> (f64, f64) {
    let med = median(x);
    let dev: Vec<f64> = x.iter().map(|v| (v - med).abs()).collect();
    (med, MAD_CONSISTENCY * median(&dev))
}

/// Mean and SD of the `floor(len/2)` smallest values.
fn lower_half_mean_sd(x: &[f64]) -> Result<(f64, f64)> {
    let mut s = x.to_vec();
    s.sort_unstable_by(f64::total_cmp);
    let half = s.len() / 2;
    if half < 2 {
        return Err(Error::InvalidInput("lower-half matching needs at least 4 values".into()));
    }
    Ok(mean_sd(&s[..half]))
}

/// Center/scale for `mode` computed from `x`. `Lower50` is not self-contained
/// and is handled by [`normalize_scores`].
fn self_normalization(x: &[f64], mode: NormMode) -> Result<Normalization> {
    let (center, scale) = match mode {
        NormMode::None => return Ok(Normalization::IDENTITY),
        NormMode::MeanStd => mean_sd(x),
        NormMode::MedMad => median_mad(x),
        NormMode::Lower50 => unreachable!("lower50 needs a null table"),
    };
    if !(scale > 0.0) {
        return Err(Error::ZeroSpread);
    }
    Ok(Normalization { mode, center, scale })
}

/// Renormalizes raw scores.
///
/// `MeanStd` and `MedMad` standardize by the scores' own location and scale.
/// `Lower50` maps the scores affinely so the mean and SD of their lower half
/// match those of the lower half of `null`.
pub fn normalize_scores(ks: &KsScores, mode: NormMode, null: Option<&NullTable>) -> Result<KsScores> {
    if ks.normalization.mode != NormMode::None {
        return Err(Error::InvalidInput("scores are already normalized".into()));
    }
    if mode != NormMode::None && ks.p() < 2 {
        return Err(Error::InvalidInput("normalization needs at least two scores".into()));
    }
    let normalization = match mode {
        NormMode::Lower50 => {
            let null = null.ok_or_else(|| Error::InvalidInput("lower50 normalization requires a null table".into()))?;
            let (m_obs, s_obs) = lower_half_mean_sd(&ks.scores)?;
            let (m_null, s_null) = lower_half_mean_sd(&null.values)?;
            if !(s_obs > 0.0) || !(s_null > 0.0) {
                return Err(Error::ZeroSpread);
            }
            // (x - m_obs)/s_obs * s_null + m_null == (x - center)/scale
            let scale = s_obs / s_null;
            Normalization { mode, center: m_obs - m_null * scale, scale }
        }
        _ => self_normalization(&ks.scores, mode)?,
    };
    Ok(KsScores {
        scores: ks.scores.iter().map(|&x| normalization.apply(x)).collect(),
        n: ks.n,
        normalization,
    })
}

/// Sorted Monte-Carlo sample of the screening statistic under the null.
#[derive(Debug, Clone, PartialEq)]
pub struct NullTable {
    pub n: usize,
    pub seed: u64,
    /// Ascending.
    pub values: Vec<f64>,
    /// Normalization applied to the raw simulated scores.
    pub normalization: Normalization,
}

impl NullTable {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The reference distribution matching observed scores normalized with
    /// `mode`. Mean/SD and median/MAD modes renormalize the null by its own
    /// statistics; `Lower50` and `None` keep the raw null.
    pub fn reference_for(&self, mode: NormMode) -> Result<NullTable> {
        match mode {
            NormMode::None | NormMode::Lower50 => Ok(self.clone()),
            NormMode::MeanStd | NormMode::MedMad => {
                let normalization = self_normalization(&self.values, mode)?;
                Ok(NullTable {
                    n: self.n,
                    seed: self.seed,
                    values: self.values.iter().map(|&x| normalization.apply(x)).collect(),
                    normalization,
                })
            }
        }
    }

    /// Fraction of null values `>= t`.
    pub fn survival(&self, t: f64) -> f64 {
        let idx = self.values.partition_point(|&v| v < t);
        (self.values.len() - idx) as f64 / self.values.len() as f64
    }

    fn header(&self) -> String {
        format!("ifpca-null v1, n={}, N={}, seed={}", self.n, self.values.len(), self.seed)
    }

    /// Writes the table. Files ending in `.bin` get the binary layout
    /// (header line, then little-endian `f64`s); anything else is text with
    /// one value per line at 17 significant digits.
    pub fn save(&self, path: &Path) -> Result<()> {
        if self.normalization.mode != NormMode::None {
            return Err(Error::InvalidInput("only raw null tables are serialized".into()));
        }
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "{}", self.header())?;
        if is_binary(path) {
            for v in &self.values {
                out.write_all(&v.to_le_bytes())?;
            }
        } else {
            for v in &self.values {
                writeln!(out, "{v:.16e}")?;
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<NullTable> {
        let perr = |msg: String| Error::Parse { path: path.to_path_buf(), msg };
        let mut reader = BufReader::new(File::open(path)?);
        let mut header = String::new();
        reader.read_line(&mut header)?;
        let (n, count, seed) = parse_header(header.trim_end()).ok_or_else(|| perr(format!("bad header `{}`", header.trim_end())))?;

        let values = if is_binary(path) {
            let mut bytes = Vec::new();
            reader.read_to_end(&mut bytes)?;
            if bytes.len() != count * 8 {
                return Err(perr(format!("expected {} bytes of data, found {}", count * 8, bytes.len())));
            }
            bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect::<Vec<_>>()
        } else {
            let mut values = Vec::with_capacity(count);
            for (lineno, line) in reader.lines().enumerate() {
                let line = line?;
                let line = line.trim();
                if line.is_empty() {
                    continue;
                }
                values.push(line.parse::<f64>().map_err(|e| perr(format!("line {}: {e}", lineno + 2)))?);
            }
            values
        };
        if values.len() != count {
            return Err(perr(format!("header says N={count}, found {} values", values.len())));
        }
        if values.is_empty() || values.windows(2).any(|w| w[0] > w[1]) {
            return Err(perr("values must be non-empty and ascending".into()));
        }
        Ok(NullTable { n, seed, values, normalization: Normalization::IDENTITY })
    }
}

fn is_binary(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("bin"))
}

fn parse_header(line: &str) -> Option<(usize, usize, u64)> {
    let rest = line.strip_prefix("ifpca-null v1, ")?;
    let mut n = None;
    let mut count = None;
    let mut seed = None;
    for part in rest.split(", ") {
        let (key, value) = part.split_once('=')?;
        match key {
            "n" => n = value.parse().ok(),
            "N" => count = value.parse().ok(),
            "seed" => seed = value.parse().ok(),
            _ => return None,
        }
    }
    Some((n?, count?, seed?))
}

/// One null draw: `n` iid N(0,1) values, standardized by their own mean and
/// SD, then scored.
fn null_draw(n: usize, seed: u64, index: u64, buf: &mut Vec<f64>) -> f64 {
    let mut rng = rng::stream(seed, Domain::NullDraw, index);
    buf.clear();
    buf.extend((0..n).map(|_| rng.sample::<f64, _>(StandardNormal)));
    let (mean, sd) = mean_sd(buf);
    for x in buf.iter_mut() {
        *x = (*x - mean) / sd;
    }
    ks_sorting_in_place(buf)
}

/// Default table size for `p` features: `max(10^6, 100 p)`.
pub fn default_null_draws(p: usize) -> usize {
    1_000_000usize.max(100 * p)
}

/// Simulates the exact null of the pipeline statistic (standardize, then KS)
/// with `draws` independent replications. Draw `i` uses its own stream, so
/// the table is identical for any number of worker threads.
pub fn build_null_table(n: usize, draws: usize, seed: u64) -> Result<NullTable> {
    if n < 2 || draws < 1 {
        return Err(Error::InvalidInput(format!("null table needs n >= 2 and N >= 1 (got n={n}, N={draws})")));
    }
    let mut values: Vec<f64> = (0..draws as u64)
        .into_par_iter()
        .map_init(|| Vec::with_capacity(n), |buf, i| null_draw(n, seed, i, buf))
        .collect();
    values.par_sort_unstable_by(f64::total_cmp);
    Ok(NullTable { n, seed, values, normalization: Normalization::IDENTITY })
}

/// P-values `(1 + #{null >= score}) / (N + 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PValues(pub Vec<f64>);

pub fn pvalues(scores: &KsScores, null: &NullTable) -> PValues {
    let total = null.values.len();
    let denom = (total + 1) as f64;
    PValues(
        scores
            .scores
            .iter()
            .map(|&s| {
                let idx = null.values.partition_point(|&v| v < s);
                (1 + total - idx) as f64 / denom
            })
            .collect(),
    )
}

/// Retained features `{j : score_j >= threshold}`, 0-based and ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSet {
    pub indices: Vec<usize>,
    pub threshold: f64,
}

impl FeatureSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

pub fn select_features(scores: &KsScores, threshold: f64) -> Result<FeatureSet> {
    let indices: Vec<usize> = scores
        .scores
        .iter()
        .enumerate()
        .filter(|(_, &s)| s >= threshold)
        .map(|(j, _)| j)
        .collect();
    if indices.is_empty() {
        return Err(Error::EmptySelection { threshold });
    }
    Ok(FeatureSet { indices, threshold })
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ContinuousCDF, Normal};

    fn raw(scores: &[f64]) -> KsScores {
        KsScores { scores: scores.to_vec(), n: 10, normalization: Normalization::IDENTITY }
    }

    fn table(values: &[f64]) -> NullTable {
        NullTable { n: 10, seed: 0, values: values.to_vec(), normalization: Normalization::IDENTITY }
    }

    #[test]
    fn single_point_at_median() {
        assert_eq!(ks_of_standardized(&[0.0]), 0.5);
    }

    #[test]
    fn two_symmetric_points() {
        let psi = ks_of_standardized(&[-1.0, 1.0]);
        // sqrt(2) (Phi(1) - 1/2), Phi(1) = 0.8413447461
        assert!((psi - 0.4827344).abs() < 1e-6, "{psi}");
    }

    #[test]
    fn midpoint_quantiles_attain_lower_bound() {
        let n = 25;
        let std = Normal::standard();
        let v: Vec<f64> = (1..=n).map(|i| std.inverse_cdf((i as f64 - 0.5) / n as f64)).collect();
        let psi = ks_of_standardized(&v);
        assert!((psi - 0.1).abs() < 1e-9, "{psi}");
    }

    #[test]
    fn meanstd_symmetric() {
        let z = normalize_scores(&raw(&[1.0, 2.0, 3.0]), NormMode::MeanStd, None).unwrap();
        assert_eq!(z.scores, vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn none_is_identity() {
        let s = raw(&[0.3, 0.1, 0.9]);
        assert_eq!(normalize_scores(&s, NormMode::None, None).unwrap(), s);
    }

    #[test]
    fn medmad_zero_spread() {
        let err = normalize_scores(&raw(&[1.0, 1.0, 1.0, 10.0]), NormMode::MedMad, None).unwrap_err();
        assert!(matches!(err, Error::ZeroSpread));
    }

    #[test]
    fn medmad_uses_consistency_constant() {
        let z = normalize_scores(&raw(&[1.0, 2.0, 3.0, 4.0, 5.0]), NormMode::MedMad, None).unwrap();
        assert!((z.normalization.scale - 1.4826).abs() < 1e-12);
        assert_eq!(z.normalization.center, 3.0);
    }

    #[test]
    fn lower50_matches_lower_half_moments() {
        let obs = raw(&[2.0, 4.0, 6.0, 8.0, 100.0, 200.0]);
        let null = table(&[0.1, 0.2, 0.3, 0.4, 0.5, 0.6]);
        let z = normalize_scores(&obs, NormMode::Lower50, Some(&null)).unwrap();
        let (m, s) = lower_half_mean_sd(&z.scores).unwrap();
        let (mn, sn) = lower_half_mean_sd(&null.values).unwrap();
        assert!((m - mn).abs() < 1e-12 && (s - sn).abs() < 1e-12);
    }

    #[test]
    fn lower50_requires_null() {
        assert!(normalize_scores(&raw(&[1.0, 2.0, 3.0, 4.0]), NormMode::Lower50, None).is_err());
    }

    #[test]
    fn pvalue_boundaries() {
        let null = table(&[0.4, 0.6, 0.8]);
        let p = pvalues(&raw(&[0.9, 0.1, 0.7, 0.6]), &null);
        assert_eq!(p.0, vec![0.25, 1.0, 0.5, 0.75]);
    }

    #[test]
    fn selection() {
        let s = raw(&[0.2, 0.9, 0.5]);
        assert_eq!(select_features(&s, 0.5).unwrap().indices, vec![1, 2]);
        assert_eq!(select_features(&s, f64::NEG_INFINITY).unwrap().len(), 3);
        assert!(matches!(select_features(&s, 1.0), Err(Error::EmptySelection { .. })));
    }

    #[test]
    fn null_table_small() {
        let t = build_null_table(50, 1, 3).unwrap();
        assert_eq!(t.len(), 1);
        let v = t.values[0];
        assert!(v >= 1.0 / (2.0 * 50f64.sqrt()) && v <= 50f64.sqrt());
        assert_eq!(build_null_table(50, 200, 9).unwrap(), build_null_table(50, 200, 9).unwrap());
        assert!(build_null_table(1, 10, 0).is_err());
    }

    #[test]
    fn header_parsing() {
        assert_eq!(parse_header("ifpca-null v1, n=100, N=1000, seed=7"), Some((100, 1000, 7)));
        assert_eq!(parse_header("ifpca-null v2, n=100, N=1000, seed=7"), None);
    }

    #[test]
    fn reference_is_self_standardized() {
        let null = table(&[1.0, 2.0, 3.0]);
        let r = null.reference_for(NormMode::MeanStd).unwrap();
        assert_eq!(r.values, vec![-1.0, 0.0, 1.0]);
        assert_eq!(null.reference_for(NormMode::Lower50).unwrap(), null);
    }
}
