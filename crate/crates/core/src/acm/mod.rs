//! Synthetic data from the asymptotic clustering model.
//!
//! A configuration fixes `K`, `p`, the sample-size exponent `theta`
//! (`n = round(p^theta)`), the sparsity exponent `vartheta` (each feature is
//! useful with probability `p^-vartheta`), the signal strength `r`, class
//! weights, sign probabilities and three scalar distributions. [`generate`]
//! draws `X = 1 mu_bar' + L [mu_1 .. mu_K] + Z` and returns the ground truth
//! alongside, including per-feature strengths.

mod diagnostics;
mod dist;
mod presets;

pub use diagnostics::{a0, err_p, kappa, omega, tau, threshold_fixed, threshold_tpq, ErrParams, OMEGA_GRID};
pub use dist::DistributionSpec;
pub use presets::{experiment_preset, sym_kappa_factor, EXPERIMENTS};

use std::f64::consts::PI;

use rand::seq::index;
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal, StudentT};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::LabelVector;
use crate::error::{Error, Result};
use crate::matrix::{DataMatrix, Matrix};
use crate::rng::{self, Domain};

/// Off-diagonal pattern of the noise mixing matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CorrelationVariant {
    /// `A(i, i+1) = d`.
    Band,
    /// `A(i, j) = d` for `i` in a random size-`size` subset of the other indices.
    Random { size: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NoiseModel {
    IidGaussian,
    /// Row `i` of class `k` is `N(0, a_k)` (the `a_k` are variances).
    ClassScaled { a: Vec<f64> },
    /// `sqrt(2/3) t_6`.
    StudentT6,
    /// `(chi2_6 - 6) / sqrt(12)`.
    Chisq6,
    /// Gaussian noise `Z` replaced by `Z A`.
    Correlated { variant: CorrelationVariant, d: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcmConfig {
    /// Free-form label of the setting, e.g. `"delta=1/3,2/3 r=0.65"`.
    #[serde(default)]
    pub setting: String,
    pub k: usize,
    pub p: usize,
    pub theta: f64,
    pub vartheta: f64,
    pub r: f64,
    pub rep: usize,
    pub delta: Vec<f64>,
    pub gamma: [f64; 3],
    pub g_mu_bar: DistributionSpec,
    pub g_mu: DistributionSpec,
    pub g_sigma: DistributionSpec,
    pub noise: NoiseModel,
    /// `q` values for the fixed-threshold runs, `t = sqrt(2 q log p)`.
    #[serde(default)]
    pub fixed_q: Vec<f64>,
    /// Back-solve `mu_K` with realized class fractions instead of `delta`.
    #[serde(default)]
    pub center_realized: bool,
}

impl AcmConfig {
    pub fn n(&self) -> usize {
        (self.p as f64).powf(self.theta).round() as usize
    }

    /// Probability that a feature is useful, `p^-vartheta`.
    pub fn useful_probability(&self) -> f64 {
        (self.p as f64).powf(-self.vartheta)
    }

    /// `|mu_k(j)|` for `h = 1`, before signs.
    pub fn unit_magnitude(&self) -> f64 {
        signal_magnitude(self.r, self.p, self.n(), 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.k < 1 || self.delta.len() != self.k {
            return bad(format!("delta must have K = {} entries", self.k));
        }
        if self.delta.iter().any(|&d| !(d > 0.0)) || (self.delta.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return bad("delta must be positive and sum to 1".into());
        }
        if self.gamma.iter().any(|&g| !(g >= 0.0)) || (self.gamma.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return bad("gamma must be non-negative and sum to 1".into());
        }
        if !(self.theta > 0.0 && self.theta < 1.0) || !(self.vartheta > 0.0 && self.vartheta < 1.0) {
            return bad("theta and vartheta must lie in (0, 1)".into());
        }
        if !(self.r > 0.0) {
            return bad("r must be positive".into());
        }
        if self.p < 2 {
            return bad("p must be at least 2".into());
        }
        let n = self.n();
        if n < self.k.max(2) {
            return bad(format!("n = round(p^theta) = {n} is smaller than max(K, 2)"));
        }
        for g in [&self.g_mu_bar, &self.g_mu, &self.g_sigma] {
            g.validate()?;
        }
        if self.fixed_q.iter().any(|&q| !(q > 0.0)) {
            return bad("fixed_q values must be positive".into());
        }
        match &self.noise {
            NoiseModel::ClassScaled { a } if a.len() != self.k || a.iter().any(|&x| !(x > 0.0)) => {
                bad("class-scaled noise needs K positive variances".into())
            }
            NoiseModel::Correlated { d, variant } => {
                if !(d.abs() < 1.0) {
                    return bad("correlation d must satisfy |d| < 1".into());
                }
                if let CorrelationVariant::Random { size } = variant {
                    if *size < 1 || *size >= self.p {
                        return bad("random correlation subset size must lie in 1..p".into());
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// `[72 pi (2 r log p) h / n]^(1/6)`.
pub fn signal_magnitude(r: f64, p: usize, n: usize, h: f64) -> f64 {
    (72.0 * PI * (2.0 * r * (p as f64).ln()) * h / n as f64).powf(1.0 / 6.0)
}

/// Everything [`generate`] knew when it drew the data.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub y: LabelVector,
    pub mu_bar: Vec<f64>,
    /// `mu[k][j]`, contrast mean of class `k` (0-based) at feature `j`.
    pub mu: Vec<Vec<f64>>,
    pub sigma: Vec<f64>,
    /// Useful features, 0-based ascending.
    pub useful: Vec<usize>,
    /// Class weights used to back-solve `mu_K`.
    pub backsolve_weights: Vec<f64>,
    pub kappa: Vec<f64>,
    pub tau: Vec<f64>,
    pub omega: Vec<f64>,
}

impl GroundTruth {
    /// Standardized contrast means `mu_k(j) / sigma(j)` of one feature.
    pub fn standardized_means(&self, j: usize) -> Vec<f64> {
        self.mu.iter().map(|m| m[j] / self.sigma[j]).collect()
    }
}

/// Sparse representation of the `p x p` noise mixing matrix `A`: unit
/// diagonal plus `d` at the listed rows of every column.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub p: usize,
    pub d: f64,
    /// `off_diagonal[j]` holds the rows `i != j` with `A(i, j) = d`.
    pub off_diagonal: Vec<Vec<usize>>,
}

impl CorrelationMatrix {
    pub fn to_dense(&self) -> Matrix {
        let mut a = Matrix::zeros(self.p, self.p);
        for j in 0..self.p {
            a.set(j, j, 1.0);
            if self.d != 0.0 {
                for &i in &self.off_diagonal[j] {
                    a.set(i, j, self.d);
                }
            }
        }
        a
    }
}

/// Builds the mixing matrix. Column `j` of the random variant draws its
/// subset from its own stream, so the result is schedule-independent.
pub fn correlated_noise_matrix(variant: CorrelationVariant, d: f64, p: usize, seed: u64) -> CorrelationMatrix {
    let off_diagonal = match variant {
        CorrelationVariant::Band => (0..p).map(|j| if j == 0 { vec![] } else { vec![j - 1] }).collect(),
        CorrelationVariant::Random { size } => (0..p)
            .into_par_iter()
            .map(|j| {
                let mut rng = rng::stream(seed, Domain::AcmCorrelation, j as u64);
                let mut rows: Vec<usize> = index::sample(&mut rng, p - 1, size.min(p - 1))
                    .iter()
                    .map(|i| if i >= j { i + 1 } else { i })
                    .collect();
                rows.sort_unstable();
                rows
            })
            .collect(),
    };
    CorrelationMatrix { p, d, off_diagonal }
}

fn draw_labels(n: usize, delta: &[f64], rng: &mut impl Rng) -> Vec<usize> {
    (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            for (k, &d) in delta.iter().enumerate() {
                acc += d;
                if u < acc {
                    return k;
                }
            }
            delta.len() - 1
        })
        .collect()
}

struct FeatureDraw {
    mu_bar: f64,
    mu: Vec<f64>,
    sigma: f64,
    noise: Vec<f64>,
}

fn draw_feature(cfg: &AcmConfig, n: usize, labels: &[usize], weights: &[f64], seed: u64, j: usize) -> FeatureDraw {
    let mut rng = rng::stream(seed, Domain::AcmFeature, j as u64);
    let k = cfg.k;
    let mu_bar = cfg.g_mu_bar.sample(&mut rng);
    let useful = rng.random::<f64>() < cfg.useful_probability();
    let mut mu = vec![0.0; k];
    if useful && k >= 2 {
        for m in mu.iter_mut().take(k - 1) {
            let u: f64 = rng.random();
            let sign = if u < cfg.gamma[0] {
                -1.0
            } else if u < cfg.gamma[0] + cfg.gamma[1] {
                0.0
            } else {
                1.0
            };
            let h = cfg.g_mu.sample(&mut rng);
            *m = signal_magnitude(cfg.r, cfg.p, n, h) * sign;
        }
        let s: f64 = mu[..k - 1].iter().zip(weights).map(|(m, w)| w * m).sum();
        mu[k - 1] = -s / weights[k - 1];
    }
    let sigma = cfg.g_sigma.sample(&mut rng);
    let noise = match &cfg.noise {
        NoiseModel::IidGaussian | NoiseModel::Correlated { .. } => {
            (0..n).map(|_| sigma * rng.sample::<f64, _>(StandardNormal)).collect()
        }
        NoiseModel::ClassScaled { a } => labels
            .iter()
            .map(|&l| sigma * a[l].sqrt() * rng.sample::<f64, _>(StandardNormal))
            .collect(),
        NoiseModel::StudentT6 => {
            let t = StudentT::new(6.0).expect("valid dof");
            let c = (2.0f64 / 3.0).sqrt();
            (0..n).map(|_| sigma * c * t.sample(&mut rng)).collect()
        }
        NoiseModel::Chisq6 => {
            let chi = ChiSquared::new(6.0).expect("valid dof");
            let c = 12f64.sqrt();
            (0..n).map(|_| sigma * (chi.sample(&mut rng) - 6.0) / c).collect()
        }
    };
    FeatureDraw { mu_bar, mu, sigma, noise }
}

/// Draws one data set. Identical `(config, seed)` give identical output for
/// any number of worker threads.
pub fn generate(cfg: &AcmConfig, seed: u64) -> Result<(DataMatrix, GroundTruth)> {
    cfg.validate()?;
    let n = cfg.n();
    let (k, p) = (cfg.k, cfg.p);

    let mut label_rng = rng::stream(seed, Domain::AcmLabels, 0);
    let labels = draw_labels(n, &cfg.delta, &mut label_rng);

    let weights: Vec<f64> = if cfg.center_realized {
        let mut counts = vec![0usize; k];
        labels.iter().for_each(|&l| counts[l] += 1);
        if counts[k - 1] == 0 {
            return Err(Error::InvalidConfig("class K is empty; cannot centre on realized fractions".into()));
        }
        counts.iter().map(|&c| c as f64 / n as f64).collect()
    } else {
        cfg.delta.clone()
    };

    let features: Vec<FeatureDraw> =
        (0..p).into_par_iter().map(|j| draw_feature(cfg, n, &labels, &weights, seed, j)).collect();

    let mixing = match &cfg.noise {
        NoiseModel::Correlated { variant, d } => Some(correlated_noise_matrix(*variant, *d, p, seed)),
        _ => None,
    };

    let mut values = vec![0.0; n * p];
    values.par_chunks_mut(n).enumerate().for_each(|(j, col)| {
        let f = &features[j];
        for (i, x) in col.iter_mut().enumerate() {
            *x = f.mu_bar + f.mu[labels[i]] + f.noise[i];
        }
        if let Some(a) = &mixing {
            for &src in &a.off_diagonal[j] {
                for (x, z) in col.iter_mut().zip(&features[src].noise) {
                    *x += a.d * z;
                }
            }
        }
    });

    let mu: Vec<Vec<f64>> = (0..k).map(|c| features.iter().map(|f| f.mu[c]).collect()).collect();
    let sigma: Vec<f64> = features.iter().map(|f| f.sigma).collect();
    let useful: Vec<usize> = (0..p).filter(|&j| features[j].mu.iter().any(|&m| m != 0.0)).collect();

    let mut kappa_v = vec![0.0; p];
    let mut tau_v = vec![0.0; p];
    let mut omega_v = vec![0.0; p];
    for &j in &useful {
        let m: Vec<f64> = features[j].mu.iter().map(|x| x / features[j].sigma).collect();
        kappa_v[j] = kappa(&m, &cfg.delta);
        tau_v[j] = tau(&m, &cfg.delta, n);
        omega_v[j] = omega(&m, &cfg.delta, n);
    }

    let x = DataMatrix::new(Matrix::from_col_major(n, p, values)?)?;
    let truth = GroundTruth {
        y: LabelVector::from_zero_based(&labels, k)?,
        mu_bar: features.iter().map(|f| f.mu_bar).collect(),
        mu,
        sigma,
        useful,
        backsolve_weights: weights,
        kappa: kappa_v,
        tau: tau_v,
        omega: omega_v,
    };
    Ok((x, truth))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(k: usize, delta: Vec<f64>) -> AcmConfig {
        AcmConfig {
            setting: String::new(),
            k,
            p: 2000,
            theta: 0.6,
            vartheta: 0.3,
            r: 0.5,
            rep: 1,
            delta,
            gamma: [0.5, 0.0, 0.5],
            g_mu_bar: DistributionSpec::Normal { mean: 0.0, var: 1.0 },
            g_mu: DistributionSpec::Uniform { a: 1.0, b: 0.2 },
            g_sigma: DistributionSpec::Uniform { a: 1.1, b: 0.1 },
            noise: NoiseModel::IidGaussian,
            fixed_q: vec![],
            center_realized: false,
        }
    }

    #[test]
    fn symmetric_backsolve_is_exact() {
        let (_, t) = generate(&small(2, vec![0.5, 0.5]), 4).unwrap();
        assert!(!t.useful.is_empty());
        for j in 0..t.mu[0].len() {
            assert_eq!(t.mu[1][j], -t.mu[0][j]);
        }
    }

    #[test]
    fn sample_size() {
        let mut c = small(2, vec![0.5, 0.5]);
        c.p = 40_000;
        assert_eq!(c.n(), 577);
    }

    #[test]
    fn magnitude_formula() {
        let m = signal_magnitude(0.65, 40_000, 577, 1.0);
        assert!((m - 1.324554).abs() < 1e-6, "{m}");
    }

    #[test]
    fn useful_iff_positive_kappa() {
        let (_, t) = generate(&small(3, vec![0.2, 0.3, 0.5]), 8).unwrap();
        for j in 0..t.kappa.len() {
            assert_eq!(t.kappa[j] > 0.0, t.useful.binary_search(&j).is_ok());
        }
    }

    #[test]
    fn deterministic() {
        let c = small(2, vec![1.0 / 3.0, 2.0 / 3.0]);
        let (x1, t1) = generate(&c, 21).unwrap();
        let (x2, t2) = generate(&c, 21).unwrap();
        assert_eq!(x1, x2);
        assert_eq!(t1, t2);
        let (x3, _) = generate(&c, 22).unwrap();
        assert_ne!(x1, x3);
    }

    #[test]
    fn correlation_patterns() {
        let ident = correlated_noise_matrix(CorrelationVariant::Band, 0.0, 4, 0).to_dense();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(ident.get(i, j), f64::from(u8::from(i == j)));
            }
        }
        let band = correlated_noise_matrix(CorrelationVariant::Band, 0.1, 3, 0).to_dense();
        let expect = [[1.0, 0.1, 0.0], [0.0, 1.0, 0.1], [0.0, 0.0, 1.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(band.get(i, j), expect[i][j]);
            }
        }
        let random = correlated_noise_matrix(CorrelationVariant::Random { size: 5 }, 0.1, 50, 3).to_dense();
        for j in 0..50 {
            assert_eq!(random.column(j).iter().filter(|&&x| x != 0.0).count(), 6);
            assert_eq!(random.get(j, j), 1.0);
        }
    }

    #[test]
    fn invalid_configs() {
        let mut c = small(2, vec![0.6, 0.6]);
        assert!(matches!(generate(&c, 0), Err(Error::InvalidConfig(_))));
        c.delta = vec![0.5, 0.5];
        c.theta = 1.5;
        assert!(c.validate().is_err());
        c.theta = 0.6;
        c.noise = NoiseModel::Correlated { variant: CorrelationVariant::Band, d: 1.5 };
        assert!(c.validate().is_err());
    }

    #[test]
    fn config_json_round_trip() {
        let mut c = small(4, vec![0.25; 4]);
        c.noise = NoiseModel::Correlated { variant: CorrelationVariant::Random { size: 5 }, d: 0.1 };
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<AcmConfig>(&s).unwrap(), c);
    }
}
