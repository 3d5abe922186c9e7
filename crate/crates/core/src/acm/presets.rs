//! Parameter grids of the seven standard simulation experiments.

use super::{kappa, signal_magnitude, AcmConfig, CorrelationVariant, DistributionSpec, NoiseModel};
use crate::error::{Error, Result};

pub const EXPERIMENTS: [&str; 7] = ["1a", "1b", "2a", "2b", "3", "4", "5"];

const R_ASYM: [f64; 4] = [0.20, 0.35, 0.50, 0.65];
const R_SYM: [f64; 4] = [0.06, 0.14, 0.22, 0.30];
const VARTHETA_2: [f64; 4] = [0.68, 0.72, 0.76, 0.80];

fn exp1_base(delta: Vec<f64>, r: f64) -> AcmConfig {
    AcmConfig {
        setting: String::new(),
        k: 2,
        p: 40_000,
        theta: 0.6,
        vartheta: 0.7,
        r,
        rep: 100,
        delta,
        gamma: [0.5, 0.0, 0.5],
        g_mu_bar: DistributionSpec::Normal { mean: 0.0, var: 1.0 },
        g_mu: DistributionSpec::Uniform { a: 1.0, b: 0.2 },
        g_sigma: DistributionSpec::Uniform { a: 1.1, b: 0.1 },
        noise: NoiseModel::IidGaussian,
        fixed_q: vec![0.06],
        center_realized: false,
    }
}

fn exp2_base(vartheta: f64, g_mu: DistributionSpec, g_sigma: DistributionSpec) -> AcmConfig {
    AcmConfig {
        setting: format!("vartheta={vartheta}"),
        k: 2,
        p: 40_000,
        theta: 0.6,
        vartheta,
        r: 0.3,
        rep: 100,
        delta: vec![1.0 / 3.0, 2.0 / 3.0],
        gamma: [0.5, 0.0, 0.5],
        g_mu_bar: DistributionSpec::Normal { mean: 0.0, var: 1.0 },
        g_mu,
        g_sigma,
        noise: NoiseModel::IidGaussian,
        fixed_q: vec![0.05],
        center_realized: false,
    }
}

fn tse_mean_one() -> DistributionSpec {
    DistributionSpec::TruncShiftExp { lambda: 0.1, b: 0.9, a1: None, a2: None }
}

fn exp4(variant: CorrelationVariant, name: &str) -> AcmConfig {
    AcmConfig {
        setting: format!("noise={name}"),
        k: 4,
        p: 20_000,
        theta: 0.5,
        vartheta: 0.6,
        r: 0.7,
        rep: 100,
        delta: vec![0.25; 4],
        gamma: [0.3, 0.05, 0.65],
        g_mu_bar: DistributionSpec::Normal { mean: 0.0, var: 1.0 },
        g_mu: tse_mean_one(),
        g_sigma: DistributionSpec::TruncShiftExp { lambda: 0.1, b: 0.9, a1: Some(0.9), a2: Some(1.2) },
        noise: NoiseModel::Correlated { variant, d: 0.1 },
        fixed_q: vec![0.03],
        center_realized: false,
    }
}

fn exp5(noise: NoiseModel, name: &str) -> AcmConfig {
    AcmConfig {
        setting: format!("noise={name}"),
        k: 4,
        p: 20_000,
        theta: 0.5,
        vartheta: 0.55,
        r: 1.0,
        rep: 100,
        delta: vec![0.25, 0.25, 1.0 / 3.0, 1.0 / 6.0],
        gamma: [0.4, 0.1, 0.5],
        g_mu_bar: DistributionSpec::Normal { mean: 0.0, var: 1.0 },
        g_mu: tse_mean_one(),
        g_sigma: DistributionSpec::PointMass { c: 1.0 },
        noise,
        fixed_q: vec![0.03],
        center_realized: false,
    }
}

/// `kappa` of a two-class feature with unit strength and `beta_1 = +1`.
fn unit_kappa(delta: &[f64], r: f64, p: usize, n: usize) -> f64 {
    let m1 = signal_magnitude(r, p, n, 1.0);
    let m2 = -delta[0] * m1 / delta[1];
    kappa(&[m1, m2], delta)
}

/// Factor `c` such that `r` with weights `(1/3, 2/3)` and `c r` with weights
/// `(1/2, 1/2)` give the same `kappa`. Found by bisection.
pub fn sym_kappa_factor() -> f64 {
    let (p, n) = (40_000, 577);
    let asym = [1.0 / 3.0, 2.0 / 3.0];
    let sym = [0.5, 0.5];
    let target = unit_kappa(&asym, 1.0, p, n);
    let (mut lo, mut hi) = (1e-6, 10.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if unit_kappa(&sym, mid, p, n) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn label(delta: &str, r: f64) -> String {
    format!("delta={delta} r={r}")
}

pub fn experiment_preset(id: &str) -> Result<Vec<AcmConfig>> {
    let out = match id {
        "1a" | "1b" => {
            let mut v: Vec<AcmConfig> = R_ASYM
                .iter()
                .map(|&r| AcmConfig { setting: label("1/3,2/3", r), ..exp1_base(vec![1.0 / 3.0, 2.0 / 3.0], r) })
                .collect();
            let sym: Vec<f64> = if id == "1a" {
                R_SYM.to_vec()
            } else {
                let c0 = sym_kappa_factor();
                R_ASYM.iter().map(|r| c0 * r).collect()
            };
            v.extend(sym.into_iter().map(|r| AcmConfig { setting: label("1/2,1/2", r), ..exp1_base(vec![0.5, 0.5], r) }));
            v
        }
        "2a" => VARTHETA_2
            .iter()
            .map(|&t| {
                exp2_base(
                    t,
                    DistributionSpec::TruncNormal { u: 1.0, var: 0.01, a: 0.2 },
                    DistributionSpec::TruncNormal { u: 1.0, var: 0.01, a: 0.1 },
                )
            })
            .collect(),
        "2b" | "3" => VARTHETA_2
            .iter()
            .map(|&t| {
                let mut c = exp2_base(
                    t,
                    DistributionSpec::TruncNormal { u: 1.0, var: 0.1, a: 0.7 },
                    DistributionSpec::PointMass { c: 1.0 },
                );
                if id == "3" {
                    c.fixed_q = vec![0.03, 0.04, 0.05, 0.06];
                }
                c
            })
            .collect(),
        "4" => vec![
            exp4(CorrelationVariant::Band, "band"),
            exp4(CorrelationVariant::Random { size: 5 }, "random5"),
            exp4(CorrelationVariant::Random { size: 20 }, "random20"),
        ],
        "5" => vec![
            exp5(NoiseModel::ClassScaled { a: vec![0.8, 1.0, 1.2, 1.4] }, "class-scaled"),
            exp5(NoiseModel::StudentT6, "t6"),
            exp5(NoiseModel::Chisq6, "chisq6"),
        ],
        other => return Err(Error::UnknownExperiment(other.to_string())),
    };
    Ok(out)
}
