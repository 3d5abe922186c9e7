use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Scalar distributions used for the mean, strength and noise-scale draws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DistributionSpec {
    PointMass { c: f64 },
    /// Uniform over `(a - b, a + b)`.
    Uniform { a: f64, b: f64 },
    Normal { mean: f64, var: f64 },
    /// `N(u, var)` conditioned on `[u - a, u + a]`.
    TruncNormal { u: f64, var: f64, a: f64 },
    /// `b + E` conditioned on `[a1, a2]`, where `E` is exponential with mean
    /// `lambda`. A missing bound is unbounded.
    TruncShiftExp {
        lambda: f64,
        b: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        a1: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        a2: Option<f64>,
    },
}

impl DistributionSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::PointMass { c } => c.is_finite(),
            Self::Uniform { a, b } => a.is_finite() && b > 0.0 && b.is_finite(),
            Self::Normal { mean, var } => mean.is_finite() && var > 0.0 && var.is_finite(),
            Self::TruncNormal { u, var, a } => u.is_finite() && var > 0.0 && var.is_finite() && a > 0.0,
            Self::TruncShiftExp { lambda, b, a1, a2 } => {
                let lo = a1.unwrap_or(f64::NEG_INFINITY);
                let hi = a2.unwrap_or(f64::INFINITY);
                lambda > 0.0 && lambda.is_finite() && b.is_finite() && lo <= hi && hi > b
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid distribution parameters: {self:?}")))
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::PointMass { c } => c,
            Self::Uniform { a, b } => a - b + 2.0 * b * rng.random::<f64>(),
            Self::Normal { mean, var } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + var.sqrt() * z
            }
            Self::TruncNormal { u, var, a } => {
                let sd = var.sqrt();
                let std = Normal::standard();
                let lo = std.cdf(-a / sd);
                let hi = std.cdf(a / sd);
                let q = lo + (hi - lo) * rng.random::<f64>();
                let z = std.inverse_cdf(q).clamp(-a / sd, a / sd);
                u + sd * z
            }
            Self::TruncShiftExp { lambda, b, a1, a2 } => {
                // inverse CDF of Exp(mean lambda) restricted to [lo, hi]
                let lo = a1.map_or(0.0, |a| (a - b).max(0.0));
                let hi = a2.map_or(f64::INFINITY, |a| a - b);
                let cdf = |x: f64| if x.is_infinite() { 1.0 } else { -(-x / lambda).exp_m1() };
                let (flo, fhi) = (cdf(lo), cdf(hi));
                let q = flo + (fhi - flo) * rng.random::<f64>();
                let x = -lambda * (-q).ln_1p();
                b + x.clamp(lo, hi)
            }
        }
    }
}
