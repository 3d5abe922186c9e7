//! Higher-Criticism threshold selection.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ks::{KsScores, PValues};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HcPoint {
    /// 1-based rank of the sorted p-value.
    pub j: usize,
    pub pi: f64,
    pub hc: f64,
    pub eligible: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HcResult {
    /// HC value at every rank `1..=p`, with the eligibility flag.
    pub curve: Vec<HcPoint>,
    pub j_hat: usize,
    pub t_hc: f64,
    /// Ranks that passed the constraints (or the fallback constraints).
    pub eligible: Vec<usize>,
    pub used_fallback: bool,
}

impl HcResult {
    pub fn max_hc(&self) -> f64 {
        self.curve[self.j_hat - 1].hc
    }

    /// CSV with columns `j,pi_j,HC_j,eligible`.
    pub fn write_curve_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "j,pi_j,HC_j,eligible")?;
        for pt in &self.curve {
            writeln!(out, "{},{},{},{}", pt.j, pt.pi, pt.hc, u8::from(pt.eligible))?;
        }
        Ok(())
    }
}

/// `HC_{p,j} = sqrt(p) (j/p - pi) / sqrt(max(sqrt(n)(j/p - pi), 0) + j/p)`.
pub fn hc_value(j: usize, p: usize, pi: f64, n: usize) -> f64 {
    let frac = j as f64 / p as f64;
    let gap = frac - pi;
    let denom = ((n as f64).sqrt() * gap).max(0.0) + frac;
    (p as f64).sqrt() * gap / denom.sqrt()
}

/// Picks the HC rank `j_hat = argmax HC_{p,j}` over
/// `{j : pi_(j) > log(p)/p, j < p/2}` (ties to the smallest `j`) and returns
/// the `j_hat`-th largest score as the threshold.
///
/// With `fallback`, an empty constraint set is retried without the p-value
/// floor before giving up.
pub fn hc_threshold(pvals: &PValues, scores: &KsScores, n: usize, fallback: bool) -> Result<HcResult> {
    let p = pvals.0.len();
    if p < 2 || scores.p() != p {
        return Err(Error::InvalidInput(format!(
            "need p >= 2 aligned p-values and scores (got {p} and {})",
            scores.p()
        )));
    }
    let mut sorted_p = pvals.0.clone();
    sorted_p.sort_unstable_by(f64::total_cmp);
    let floor = (p as f64).ln() / p as f64;
    let below_half = |j: usize| 2 * j < p;

    let mut curve: Vec<HcPoint> = sorted_p
        .iter()
        .enumerate()
        .map(|(i, &pi)| {
            let j = i + 1;
            HcPoint { j, pi, hc: hc_value(j, p, pi, n), eligible: pi > floor && below_half(j) }
        })
        .collect();

    let mut used_fallback = false;
    let mut eligible: Vec<usize> = curve.iter().filter(|pt| pt.eligible).map(|pt| pt.j).collect();
    if eligible.is_empty() {
        if !fallback {
            return Err(Error::NoEligibleIndex);
        }
        used_fallback = true;
        eligible = (1..p).filter(|&j| below_half(j)).collect();
        if eligible.is_empty() {
            return Err(Error::NoEligibleIndex);
        }
        for pt in curve.iter_mut() {
            pt.eligible = below_half(pt.j);
        }
    }

    let mut j_hat = eligible[0];
    for &j in &eligible[1..] {
        if curve[j - 1].hc > curve[j_hat - 1].hc {
            j_hat = j;
        }
    }

    let mut desc = scores.scores.clone();
    desc.sort_unstable_by(|a, b| b.total_cmp(a));
    Ok(HcResult { curve, j_hat, t_hc: desc[j_hat - 1], eligible, used_fallback })
}
