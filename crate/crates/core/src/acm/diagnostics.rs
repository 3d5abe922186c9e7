//! Per-feature signal strengths and the theoretical thresholds and error
//! bound that go with them. `m` is a feature's vector of standardized contrast
//! means `(m_1(j), ..., m_K(j))`, `delta` the class weights.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::ks::normal_pdf;

/// `sqrt((pi - 2) / (4 pi))`, the scale of the KS null tail.
pub fn a0() -> f64 {
    ((PI - 2.0) / (4.0 * PI)).sqrt()
}

/// Weighted second moment `(sum_k delta_k m_k^2)^(1/2)`.
pub fn kappa(m: &[f64], delta: &[f64]) -> f64 {
    m.iter().zip(delta).map(|(x, d)| d * x * x).sum::<f64>().sqrt()
}

/// Weighted third moment `sqrt(n) |sum_k delta_k m_k^3| / (6 sqrt(2 pi))`.
pub fn tau(m: &[f64], delta: &[f64], n: usize) -> f64 {
    let third: f64 = m.iter().zip(delta).map(|(x, d)| d * x * x * x).sum();
    (n as f64).sqrt() * third.abs() / (6.0 * (2.0 * PI).sqrt())
}

fn omega_bracket(y: f64, second_sq: f64, fourth: f64) -> f64 {
    let phi = normal_pdf(y);
    let phi3 = y * (3.0 - y * y) * phi;
    y * (1.0 - 3.0 * y * y) * phi * second_sq / 8.0 + phi3 * fourth / 24.0
}

/// Grid bounds and step of the sup search in [`omega`].
pub const OMEGA_GRID: (f64, f64, f64) = (-8.0, 8.0, 1e-3);

/// Fourth-moment strength used when the third moment vanishes:
/// `sqrt(n) sup_y [ y(1-3y^2) phi(y) (sum delta m^2)^2 / 8 + phi'''(y) sum delta m^4 / 24 ]`.
///
/// The sup is taken on a grid over `[-8, 8]` with step `1e-3`, then refined
/// by golden-section search around the best grid point.
pub fn omega(m: &[f64], delta: &[f64], n: usize) -> f64 {
    let second: f64 = m.iter().zip(delta).map(|(x, d)| d * x * x).sum();
    let fourth: f64 = m.iter().zip(delta).map(|(x, d)| d * x.powi(4)).sum();
    if second == 0.0 && fourth == 0.0 {
        return 0.0;
    }
    let second_sq = second * second;
    let f = |y: f64| omega_bracket(y, second_sq, fourth);

    let (lo, hi, step) = OMEGA_GRID;
    let steps = ((hi - lo) / step).round() as usize;
    let mut best_y = lo;
    let mut best = f(lo);
    for i in 1..=steps {
        let y = lo + i as f64 * step;
        let v = f(y);
        if v > best {
            best = v;
            best_y = y;
        }
    }

    let (mut a, mut b) = ((best_y - step).max(lo), (best_y + step).min(hi));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    for _ in 0..80 {
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    let refined = f(0.5 * (a + b));
    (n as f64).sqrt() * best.max(refined)
}

/// `t_p(q) = a0 sqrt(2 q log p)`.
pub fn threshold_tpq(q: f64, p: usize) -> f64 {
    a0() * threshold_fixed(q, p)
}

/// `sqrt(2 q log p)`, the threshold used for the fixed-threshold simulations.
pub fn threshold_fixed(q: f64, p: usize) -> f64 {
    (2.0 * q * (p as f64).ln()).sqrt()
}

/// Inputs of the theoretical error rate [`err_p`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrParams {
    pub vartheta: f64,
    pub q: f64,
    pub r: f64,
    pub k: usize,
    pub n: f64,
    pub p: f64,
    pub kappa_norm: f64,
    pub rho1: f64,
    pub rho2: f64,
}

/// Theoretical clustering error rate:
/// `rho2 [ (1 + sqrt(p^(1 - min(vartheta, q)) / n)) / |kappa|
///        + p^(-(sqrt r - sqrt q)_+^2 / (2K))
///        + sqrt(p^(vartheta - 1) + p^((vartheta - q)_+) / n) sqrt(rho1) ]`.
pub fn err_p(e: &ErrParams) -> f64 {
    let p = e.p;
    let bias = (1.0 + (p.powf(1.0 - e.vartheta.min(e.q)) / e.n).sqrt()) / e.kappa_norm;
    let gap = (e.r.sqrt() - e.q.sqrt()).max(0.0);
    let miss = p.powf(-gap * gap / (2.0 * e.k as f64));
    let noise = (p.powf(e.vartheta - 1.0) + p.powf((e.vartheta - e.q).max(0.0)) / e.n).sqrt() * e.rho1.sqrt();
    e.rho2 * (bias + miss + noise)
}
