//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use ifpca::ks::normal_cdf;

/// `sqrt(n) sup_x |F_n(x) - Phi(x)|` evaluated at every jump point from both
/// sides, counting with a linear scan instead of sorting.
pub fn ks_brute_force(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mut sup = 0.0f64;
    for &x in v {
        let at = v.iter().filter(|&&y| y <= x).count() as f64;
        let below = v.iter().filter(|&&y| y < x).count() as f64;
        let phi = normal_cdf(x);
        sup = sup.max(at / n - phi).max(phi - below / n);
    }
    n.sqrt() * sup
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

/// Minimum over relabelings of the fraction of samples whose label differs,
/// relabeling every sample individually.
pub fn hamming_oracle(yhat: &[usize], y: &[usize], k: usize) -> f64 {
    let best = permutations(k)
        .into_iter()
        .map(|perm| yhat.iter().zip(y).filter(|(&a, &b)| perm[b - 1] + 1 != a).count())
        .min()
        .unwrap();
    best as f64 / y.len() as f64
}

/// Singular values of a small dense matrix, descending.
pub fn dense_singular_values(rows: usize, cols: usize, col_major: &[f64]) -> Vec<f64> {
    let m = nalgebra::DMatrix::from_column_slice(rows, cols, col_major);
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}
