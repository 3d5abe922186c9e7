use rayon::prelude::*;

use super::{sq_dist, LabelVector};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Agglomerative clustering of the rows of `points` under complete linkage
/// (Euclidean distance), stopped at `k` clusters.
///
/// A cluster is identified by its smallest member index; among equally close
/// pairs the lexicographically smallest `(i, j)` merges first. Output labels
/// are numbered by smallest member.
pub fn hierarchical_complete(points: &Matrix, k: usize) -> Result<LabelVector> {
    let n = points.rows();
    if k == 0 || k > n {
        return Err(Error::InvalidK { k, n });
    }
    let data = points.to_row_major();
    let d = points.cols();
    let row = |i: usize| &data[i * d..(i + 1) * d];

    // squared distances give the same merge order as distances
    let mut dist = vec![0.0f64; n * n];
    let upper: Vec<Vec<f64>> = (0..n).into_par_iter().map(|i| (i + 1..n).map(|j| sq_dist(row(i), row(j))).collect()).collect();
    for (i, r) in upper.into_iter().enumerate() {
        for (off, v) in r.into_iter().enumerate() {
            let j = i + 1 + off;
            dist[i * n + j] = v;
            dist[j * n + i] = v;
        }
    }

    let mut owner: Vec<usize> = (0..n).collect();
    let mut active: Vec<usize> = (0..n).collect();
    while active.len() > k {
        let mut best = (f64::INFINITY, 0, 0);
        for (a, &i) in active.iter().enumerate() {
            for &j in &active[a + 1..] {
                let v = dist[i * n + j];
                if v < best.0 {
                    best = (v, i, j);
                }
            }
        }
        let (_, i, j) = best;
        for &m in &active {
            if m != i && m != j {
                let v = dist[i * n + m].max(dist[j * n + m]);
                dist[i * n + m] = v;
                dist[m * n + i] = v;
            }
        }
        for o in owner.iter_mut() {
            if *o == j {
                *o = i;
            }
        }
        active.retain(|&m| m != j);
    }
    let labels = owner.iter().map(|o| active.binary_search(o).expect("owner is active") + 1).collect();
    LabelVector::new(labels, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> Matrix {
        Matrix::from_col_major(xs.len(), 1, xs.to_vec()).unwrap()
    }

    #[test]
    fn nearest_pair_first() {
        let l = hierarchical_complete(&line(&[0.0, 1.0, 5.0]), 2).unwrap();
        assert_eq!(l.labels(), &[1, 1, 2]);
    }

    #[test]
    fn identity_at_k_equals_n() {
        let l = hierarchical_complete(&line(&[4.0, 1.0, 5.0, 3.0]), 4).unwrap();
        assert_eq!(l.labels(), &[1, 2, 3, 4]);
    }

    #[test]
    fn complete_linkage_hand_run() {
        // (2,3) at 1, then {0} joins {2,3} at max(2,3) = 3 < 8
        let l = hierarchical_complete(&line(&[0.0, 2.0, 3.0, 10.0]), 2).unwrap();
        assert_eq!(l.labels(), &[1, 1, 1, 2]);
    }

    #[test]
    fn duplicates_respect_k() {
        let l = hierarchical_complete(&line(&[1.0, 1.0, 1.0, 1.0, 2.0, 2.0]), 3).unwrap();
        let distinct: std::collections::BTreeSet<_> = l.labels().iter().collect();
        assert_eq!(distinct.len(), 3);
    }

    #[test]
    fn invalid_k() {
        assert!(matches!(hierarchical_complete(&line(&[1.0]), 2), Err(Error::InvalidK { .. })));
    }
}
