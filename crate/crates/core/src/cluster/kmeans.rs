//! Lloyd's k-means with random restarts.

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{sq_dist, LabelVector};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::{self, Domain};

/// Initial-center strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Init {
    /// `k` distinct data points chosen uniformly.
    #[default]
    Uniform,
    /// D^2-weighted seeding.
    PlusPlus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KmeansOptions {
    pub replicates: usize,
    pub seed: u64,
    pub init: Init,
    pub max_iter: usize,
}

impl Default for KmeansOptions {
    fn default() -> Self {
        Self { replicates: 30, seed: 0, init: Init::Uniform, max_iter: 300 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KmeansResult {
    pub labels: LabelVector,
    /// `k x d`.
    pub centers: Matrix,
    pub wcss: f64,
    pub replicate_id: usize,
    pub iterations: usize,
}

/// One run of Lloyd iterations from fixed starting centers.
#[derive(Debug, Clone, PartialEq)]
pub struct LloydRun {
    /// 0-based cluster of every point.
    pub assign: Vec<usize>,
    /// Row-major `k x d`.
    pub centers: Vec<f64>,
    pub wcss: f64,
    pub iterations: usize,
    /// Within-cluster sum of squares after every center update.
    pub trace: Vec<f64>,
}

struct Rows<'a> {
    n: usize,
    d: usize,
    data: &'a [f64],
}

impl Rows<'_> {
    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }
}

fn nearest(rows: &Rows, centers: &[f64], k: usize) -> Vec<usize> {
    let d = rows.d;
    let find = |i: usize| {
        let x = rows.row(i);
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for c in 0..k {
            let dist = sq_dist(x, &centers[c * d..(c + 1) * d]);
            if dist < best_d {
                best_d = dist;
                best = c;
            }
        }
        best
    };
    if rows.n * k * d.max(1) > 1 << 16 {
        (0..rows.n).into_par_iter().map(find).collect()
    } else {
        (0..rows.n).map(find).collect()
    }
}

/// Recomputes centers as cluster means. Empty clusters are reseeded at the
/// point farthest from its current center.
fn update_centers(rows: &Rows, assign: &[usize], centers: &mut [f64], k: usize) {
    let d = rows.d;
    let mut sums = vec![0.0; k * d];
    let mut counts = vec![0usize; k];
    for (i, &a) in assign.iter().enumerate() {
        counts[a] += 1;
        for (s, &x) in sums[a * d..(a + 1) * d].iter_mut().zip(rows.row(i)) {
            *s += x;
        }
    }
    let old = centers.to_vec();
    let mut taken = vec![false; rows.n];
    for c in 0..k {
        if counts[c] > 0 {
            let cnt = counts[c] as f64;
            for (dst, &s) in centers[c * d..(c + 1) * d].iter_mut().zip(&sums[c * d..(c + 1) * d]) {
                *dst = s / cnt;
            }
        }
    }
    for c in 0..k {
        if counts[c] == 0 {
            let mut far = None;
            let mut far_d = -1.0;
            for (i, &a) in assign.iter().enumerate() {
                if taken[i] {
                    continue;
                }
                let dist = sq_dist(rows.row(i), &old[a * d..(a + 1) * d]);
                if dist > far_d {
                    far_d = dist;
                    far = Some(i);
                }
            }
            if let Some(i) = far {
                taken[i] = true;
                centers[c * d..(c + 1) * d].copy_from_slice(rows.row(i));
            }
        }
    }
}

fn wcss_of(rows: &Rows, assign: &[usize], centers: &[f64]) -> f64 {
    let d = rows.d;
    assign.iter().enumerate().map(|(i, &a)| sq_dist(rows.row(i), &centers[a * d..(a + 1) * d])).sum()
}

fn lloyd_rows(rows: &Rows, mut centers: Vec<f64>, k: usize, max_iter: usize) -> LloydRun {
    let mut assign = nearest(rows, &centers, k);
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        update_centers(rows, &assign, &mut centers, k);
        let w = wcss_of(rows, &assign, &centers);
        if let Some(&prev) = trace.last() {
            debug_assert!(w <= prev + 1e-9 * f64::max(prev, 1.0), "wcss increased: {prev} -> {w}");
        }
        trace.push(w);
        let next = nearest(rows, &centers, k);
        if next == assign {
            converged = true;
            break;
        }
        assign = next;
    }
    if !converged {
        update_centers(rows, &assign, &mut centers, k);
        trace.push(wcss_of(rows, &assign, &centers));
    }
    let wcss = *trace.last().expect("at least one update");
    LloydRun { assign, centers, wcss, iterations, trace }
}

/// Runs Lloyd iterations on the rows of `points` from `initial` (`k x d`).
pub fn lloyd(points: &Matrix, initial: &Matrix, max_iter: usize) -> Result<LloydRun> {
    if initial.cols() != points.cols() || initial.rows() == 0 {
        return Err(Error::InvalidInput("initial centers must be k x d with k >= 1".into()));
    }
    let data = points.to_row_major();
    let rows = Rows { n: points.rows(), d: points.cols(), data: &data };
    Ok(lloyd_rows(&rows, initial.to_row_major(), initial.rows(), max_iter.max(1)))
}

fn plusplus_rows(rows: &Rows, k: usize, rng: &mut impl Rng) -> Vec<f64> {
    let d = rows.d;
    let mut centers = Vec::with_capacity(k * d);
    let first = rng.random_range(0..rows.n);
    centers.extend_from_slice(rows.row(first));
    let mut dist: Vec<f64> = (0..rows.n).map(|i| sq_dist(rows.row(i), rows.row(first))).collect();
    for _ in 1..k {
        let total: f64 = dist.iter().sum();
        let pick = if total > 0.0 {
            let u = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = None;
            for (i, &w) in dist.iter().enumerate() {
                acc += w;
                if w > 0.0 && u < acc {
                    chosen = Some(i);
                    break;
                }
            }
            // rounding can leave u == total; take the last positive weight
            chosen.unwrap_or_else(|| dist.iter().rposition(|&w| w > 0.0).expect("total > 0"))
        } else {
            rng.random_range(0..rows.n)
        };
        let c = rows.row(pick).to_vec();
        for (i, di) in dist.iter_mut().enumerate() {
            *di = di.min(sq_dist(rows.row(i), &c));
        }
        centers.extend(c);
    }
    centers
}

/// k-means++ seeding: `k x d` centers, each subsequent center drawn with
/// probability proportional to the squared distance to the nearest chosen one.
/// All-zero weights (duplicate points) fall back to a uniform draw.
pub fn kmeanspp_seed(points: &Matrix, k: usize, rng: &mut impl Rng) -> Result<Matrix> {
    let n = points.rows();
    if k == 0 || k > n {
        return Err(Error::InvalidK { k, n });
    }
    let data = points.to_row_major();
    let rows = Rows { n, d: points.cols(), data: &data };
    let centers = plusplus_rows(&rows, k, rng);
    Ok(Matrix::from_rows(&centers.chunks_exact(rows.d.max(1)).collect::<Vec<_>>())?)
}

/// k-means with `replicates` independent restarts; keeps the lowest WCSS
/// (ties to the lowest replicate index). Replicate `r` draws from its own
/// stream derived from `(seed, r)`.
pub fn kmeans(points: &Matrix, k: usize, opts: &KmeansOptions) -> Result<KmeansResult> {
    let n = points.rows();
    if k == 0 || k > n {
        return Err(Error::InvalidK { k, n });
    }
    if opts.replicates == 0 {
        return Err(Error::InvalidInput("replicates must be at least 1".into()));
    }
    let d = points.cols();
    let data = points.to_row_major();
    let rows = Rows { n, d, data: &data };

    let runs: Vec<LloydRun> = (0..opts.replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng::stream(opts.seed, Domain::KmeansReplicate, r as u64);
            let init = match opts.init {
                Init::Uniform => {
                    let picks = index::sample(&mut rng, n, k);
                    picks.iter().flat_map(|i| rows.row(i).to_vec()).collect()
                }
                Init::PlusPlus => plusplus_rows(&rows, k, &mut rng),
            };
            lloyd_rows(&rows, init, k, opts.max_iter.max(1))
        })
        .collect();

    let mut best = 0;
    for (r, run) in runs.iter().enumerate().skip(1) {
        if run.wcss < runs[best].wcss {
            best = r;
        }
    }
    let run = &runs[best];
    let centers: Vec<&[f64]> = run.centers.chunks_exact(d.max(1)).collect();
    Ok(KmeansResult {
        labels: LabelVector::from_zero_based(&run.assign, k)?,
        centers: if d == 0 { Matrix::zeros(k, 0) } else { Matrix::from_rows(&centers)? },
        wcss: run.wcss,
        replicate_id: best,
        iterations: run.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn line(xs: &[f64]) -> Matrix {
        Matrix::from_col_major(xs.len(), 1, xs.to_vec()).unwrap()
    }

    #[test]
    fn separated_pairs() {
        let r = kmeans(&line(&[0.0, 1.0, 10.0, 11.0]), 2, &KmeansOptions::default()).unwrap();
        assert_eq!(r.wcss, 1.0);
        let mut c = r.centers.column(0).to_vec();
        c.sort_by(f64::total_cmp);
        assert_eq!(c, vec![0.5, 10.5]);
        let l = r.labels.labels();
        assert_eq!(l[0], l[1]);
        assert_eq!(l[2], l[3]);
        assert_ne!(l[0], l[2]);
    }

    #[test]
    fn single_cluster_is_the_mean() {
        let xs = [1.0, 2.0, 4.0, 9.0];
        let r = kmeans(&line(&xs), 1, &KmeansOptions::default()).unwrap();
        assert_eq!(r.centers.get(0, 0), 4.0);
        // n * (population variance)
        assert_eq!(r.wcss, 9.0 + 4.0 + 0.0 + 25.0);
    }

    #[test]
    fn k_equals_n() {
        let r = kmeans(&line(&[3.0, -1.0, 7.0]), 3, &KmeansOptions::default()).unwrap();
        assert_eq!(r.wcss, 0.0);
        let mut l = r.labels.labels().to_vec();
        l.sort();
        assert_eq!(l, vec![1, 2, 3]);
    }

    #[test]
    fn too_many_clusters() {
        assert!(matches!(kmeans(&line(&[1.0, 2.0]), 3, &KmeansOptions::default()), Err(Error::InvalidK { k: 3, n: 2 })));
    }

    #[test]
    fn plusplus_two_points() {
        let pts = line(&[0.0, 100.0]);
        for s in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let c = kmeanspp_seed(&pts, 2, &mut rng).unwrap();
            assert_ne!(c.get(0, 0), c.get(1, 0));
        }
    }

    #[test]
    fn plusplus_duplicates() {
        let pts = line(&[5.0; 6]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = kmeanspp_seed(&pts, 4, &mut rng).unwrap();
        assert!(c.column(0).iter().all(|&x| x == 5.0));
        let r = kmeans(&pts, 4, &KmeansOptions { init: Init::PlusPlus, ..Default::default() }).unwrap();
        assert_eq!(r.wcss, 0.0);
    }

    #[test]
    fn empty_cluster_gets_reseeded() {
        // both initial centers far right; the one at 100 captures nothing
        let pts = line(&[0.0, 1.0, 2.0, 10.0]);
        let init = line(&[5.0, 100.0]);
        let run = lloyd(&pts, &init, 300).unwrap();
        assert!(run.trace.windows(2).all(|w| w[1] <= w[0]));
        let used: std::collections::BTreeSet<_> = run.assign.iter().collect();
        assert_eq!(used.len(), 2);
    }
}
