//! Truncated left SVD by orthogonal iteration on the smaller Gram matrix.
//!
//! For an `n x p` matrix with `n <= p` the iteration runs on `A A'` (`n x n`)
//! and never touches a `p x p` object; otherwise it runs on `A' A` and maps
//! the right singular vectors back through `A`. Each sweep multiplies the
//! current block by the Gram matrix and performs a Rayleigh-Ritz projection,
//! so a block as wide as the Gram matrix converges in a single sweep.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::{self, Domain};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvdOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SvdOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 1000 }
    }
}

/// Leading left singular vectors (columns of `vectors`) and singular values.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralEmbedding {
    pub vectors: Matrix,
    pub singular_values: Vec<f64>,
    /// Set when `sigma_k` and `sigma_{k+1}` are closer than `tol * sigma_1`,
    /// in which case the k-th vector is not uniquely determined.
    pub degenerate_gap: bool,
    pub iterations: usize,
}

impl SpectralEmbedding {
    pub fn n(&self) -> usize {
        self.vectors.rows()
    }

    pub fn k(&self) -> usize {
        self.vectors.cols()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut tail = 0.0;
    for i in 4 * chunks..a.len() {
        tail += a[i] * b[i];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Gram matrix of the given vectors (all of equal length), row-major `m x m`.
fn gram_of(vectors: &[&[f64]]) -> Vec<f64> {
    let m = vectors.len();
    let rows: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|a| (0..=a).map(|b| dot(vectors[a], vectors[b])).collect())
        .collect();
    let mut g = vec![0.0; m * m];
    for (a, row) in rows.into_iter().enumerate() {
        for (b, v) in row.into_iter().enumerate() {
            g[a * m + b] = v;
            g[b * m + a] = v;
        }
    }
    g
}

/// Symmetric eigen-decomposition by cyclic Jacobi rotations.
///
/// `h` is row-major `m x m`. Returns eigenvalues in descending order and the
/// matching eigenvectors as columns of a column-major `m x m` buffer.
pub(crate) fn symmetric_eigen(h: &[f64], m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut a = h.to_vec();
    let mut v = vec![0.0; m * m];
    for i in 0..m {
        v[i * m + i] = 1.0;
    }
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..m {
            for q in p + 1..m {
                off += a[p * m + q] * a[p * m + q];
            }
        }
        if off.sqrt() <= 1e-15 * scale || scale == 0.0 {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                let apq = a[p * m + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * m + p];
                let aqq = a[q * m + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..m {
                    let akp = a[k * m + p];
                    let akq = a[k * m + q];
                    a[k * m + p] = c * akp - s * akq;
                    a[k * m + q] = s * akp + c * akq;
                }
                for k in 0..m {
                    let apk = a[p * m + k];
                    let aqk = a[q * m + k];
                    a[p * m + k] = c * apk - s * aqk;
                    a[q * m + k] = s * apk + c * aqk;
                }
                for k in 0..m {
                    let vkp = v[p * m + k];
                    let vkq = v[q * m + k];
                    v[p * m + k] = c * vkp - s * vkq;
                    v[q * m + k] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&x, &y| a[y * m + y].total_cmp(&a[x * m + x]).then(x.cmp(&y)));
    let vals = order.iter().map(|&i| a[i * m + i]).collect();
    let mut vecs = Vec::with_capacity(m * m);
    for &i in &order {
        vecs.extend_from_slice(&v[i * m..(i + 1) * m]);
    }
    (vals, vecs)
}

/// Orthonormalizes the columns of `q` (column-major, `m` rows) in place by
/// twice-applied modified Gram-Schmidt. Columns that collapse are replaced by
/// fresh random directions.
fn orthonormalize(q: &mut [f64], m: usize, rng: &mut impl Rng) {
    let b = q.len() / m;
    for j in 0..b {
        let original = norm(&q[j * m..(j + 1) * m]);
        for _pass in 0..2 {
            for i in 0..j {
                let (head, tail) = q.split_at_mut(j * m);
                let qi = &head[i * m..(i + 1) * m];
                let qj = &mut tail[..m];
                let proj = dot(qi, qj);
                for (x, y) in qj.iter_mut().zip(qi) {
                    *x -= proj * y;
                }
            }
        }
        let nrm = norm(&q[j * m..(j + 1) * m]);
        if nrm <= 1e-10 * original.max(f64::MIN_POSITIVE) || nrm == 0.0 {
            for x in &mut q[j * m..(j + 1) * m] {
                *x = rng.sample(StandardNormal);
            }
            // retry this column against the earlier ones
            let mut attempts = 0;
            loop {
                for _pass in 0..2 {
                    for i in 0..j {
                        let (head, tail) = q.split_at_mut(j * m);
                        let qi = &head[i * m..(i + 1) * m];
                        let qj = &mut tail[..m];
                        let proj = dot(qi, qj);
                        for (x, y) in qj.iter_mut().zip(qi) {
                            *x -= proj * y;
                        }
                    }
                }
                let nrm = norm(&q[j * m..(j + 1) * m]);
                if nrm > 1e-8 || attempts > 10 {
                    for x in &mut q[j * m..(j + 1) * m] {
                        *x /= nrm;
                    }
                    break;
                }
                attempts += 1;
            }
        } else {
            for x in &mut q[j * m..(j + 1) * m] {
                *x /= nrm;
            }
        }
    }
}

/// `G * Q` for row-major symmetric `G` (`m x m`) and column-major `Q` (`m x b`).
fn gram_times(g: &[f64], q: &[f64], m: usize) -> Vec<f64> {
    let b = q.len() / m;
    let mut out = vec![0.0; m * b];
    out.par_chunks_mut(m).enumerate().for_each(|(c, col)| {
        let qc = &q[c * m..(c + 1) * m];
        for (r, o) in col.iter_mut().enumerate() {
            *o = dot(&g[r * m..(r + 1) * m], qc);
        }
    });
    out
}

/// Fixes the sign of a vector so its largest-magnitude entry is positive
/// (ties go to the lowest index).
fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

/// Dominant eigenpairs of a symmetric PSD matrix by orthogonal iteration
/// with Rayleigh-Ritz. Returns `(values, vectors col-major, next value, iterations)`.
fn leading_eigen(g: &[f64], m: usize, k: usize, opts: &SvdOptions) -> Result<(Vec<f64>, Vec<f64>, Option<f64>, usize)> {
    let b = m.min((2 * k).max(k + 16));
    let mut rng = rng::stream(0x5eed, Domain::Svd, 0);
    let mut q: Vec<f64> = (0..m * b).map(|_| rng.sample(StandardNormal)).collect();
    orthonormalize(&mut q, m, &mut rng);

    for iter in 1..=opts.max_iter {
        let z = gram_times(g, &q, m);
        // H = Q' G Q
        let mut h = vec![0.0; b * b];
        for i in 0..b {
            for j in 0..=i {
                let v = dot(&q[i * m..(i + 1) * m], &z[j * m..(j + 1) * m]);
                h[i * b + j] = v;
                h[j * b + i] = v;
            }
        }
        let (vals, s) = symmetric_eigen(&h, b);
        // Ritz vectors Y = Q S and G Y = Z S
        let mut y = vec![0.0; m * b];
        let mut gy = vec![0.0; m * b];
        for c in 0..b {
            let sc = &s[c * b..(c + 1) * b];
            let yc = &mut y[c * m..(c + 1) * m];
            for (l, &w) in sc.iter().enumerate() {
                if w != 0.0 {
                    for (o, &x) in yc.iter_mut().zip(&q[l * m..(l + 1) * m]) {
                        *o += w * x;
                    }
                }
            }
            let gc = &mut gy[c * m..(c + 1) * m];
            for (l, &w) in sc.iter().enumerate() {
                if w != 0.0 {
                    for (o, &x) in gc.iter_mut().zip(&z[l * m..(l + 1) * m]) {
                        *o += w * x;
                    }
                }
            }
        }
        let top = vals[0].max(0.0);
        let residual = (0..k)
            .map(|c| {
                let yc = &y[c * m..(c + 1) * m];
                let gc = &gy[c * m..(c + 1) * m];
                gc.iter().zip(yc).map(|(g, y)| (g - vals[c] * y).powi(2)).sum::<f64>().sqrt()
            })
            .fold(0.0, f64::max);
        if residual <= opts.tol * top || b == m {
            let next = (b > k).then(|| vals[k]);
            y.truncate(m * k);
            return Ok((vals[..k].to_vec(), y, next, iter));
        }
        q = gy;
        orthonormalize(&mut q, m, &mut rng);
    }
    Err(Error::NoConvergence(opts.max_iter))
}

/// The `k` leading left singular vectors and values of `a`.
pub fn truncated_left_svd(a: &Matrix, k: usize, opts: &SvdOptions) -> Result<SpectralEmbedding> {
    let (n, p) = (a.rows(), a.cols());
    if k == 0 || k > n.min(p) {
        return Err(Error::InvalidInput(format!("k = {k} must lie in 1..={}", n.min(p))));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }

    let mut u = vec![0.0; n * k];
    let mut sigma = vec![0.0; k];
    let (next, iterations);
    if n <= p {
        let rows = a.to_row_major();
        let row_slices: Vec<&[f64]> = rows.chunks_exact(p).collect();
        let g = gram_of(&row_slices);
        let (_, vecs, nx, it) = leading_eigen(&g, n, k, opts)?;
        (next, iterations) = (nx, it);
        u.copy_from_slice(&vecs);
        // sigma_i = |A' u_i|, more accurate than sqrt of the Gram eigenvalue
        for (c, s) in sigma.iter_mut().enumerate() {
            let uc = &u[c * n..(c + 1) * n];
            *s = a.columns().map(|col| dot(col, uc).powi(2)).sum::<f64>().sqrt();
        }
    } else {
        let cols: Vec<&[f64]> = a.columns().collect();
        let g = gram_of(&cols);
        let (_, vecs, nx, it) = leading_eigen(&g, p, k, opts)?;
        (next, iterations) = (nx, it);
        for c in 0..k {
            let v = &vecs[c * p..(c + 1) * p];
            let uc = &mut u[c * n..(c + 1) * n];
            for (j, &w) in v.iter().enumerate() {
                for (o, &x) in uc.iter_mut().zip(a.column(j)) {
                    *o += w * x;
                }
            }
            sigma[c] = norm(uc);
        }
        let mut rng = rng::stream(0x5eed, Domain::Svd, 1);
        let scale = sigma[0].max(f64::MIN_POSITIVE);
        for c in 0..k {
            if sigma[c] > 1e-14 * scale {
                let s = sigma[c];
                u[c * n..(c + 1) * n].iter_mut().for_each(|x| *x /= s);
            } else {
                u[c * n..(c + 1) * n].iter_mut().for_each(|x| *x = 0.0);
            }
        }
        // columns with zero singular value get any orthonormal completion
        if sigma.iter().any(|&s| s <= 1e-14 * scale) {
            orthonormalize(&mut u, n, &mut rng);
        }
    }

    // order by singular value, stable on near-ties
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&x, &y| sigma[y].total_cmp(&sigma[x]).then(x.cmp(&y)));
    let mut vectors = Vec::with_capacity(n * k);
    for &c in &order {
        let mut col = u[c * n..(c + 1) * n].to_vec();
        fix_sign(&mut col);
        vectors.extend(col);
    }
    let singular_values: Vec<f64> = order.iter().map(|&c| sigma[c]).collect();

    let degenerate_gap = next.is_some_and(|lam| {
        let next_sigma = lam.max(0.0).sqrt();
        (singular_values[k - 1] - next_sigma).abs() < opts.tol * singular_values[0]
    });
    Ok(SpectralEmbedding {
        vectors: Matrix::from_col_major(n, k, vectors)?,
        singular_values,
        degenerate_gap,
        iterations,
    })
}

/// Clips every entry to `[-t, t]`. Column orthonormality is not preserved.
pub fn entrywise_truncate(u: &SpectralEmbedding, t: f64) -> SpectralEmbedding {
    let mut out = u.clone();
    let vals: Vec<f64> = u
        .vectors
        .as_col_major()
        .iter()
        .map(|&x| if x.abs() > t { t.copysign(x) } else { x })
        .collect();
    out.vectors = Matrix::from_col_major(u.n(), u.k(), vals).expect("same shape");
    out
}
