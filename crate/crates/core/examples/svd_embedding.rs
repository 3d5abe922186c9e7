//! Leading left singular vectors of a noisy low-rank matrix, and the effect
//! of entrywise truncation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use ifpca::matrix::Matrix;
use ifpca::svd::{entrywise_truncate, truncated_left_svd, SvdOptions};

fn main() -> ifpca::Result<()> {
    let (n, p) = (60, 400);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let u: Vec<f64> = (0..n).map(|i| if i < 20 { 1.0 } else { -0.5 }).collect();
    let v: Vec<f64> = (0..p).map(|_| rng.random::<f64>() - 0.5).collect();
    let mut values = vec![0.0; n * p];
    for j in 0..p {
        for i in 0..n {
            // the last sample is an outlier
            let scale = if i == n - 1 { 3.0 } else { 0.3 };
            values[j * n + i] = 3.0 * u[i] * v[j] + scale * rng.sample::<f64, _>(StandardNormal);
        }
    }
    let a = Matrix::from_col_major(n, p, values)?;

    let emb = truncated_left_svd(&a, 3, &SvdOptions::default())?;
    println!("singular values: {:.3?}", emb.singular_values);
    println!("iterations: {}, nearly tied: {}", emb.iterations, emb.degenerate_gap);

    let first = emb.vectors.column(0);
    println!("first vector, samples 18..22: {:.4?}", &first[18..22]);
    println!("second vector at the outlier: {:.4}", emb.vectors.column(1)[n - 1]);

    let t = (p as f64).ln() / (n as f64).sqrt();
    let clipped = entrywise_truncate(&emb, t);
    println!("after clipping at {t:.3}: Frobenius {:.4} -> {:.4}", emb.vectors.frobenius_norm(), clipped.vectors.frobenius_norm());
    Ok(())
}
