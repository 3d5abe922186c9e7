//! k-means (uniform and k-means++ starts) and complete-linkage clustering on
//! three Gaussian blobs, scored with the Hamming error.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use ifpca::cluster::{hamming_error, hierarchical_complete, kmeans, Init, KmeansOptions, LabelVector};
use ifpca::matrix::Matrix;

fn main() -> ifpca::Result<()> {
    let centers = [[0.0, 0.0], [4.0, 0.0], [2.0, 3.5]];
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut rows = Vec::new();
    let mut truth = Vec::new();
    for i in 0..150 {
        let c = i % 3;
        rows.push(vec![
            centers[c][0] + rng.sample::<f64, _>(StandardNormal),
            centers[c][1] + rng.sample::<f64, _>(StandardNormal),
        ]);
        truth.push(c + 1);
    }
    let points = Matrix::from_rows(&rows)?;
    let truth = LabelVector::new(truth, 3)?;

    for init in [Init::Uniform, Init::PlusPlus] {
        let fit = kmeans(&points, 3, &KmeansOptions { init, seed: 1, ..KmeansOptions::default() })?;
        println!(
            "k-means {:?}: wcss {:.2}, best replicate {}, error {:.3}",
            init,
            fit.wcss,
            fit.replicate_id,
            hamming_error(&fit.labels, &truth, 3)?
        );
    }
    let hier = hierarchical_complete(&points, 3)?;
    println!("complete linkage: error {:.3}", hamming_error(&hier, &truth, 3)?);
    Ok(())
}
