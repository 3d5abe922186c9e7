//! Scores every feature of a synthetic two-class data set with the KS
//! statistic and turns the scores into p-values against a simulated null.

use ifpca::acm::{generate, AcmConfig, DistributionSpec, NoiseModel};
use ifpca::ks::{build_null_table, ks_scores, pvalues};
use ifpca::matrix::{standardize_columns, ConstantColumns};

fn main() -> ifpca::Result<()> {
    let cfg = AcmConfig {
        setting: "demo".into(),
        k: 2,
        p: 3000,
        theta: 0.7,
        vartheta: 0.5,
        r: 1.5,
        rep: 1,
        delta: vec![1.0 / 3.0, 2.0 / 3.0],
        gamma: [0.5, 0.0, 0.5],
        g_mu_bar: DistributionSpec::Normal { mean: 0.0, var: 1.0 },
        g_mu: DistributionSpec::Uniform { a: 1.0, b: 0.2 },
        g_sigma: DistributionSpec::PointMass { c: 1.0 },
        noise: NoiseModel::IidGaussian,
        fixed_q: vec![],
        center_realized: false,
    };
    let (x, truth) = generate(&cfg, 1)?;
    println!("n = {}, p = {}, useful features = {}", x.n(), x.p(), truth.useful.len());

    let w = standardize_columns(&x, ConstantColumns::Error)?;
    let scores = ks_scores(&w);
    let null = build_null_table(x.n(), 20_000, 7)?;
    let pv = pvalues(&scores, &null);

    let mut order: Vec<usize> = (0..x.p()).collect();
    order.sort_by(|&a, &b| scores.scores[b].total_cmp(&scores.scores[a]));
    println!("{:>8} {:>8} {:>10} {:>7}", "feature", "psi", "p-value", "useful");
    for &j in order.iter().take(15) {
        let useful = truth.useful.binary_search(&j).is_ok();
        println!("{:>8} {:>8.4} {:>10.2e} {:>7}", j + 1, scores.scores[j], pv.0[j], useful);
    }
    Ok(())
}
