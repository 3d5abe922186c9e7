//! Picks a screening threshold with Higher Criticism and writes the HC curve
//! to `hc_curve.csv`.

use std::fs::File;

use ifpca::acm::experiment_preset;
use ifpca::acm::generate;
use ifpca::hc::hc_threshold;
use ifpca::ks::{build_null_table, ks_scores, pvalues, select_features};
use ifpca::matrix::{standardize_columns, ConstantColumns};

fn main() -> ifpca::Result<()> {
    let mut cfg = experiment_preset("1a")?.remove(3);
    cfg.p = 8000;
    let (x, truth) = generate(&cfg, 3)?;
    let w = standardize_columns(&x, ConstantColumns::Error)?;
    let scores = ks_scores(&w);
    let null = build_null_table(x.n(), 50_000, 1)?;
    let hc = hc_threshold(&pvalues(&scores, &null), &scores, x.n(), true)?;

    let kept = select_features(&scores, hc.t_hc)?;
    let hits = kept.indices.iter().filter(|j| truth.useful.binary_search(j).is_ok()).count();
    println!("j_hat = {}, HC max = {:.3}, threshold = {:.4}", hc.j_hat, hc.max_hc(), hc.t_hc);
    println!("kept {} features, {} of them useful (out of {} useful)", kept.len(), hits, truth.useful.len());

    hc.write_curve_csv(File::create("hc_curve.csv")?)?;
    println!("curve written to hc_curve.csv");
    Ok(())
}
