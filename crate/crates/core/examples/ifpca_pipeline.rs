//! Clusters one synthetic data set with IF-PCA and with the baselines.

use ifpca::acm::{experiment_preset, generate};
use ifpca::ks::build_null_table;
use ifpca::pipeline::{run, Method, PipelineOptions, ThresholdRule};

fn main() -> ifpca::Result<()> {
    let mut cfg = experiment_preset("1a")?.remove(3);
    cfg.p = 8000;
    let (x, truth) = generate(&cfg, 4)?;
    println!("{}: n = {}, p = {}, useful = {}", cfg.setting, x.n(), x.p(), truth.useful.len());

    let null = build_null_table(x.n(), 50_000, 0)?;
    let base = PipelineOptions { replicates: 10, ..PipelineOptions::simulation(2) };
    let runs = [
        ("IF-PCA, HC threshold", PipelineOptions { ..base.clone() }),
        ("IF-PCA, q = 0.06", PipelineOptions { threshold: ThresholdRule::FixedQ { q: 0.06 }, ..base.clone() }),
        ("IF + k-means", PipelineOptions { method: Method::IfKmeans, ..base.clone() }),
        ("classical PCA", PipelineOptions { method: Method::Pca, ..base.clone() }),
        ("k-means", PipelineOptions { method: Method::Kmeans, ..base.clone() }),
        ("hierarchical", PipelineOptions { method: Method::Hier, ..base.clone() }),
    ];
    for (name, opts) in runs {
        let r = run(&x, &opts, Some(&null))?.with_truth(&truth.y)?;
        println!("{name:<22} features {:>5}  error {:.3}", r.n_selected, r.error_rate.unwrap_or(f64::NAN));
    }

    let report = run(&x, &base, Some(&null))?.with_truth(&truth.y)?.without_timings();
    let json = report.to_json()?;
    println!("report JSON is {} bytes; first selected features {:?}", json.len(), &report.selected[..report.selected.len().min(5)]);
    Ok(())
}
