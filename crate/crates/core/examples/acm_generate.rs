//! Draws one data set from each simulation experiment and prints per-feature
//! signal diagnostics for a few useful features.

use ifpca::acm::{experiment_preset, generate, EXPERIMENTS};

fn main() -> ifpca::Result<()> {
    for id in EXPERIMENTS {
        let mut cfg = experiment_preset(id)?.remove(0);
        cfg.p /= 4;
        let (x, truth) = generate(&cfg, 2)?;
        println!(
            "experiment {id:>2} [{}]: n = {}, p = {}, K = {}, useful = {}",
            cfg.setting,
            x.n(),
            x.p(),
            cfg.k,
            truth.useful.len()
        );
        for &j in truth.useful.iter().take(3) {
            println!(
                "    feature {:>5}: m = {:.3?}  kappa = {:.3}  tau = {:.3}  omega = {:.3}",
                j + 1,
                truth.standardized_means(j),
                truth.kappa[j],
                truth.tau[j],
                truth.omega[j]
            );
        }
    }
    Ok(())
}
