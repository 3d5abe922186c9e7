//! A scaled-down simulation sweep printed as CSV.

use ifpca::acm::experiment_preset;
use ifpca::experiment::{simulate, write_sim_csv, SimMethod, SimulateOptions};
use ifpca::pipeline::Method;

fn main() -> ifpca::Result<()> {
    let configs: Vec<_> = experiment_preset("4")?
        .into_iter()
        .map(|mut c| {
            c.p = 4000;
            c
        })
        .collect();
    let opts = SimulateOptions {
        reps: 3,
        seed: 1,
        methods: vec![SimMethod::Ifpca1, SimMethod::Ifpca2, SimMethod::Other(Method::Kmeans)],
        null_draws: Some(20_000),
        replicates: 10,
    };
    let rows = simulate("4-small", &configs, &opts)?;
    write_sim_csv(&rows, std::io::stdout().lock())
}
