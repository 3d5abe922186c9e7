//! Compares the simulated null survival of the KS score with its Gaussian-type
//! approximation, and the miss rate of one useful feature with its bound.

use ifpca::acm::threshold_tpq;
use ifpca::experiment::{alt_draws, alt_tail_rows, null_tail_rows, AltSpec};
use ifpca::ks::build_null_table;

fn main() -> ifpca::Result<()> {
    let n = 500;
    let table = build_null_table(n, 100_000, 3)?;
    println!("{:>5} {:>12} {:>12} {:>7}", "t", "P(psi>=t)", "approx", "ratio");
    for r in null_tail_rows(&table, &[0.6, 0.8, 1.0, 1.2]) {
        println!("{:>5} {:>12.3e} {:>12.3e} {:>7.3}", r.t, r.empirical_survival, r.theory_lower, r.ratio);
    }

    let spec = AltSpec { delta: vec![1.0 / 3.0, 2.0 / 3.0], m: vec![1.2, -0.6] };
    let t = threshold_tpq(0.05, 10_000);
    let draws = alt_draws(&spec, n, 5000, 4)?;
    println!("useful feature with tau = {:.3}", spec.tau(n));
    for r in alt_tail_rows(&draws, &spec, n, &[t, 0.5, 0.7]) {
        println!("  t = {:.3}: P(psi <= t) = {:.4}, bound {:.3e}", r.t, r.empirical_miss, r.bound);
    }
    Ok(())
}
