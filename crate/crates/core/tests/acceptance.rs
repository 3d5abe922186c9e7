//! Acceptance criteria. Prints one `PASS` / `FAIL` / `SKIP` line per
//! criterion and exits non-zero if any criterion fails.
//!
//! Run a subset with e.g. `cargo test --test acceptance -- 2 5`.

mod common;

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use ifpca::acm::{experiment_preset, generate, threshold_tpq, AcmConfig};
use ifpca::cluster::{hamming_error, kmeanspp_seed, lloyd, LabelVector};
use ifpca::experiment::{alt_draws, null_tail_rows, simulate_with_nulls, AltSpec, SimMethod, SimRow, SimulateOptions};
use ifpca::io::{read_labels, MatrixFile};
use ifpca::ks::{ks_of_standardized, NullTable};
use ifpca::matrix::{standardize_columns, ConstantColumns, DataMatrix, Matrix};
use ifpca::pipeline::{if_hct_pca, if_pca_fixed, PipelineOptions};
use ifpca::svd::{truncated_left_svd, SvdOptions};
use ifpca::Result;

// 1: null tail
const C1_N: usize = 5000;
const C1_DRAWS: usize = 1_000_000;
const C1_GRID: [f64; 3] = [1.0, 1.2, 1.4];
const C1_RATIO: (f64, f64) = (0.8, 2.5);
const C1_SEED: u64 = 11;

// 2: useful-feature power
const C2_N: usize = 1000;
const C2_P: usize = 10_000;
const C2_Q: f64 = 0.05;
const C2_DRAWS: usize = 10_000;
const C2_MAX_MISS: f64 = 0.05;
const C2_SEED: u64 = 12;

// 3: experiment 1b, asymmetric weights
const C3_REPS: usize = 30;
const C3_MAX_ERR: f64 = 0.25;
const C3_SEED: u64 = 13;

// 4: HC against the best fixed threshold
const C4_REPS: usize = 10;
const C4_Q: [f64; 4] = [0.03, 0.04, 0.05, 0.06];
const C4_FACTOR: f64 = 1.5;
const C4_SLACK: f64 = 0.05;
const C4_SEED: u64 = 14;

// 5: exact oracles
const C5_KS_INSTANCES: usize = 1000;
const C5_KS_MAX_N: usize = 200;
const C5_HAMMING_PAIRS: usize = 1000;
const C5_HAMMING_MAX_K: usize = 5;
const C5_SVD_MATRICES: usize = 100;
const C5_SVD_MAX_DIM: usize = 12;
const C5_SVD_TOL: f64 = 1e-8;
const C5_SEED: u64 = 15;

// 6: invariants
const C6_LLOYD_RUNS: usize = 100;
const C6_LLOYD_REL_TOL: f64 = 1e-12;
const C6_IDEMPOTENCE_TOL: f64 = 1e-12;
const C6_ZERO_SUM_TOL: f64 = 1e-12;
const C6_THREADS: [usize; 2] = [1, 4];
const C6_SEED: u64 = 16;

// 7: real data
const C7_ENV: &str = "IFPCA_DATA_DIR";
const C7_LUNG_ERR: (f64, f64) = (0.033, 0.02);
const C7_LUNG_SELECTED: (usize, usize) = (150, 400);
const C7_LEUK_ERR: (f64, f64) = (0.069, 0.04);
const C7_FIXED_T: f64 = 0.938;
const C7_FIXED_COUNT: (usize, usize) = (484, 30);
const C7_SEED: u64 = 7;

enum Verdict {
    Pass,
    Fail,
    Skip,
}

struct Outcome {
    verdict: Verdict,
    detail: String,
}

impl Outcome {
    fn check(ok: bool, detail: String) -> Self {
        Self { verdict: if ok { Verdict::Pass } else { Verdict::Fail }, detail }
    }
}

fn null_tail() -> Result<Outcome> {
    let table = ifpca::ks::build_null_table(C1_N, C1_DRAWS, C1_SEED)?;
    let rows = null_tail_rows(&table, &C1_GRID);
    let ok = rows.iter().all(|r| r.ratio >= C1_RATIO.0 && r.ratio <= C1_RATIO.1);
    let detail = rows
        .iter()
        .map(|r| format!("t={}: P={:.3e} approx={:.3e} ratio={:.3} ({} hits)", r.t, r.empirical_survival, r.theory_lower, r.ratio, r.hits))
        .collect::<Vec<_>>()
        .join("; ");
    Ok(Outcome::check(ok, format!("{detail}; required ratio in [{}, {}]", C1_RATIO.0, C1_RATIO.1)))
}

fn power() -> Result<Outcome> {
    let t = threshold_tpq(C2_Q, C2_P);
    // tau = sqrt(n) |sum delta m^3| / (6 sqrt(2 pi)) with m = (c, -c/2): sum = c^3 / 4
    let target = 2.0 * t;
    let c = (4.0 * target * 6.0 * (2.0 * std::f64::consts::PI).sqrt() / (C2_N as f64).sqrt()).cbrt();
    let spec = AltSpec { delta: vec![1.0 / 3.0, 2.0 / 3.0], m: vec![c, -c / 2.0] };
    let tau = spec.tau(C2_N);
    let draws = alt_draws(&spec, C2_N, C2_DRAWS, C2_SEED)?;
    let miss = draws.partition_point(|&v| v <= t) as f64 / draws.len() as f64;
    let ok = (tau - target).abs() < 1e-12 && miss < C2_MAX_MISS;
    Ok(Outcome::check(
        ok,
        format!("t={t:.5}, c={c:.5}, tau={tau:.5}; P(psi <= t) = {miss:.4} over {C2_DRAWS} draws (required < {C2_MAX_MISS})"),
    ))
}

fn row<'a>(rows: &'a [SimRow], setting: &str, method: &str) -> &'a SimRow {
    rows.iter().find(|r| r.setting == setting && r.method == method).expect("row present")
}

fn experiment_1b(nulls: &mut BTreeMap<usize, NullTable>) -> Result<Outcome> {
    let asym: Vec<AcmConfig> = experiment_preset("1b")?
        .into_iter()
        .filter(|c| c.delta[0] < 0.5 && (c.r == 0.20 || c.r == 0.65))
        .collect();
    assert_eq!(asym.len(), 2);
    let opts = SimulateOptions { reps: C3_REPS, seed: C3_SEED, methods: vec![SimMethod::Ifpca1], ..Default::default() };
    let rows = simulate_with_nulls("1b", &asym, &opts, nulls)?;
    let low = row(&rows, &asym[0].setting, "ifpca1");
    let high = row(&rows, &asym[1].setting, "ifpca1");
    let ok = high.mean_error <= C3_MAX_ERR && high.mean_error < low.mean_error;
    Ok(Outcome::check(
        ok,
        format!(
            "IF-HCT-PCA mean error r=.20: {:.3} (sd {:.3}), r=.65: {:.3} (sd {:.3}), {} reps; required r=.65 <= {C3_MAX_ERR} and below r=.20",
            low.mean_error, low.sd_error, high.mean_error, high.sd_error, C3_REPS
        ),
    ))
}

fn hc_vs_fixed(nulls: &mut BTreeMap<usize, NullTable>) -> Result<Outcome> {
    let mut cfg = experiment_preset("2a")?.into_iter().find(|c| c.vartheta == 0.68).expect("vartheta .68 in grid");
    cfg.fixed_q = C4_Q.to_vec();
    let opts = SimulateOptions {
        reps: C4_REPS,
        seed: C4_SEED,
        methods: vec![SimMethod::Ifpca1, SimMethod::Ifpca2],
        ..Default::default()
    };
    let rows = simulate_with_nulls("2a", std::slice::from_ref(&cfg), &opts, nulls)?;
    let hc = row(&rows, &cfg.setting, "ifpca1").mean_error;
    let fixed: Vec<(String, f64)> =
        rows.iter().filter(|r| r.method.starts_with("ifpca2")).map(|r| (r.method.clone(), r.mean_error)).collect();
    let best = fixed.iter().map(|f| f.1).fold(f64::INFINITY, f64::min);
    let bound = C4_FACTOR * best + C4_SLACK;
    let listing = fixed.iter().map(|(m, e)| format!("{m}={e:.3}")).collect::<Vec<_>>().join(", ");
    Ok(Outcome::check(hc <= bound, format!("HC {hc:.3} vs fixed [{listing}]; bound {C4_FACTOR}*{best:.3}+{C4_SLACK} = {bound:.3}")))
}

fn standardized(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let (mean, sd) = ifpca::matrix::mean_sd(&v);
    v.iter_mut().for_each(|x| *x = (*x - mean) / sd);
    v
}

fn oracles() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(C5_SEED);

    let mut ks_mismatch = 0;
    for _ in 0..C5_KS_INSTANCES {
        let n = rng.random_range(2..=C5_KS_MAX_N);
        let v = standardized(&mut rng, n);
        if ks_of_standardized(&v) != common::ks_brute_force(&v) {
            ks_mismatch += 1;
        }
    }

    let mut ham_mismatch = 0;
    for _ in 0..C5_HAMMING_PAIRS {
        let k = rng.random_range(1..=C5_HAMMING_MAX_K);
        let n = rng.random_range(1..=60);
        let a: Vec<usize> = (0..n).map(|_| rng.random_range(1..=k)).collect();
        let b: Vec<usize> = (0..n).map(|_| rng.random_range(1..=k)).collect();
        let fast = hamming_error(&LabelVector::new(a.clone(), k)?, &LabelVector::new(b.clone(), k)?, k)?;
        if fast != common::hamming_oracle(&a, &b, k) {
            ham_mismatch += 1;
        }
    }

    let mut worst = 0.0f64;
    for _ in 0..C5_SVD_MATRICES {
        let rows = rng.random_range(2..=C5_SVD_MAX_DIM);
        let cols = rng.random_range(2..=C5_SVD_MAX_DIM);
        let k = rng.random_range(1..=rows.min(cols));
        let values: Vec<f64> = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
        let dense = common::dense_singular_values(rows, cols, &values);
        let emb = truncated_left_svd(&Matrix::from_col_major(rows, cols, values)?, k, &SvdOptions::default())?;
        for (a, b) in emb.singular_values.iter().zip(&dense) {
            worst = worst.max((a - b).abs());
        }
    }

    let ok = ks_mismatch == 0 && ham_mismatch == 0 && worst <= C5_SVD_TOL;
    Ok(Outcome::check(
        ok,
        format!(
            "KS vs brute force: {ks_mismatch}/{C5_KS_INSTANCES} differ; Hamming vs enumeration: {ham_mismatch}/{C5_HAMMING_PAIRS} differ; \
             SVD max |sigma - oracle| = {worst:.2e} over {C5_SVD_MATRICES} matrices (tol {C5_SVD_TOL:e})"
        ),
    ))
}

fn invariants() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(C6_SEED);
    let mut notes = Vec::new();

    let mut lloyd_violations = 0;
    for _ in 0..C6_LLOYD_RUNS {
        let n = rng.random_range(20..=80);
        let d = rng.random_range(1..=5);
        let k = rng.random_range(2..=5);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..d).map(|_| (i % 3) as f64 * 2.0 + rng.sample::<f64, _>(StandardNormal)).collect())
            .collect();
        let points = Matrix::from_rows(&rows)?;
        let init = kmeanspp_seed(&points, k, &mut rng)?;
        let run = lloyd(&points, &init, 300)?;
        if run.trace.windows(2).any(|w| w[1] > w[0] * (1.0 + C6_LLOYD_REL_TOL)) {
            lloyd_violations += 1;
        }
    }
    notes.push(format!("Lloyd trace increases in {lloyd_violations}/{C6_LLOYD_RUNS} runs"));

    let mut worst_idem = 0.0f64;
    for _ in 0..20 {
        let (n, p) = (rng.random_range(2..=40), rng.random_range(1..=30));
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..p).map(|_| 3.0 + 2.0 * rng.sample::<f64, _>(StandardNormal)).collect()).collect();
        let w = standardize_columns(&DataMatrix::from_rows(&rows)?, ConstantColumns::Error)?;
        let ww = standardize_columns(&w.to_data(), ConstantColumns::Error)?;
        for (a, b) in w.matrix().as_col_major().iter().zip(ww.matrix().as_col_major()) {
            worst_idem = worst_idem.max((a - b).abs());
        }
    }
    notes.push(format!("standardization idempotence max diff {worst_idem:.1e}"));

    let mut worst_sum = 0.0f64;
    let mut configs = experiment_preset("1a")?;
    configs.truncate(5);
    configs.extend(experiment_preset("4")?.into_iter().take(1));
    configs.extend(experiment_preset("5")?.into_iter().take(1));
    for (i, cfg) in configs.iter().enumerate() {
        let (_, truth) = generate(cfg, C6_SEED + i as u64)?;
        for &j in &truth.useful {
            let s: f64 = (0..cfg.k).map(|k| cfg.delta[k] * truth.mu[k][j]).sum();
            worst_sum = worst_sum.max(s.abs());
        }
    }
    notes.push(format!("max |sum delta_k mu_k(j)| = {worst_sum:.1e}"));

    let cfg = experiment_preset("5")?.remove(0);
    let opts = PipelineOptions { null_draws: Some(20_000), ..PipelineOptions::simulation(cfg.k) };
    let mut reports = Vec::new();
    for threads in C6_THREADS {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool");
        let json = pool.install(|| -> Result<String> {
            let (x, truth) = generate(&cfg, C6_SEED)?;
            if_hct_pca(&x, &opts, None)?.with_truth(&truth.y)?.without_timings().to_json()
        })?;
        reports.push(json);
    }
    let same = reports.windows(2).all(|w| w[0] == w[1]);
    notes.push(format!("JSON report identical across {C6_THREADS:?} threads: {same}"));

    let ok = lloyd_violations == 0 && worst_idem <= C6_IDEMPOTENCE_TOL && worst_sum <= C6_ZERO_SUM_TOL && same;
    Ok(Outcome::check(ok, notes.join("; ")))
}

fn real_data() -> Result<Outcome> {
    let Some(dir) = std::env::var_os(C7_ENV) else {
        return Ok(Outcome { verdict: Verdict::Skip, detail: format!("{C7_ENV} not set; real data sets not supplied") });
    };
    let dir = Path::new(&dir);
    let files = ["lung1.csv", "lung1_labels.csv", "leukemia.csv", "leukemia_labels.csv"];
    if let Some(missing) = files.iter().find(|f| !dir.join(f).is_file()) {
        return Ok(Outcome { verdict: Verdict::Skip, detail: format!("{} missing", dir.join(missing).display()) });
    }
    let opts = PipelineOptions { seed: C7_SEED, ..PipelineOptions::default() };
    let lung = MatrixFile::new(dir.join("lung1.csv")).read()?;
    let lung_y = read_labels(&dir.join("lung1_labels.csv"), None)?;
    let r = if_hct_pca(&lung, &PipelineOptions { k: lung_y.k(), ..opts.clone() }, None)?.with_truth(&lung_y)?;
    let fixed = if_pca_fixed(&lung, lung_y.k(), C7_FIXED_T, &opts)?;
    let leuk = MatrixFile::new(dir.join("leukemia.csv")).read()?;
    let leuk_y = read_labels(&dir.join("leukemia_labels.csv"), None)?;
    let l = if_hct_pca(&leuk, &PipelineOptions { k: leuk_y.k(), ..opts }, None)?.with_truth(&leuk_y)?;

    let lung_err = r.error_rate.unwrap_or(1.0);
    let leuk_err = l.error_rate.unwrap_or(1.0);
    let ok = (lung_err - C7_LUNG_ERR.0).abs() <= C7_LUNG_ERR.1
        && (C7_LUNG_SELECTED.0..=C7_LUNG_SELECTED.1).contains(&r.n_selected)
        && (leuk_err - C7_LEUK_ERR.0).abs() <= C7_LEUK_ERR.1
        && fixed.n_selected.abs_diff(C7_FIXED_COUNT.0) <= C7_FIXED_COUNT.1;
    Ok(Outcome::check(
        ok,
        format!(
            "lung1 error {lung_err:.3} with {} features, t={C7_FIXED_T} keeps {}; leukemia error {leuk_err:.3}",
            r.n_selected, fixed.n_selected
        ),
    ))
}

const CRITERIA: [(usize, &str); 7] = [
    (1, "null tail vs approximation"),
    (2, "useful-feature power"),
    (3, "experiment 1b reproduction"),
    (4, "HC vs best fixed threshold"),
    (5, "exact oracles"),
    (6, "invariant suites"),
    (7, "real-data spot checks"),
];

fn main() {
    let wanted: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    // criteria 3 and 4 share n = 577 and therefore one null table
    let mut nulls = BTreeMap::new();
    let mut failed = 0;
    for (id, name) in CRITERIA {
        if !wanted.is_empty() && !wanted.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let result = match id {
            1 => null_tail(),
            2 => power(),
            3 => experiment_1b(&mut nulls),
            4 => hc_vs_fixed(&mut nulls),
            5 => oracles(),
            6 => invariants(),
            _ => real_data(),
        };
        let outcome = result.unwrap_or_else(|e| Outcome { verdict: Verdict::Fail, detail: format!("error: {e}") });
        let tag = match outcome.verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => {
                failed += 1;
                "FAIL"
            }
            Verdict::Skip => "SKIP",
        };
        println!("criterion {id} [{tag}] {name}: {} ({:.1}s)", outcome.detail, start.elapsed().as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
