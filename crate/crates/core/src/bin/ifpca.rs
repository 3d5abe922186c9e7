use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ifpca::acm::{experiment_preset, AcmConfig};
use ifpca::experiment::{
    alt_draws, alt_tail_rows, null_tail_rows, simulate, write_alt_tail_csv, write_null_tail_csv, write_sim_csv, AltSpec,
    SimMethod, SimulateOptions, DEFAULT_METHODS,
};
use ifpca::io::{read_labels, write_labels, MatrixFile, Orientation};
use ifpca::ks::{build_null_table, NormMode, NullTable};
use ifpca::matrix::ConstantColumns;
use ifpca::pipeline::{run, Method, PipelineOptions, ThresholdRule};
use ifpca::{Error, ExitStatus, Result};

#[derive(Parser)]
#[command(name = "ifpca", version, about = "KS screening + Higher Criticism + post-selection PCA clustering")]
struct Cli {
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster the rows of a numeric matrix and print a JSON report.
    Cluster(ClusterArgs),
    /// Run a simulation sweep and print a CSV of mean Hamming errors.
    Simulate(SimulateArgs),
    /// Simulate and save a null table of KS scores.
    Nulltable(NullTableArgs),
    /// Compare simulated KS tail probabilities with their approximations.
    Tailcheck(TailcheckArgs),
}

#[derive(Args)]
struct ClusterArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    k: usize,
    /// True labels (one integer per line) for the error rate.
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long, default_value = "ifpca", value_parser = parse_method)]
    method: Method,
    #[arg(long, default_value = "meanstd", value_parser = parse_norm)]
    norm: NormMode,
    /// `hc`, `fixed:<t>` or `fixed-q:<q>`.
    #[arg(long, default_value = "hc", value_parser = parse_threshold)]
    threshold: ThresholdRule,
    #[arg(long, conflicts_with = "null_reps")]
    null_table: Option<PathBuf>,
    /// Null draws to simulate [default: max(10^6, 100 p)].
    #[arg(long)]
    null_reps: Option<usize>,
    #[arg(long, default_value_t = 0)]
    null_seed: u64,
    #[arg(long, default_value_t = 30)]
    replicates: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// The file holds one row per feature.
    #[arg(long)]
    transpose: bool,
    /// Clip the embedding at log(p)/sqrt(n).
    #[arg(long)]
    truncate: bool,
    /// Retry HC without the p-value floor when nothing is eligible.
    #[arg(long)]
    hc_fallback: bool,
    /// Drop zero-variance columns instead of failing.
    #[arg(long)]
    drop_constant: bool,
    /// Field delimiter; sniffed from the first line when omitted.
    #[arg(long)]
    delimiter: Option<char>,
    /// Write the fitted labels here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Leave wall-clock timings out of the report.
    #[arg(long)]
    no_timings: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, required_unless_present = "config", conflicts_with = "config")]
    experiment: Option<String>,
    /// JSON file with one configuration or an array of them.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Repetitions per setting [default: the configuration's `rep`].
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated: ifpca1, ifpca2, pca, kmeans, kmeanspp, hier, if-kmeans, if-hier.
    #[arg(long, value_delimiter = ',', value_parser = parse_sim_method)]
    methods: Vec<SimMethod>,
    #[arg(long)]
    null_reps: Option<usize>,
    #[arg(long, default_value_t = 30)]
    replicates: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct NullTableArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Text format, or little-endian binary when the name ends in `.bin`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TailcheckArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    reps: usize,
    #[arg(long, value_delimiter = ',', required = true)]
    grid: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Reuse a saved null table instead of simulating one.
    #[arg(long, conflicts_with = "alt")]
    null_table: Option<PathBuf>,
    /// Useful-feature check: JSON `{"delta": [...], "m": [...]}` or a path to such a file.
    #[arg(long)]
    alt: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_norm(s: &str) -> std::result::Result<NormMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_threshold(s: &str) -> std::result::Result<ThresholdRule, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_sim_method(s: &str) -> std::result::Result<SimMethod, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn cluster(a: ClusterArgs) -> Result<()> {
    let spec = MatrixFile {
        path: a.input.clone(),
        delimiter: a.delimiter.map(|c| c as u8),
        orientation: if a.transpose { Orientation::FeaturesBySamples } else { Orientation::SamplesByFeatures },
        header: None,
    };
    let x = spec.read()?;
    let truth = a.labels.as_deref().map(|p| read_labels(p, None)).transpose()?;
    if let Some(t) = &truth {
        if t.len() != x.n() {
            return Err(Error::InvalidInput(format!("{} labels for {} samples", t.len(), x.n())));
        }
    }
    let opts = PipelineOptions {
        k: a.k,
        method: a.method,
        normalization: a.norm,
        threshold: a.threshold,
        truncate: a.truncate,
        null_draws: a.null_reps,
        null_seed: a.null_seed,
        replicates: a.replicates,
        seed: a.seed,
        hc_fallback: a.hc_fallback,
        constant_columns: if a.drop_constant { ConstantColumns::Drop } else { ConstantColumns::Error },
    };
    let table = a.null_table.as_deref().map(NullTable::load).transpose()?;
    let mut report = run(&x, &opts, table.as_ref())?;
    if let Some(t) = &truth {
        report = report.with_truth(t)?;
    }
    if a.no_timings {
        report = report.without_timings();
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(out) = &a.out {
        write_labels(out, &report.labels)?;
    }
    let mut stdout = io::stdout().lock();
    writeln!(stdout, "{}", report.to_json()?)?;
    Ok(())
}

fn load_configs(path: &Path) -> Result<Vec<AcmConfig>> {
    let text = std::fs::read_to_string(path)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::Parse { path: path.to_path_buf(), msg: e.to_string() })?;
    let configs = if value.is_array() {
        serde_json::from_value(value)
    } else {
        serde_json::from_value(value).map(|c| vec![c])
    };
    configs.map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
}

fn simulate_cmd(a: SimulateArgs) -> Result<()> {
    let (name, configs) = match (&a.experiment, &a.config) {
        (Some(id), _) => (id.clone(), experiment_preset(id)?),
        (None, Some(path)) => {
            let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "custom".into());
            (stem, load_configs(path)?)
        }
        (None, None) => unreachable!("clap requires one of them"),
    };
    let reps = a.reps.unwrap_or_else(|| configs.first().map_or(1, |c| c.rep));
    let opts = SimulateOptions {
        reps,
        seed: a.seed,
        methods: if a.methods.is_empty() { DEFAULT_METHODS.to_vec() } else { a.methods },
        null_draws: a.null_reps,
        replicates: a.replicates,
    };
    let rows = simulate(&name, &configs, &opts)?;
    for r in rows.iter().filter(|r| r.empty_runs > 0) {
        eprintln!("note: {} / {}: {} of {} runs selected nothing", r.setting, r.method, r.empty_runs, r.reps);
    }
    write_sim_csv(&rows, output(a.out.as_deref())?)
}

fn nulltable(a: NullTableArgs) -> Result<()> {
    if a.reps == 0 {
        return Err(Error::InvalidConfig("--reps must be positive".into()));
    }
    build_null_table(a.n, a.reps, a.seed)?.save(&a.out)
}

fn tailcheck(a: TailcheckArgs) -> Result<()> {
    if a.reps == 0 {
        return Err(Error::InvalidConfig("--reps must be positive".into()));
    }
    if a.grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidConfig("grid values must be finite".into()));
    }
    let out = output(a.out.as_deref())?;
    match &a.alt {
        Some(alt) => {
            let text = if Path::new(alt).is_file() { std::fs::read_to_string(alt)? } else { alt.clone() };
            let spec: AltSpec =
                serde_json::from_str(&text).map_err(|e| Error::InvalidConfig(format!("--alt: {e}")))?;
            let draws = alt_draws(&spec, a.n, a.reps, a.seed)?;
            write_alt_tail_csv(&alt_tail_rows(&draws, &spec, a.n, &a.grid), out)?;
        }
        None => {
            let table = match &a.null_table {
                Some(p) => NullTable::load(p)?,
                None => build_null_table(a.n, a.reps, a.seed)?,
            };
            write_null_tail_csv(&null_tail_rows(&table, &a.grid), out)?;
        }
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    }
    match cli.command {
        Command::Cluster(a) => cluster(a),
        Command::Simulate(a) => simulate_cmd(a),
        Command::Nulltable(a) => nulltable(a),
        Command::Tailcheck(a) => tailcheck(a),
    }
}

fn main() -> ExitCode {
    std::panic::set_hook(Box::new(|info| eprintln!("internal error: {info}")));
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { ExitStatus::Usage.code() as u8 } else { 0 });
        }
    };
    match std::panic::catch_unwind(|| dispatch(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(ExitStatus::from(&e).code() as u8)
        }
        Err(_) => ExitCode::FAILURE,
    }
}
