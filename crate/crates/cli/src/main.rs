//! `mmdf`: generate MMDF networks, estimate mixed memberships with DFSP,
//! scan the number of communities and run the simulation and real-data
//! suites.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use mmdf::datasets::{self, DATASETS};
use mmdf::dfsp::dfsp_from_spectrum;
use mmdf::graph::{read_node_labels, read_truth_labels, LoadedGraph};
use mmdf::harness::{run_dataset_suite, run_simulation, EstimatorK, ExperimentConfig, Mode, Profile, SimulationDesign};
use mmdf::modularity::{estimate_k_from_spectrum, ScanOptions};
use mmdf::spectral::SymmetricSpectrum;
use mmdf::{
    fuzzy_weighted_modularity, harden, load_edge_list, mislabel_count, mixedness_indices, EdgeListFormat, Error,
    Execution,
};

#[derive(Parser)]
#[command(name = "mmdf", version, about = "Mixed membership distribution-free network toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo sweep over a generator parameter.
    Simulate(SimulateArgs),
    /// Estimate memberships of one network.
    Detect(DetectArgs),
    /// Modularity curve over k = 1..k_max.
    ScanK(ScanArgs),
    /// Real-data suite (Tables 1-4 and modularity curves).
    Datasets(DatasetArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Experiment config (TOML).
    #[arg(long, conflicts_with = "design")]
    config: Option<PathBuf>,
    /// Built-in simulation design.
    #[arg(long, value_enum)]
    design: Option<DesignArg>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = parse_profile)]
    profile: Option<Profile>,
    /// Replicates per sweep value; overrides the profile.
    #[arg(long)]
    replications: Option<usize>,
    /// Estimator K: an integer, `truth` or `auto`.
    #[arg(long, value_parser = parse_estimator_k)]
    k: Option<EstimatorK>,
    #[arg(long)]
    k_max: Option<usize>,
    /// Print the resolved config as TOML and exit.
    #[arg(long)]
    print_config: bool,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct DetectArgs {
    /// Edge list: `src dst [weight]` per line.
    graph: PathBuf,
    /// Number of communities or `auto`.
    #[arg(long, default_value = "auto", value_parser = parse_k)]
    k: KArg,
    #[arg(long)]
    k_max: Option<usize>,
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct ScanArgs {
    graph: PathBuf,
    #[arg(long)]
    k_max: Option<usize>,
    /// Stop at the first k that does not improve modularity.
    #[arg(long)]
    stop_early: bool,
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct DatasetArgs {
    /// Dataset stems; all registered datasets when omitted.
    names: Vec<String>,
    /// Data directory (defaults to `$MMDF_DATA` or the bundled fixtures).
    #[arg(long)]
    root: Option<PathBuf>,
    #[arg(long)]
    k_max: Option<usize>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct InputArgs {
    /// Node label file, one per line; fixes node order for named ids.
    #[arg(long)]
    nodes: Option<PathBuf>,
    /// Ground-truth communities, one 1-based index per line.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Treat node ids as names rather than 1-based integers.
    #[arg(long)]
    named: bool,
}

#[derive(Args)]
struct CommonArgs {
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run everything on the calling thread.
    #[arg(long)]
    sequential: bool,
}

impl CommonArgs {
    fn execution(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DesignArg {
    Normal,
    Bernoulli,
    Poisson,
    Uniform,
    Signed,
}

impl From<DesignArg> for SimulationDesign {
    fn from(d: DesignArg) -> Self {
        match d {
            DesignArg::Normal => SimulationDesign::Normal,
            DesignArg::Bernoulli => SimulationDesign::Bernoulli,
            DesignArg::Poisson => SimulationDesign::Poisson,
            DesignArg::Uniform => SimulationDesign::Uniform,
            DesignArg::Signed => SimulationDesign::Signed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum KArg {
    Auto,
    #[serde(untagged)]
    Fixed(usize),
}

fn parse_k(s: &str) -> Result<KArg, String> {
    match s {
        "auto" => Ok(KArg::Auto),
        _ => match s.parse::<usize>() {
            Ok(k) if k >= 1 => Ok(KArg::Fixed(k)),
            _ => Err(format!("expected a positive integer or `auto`, got `{s}`")),
        },
    }
}

fn parse_estimator_k(s: &str) -> Result<EstimatorK, String> {
    match s {
        "truth" => Ok(EstimatorK::Truth),
        other => parse_k(other).map(|k| match k {
            KArg::Auto => EstimatorK::Auto,
            KArg::Fixed(k) => EstimatorK::Fixed(k),
        }),
    }
}

fn parse_profile(s: &str) -> Result<Profile, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Failure reported to the shell.
enum Failure {
    Mmdf(Error),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Mmdf(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Mmdf(e) => match e {
                Error::Config(_) | Error::Connectivity(_) | Error::Value(_) | Error::Domain(_) => 2,
                Error::Io { .. } | Error::Parse { .. } => 3,
                Error::Estimation { .. } => 4,
                Error::Contract(_) => 1,
            },
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Mmdf(e) => write!(f, "{e}"),
            Failure::Usage(m) => f.write_str(m),
        }
    }
}

type CliResult = Result<(), Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Detect(a) => detect(a),
        Command::ScanK(a) => scan_k(a),
        Command::Datasets(a) => dataset_suite(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn out_dir(arg: &Option<PathBuf>, fallback: &str) -> Result<PathBuf, Error> {
    let dir = arg.clone().unwrap_or_else(|| PathBuf::from(fallback));
    fs::create_dir_all(&dir).map_err(|e| io_error(&dir, e))?;
    Ok(dir)
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.to_path_buf(), source }
}

fn write_file(dir: &Path, name: &str, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<(), Error> {
    let path = dir.join(name);
    let file = File::create(&path).map_err(|e| io_error(&path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w).and_then(|_| w.flush()).map_err(|e| io_error(&path, e))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), Error> {
    write_file(dir, name, |w| {
        serde_json::to_writer_pretty(&mut *w, value).map_err(std::io::Error::other)?;
        writeln!(w)
    })
}

fn simulate(a: SimulateArgs) -> CliResult {
    let mut config = match (&a.config, a.design) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(d)) => SimulationDesign::from(d).experiment(a.profile.unwrap_or_default(), a.seed.unwrap_or(0)),
        (None, None) => return Err(Failure::Usage("simulate needs --config or --design".into())),
    };
    if config.mode != Mode::Simulate {
        return Err(Error::Config(format!("config mode is {:?}, expected simulate", config.mode)).into());
    }
    if let Some(seed) = a.seed {
        config.seed = seed;
    }
    if let Some(p) = a.profile {
        config.profile = p;
    }
    if a.replications.is_some() {
        config.replications = a.replications;
    }
    if let Some(k) = a.k {
        config.estimator_k = k;
    }
    if a.k_max.is_some() {
        config.k_max = a.k_max;
    }
    if a.common.sequential {
        config.execution = Execution::Sequential;
    }
    if a.print_config {
        print!("{}", config.to_toml()?);
        return Ok(());
    }
    let fallback = config.output.dir.clone().unwrap_or_else(|| "mmdf-out".into());
    let dir = out_dir(&a.common.out, &fallback)?;

    let report = run_simulation(&config)?;
    write_file(&dir, "sweep.csv", |w| report.write_csv(w))?;
    write_json(&dir, "summary.json", &report)?;
    for cell in &report.cells {
        println!(
            "{}={}: hamming={} relative={} accuracy={} failures={}",
            serde_json::to_value(report.parameter).unwrap_or_default().as_str().unwrap_or("value"),
            cell.value,
            fmt_opt(cell.mean_hamming),
            fmt_opt(cell.mean_relative),
            cell.accuracy_rate,
            cell.failures
        );
    }
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".into(), |x| format!("{x:.4}"))
}

fn load_input(path: &Path, input: &InputArgs) -> Result<(LoadedGraph, Option<Vec<usize>>), Error> {
    let mut format = if input.named { EdgeListFormat::named() } else { EdgeListFormat::default() };
    if let Some(nodes) = &input.nodes {
        format = format.with_node_file(nodes);
        if !input.named {
            format = format.with_node_count(read_node_labels(nodes)?.len());
        }
    }
    let loaded = load_edge_list(path, &format)?;
    let truth = match &input.truth {
        Some(t) => Some(read_truth_labels(t)?),
        None => None,
    };
    Ok((loaded, truth))
}

#[derive(Serialize)]
struct EigenDiagnostics {
    /// Top `K + 1` eigenvalue magnitudes (fewer when `K = n`).
    top_abs_eigenvalues: Vec<f64>,
    sigma_k: f64,
    /// `|λ_K| − |λ_{K+1}|`.
    sigma_k_gap: Option<f64>,
    corner_condition: f64,
}

#[derive(Serialize)]
struct DetectSummary {
    graph: String,
    nodes: usize,
    edges: usize,
    requested_k: KArg,
    k: usize,
    modularity: mmdf::ModularityValue,
    eta_mixed: f64,
    eta_pure: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    mislabels: Option<usize>,
    vertex_indices: Vec<usize>,
    clipped_rows: usize,
    degenerate_rows: usize,
    eigen: EigenDiagnostics,
}

fn detect(a: DetectArgs) -> CliResult {
    let (loaded, truth) = load_input(&a.graph, &a.input)?;
    let g = &loaded.graph;
    let dir = out_dir(&a.common.out, "mmdf-out")?;
    let spectrum = SymmetricSpectrum::new(g.weights())?;
    let report = match a.k {
        KArg::Fixed(k) => {
            if k > g.n() {
                return Err(Error::Domain(format!("k = {k} exceeds the {} nodes", g.n())).into());
            }
            dfsp_from_spectrum(&spectrum, k)?
        }
        KArg::Auto => {
            let opts = ScanOptions { k_max: a.k_max, execution: a.common.execution(), ..ScanOptions::default() };
            let scan = estimate_k_from_spectrum(g, &spectrum, &opts)?;
            write_file(&dir, "curve.csv", |w| scan.write_csv(w))?;
            scan.best
        }
    };
    let k = report.memberships.k();
    let q = fuzzy_weighted_modularity(g, &report.memberships)?;
    let eta = mixedness_indices(&report.memberships);
    let hard = harden(&report.memberships);
    let mislabels = match &truth {
        Some(t) => Some(mislabel_count(&hard, t)?),
        None => None,
    };
    let magnitudes: Vec<f64> = spectrum.values().iter().take(k + 1).map(|v| v.abs()).collect();
    let sigma_k = magnitudes[k - 1];
    let summary = DetectSummary {
        graph: a.graph.display().to_string(),
        nodes: g.n(),
        edges: g.edge_count(),
        requested_k: a.k,
        k,
        modularity: q,
        eta_mixed: eta.eta_mixed,
        eta_pure: eta.eta_pure,
        mislabels,
        vertex_indices: report.vertex_indices.indices.iter().map(|i| i + 1).collect(),
        clipped_rows: report.clipped_rows,
        degenerate_rows: report.degenerate_rows,
        eigen: EigenDiagnostics {
            sigma_k,
            sigma_k_gap: magnitudes.get(k).map(|next| sigma_k - next),
            top_abs_eigenvalues: magnitudes,
            corner_condition: report.corner_condition,
        },
    };

    write_file(&dir, "memberships.csv", |w| report.memberships.write_csv(w))?;
    let names = g.node_labels();
    write_file(&dir, "labels.csv", |w| {
        writeln!(w, "node,label,community")?;
        for (i, c) in hard.labels.iter().enumerate() {
            let name = names.map_or_else(|| (i + 1).to_string(), |n| n[i].clone());
            writeln!(w, "{},{name},{}", i + 1, c + 1)?;
        }
        Ok(())
    })?;
    write_json(&dir, "summary.json", &summary)?;
    println!("k={k} Q={:.4} eta_mixed={:.4} eta_pure={:.4}", q.q, eta.eta_mixed, eta.eta_pure);
    Ok(())
}

fn scan_k(a: ScanArgs) -> CliResult {
    let (loaded, _) = load_input(&a.graph, &a.input)?;
    let g = &loaded.graph;
    let dir = out_dir(&a.common.out, "mmdf-out")?;
    let opts = ScanOptions {
        k_max: a.k_max,
        stop_early: a.stop_early,
        execution: a.common.execution(),
        ..ScanOptions::default()
    };
    let spectrum = SymmetricSpectrum::new(g.weights())?;
    let scan = estimate_k_from_spectrum(g, &spectrum, &opts)?;
    write_file(&dir, "curve.csv", |w| scan.write_csv(w))?;
    let mut summary = scan.summary_json();
    summary["graph"] = a.graph.display().to_string().into();
    summary["options"] = serde_json::to_value(opts).unwrap_or_default();
    write_json(&dir, "summary.json", &summary)?;
    for p in &scan.curve {
        println!("k={} Q={}", p.k, fmt_opt(p.q()));
    }
    println!("best k={}", scan.best_k);
    Ok(())
}

fn dataset_suite(a: DatasetArgs) -> CliResult {
    let root = a.root.clone().unwrap_or_else(datasets::default_root);
    let stems: Vec<&str> = if a.names.is_empty() {
        DATASETS.iter().map(|d| d.stem).collect()
    } else {
        a.names.iter().map(String::as_str).collect()
    };
    let opts = ScanOptions { k_max: a.k_max, execution: a.common.execution(), ..ScanOptions::default() };
    let report = run_dataset_suite(&root, &stems, &opts)?;
    let dir = out_dir(&a.common.out, "mmdf-out")?;
    write_file(&dir, "table1.csv", |w| report.write_table1(w))?;
    write_file(&dir, "table2.csv", |w| report.write_table2(w))?;
    write_file(&dir, "table3.csv", |w| report.write_table3(w))?;
    write_file(&dir, "table4.csv", |w| report.write_table4(w))?;
    write_file(&dir, "curves.csv", |w| report.write_curves(w))?;
    write_json(&dir, "summary.json", &serde_json::json!({ "options": opts, "report": report }))?;
    for r in &report.rows {
        println!(
            "{}: k={} Q={:.4} eta_mixed={:.4} eta_pure={:.4} mislabels={}",
            r.stem,
            r.best_k,
            r.q,
            r.eta_mixed,
            r.eta_pure,
            r.mislabels.map_or_else(|| "NA".into(), |m| m.to_string())
        );
    }
    Ok(())
}
