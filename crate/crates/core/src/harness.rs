//! Monte Carlo sweeps over synthetic networks and the real-data suite.
//!
//! A sweep cell fixes one value of the swept parameter. Each replicate in a
//! cell samples a network with its own derived seed, runs DFSP at the true
//! `K` against the generating memberships, and runs the modularity scan to
//! estimate `K`. Cells and replicates are flattened into one job list and
//! evaluated with [`Execution`]; results are gathered in job order, so the
//! report does not depend on the execution mode.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::datasets::{self, DatasetInfo};
use crate::dfsp::{dfsp_from_spectrum, harden};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::generator::{
    replicate_seed, sample_network, EdgeDistribution, GeneratorConfig, GeneratorSpec, MembershipBlock,
    MixedRows,
};
use crate::metrics::{accuracy_rate, membership_errors, mislabel_count, mixedness_indices};
use crate::modularity::{estimate_k_from_spectrum, fuzzy_weighted_modularity_with, DiagonalTerms, ScanOptions};
use crate::spectral::SymmetricSpectrum;
use crate::stats::mean;

/// Replication presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// 100 replicates per cell.
    #[default]
    Paper,
    /// 25 replicates per cell.
    Ci,
}

impl Profile {
    pub fn replications(self) -> usize {
        match self {
            Profile::Paper => 100,
            Profile::Ci => 25,
        }
    }
}

impl std::str::FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Profile::Paper),
            "ci" => Ok(Profile::Ci),
            other => Err(Error::Config(format!("unknown profile `{other}` (expected paper or ci)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Simulate,
    Detect,
    ScanK,
    DatasetSuite,
}

/// Generator parameter varied across sweep cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Rho,
    /// Edge survival probability of the missing-edge mask.
    #[serde(alias = "p")]
    Sparsity,
    /// Normal-family variance.
    Sigma2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

/// `k` used by DFSP in each replicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EstimatorK {
    /// The generator's `K`.
    #[default]
    Truth,
    /// The modularity scan's estimate; replicates whose estimate differs
    /// from `K` count as failures for the membership errors.
    Auto,
    Fixed(usize),
}

impl Serialize for EstimatorK {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            EstimatorK::Truth => s.serialize_str("truth"),
            EstimatorK::Auto => s.serialize_str("auto"),
            EstimatorK::Fixed(k) => s.serialize_u64(*k as u64),
        }
    }
}

impl<'de> Deserialize<'de> for EstimatorK {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Word(String),
            Count(usize),
        }
        match Raw::deserialize(d)? {
            Raw::Count(k) => Ok(EstimatorK::Fixed(k)),
            Raw::Word(w) if w == "truth" => Ok(EstimatorK::Truth),
            Raw::Word(w) if w == "auto" => Ok(EstimatorK::Auto),
            Raw::Word(w) => Err(serde::de::Error::custom(format!("estimator_k must be a count, `truth` or `auto`, got `{w}`"))),
        }
    }
}

/// Output locations; relative paths resolve against the working directory.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
}

/// Experiment description, read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub profile: Profile,
    /// Overrides the profile's replicate count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replications: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub estimator_k: EstimatorK,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    #[serde(default)]
    pub stop_early: bool,
    #[serde(default)]
    pub execution: Execution,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn replications(&self) -> usize {
        self.replications.unwrap_or_else(|| self.profile.replications())
    }

    fn scan_options(&self) -> ScanOptions {
        ScanOptions {
            k_max: self.k_max,
            stop_early: self.stop_early,
            diagonal: DiagonalTerms::Include,
            execution: Execution::Sequential,
        }
    }
}

/// The five simulation designs: normal, Bernoulli, Poisson, uniform and
/// signed edges on three communities with four kinds of mixed nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimulationDesign {
    Normal,
    Bernoulli,
    Poisson,
    Uniform,
    Signed,
}

impl SimulationDesign {
    pub const ALL: [SimulationDesign; 5] = [
        SimulationDesign::Normal,
        SimulationDesign::Bernoulli,
        SimulationDesign::Poisson,
        SimulationDesign::Uniform,
        SimulationDesign::Signed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SimulationDesign::Normal => "normal",
            SimulationDesign::Bernoulli => "bernoulli",
            SimulationDesign::Poisson => "poisson",
            SimulationDesign::Uniform => "uniform",
            SimulationDesign::Signed => "signed",
        }
    }

    /// Swept `ρ` values.
    pub fn rho_values(self) -> Vec<f64> {
        let (step, count) = match self {
            SimulationDesign::Normal => (5.0, 20),
            SimulationDesign::Bernoulli | SimulationDesign::Signed => (0.05, 20),
            SimulationDesign::Poisson => (0.2, 20),
            SimulationDesign::Uniform => (1.0, 20),
        };
        // i·step keeps values like 0.15 free of accumulated error
        (1..=count).map(|i| round12(i as f64 * step)).collect()
    }

    pub fn experiment(self, profile: Profile, seed: u64) -> ExperimentConfig {
        let p1 = [1.0, -0.2, -0.3, -0.2, 0.9, 0.3, -0.3, 0.3, 0.9];
        let p2 = [1.0, 0.2, 0.3, 0.2, 0.9, 0.3, 0.3, 0.3, 0.9];
        let (n, pure, mixed_count) = match self {
            SimulationDesign::Signed => (800, 200, 50),
            _ => (200, 40, 20),
        };
        let third = 1.0 / 3.0;
        let mixed = [[0.4, 0.4, 0.2], [0.4, 0.2, 0.4], [0.2, 0.4, 0.4], [third, third, third]]
            .iter()
            .map(|r| MixedRows { row: r.to_vec(), count: mixed_count })
            .collect();
        let (connectivity, distribution) = match self {
            SimulationDesign::Normal => (p1, EdgeDistribution::normal(2.0)),
            SimulationDesign::Bernoulli => (p2, EdgeDistribution::Bernoulli),
            SimulationDesign::Poisson => (p2, EdgeDistribution::Poisson),
            SimulationDesign::Uniform => (p2, EdgeDistribution::Uniform),
            SimulationDesign::Signed => (p2, EdgeDistribution::Signed),
        };
        let rho_values = self.rho_values();
        ExperimentConfig {
            mode: Mode::Simulate,
            profile,
            replications: None,
            seed,
            estimator_k: EstimatorK::Truth,
            k_max: None,
            stop_early: false,
            execution: Execution::Parallel,
            generator: Some(GeneratorConfig {
                n,
                k: 3,
                membership: MembershipBlock::Design { pure_per_community: pure, mixed },
                connectivity: connectivity.to_vec(),
                rho: rho_values[0],
                distribution,
                sparsity: None,
                seed,
            }),
            sweep: Some(Sweep { parameter: SweepParameter::Rho, values: rho_values }),
            output: OutputConfig::default(),
        }
    }
}

fn round12(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

/// Outcome of one replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateOutcome {
    pub seed: u64,
    pub hamming: Option<f64>,
    pub relative: Option<f64>,
    pub estimated_k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mask_connected: Option<bool>,
}

/// Aggregates for one sweep value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub value: f64,
    /// Means over replicates whose DFSP run succeeded.
    pub mean_hamming: Option<f64>,
    pub mean_relative: Option<f64>,
    /// Fraction of replicates whose scan selected the true `K`; failed
    /// scans count as misses.
    pub accuracy_rate: f64,
    pub successes: usize,
    pub failures: usize,
    pub disconnected_masks: usize,
    pub replicates: Vec<ReplicateOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub parameter: SweepParameter,
    pub true_k: usize,
    pub replications: usize,
    pub seed: u64,
    pub cells: Vec<SweepCell>,
    pub config: ExperimentConfig,
}

impl SweepReport {
    /// One row per sweep value, full precision.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let param = match self.parameter {
            SweepParameter::Rho => "rho",
            SweepParameter::Sparsity => "sparsity",
            SweepParameter::Sigma2 => "sigma2",
        };
        writeln!(out, "{param},mean_hamming,mean_relative,accuracy_rate,successes,failures,disconnected_masks")?;
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
        for c in &self.cells {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                c.value,
                opt(c.mean_hamming),
                opt(c.mean_relative),
                c.accuracy_rate,
                c.successes,
                c.failures,
                c.disconnected_masks
            )?;
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        self.cells.iter().map(|c| c.value).collect()
    }

    pub fn mean_hamming(&self) -> Vec<Option<f64>> {
        self.cells.iter().map(|c| c.mean_hamming).collect()
    }

    pub fn accuracy_rates(&self) -> Vec<f64> {
        self.cells.iter().map(|c| c.accuracy_rate).collect()
    }
}

/// Validated per-cell specs for a simulate-mode config.
pub fn sweep_specs(config: &ExperimentConfig) -> Result<Vec<(f64, GeneratorSpec)>> {
    let generator = config.generator.as_ref().ok_or_else(|| Error::Config("simulate mode needs a [generator] table".into()))?;
    let base = GeneratorSpec::from_config(generator).map_err(|e| Error::Config(format!("generator: {e}")))?;
    if config.replications() == 0 {
        return Err(Error::Config("replications must be at least 1".into()));
    }
    if let EstimatorK::Fixed(k) = config.estimator_k {
        if k != base.k() {
            return Err(Error::Config(format!("estimator_k = {k} differs from the generator's k = {}", base.k())));
        }
    }
    let Some(sweep) = &config.sweep else {
        return Ok(vec![(base.rho, base)]);
    };
    if sweep.values.is_empty() {
        return Err(Error::Config("sweep has no values".into()));
    }
    sweep
        .values
        .iter()
        .map(|&v| {
            let spec = match sweep.parameter {
                SweepParameter::Rho => base.with_rho(v),
                SweepParameter::Sparsity => base.with_sparsity(Some(v)),
                SweepParameter::Sigma2 => match base.distribution {
                    EdgeDistribution::Normal { .. } => base.with_distribution(EdgeDistribution::normal(v)),
                    _ => Err(Error::Config("sigma2 sweeps need the normal family".into())),
                },
            };
            spec.map(|s| (v, s)).map_err(|e| Error::Config(format!("sweep value {v}: {e}")))
        })
        .collect()
}

/// Runs every sweep cell; all sweep values are validated before sampling.
pub fn run_simulation(config: &ExperimentConfig) -> Result<SweepReport> {
    let cells = sweep_specs(config)?;
    let reps = config.replications();
    let true_k = cells[0].1.k();
    let scan = config.scan_options();
    if let Some(k_max) = scan.k_max {
        if k_max == 0 || k_max > cells[0].1.n() {
            return Err(Error::Config(format!("k_max = {k_max} outside 1..={}", cells[0].1.n())));
        }
    }
    let jobs = cells.len() * reps;
    let outcomes = map_indexed(config.execution, jobs, |job| {
        let (cell, rep) = (job / reps, job % reps);
        let seed = replicate_seed(config.seed, cell as u64, rep as u64);
        run_replicate(&cells[cell].1.with_seed(seed), config.estimator_k, &scan)
    });

    let mut report_cells = Vec::with_capacity(cells.len());
    let mut outcomes = outcomes.into_iter();
    for (value, _) in &cells {
        let replicates: Vec<ReplicateOutcome> = outcomes.by_ref().take(reps).collect();
        let hamming: Vec<f64> = replicates.iter().filter_map(|r| r.hamming).collect();
        let relative: Vec<f64> = replicates.iter().filter_map(|r| r.relative).collect();
        let estimates: Vec<usize> = replicates.iter().map(|r| r.estimated_k.unwrap_or(0)).collect();
        report_cells.push(SweepCell {
            value: *value,
            mean_hamming: mean(&hamming),
            mean_relative: mean(&relative),
            accuracy_rate: accuracy_rate(&estimates, true_k)?,
            successes: hamming.len(),
            failures: reps - hamming.len(),
            disconnected_masks: replicates.iter().filter(|r| r.mask_connected == Some(false)).count(),
            replicates,
        });
    }
    Ok(SweepReport {
        parameter: config.sweep.as_ref().map_or(SweepParameter::Rho, |s| s.parameter),
        true_k,
        replications: reps,
        seed: config.seed,
        cells: report_cells,
        config: config.clone(),
    })
}

fn run_replicate(spec: &GeneratorSpec, estimator_k: EstimatorK, scan: &ScanOptions) -> ReplicateOutcome {
    let mut out = ReplicateOutcome {
        seed: spec.seed,
        hamming: None,
        relative: None,
        estimated_k: None,
        failure: None,
        mask_connected: None,
    };
    let sample = match sample_network(spec) {
        Ok(s) => s,
        Err(e) => {
            out.failure = Some(e.to_string());
            return out;
        }
    };
    out.mask_connected = sample.mask_connected;
    let spectrum = match SymmetricSpectrum::new(sample.graph.weights()) {
        Ok(s) => s,
        Err(e) => {
            out.failure = Some(e.to_string());
            return out;
        }
    };
    let scanned = estimate_k_from_spectrum(&sample.graph, &spectrum, scan);
    out.estimated_k = scanned.as_ref().ok().map(|s| s.best_k);

    let k = match estimator_k {
        EstimatorK::Truth => Some(spec.k()),
        EstimatorK::Fixed(k) => Some(k),
        EstimatorK::Auto => out.estimated_k,
    };
    let report = match k {
        Some(k) if k == spec.k() => dfsp_from_spectrum(&spectrum, k),
        Some(k) => {
            out.failure = Some(format!("selected k = {k} differs from K = {}", spec.k()));
            return out;
        }
        None => {
            out.failure = Some("modularity scan failed".into());
            return out;
        }
    };
    match report.and_then(|r| membership_errors(&r.memberships, &spec.memberships)) {
        Ok(e) => {
            out.hamming = Some(e.hamming);
            out.relative = Some(e.relative);
        }
        Err(e) => out.failure = Some(e.to_string()),
    }
    out
}

/// One row of the real-data suite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetRow {
    pub stem: &'static str,
    pub title: &'static str,
    pub reference: DatasetInfo,
    pub nodes: usize,
    pub edges: usize,
    pub max_weight: f64,
    pub min_weight: f64,
    pub best_k: usize,
    pub q: f64,
    /// Same memberships, `i = j` terms left out of the double sum.
    pub q_without_diagonal: f64,
    pub eta_mixed: f64,
    pub eta_pure: f64,
    pub mislabels: Option<usize>,
    pub curve: Vec<(usize, Option<f64>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetSuiteReport {
    pub rows: Vec<DatasetRow>,
    /// Registered datasets whose files were not found.
    pub missing: Vec<&'static str>,
}

/// Scans each dataset for `K`, then reports modularity, mixedness and
/// mislabels of the DFSP estimate at the selected `K`.
pub fn run_dataset_suite(root: &Path, stems: &[&str], opts: &ScanOptions) -> Result<DatasetSuiteReport> {
    let mut rows = Vec::new();
    let mut missing = Vec::new();
    for &stem in stems {
        let info = datasets::info(stem).ok_or_else(|| Error::Config(format!("unknown dataset `{stem}`")))?;
        let Some(ds) = datasets::load(root, stem)? else {
            log::warn!("dataset {stem} not found under {}; skipped", root.display());
            missing.push(info.stem);
            continue;
        };
        rows.push(analyze_dataset(&ds, opts)?);
    }
    Ok(DatasetSuiteReport { rows, missing })
}

pub fn analyze_dataset(ds: &datasets::Dataset, opts: &ScanOptions) -> Result<DatasetRow> {
    let g = &ds.graph;
    let scan = crate::modularity::estimate_k_with(g, opts)?;
    let memberships = &scan.best.memberships;
    let eta = mixedness_indices(memberships);
    let mislabels = match &ds.truth {
        Some(t) => Some(mislabel_count(&harden(memberships), t)?),
        None => None,
    };
    Ok(DatasetRow {
        stem: ds.info.stem,
        title: ds.info.title,
        reference: *ds.info,
        nodes: g.n(),
        edges: g.edge_count(),
        max_weight: g.max_weight(),
        min_weight: g.min_weight(),
        best_k: scan.best_k,
        q: scan.best_value().q,
        q_without_diagonal: fuzzy_weighted_modularity_with(g, memberships, DiagonalTerms::Exclude)?.q,
        eta_mixed: eta.eta_mixed,
        eta_pure: eta.eta_pure,
        mislabels,
        curve: scan.curve.iter().map(|p| (p.k, p.q())).collect(),
    })
}

impl DatasetSuiteReport {
    /// Network summaries: nodes, edges, weight range.
    pub fn write_table1<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "dataset,nodes,edges,max_weight,min_weight")?;
        for r in &self.rows {
            writeln!(out, "{},{},{},{},{}", r.stem, r.nodes, r.edges, r.max_weight, r.min_weight)?;
        }
        Ok(())
    }

    /// Selected `K` against the published value.
    pub fn write_table2<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "dataset,kdfsp,reference")?;
        for r in &self.rows {
            writeln!(out, "{},{},{}", r.stem, r.best_k, r.reference.best_k)?;
        }
        Ok(())
    }

    /// Modularity at the selected `K`.
    pub fn write_table3<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "dataset,q,q_without_diagonal,reference")?;
        for r in &self.rows {
            writeln!(out, "{},{},{},{}", r.stem, r.q, r.q_without_diagonal, r.reference.q)?;
        }
        Ok(())
    }

    /// Mixedness indices and mislabels.
    pub fn write_table4<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "dataset,eta_mixed,eta_pure,reference_mixed,reference_pure,mislabels")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.stem,
                r.eta_mixed,
                r.eta_pure,
                r.reference.eta_mixed,
                r.reference.eta_pure,
                r.mislabels.map_or(String::new(), |m| m.to_string())
            )?;
        }
        Ok(())
    }

    /// Modularity curves, one row per `(dataset, k)`.
    pub fn write_curves<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "dataset,k,q")?;
        for r in &self.rows {
            for (k, q) in &r.curve {
                writeln!(out, "{},{k},{}", r.stem, q.map_or(String::new(), |q| q.to_string()))?;
            }
        }
        Ok(())
    }
}
