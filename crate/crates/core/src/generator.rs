//! Synthetic mixed membership networks.
//!
//! A network is specified by memberships `Π` (n×K, rows are PMFs, at least
//! one pure node per community), a full-rank symmetric connectivity matrix
//! `P` with max |entry| = 1, a scale `ρ` and an edge-weight family. Edge
//! weights are drawn independently with mean `Ω(i,j)` where `Ω = ρ Π P Πᵀ`,
//! and optionally masked by an Erdős–Rényi `G(n, p)` indicator graph.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::dfsp::MembershipMatrix;
use crate::error::{ConnectivityError, Error, Result};
use crate::graph::{GroundTruth, WeightedGraph};
use crate::spectral::singular_values;
use crate::Matrix;

const SYMMETRY_TOL: f64 = 1e-12;
const MAX_ENTRY_TOL: f64 = 1e-12;
const MIN_SINGULAR_VALUE: f64 = 1e-10;

/// Edge-weight family; each draw has mean `Ω(i,j)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum EdgeDistribution {
    /// `Normal(Ω(i,j), σ²)`.
    Normal {
        #[serde(default = "default_sigma2")]
        sigma2: f64,
    },
    /// `Bernoulli(Ω(i,j))`.
    Bernoulli,
    /// `Poisson(Ω(i,j))`.
    Poisson,
    /// `Uniform(0, 2Ω(i,j))`.
    Uniform,
    /// `+1` with probability `(1 + Ω(i,j)) / 2`, `−1` otherwise.
    Signed,
    /// `A(i,j) = Ω(i,j)` exactly.
    PointMass,
}

fn default_sigma2() -> f64 {
    2.0
}

impl EdgeDistribution {
    pub fn normal(sigma2: f64) -> Self {
        EdgeDistribution::Normal { sigma2 }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EdgeDistribution::Normal { .. } => "normal",
            EdgeDistribution::Bernoulli => "bernoulli",
            EdgeDistribution::Poisson => "poisson",
            EdgeDistribution::Uniform => "uniform",
            EdgeDistribution::Signed => "signed",
            EdgeDistribution::PointMass => "point_mass",
        }
    }

    /// Families whose means must be nonnegative need `P ≥ 0`.
    pub fn requires_nonnegative_connectivity(&self) -> bool {
        matches!(self, EdgeDistribution::Bernoulli | EdgeDistribution::Poisson | EdgeDistribution::Uniform)
    }

    /// Admissible mean interval, when the family restricts it.
    pub fn mean_domain(&self) -> Option<(f64, f64)> {
        match self {
            EdgeDistribution::Bernoulli => Some((0.0, 1.0)),
            EdgeDistribution::Signed => Some((-1.0, 1.0)),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let EdgeDistribution::Normal { sigma2 } = self {
            if !(sigma2.is_finite() && *sigma2 > 0.0) {
                return Err(Error::Domain(format!("normal variance must be positive, got {sigma2}")));
            }
        }
        Ok(())
    }

    /// Checks `ρ` against the family's admissible range.
    pub fn check_rho(&self, rho: f64) -> Result<()> {
        let ok = rho.is_finite()
            && rho > 0.0
            && match self {
                EdgeDistribution::Bernoulli | EdgeDistribution::Signed => rho <= 1.0,
                _ => true,
            };
        if ok {
            Ok(())
        } else {
            let range = match self {
                EdgeDistribution::Bernoulli | EdgeDistribution::Signed => "(0, 1]",
                _ => "(0, inf)",
            };
            Err(Error::Domain(format!("rho = {rho} outside {range} for {} edges", self.name())))
        }
    }

    /// Variance of a single draw with the given mean.
    pub fn variance(&self, mean: f64) -> f64 {
        match self {
            EdgeDistribution::Normal { sigma2 } => *sigma2,
            EdgeDistribution::Bernoulli => mean * (1.0 - mean),
            EdgeDistribution::Poisson => mean,
            EdgeDistribution::Uniform => mean * mean / 3.0,
            EdgeDistribution::Signed => 1.0 - mean * mean,
            EdgeDistribution::PointMass => 0.0,
        }
    }

    /// Upper bound on `γ = max Var(A(i,j)) / ρ` over admissible designs.
    pub fn gamma_bound(&self, rho: f64) -> f64 {
        match self {
            EdgeDistribution::Normal { sigma2 } => sigma2 / rho,
            EdgeDistribution::Bernoulli | EdgeDistribution::Poisson => 1.0,
            EdgeDistribution::Uniform => rho / 3.0,
            EdgeDistribution::Signed => 1.0 / rho,
            EdgeDistribution::PointMass => 0.0,
        }
    }

    /// Upper bound on `τ = max |A(i,j) − Ω(i,j)|` when the family bounds it.
    pub fn tau_bound(&self, rho: f64) -> Option<f64> {
        match self {
            EdgeDistribution::Bernoulli => Some(1.0),
            EdgeDistribution::Uniform => Some(2.0 * rho),
            EdgeDistribution::Signed => Some(2.0),
            EdgeDistribution::PointMass => Some(0.0),
            EdgeDistribution::Normal { .. } | EdgeDistribution::Poisson => None,
        }
    }

    /// Whether `γ ρ n ≥ τ² log n` holds with the family's bounds plugged in;
    /// `None` when `τ` is not bounded for the family.
    pub fn sparsity_condition(&self, n: usize, rho: f64) -> Option<bool> {
        let tau = self.tau_bound(rho)?;
        Some(self.gamma_bound(rho) * rho * n as f64 >= tau * tau * (n as f64).ln())
    }

    fn draw<R: Rng>(&self, mean: f64, rng: &mut R) -> Result<f64> {
        Ok(match *self {
            EdgeDistribution::Normal { sigma2 } => Normal::new(mean, sigma2.sqrt())
                .map_err(|e| Error::Domain(format!("normal({mean}, {sigma2}): {e}")))?
                .sample(rng),
            EdgeDistribution::Bernoulli => f64::from(u8::from(rng.random::<f64>() < mean)),
            EdgeDistribution::Poisson => {
                if mean < 0.0 {
                    return Err(Error::Domain(format!("poisson mean {mean} is negative")));
                }
                if mean == 0.0 {
                    0.0
                } else {
                    Poisson::new(mean)
                        .map_err(|e| Error::Domain(format!("poisson({mean}): {e}")))?
                        .sample(rng)
                }
            }
            EdgeDistribution::Uniform => 2.0 * mean * rng.random::<f64>(),
            EdgeDistribution::Signed => {
                if rng.random::<f64>() < (1.0 + mean) / 2.0 {
                    1.0
                } else {
                    -1.0
                }
            }
            EdgeDistribution::PointMass => mean,
        })
    }
}

/// Validated K×K connectivity matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectivityMatrix {
    entries: Matrix,
    sigma_k: f64,
}

impl ConnectivityMatrix {
    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    pub fn k(&self) -> usize {
        self.entries.nrows()
    }

    /// Smallest singular value; larger means better separated communities.
    pub fn sigma_k(&self) -> f64 {
        self.sigma_k
    }

    pub fn row_major(&self) -> Vec<f64> {
        let k = self.k();
        (0..k * k).map(|idx| self.entries[(idx / k, idx % k)]).collect()
    }
}

/// Checks symmetry, full rank, unit max |entry| and the family's sign rule.
pub fn check_connectivity(p: &Matrix, family: &EdgeDistribution) -> Result<ConnectivityMatrix> {
    let (rows, cols) = (p.nrows(), p.ncols());
    if rows != cols || rows == 0 {
        return Err(ConnectivityError::NotSquare { rows, cols }.into());
    }
    let k = rows;
    for i in 0..k {
        for j in 0..i {
            if (p[(i, j)] - p[(j, i)]).abs() > SYMMETRY_TOL || !p[(i, j)].is_finite() {
                return Err(ConnectivityError::Asymmetric { row: j + 1, col: i + 1 }.into());
            }
        }
    }
    let max_abs = (0..k).flat_map(|i| (0..k).map(move |j| (i, j))).fold(0.0f64, |m, (i, j)| m.max(p[(i, j)].abs()));
    if !max_abs.is_finite() || (max_abs - 1.0).abs() > MAX_ENTRY_TOL {
        return Err(ConnectivityError::MaxEntry { max_abs }.into());
    }
    let sv = singular_values(p)?;
    let sigma_k = sv[k - 1];
    if sigma_k <= MIN_SINGULAR_VALUE {
        return Err(ConnectivityError::RankDeficient { sigma_min: sigma_k }.into());
    }
    if family.requires_nonnegative_connectivity() {
        for i in 0..k {
            for j in 0..k {
                if p[(i, j)] < 0.0 {
                    return Err(ConnectivityError::SignInadmissible {
                        family: family.name(),
                        row: i + 1,
                        col: j + 1,
                        value: p[(i, j)],
                    }
                    .into());
                }
            }
        }
    }
    Ok(ConnectivityMatrix { entries: p.clone(), sigma_k })
}

/// A block of identical mixed membership rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedRows {
    pub row: Vec<f64>,
    pub count: usize,
}

/// Memberships with `pure_per_community` indicator rows per community
/// (community blocks in order) followed by the mixed blocks in order.
pub fn build_membership(
    n: usize,
    k: usize,
    pure_per_community: usize,
    mixed: &[MixedRows],
) -> Result<MembershipMatrix> {
    if k == 0 {
        return Err(Error::Domain("k must be positive".into()));
    }
    if pure_per_community == 0 {
        return Err(Error::Domain("every community needs at least one pure node".into()));
    }
    let total = k * pure_per_community + mixed.iter().map(|m| m.count).sum::<usize>();
    if total != n {
        return Err(Error::Domain(format!(
            "{k} x {pure_per_community} pure rows plus mixed rows give {total} nodes, expected {n}"
        )));
    }
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    for c in 0..k {
        for _ in 0..pure_per_community {
            let mut r = vec![0.0; k];
            r[c] = 1.0;
            rows.push(r);
        }
    }
    for block in mixed {
        if block.row.len() != k {
            return Err(Error::Domain(format!("mixed row {:?} does not have {k} entries", block.row)));
        }
        for _ in 0..block.count {
            rows.push(block.row.clone());
        }
    }
    MembershipMatrix::from_rows(&rows)
}

/// How memberships are described in a generator config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MembershipBlock {
    Design {
        pure_per_community: usize,
        #[serde(default)]
        mixed: Vec<MixedRows>,
    },
    Explicit {
        rows: Vec<Vec<f64>>,
    },
}

/// Serializable generator description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub n: usize,
    pub k: usize,
    pub membership: MembershipBlock,
    /// `P` entries, row-major.
    pub connectivity: Vec<f64>,
    pub rho: f64,
    pub distribution: EdgeDistribution,
    /// Probability that an edge survives the missing-edge mask.
    #[serde(default, alias = "p", skip_serializing_if = "Option::is_none")]
    pub sparsity: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

impl GeneratorConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn connectivity_matrix(&self) -> Result<Matrix> {
        let k = self.k;
        if self.connectivity.len() != k * k {
            return Err(Error::Config(format!(
                "connectivity has {} entries, expected {}",
                self.connectivity.len(),
                k * k
            )));
        }
        Ok(Matrix::from_fn(k, k, |i, j| self.connectivity[i * k + j]))
    }
}

/// Validated generator input.
#[derive(Debug, Clone)]
pub struct GeneratorSpec {
    pub memberships: MembershipMatrix,
    pub connectivity: ConnectivityMatrix,
    pub rho: f64,
    pub distribution: EdgeDistribution,
    pub sparsity: Option<f64>,
    pub seed: u64,
    design: MembershipBlock,
}

impl GeneratorSpec {
    pub fn new(
        memberships: MembershipMatrix,
        connectivity: &Matrix,
        rho: f64,
        distribution: EdgeDistribution,
        sparsity: Option<f64>,
        seed: u64,
    ) -> Result<Self> {
        let design = MembershipBlock::Explicit {
            rows: (0..memberships.n()).map(|i| memberships.row(i)).collect(),
        };
        Self::assemble(memberships, connectivity, rho, distribution, sparsity, seed, design)
    }

    pub fn from_config(cfg: &GeneratorConfig) -> Result<Self> {
        let memberships = match &cfg.membership {
            MembershipBlock::Design { pure_per_community, mixed } => {
                build_membership(cfg.n, cfg.k, *pure_per_community, mixed)?
            }
            MembershipBlock::Explicit { rows } => {
                let m = MembershipMatrix::from_rows(rows)?;
                if m.n() != cfg.n || m.k() != cfg.k {
                    return Err(Error::Config(format!(
                        "explicit memberships are {}x{}, config says {}x{}",
                        m.n(),
                        m.k(),
                        cfg.n,
                        cfg.k
                    )));
                }
                m
            }
        };
        let p = cfg.connectivity_matrix()?;
        Self::assemble(memberships, &p, cfg.rho, cfg.distribution, cfg.sparsity, cfg.seed, cfg.membership.clone())
    }

    fn assemble(
        memberships: MembershipMatrix,
        connectivity: &Matrix,
        rho: f64,
        distribution: EdgeDistribution,
        sparsity: Option<f64>,
        seed: u64,
        design: MembershipBlock,
    ) -> Result<Self> {
        distribution.validate()?;
        let connectivity = check_connectivity(connectivity, &distribution)?;
        if memberships.k() != connectivity.k() {
            return Err(Error::Domain(format!(
                "memberships have {} columns but P is {}x{}",
                memberships.k(),
                connectivity.k(),
                connectivity.k()
            )));
        }
        distribution.check_rho(rho)?;
        if let Some(p) = sparsity {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Domain(format!("sparsity p = {p} outside [0, 1]")));
            }
        }
        let spec = Self { memberships, connectivity, rho, distribution, sparsity, seed, design };
        // mean-domain check
        population_adjacency(&spec)?;
        Ok(spec)
    }

    pub fn n(&self) -> usize {
        self.memberships.n()
    }

    pub fn k(&self) -> usize {
        self.memberships.k()
    }

    pub fn with_rho(&self, rho: f64) -> Result<Self> {
        Self::assemble(
            self.memberships.clone(),
            self.connectivity.entries(),
            rho,
            self.distribution,
            self.sparsity,
            self.seed,
            self.design.clone(),
        )
    }

    pub fn with_sparsity(&self, sparsity: Option<f64>) -> Result<Self> {
        Self::assemble(
            self.memberships.clone(),
            self.connectivity.entries(),
            self.rho,
            self.distribution,
            sparsity,
            self.seed,
            self.design.clone(),
        )
    }

    pub fn with_distribution(&self, distribution: EdgeDistribution) -> Result<Self> {
        Self::assemble(
            self.memberships.clone(),
            self.connectivity.entries(),
            self.rho,
            distribution,
            self.sparsity,
            self.seed,
            self.design.clone(),
        )
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    pub fn to_config(&self) -> GeneratorConfig {
        GeneratorConfig {
            n: self.n(),
            k: self.k(),
            membership: self.design.clone(),
            connectivity: self.connectivity.row_major(),
            rho: self.rho,
            distribution: self.distribution,
            sparsity: self.sparsity,
            seed: self.seed,
        }
    }
}

/// Expected adjacency `Ω = ρ Π P Πᵀ` (diagonal kept).
#[derive(Debug, Clone)]
pub struct PopulationMatrix {
    pub omega: Matrix,
}

/// Computes `Ω = ρ Π P Πᵀ`, exactly symmetric.
pub fn population_adjacency(spec: &GeneratorSpec) -> Result<PopulationMatrix> {
    let pi = spec.memberships.matrix();
    let p = spec.connectivity.entries();
    let (n, k) = (pi.nrows(), pi.ncols());
    let pi_p = Matrix::from_fn(n, k, |i, b| (0..k).map(|a| pi[(i, a)] * p[(a, b)]).sum());
    let mut omega = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = spec.rho * (0..k).map(|b| pi_p[(i, b)] * pi[(j, b)]).sum::<f64>();
            omega[(i, j)] = v;
            omega[(j, i)] = v;
        }
    }
    if let Some((lo, hi)) = spec.distribution.mean_domain() {
        for i in 0..n {
            for j in i..n {
                let v = omega[(i, j)];
                // rounding in ρ·ΠPΠᵀ can overshoot the boundary by an ulp
                if v < lo - 1e-12 || v > hi + 1e-12 {
                    return Err(Error::Domain(format!(
                        "Ω({}, {}) = {v} outside [{lo}, {hi}] required by {} edges",
                        i + 1,
                        j + 1,
                        spec.distribution.name()
                    )));
                }
            }
        }
    }
    Ok(PopulationMatrix { omega })
}

/// A sampled network with its generating memberships.
#[derive(Debug, Clone)]
pub struct SampledNetwork {
    pub graph: WeightedGraph,
    pub truth: GroundTruth,
    /// Connectivity of the missing-edge mask, when one was applied.
    pub mask_connected: Option<bool>,
}

/// Draws `A` with `A(i,j) ~ F(Ω(i,j))` for `i < j`, mirrors it and zeroes
/// the diagonal; applies the `G(n, p)` mask when `sparsity` is set.
pub fn sample_adjacency(spec: &GeneratorSpec) -> Result<(WeightedGraph, GroundTruth)> {
    let s = sample_network(spec)?;
    Ok((s.graph, s.truth))
}

pub fn sample_network(spec: &GeneratorSpec) -> Result<SampledNetwork> {
    let omega = population_adjacency(spec)?.omega;
    let n = spec.n();
    let mut weight_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    weight_rng.set_stream(0);
    let mut mask_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    mask_rng.set_stream(1);

    let mut a = Matrix::zeros(n, n);
    let mut mask_edges = spec.sparsity.map(|_| Vec::new());
    for i in 0..n {
        for j in i + 1..n {
            let mean = omega[(i, j)].clamp(
                spec.distribution.mean_domain().map_or(f64::NEG_INFINITY, |d| d.0),
                spec.distribution.mean_domain().map_or(f64::INFINITY, |d| d.1),
            );
            let mut w = spec.distribution.draw(mean, &mut weight_rng)?;
            if let (Some(p), Some(edges)) = (spec.sparsity, mask_edges.as_mut()) {
                if mask_rng.random::<f64>() < p {
                    edges.push((i, j, 1.0));
                } else {
                    w = 0.0;
                }
            }
            a[(i, j)] = w;
            a[(j, i)] = w;
        }
    }
    let mask_connected = match mask_edges {
        Some(edges) => {
            let connected = WeightedGraph::from_edges(n, &edges)?.is_connected();
            if !connected {
                log::warn!("missing-edge mask with p = {:?} is disconnected", spec.sparsity);
            }
            Some(connected)
        }
        None => None,
    };
    Ok(SampledNetwork {
        graph: WeightedGraph::from_dense(a)?,
        truth: GroundTruth::from_memberships(spec.memberships.clone()),
        mask_connected,
    })
}

/// Seed for replicate `replicate` of sweep cell `cell` under `root`.
///
/// A SplitMix64-style mix, so any replicate can be regenerated in isolation.
pub fn replicate_seed(root: u64, cell: u64, replicate: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(mix(mix(root) ^ cell) ^ replicate.rotate_left(32))
}
