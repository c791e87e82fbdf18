//! Mixed membership networks with arbitrary edge-weight distributions.
//!
//! The crate covers the whole pipeline for weighted and signed networks
//! whose expected adjacency is `ρ Π P Πᵀ`:
//!
//! - [`graph`]: the dense weighted graph model and edge-list I/O;
//! - [`spectral`]: magnitude-ordered symmetric eigendecomposition and
//!   successive projection vertex hunting;
//! - [`dfsp`]: the DFSP membership estimator and hard assignment;
//! - [`generator`]: synthetic networks from normal, Bernoulli, Poisson,
//!   uniform, signed and point-mass edge families;
//! - [`modularity`]: fuzzy weighted modularity and the scan that picks the
//!   number of communities;
//! - [`metrics`]: Hamming / relative errors, mislabel counts, accuracy rate
//!   and mixedness indices;
//! - [`harness`]: Monte Carlo sweeps and the real-data suite.
//!
//! Data-parallel loops (replicates, sweep cells, k-scans) run on rayon when
//! the `parallel` feature is enabled and fall back to plain iterators
//! otherwise; see [`Execution`].

pub mod datasets;
pub mod dfsp;
pub mod error;
mod exec;
pub mod generator;
pub mod graph;
pub mod harness;
pub mod metrics;
pub mod modularity;
pub mod spectral;
pub mod stats;

pub use dfsp::{dfsp, harden, DfspReport, HardAssignment, MembershipMatrix};
pub use error::{Error, Result};
pub use exec::Execution;
pub use generator::{
    build_membership, check_connectivity, population_adjacency, sample_adjacency,
    ConnectivityMatrix, EdgeDistribution, GeneratorConfig, GeneratorSpec, MixedRows,
    PopulationMatrix,
};
pub use graph::{load_edge_list, sign_split, EdgeListFormat, GroundTruth, SignSplit, WeightedGraph};
pub use metrics::{
    accuracy_rate, membership_errors, mislabel_count, mixedness_indices, ErrorPair,
    MixednessIndices,
};
pub use modularity::{estimate_k, fuzzy_weighted_modularity, KScanResult, ModularityValue};
pub use spectral::{successive_projection, top_k_eig, TopKEigen, VertexSet};

/// Dense real matrix used throughout the crate.
pub type Matrix = faer::Mat<f64>;
