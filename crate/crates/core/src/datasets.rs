//! Registry of the real networks used for regression runs.
//!
//! Each dataset is an edge list `<stem>.txt` (1-based `src dst weight`),
//! with optional `<stem>.labels` (node names) and `<stem>.truth` (1-based
//! community per node) next to it. Files are looked up in the data
//! directory first and in its `cache/` subdirectory second.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;
use crate::graph::{load_edge_list, read_truth_labels, EdgeListFormat, WeightedGraph};

/// Published reference values for one dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DatasetInfo {
    pub stem: &'static str,
    pub title: &'static str,
    pub nodes: usize,
    pub edges: usize,
    pub max_weight: Option<f64>,
    pub min_weight: Option<f64>,
    /// Community count selected by the modularity scan.
    pub best_k: usize,
    /// Fuzzy weighted modularity of the DFSP estimate at `best_k`.
    pub q: f64,
    pub eta_mixed: f64,
    pub eta_pure: f64,
    /// Misclustered nodes under the known split, when reported.
    pub mislabels: Option<usize>,
    /// Shipped with the repository rather than fetched into `cache/`.
    pub bundled: bool,
}

pub const DATASETS: &[DatasetInfo] = &[
    DatasetInfo {
        stem: "gahuku_gama",
        title: "Gahuku-Gama subtribes",
        nodes: 16,
        edges: 58,
        max_weight: Some(1.0),
        min_weight: Some(-1.0),
        best_k: 3,
        q: 0.4000,
        eta_mixed: 0.0625,
        eta_pure: 0.8750,
        mislabels: Some(0),
        bundled: true,
    },
    DatasetInfo {
        stem: "karate_weighted",
        title: "Karate-club-weighted",
        nodes: 34,
        edges: 78,
        max_weight: Some(7.0),
        min_weight: Some(0.0),
        best_k: 2,
        q: 0.3734,
        eta_mixed: 0.0588,
        eta_pure: 0.7941,
        mislabels: Some(0),
        bundled: true,
    },
    DatasetInfo {
        stem: "slovene_parliament",
        title: "Slovene Parliamentary Party",
        nodes: 10,
        edges: 45,
        max_weight: Some(235.0),
        min_weight: Some(-254.0),
        best_k: 2,
        q: 0.4492,
        eta_mixed: 0.0,
        eta_pure: 0.9,
        mislabels: None,
        bundled: true,
    },
    DatasetInfo {
        stem: "train_bombing",
        title: "Train bombing",
        nodes: 64,
        edges: 243,
        max_weight: Some(4.0),
        min_weight: Some(0.0),
        best_k: 2,
        q: 0.3066,
        eta_mixed: 0.0938,
        eta_pure: 0.7969,
        mislabels: None,
        bundled: false,
    },
    DatasetInfo {
        stem: "les_miserables",
        title: "Les Misérables",
        nodes: 77,
        edges: 254,
        max_weight: Some(31.0),
        min_weight: Some(0.0),
        best_k: 2,
        q: 0.3630,
        eta_mixed: 0.0130,
        eta_pure: 0.9351,
        mislabels: None,
        bundled: false,
    },
    DatasetInfo {
        stem: "polblogs",
        title: "Political blogs",
        nodes: 1222,
        edges: 16714,
        max_weight: None,
        min_weight: None,
        best_k: 2,
        q: 0.4001,
        eta_mixed: 0.0393,
        eta_pure: 0.8781,
        mislabels: Some(64),
        bundled: false,
    },
];

pub fn info(stem: &str) -> Option<&'static DatasetInfo> {
    DATASETS.iter().find(|d| d.stem == stem)
}

/// A dataset loaded from disk.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub info: &'static DatasetInfo,
    pub path: PathBuf,
    pub graph: WeightedGraph,
    /// 0-based community per node.
    pub truth: Option<Vec<usize>>,
}

/// Default data directory: `$MMDF_DATA` or `datasets/` under the workspace.
pub fn default_root() -> PathBuf {
    std::env::var_os("MMDF_DATA")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../datasets"))
}

/// Path of the edge list for `stem`, if present.
pub fn locate(root: &Path, stem: &str) -> Option<PathBuf> {
    [root.join(format!("{stem}.txt")), root.join("cache").join(format!("{stem}.txt"))]
        .into_iter()
        .find(|p| p.is_file())
}

/// Loads a registered dataset; `Ok(None)` when its files are absent.
pub fn load(root: &Path, stem: &str) -> Result<Option<Dataset>> {
    let Some(info) = info(stem) else {
        return Ok(None);
    };
    let Some(path) = locate(root, stem) else {
        return Ok(None);
    };
    let labels = path.with_extension("labels");
    let truth_path = path.with_extension("truth");
    let mut format = EdgeListFormat::one_based().with_node_count(info.nodes);
    if labels.is_file() {
        format = format.with_node_file(labels);
    }
    let graph = load_edge_list(&path, &format)?.graph;
    let truth = if truth_path.is_file() { Some(read_truth_labels(&truth_path)?) } else { None };
    Ok(Some(Dataset { info, path, graph, truth }))
}
