//! Dense weighted graph model and edge-list ingestion.
//!
//! Edge lists are whitespace- or comma-separated `src dst [weight]` records
//! with `#` comments and an optional header line. Node identifiers are
//! either 1-based integers (node `i` is row `i - 1`) or arbitrary names
//! indexed in first-appearance order. Duplicate records are summed and
//! self-loops are dropped.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::dfsp::MembershipMatrix;
use crate::error::{Error, Result};
use crate::Matrix;

/// Undirected weighted network: symmetric, zero diagonal, finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    weights: Matrix,
    node_labels: Option<Vec<String>>,
}

impl WeightedGraph {
    /// Validates and wraps a dense adjacency matrix.
    pub fn from_dense(weights: Matrix) -> Result<Self> {
        let n = weights.nrows();
        if weights.ncols() != n {
            return Err(Error::Domain(format!(
                "adjacency must be square, got {}x{}",
                n,
                weights.ncols()
            )));
        }
        for i in 0..n {
            if weights[(i, i)] != 0.0 {
                return Err(Error::Value(format!("nonzero diagonal entry at node {}", i + 1)));
            }
            for j in 0..i {
                let w = weights[(i, j)];
                if !w.is_finite() {
                    return Err(Error::Value(format!("non-finite weight at ({}, {})", i + 1, j + 1)));
                }
                if w != weights[(j, i)] {
                    return Err(Error::Contract(format!(
                        "adjacency not symmetric at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(Self { weights, node_labels: None })
    }

    /// Builds a graph from 0-based undirected edges; duplicates are summed.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut weights = Matrix::zeros(n, n);
        for &(i, j, w) in edges {
            if i >= n || j >= n {
                return Err(Error::Domain(format!("edge ({i}, {j}) out of range for n = {n}")));
            }
            if !w.is_finite() {
                return Err(Error::Value(format!("non-finite weight on edge ({i}, {j})")));
            }
            if i == j {
                continue;
            }
            weights[(i, j)] += w;
            weights[(j, i)] = weights[(i, j)];
        }
        Ok(Self { weights, node_labels: None })
    }

    /// Empty graph on `n` nodes.
    pub fn empty(n: usize) -> Self {
        Self { weights: Matrix::zeros(n, n), node_labels: None }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n() {
            return Err(Error::Domain(format!(
                "{} labels for {} nodes",
                labels.len(),
                self.n()
            )));
        }
        self.node_labels = Some(labels);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.weights.nrows()
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[(i, j)]
    }

    pub fn node_labels(&self) -> Option<&[String]> {
        self.node_labels.as_deref()
    }

    /// Number of node pairs `i < j` with nonzero weight.
    pub fn edge_count(&self) -> usize {
        let n = self.n();
        (0..n).map(|i| (i + 1..n).filter(|&j| self.weights[(i, j)] != 0.0).count()).sum()
    }

    /// Largest off-diagonal entry (0 for graphs with fewer than two nodes).
    pub fn max_weight(&self) -> f64 {
        self.off_diagonal().reduce(f64::max).unwrap_or(0.0)
    }

    /// Smallest off-diagonal entry (0 for graphs with fewer than two nodes).
    pub fn min_weight(&self) -> f64 {
        self.off_diagonal().reduce(f64::min).unwrap_or(0.0)
    }

    fn off_diagonal(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.n();
        (0..n).flat_map(move |i| (0..n).filter(move |&j| j != i).map(move |j| self.weights[(i, j)]))
    }

    /// Weighted degree (row sum of signed weights).
    pub fn degrees(&self) -> Vec<f64> {
        let n = self.n();
        (0..n).map(|i| (0..n).map(|j| self.weights[(i, j)]).sum()).collect()
    }

    /// 0-based indices of nodes without any nonzero incident weight.
    pub fn isolated_nodes(&self) -> Vec<usize> {
        let n = self.n();
        (0..n).filter(|&i| (0..n).all(|j| self.weights[(i, j)] == 0.0)).collect()
    }

    /// Connectivity of the support graph (nonzero entries), ignoring signs.
    pub fn is_connected(&self) -> bool {
        let n = self.n();
        if n <= 1 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if !seen[j] && self.weights[(i, j)] != 0.0 {
                    seen[j] = true;
                    count += 1;
                    stack.push(j);
                }
            }
        }
        count == n
    }

    /// Relabels nodes: node `perm[i]` of the result is node `i` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n();
        check_permutation(perm, n)?;
        let mut w = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                w[(perm[i], perm[j])] = self.weights[(i, j)];
            }
        }
        let labels = self.node_labels.as_ref().map(|l| {
            let mut out = vec![String::new(); n];
            for i in 0..n {
                out[perm[i]] = l[i].clone();
            }
            out
        });
        Ok(Self { weights: w, node_labels: labels })
    }

    /// Multiplies every weight by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::Value(format!("non-finite scale factor {c}")));
        }
        let n = self.n();
        let w = Matrix::from_fn(n, n, |i, j| self.weights[(i, j)] * c);
        Ok(Self { weights: w, node_labels: self.node_labels.clone() })
    }

    /// Writes the graph as `src dst weight` records with 1-based ids.
    ///
    /// Weights use the shortest representation that parses back to the same
    /// `f64`, so reloading reproduces the matrix exactly.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let n = self.n();
        writeln!(out, "# {} nodes, {} edges", n, self.edge_count())?;
        for i in 0..n {
            for j in i + 1..n {
                let w = self.weights[(i, j)];
                if w != 0.0 {
                    writeln!(out, "{} {} {}", i + 1, j + 1, w)?;
                }
            }
        }
        Ok(())
    }
}

pub(crate) fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::Domain(format!("permutation of length {} for {n} items", perm.len())));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(Error::Domain("not a permutation".into()));
        }
    }
    Ok(())
}

/// Positive and negative parts of a signed adjacency matrix.
#[derive(Debug, Clone)]
pub struct SignSplit {
    pub pos: Matrix,
    pub neg: Matrix,
    pub pos_degrees: Vec<f64>,
    pub neg_degrees: Vec<f64>,
    pub pos_mass: f64,
    pub neg_mass: f64,
}

/// Splits `A` into `A⁺ = max(0, A)` and `A⁻ = max(0, −A)` with their degrees
/// and total masses (`m = Σ d / 2`).
pub fn sign_split(g: &WeightedGraph) -> SignSplit {
    let n = g.n();
    let a = g.weights();
    let pos = Matrix::from_fn(n, n, |i, j| a[(i, j)].max(0.0));
    let neg = Matrix::from_fn(n, n, |i, j| (-a[(i, j)]).max(0.0));
    let row_sums = |m: &Matrix| -> Vec<f64> { (0..n).map(|i| (0..n).map(|j| m[(i, j)]).sum()).collect() };
    let pos_degrees = row_sums(&pos);
    let neg_degrees = row_sums(&neg);
    let pos_mass = pos_degrees.iter().sum::<f64>() / 2.0;
    let neg_mass = neg_degrees.iter().sum::<f64>() / 2.0;
    SignSplit { pos, neg, pos_degrees, neg_degrees, pos_mass, neg_mass }
}

/// Known community structure for a graph, when available.
#[derive(Debug, Clone, Default)]
pub struct GroundTruth {
    /// 0-based community index per node.
    pub labels: Option<Vec<usize>>,
    pub memberships: Option<MembershipMatrix>,
}

impl GroundTruth {
    pub fn from_memberships(m: MembershipMatrix) -> Self {
        let labels = crate::dfsp::harden(&m).labels;
        Self { labels: Some(labels), memberships: Some(m) }
    }

    pub fn from_labels(labels: Vec<usize>) -> Self {
        Self { labels: Some(labels), memberships: None }
    }
}

/// How node identifiers in an edge list are interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NodeIds {
    /// 1-based integers if every identifier parses as one, names otherwise.
    #[default]
    Auto,
    /// Node `i` is matrix row `i - 1`; the node count is the largest id.
    OneBased,
    /// Arbitrary tokens indexed in first-appearance order.
    Named,
}

/// Edge-list dialect.
#[derive(Debug, Clone, Default)]
pub struct EdgeListFormat {
    pub ids: NodeIds,
    /// Sidecar file with one label per line. For named ids it also fixes
    /// the node order.
    pub node_file: Option<PathBuf>,
    /// Explicit node count for 1-based ids (keeps trailing isolated nodes).
    pub node_count: Option<usize>,
}

impl EdgeListFormat {
    pub fn one_based() -> Self {
        Self { ids: NodeIds::OneBased, ..Self::default() }
    }

    pub fn named() -> Self {
        Self { ids: NodeIds::Named, ..Self::default() }
    }

    pub fn with_node_file(mut self, path: impl Into<PathBuf>) -> Self {
        self.node_file = Some(path.into());
        self
    }

    pub fn with_node_count(mut self, n: usize) -> Self {
        self.node_count = Some(n);
        self
    }
}

/// Result of reading an edge list.
#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub graph: WeightedGraph,
    /// Records with identical endpoints that were dropped.
    pub dropped_self_loops: usize,
    /// Records that repeated an earlier pair (their weights were summed).
    pub duplicate_records: usize,
    /// 0-based indices of isolated nodes; they are kept in the graph.
    pub isolated_nodes: Vec<usize>,
}

struct Record<'a> {
    line: usize,
    src: &'a str,
    dst: &'a str,
    weight: f64,
}

const HEADER_WORDS: &[&str] = &[
    "source", "target", "src", "dst", "from", "to", "weight", "node1", "node2", "u", "v", "i", "j",
];

fn looks_like_header(tokens: &[&str]) -> bool {
    tokens.iter().any(|t| HEADER_WORDS.contains(&t.to_ascii_lowercase().as_str()))
        || tokens.get(2).is_some_and(|w| w.parse::<f64>().is_err())
}

/// Reads an edge list from `path`.
pub fn load_edge_list(path: impl AsRef<Path>, format: &EdgeListFormat) -> Result<LoadedGraph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let node_names = match &format.node_file {
        Some(p) => Some(read_node_labels(p)?),
        None => None,
    };
    parse_edge_list(&text, &path.display().to_string(), format, node_names)
}

/// Parses edge-list text; `origin` names the source in error messages.
pub fn parse_edge_list(
    text: &str,
    origin: &str,
    format: &EdgeListFormat,
    node_names: Option<Vec<String>>,
) -> Result<LoadedGraph> {
    let parse_err = |line: usize, message: String| Error::Parse { path: origin.to_string(), line, message };

    let mut records = Vec::new();
    let mut first_record = true;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> =
            content.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()).collect();
        if std::mem::replace(&mut first_record, false) && looks_like_header(&tokens) {
            continue;
        }
        if tokens.len() < 2 || tokens.len() > 3 {
            return Err(parse_err(
                line_no,
                format!("expected `src dst [weight]`, found {} fields", tokens.len()),
            ));
        }
        let weight = match tokens.get(2) {
            None => 1.0,
            Some(w) => w
                .parse::<f64>()
                .map_err(|_| parse_err(line_no, format!("weight `{w}` is not a number")))?,
        };
        if !weight.is_finite() {
            return Err(Error::Value(format!("{origin}:{line_no}: non-finite weight {weight}")));
        }
        records.push(Record { line: line_no, src: tokens[0], dst: tokens[1], weight });
    }

    let numeric = |t: &str| t.parse::<usize>().is_ok_and(|v| v >= 1);
    let one_based = match format.ids {
        NodeIds::OneBased => true,
        NodeIds::Named => false,
        NodeIds::Auto => node_names.is_none() && records.iter().all(|r| numeric(r.src) && numeric(r.dst)),
    };

    let mut pairs: Vec<(usize, usize, f64)> = Vec::with_capacity(records.len());
    let mut labels: Option<Vec<String>> = None;
    let n;
    if one_based {
        let id = |t: &str, line: usize| -> Result<usize> {
            match t.parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v - 1),
                _ => Err(parse_err(line, format!("node id `{t}` is not a positive integer"))),
            }
        };
        let mut max_id = 0;
        for r in &records {
            let (s, d) = (id(r.src, r.line)?, id(r.dst, r.line)?);
            max_id = max_id.max(s + 1).max(d + 1);
            pairs.push((s, d, r.weight));
        }
        let mut count = max_id.max(format.node_count.unwrap_or(0));
        if let Some(names) = node_names {
            count = count.max(names.len());
            if names.len() == count {
                labels = Some(names);
            } else {
                return Err(Error::Domain(format!(
                    "node file lists {} nodes but the edge list needs {count}",
                    names.len()
                )));
            }
        }
        n = count;
    } else {
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut order: Vec<String> = Vec::new();
        let fixed = node_names.is_some();
        if let Some(names) = node_names {
            for name in names {
                index.entry(name.clone()).or_insert_with(|| {
                    order.push(name);
                    order.len() - 1
                });
            }
        }
        let mut lookup = |t: &str, line: usize| -> Result<usize> {
            if let Some(&i) = index.get(t) {
                return Ok(i);
            }
            if fixed {
                return Err(parse_err(line, format!("node `{t}` is not listed in the node file")));
            }
            order.push(t.to_string());
            index.insert(t.to_string(), order.len() - 1);
            Ok(order.len() - 1)
        };
        for r in &records {
            let s = lookup(r.src, r.line)?;
            let d = lookup(r.dst, r.line)?;
            pairs.push((s, d, r.weight));
        }
        n = order.len();
        labels = Some(order);
    }

    let mut weights = Matrix::zeros(n, n);
    let mut seen = std::collections::HashSet::new();
    let mut dropped_self_loops = 0;
    let mut duplicate_records = 0;
    for (s, d, w) in pairs {
        if s == d {
            dropped_self_loops += 1;
            continue;
        }
        if !seen.insert((s.min(d), s.max(d))) {
            duplicate_records += 1;
        }
        weights[(s, d)] += w;
        weights[(d, s)] = weights[(s, d)];
    }
    if dropped_self_loops > 0 {
        log::warn!("{origin}: dropped {dropped_self_loops} self-loop record(s)");
    }
    let mut graph = WeightedGraph { weights, node_labels: None };
    if let Some(l) = labels {
        graph = graph.with_labels(l)?;
    }
    let isolated_nodes = graph.isolated_nodes();
    if !isolated_nodes.is_empty() {
        log::info!("{origin}: {} isolated node(s) kept", isolated_nodes.len());
    }
    Ok(LoadedGraph { graph, dropped_self_loops, duplicate_records, isolated_nodes })
}

/// Reads a node-label sidecar: one label per line, blank lines ignored.
pub fn read_node_labels(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect())
}

/// Reads a ground-truth file: one 1-based community index per line.
/// Returned labels are 0-based.
pub fn read_truth_labels(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| match l.trim().parse::<usize>() {
            Ok(v) if v >= 1 => Ok(v - 1),
            _ => Err(Error::Parse {
                path: path.display().to_string(),
                line: i + 1,
                message: format!("`{}` is not a 1-based community index", l.trim()),
            }),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<LoadedGraph> {
        parse_edge_list(text, "test", &EdgeListFormat::default(), None)
    }

    #[test]
    fn single_record_is_symmetric() {
        let g = parse("1 2 3.5\n").unwrap().graph;
        assert_eq!(g.n(), 2);
        assert_eq!(g.weight(0, 1), 3.5);
        assert_eq!(g.weight(1, 0), 3.5);
    }

    #[test]
    fn self_loop_dropped() {
        let loaded = parse("1 1 9\n").unwrap();
        assert_eq!(loaded.dropped_self_loops, 1);
        assert_eq!(loaded.graph.n(), 1);
        assert_eq!(loaded.graph.edge_count(), 0);
        assert_eq!(loaded.isolated_nodes, vec![0]);
    }

    #[test]
    fn duplicates_summed_and_weight_defaults_to_one() {
        let loaded = parse("# comment\n1,2\n2 1 2.5\n2 3\n").unwrap();
        assert_eq!(loaded.duplicate_records, 1);
        assert_eq!(loaded.graph.weight(0, 1), 3.5);
        assert_eq!(loaded.graph.weight(1, 2), 1.0);
    }

    #[test]
    fn header_and_named_nodes() {
        let loaded = parse("source,target,weight\nalice,bob,2\nbob,carol,-1\n").unwrap();
        let g = loaded.graph;
        assert_eq!(g.n(), 3);
        assert_eq!(g.node_labels().unwrap(), ["alice", "bob", "carol"]);
        assert_eq!(g.weight(1, 2), -1.0);
    }

    #[test]
    fn named_order_from_node_file() {
        let names = vec!["c".to_string(), "b".to_string(), "a".to_string(), "z".to_string()];
        let loaded =
            parse_edge_list("a b 1\nb c 2\n", "t", &EdgeListFormat::named(), Some(names)).unwrap();
        assert_eq!(loaded.graph.weight(2, 1), 1.0);
        assert_eq!(loaded.graph.weight(0, 1), 2.0);
        assert_eq!(loaded.isolated_nodes, vec![3]);
        let err = parse_edge_list("a q 1\n", "t", &EdgeListFormat::named(), Some(vec!["a".into()]));
        assert!(matches!(err, Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn malformed_records_report_line() {
        match parse("1 2 1\n\n1 2 3 4\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        match parse("1 2 1\n2 3 abc\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse("1 2 inf\n"), Err(Error::Value(_))));
        assert!(matches!(parse("1 2 NaN\n"), Err(Error::Value(_))));
        let one_based = parse_edge_list("a 2 1\n", "t", &EdgeListFormat::one_based(), None);
        assert!(matches!(one_based, Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn isolated_nodes_kept() {
        let loaded = parse("1 3 1\n").unwrap();
        assert_eq!(loaded.graph.n(), 3);
        assert_eq!(loaded.isolated_nodes, vec![1]);
    }

    #[test]
    fn sign_split_examples() {
        let g = WeightedGraph::from_edges(2, &[(0, 1, -2.0)]).unwrap();
        let s = sign_split(&g);
        assert_eq!(s.pos[(0, 1)], 0.0);
        assert_eq!(s.neg[(0, 1)], 2.0);
        assert_eq!((s.pos_mass, s.neg_mass), (0.0, 2.0));

        let g = WeightedGraph::from_edges(2, &[(0, 1, 3.0)]).unwrap();
        let s = sign_split(&g);
        assert_eq!((s.pos_mass, s.neg_mass), (3.0, 0.0));

        let g = WeightedGraph::from_edges(3, &[(0, 1, 1.0), (0, 2, -1.0)]).unwrap();
        let s = sign_split(&g);
        assert_eq!((s.pos_mass, s.neg_mass), (1.0, 1.0));
        assert_eq!(s.pos_degrees, vec![1.0, 1.0, 0.0]);
        assert_eq!(s.neg_degrees, vec![1.0, 0.0, 1.0]);
    }

    #[test]
    fn from_dense_rejects_invalid() {
        let mut m = Matrix::zeros(2, 2);
        m[(0, 1)] = 1.0;
        assert!(matches!(WeightedGraph::from_dense(m.clone()), Err(Error::Contract(_))));
        m[(1, 0)] = 1.0;
        m[(0, 0)] = 1.0;
        assert!(matches!(WeightedGraph::from_dense(m), Err(Error::Value(_))));
    }

    #[test]
    fn weight_range_and_connectivity() {
        let g = WeightedGraph::from_edges(3, &[(0, 1, 4.0), (1, 2, -2.0)]).unwrap();
        assert_eq!(g.max_weight(), 4.0);
        assert_eq!(g.min_weight(), -2.0);
        assert!(g.is_connected());
        assert!(!WeightedGraph::empty(2).is_connected());
        assert_eq!(WeightedGraph::empty(1).max_weight(), 0.0);
    }
}
