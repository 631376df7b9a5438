//! Speaker-transition graphs and community structure.
//!
//! Modularity uses the usual weighted form
//! `Q = (1/2m) Σ_ij [A_ij − k_i·k_j/2m] δ(c_i, c_j)`.

mod louvain;

pub use louvain::{louvain, louvain_with_trace, LouvainRun};

use crate::error::{Error, Result};

/// Undirected weighted graph over speakers, stored as a dense symmetric
/// matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    weights: Vec<f64>,
}

impl WeightedGraph {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            weights: vec![0.0; n * n],
        }
    }

    pub fn from_matrix(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidGraph("weight matrix is not square".into()));
        }
        for i in 0..n {
            if rows[i][i] != 0.0 {
                return Err(Error::InvalidGraph(format!("self-loop on node {i}")));
            }
            for j in 0..n {
                let w = rows[i][j];
                if !(w.is_finite() && w >= 0.0) {
                    return Err(Error::InvalidGraph(format!("weight ({i},{j}) = {w}")));
                }
                if w != rows[j][i] {
                    return Err(Error::InvalidGraph(format!("asymmetric weight at ({i},{j})")));
                }
            }
        }
        Ok(Self {
            n,
            weights: rows.iter().flatten().copied().collect(),
        })
    }

    /// Builds a graph from an edge list; repeated edges accumulate.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut g = Self::zero(n);
        for &(a, b, w) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidGraph(format!("edge ({a},{b}) outside {n} nodes")));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop on node {a}")));
            }
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::InvalidGraph(format!("edge ({a},{b}) weight {w}")));
            }
            g.weights[a * n + b] += w;
            g.weights[b * n + a] += w;
        }
        Ok(g)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n + j]
    }

    /// Row-major `n × n` weights.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn strength(&self, i: usize) -> f64 {
        self.weights[i * self.n..(i + 1) * self.n].iter().sum()
    }

    /// `2m`: sum of the full symmetric matrix.
    pub fn two_m(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Sum of weights over unordered pairs.
    pub fn total_edge_weight(&self) -> f64 {
        self.two_m() / 2.0
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n: self.n,
            weights: self.weights.iter().map(|w| w * factor).collect(),
        }
    }
}

/// Symmetrized joint transition frequencies:
/// `w_ij = (c_ij + c_ji) / Σ c`. All-zero when no transition exists.
pub fn transition_graph(counts: &[Vec<u64>]) -> Result<WeightedGraph> {
    let n = counts.len();
    if counts.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidGraph("transition matrix is not square".into()));
    }
    if let Some(i) = (0..n).find(|&i| counts[i][i] != 0) {
        return Err(Error::InvalidGraph(format!("self-transition recorded for speaker {i}")));
    }
    let total: u64 = counts.iter().flatten().sum();
    let mut g = WeightedGraph::zero(n);
    if total == 0 {
        return Ok(g);
    }
    let total = total as f64;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                g.weights[i * n + j] = (counts[i][j] + counts[j][i]) as f64 / total;
            }
        }
    }
    Ok(g)
}

/// Modularity of a labelling over a dense (possibly self-looped) matrix.
/// Caller guarantees `two_m > 0`.
pub(crate) fn dense_modularity(n: usize, weights: &[f64], labels: &[usize]) -> f64 {
    let two_m: f64 = weights.iter().sum();
    let k_of_c = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut internal = vec![0.0; k_of_c];
    let mut total = vec![0.0; k_of_c];
    for i in 0..n {
        let row = &weights[i * n..(i + 1) * n];
        total[labels[i]] += row.iter().sum::<f64>();
        for j in 0..n {
            if labels[i] == labels[j] {
                internal[labels[i]] += row[j];
            }
        }
    }
    internal
        .iter()
        .zip(&total)
        .map(|(&inside, &tot)| inside / two_m - (tot / two_m).powi(2))
        .sum()
}

pub fn modularity(graph: &WeightedGraph, labels: &[usize]) -> Result<f64> {
    if labels.len() != graph.n {
        return Err(Error::InvalidGraph(format!(
            "{} labels for {} nodes",
            labels.len(),
            graph.n
        )));
    }
    if graph.two_m() <= 0.0 {
        return Err(Error::UndefinedModularity);
    }
    Ok(dense_modularity(graph.n, &graph.weights, labels))
}

/// Community assignment with its modularity. Labels are contiguous from 0 in
/// order of first appearance.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    labels: Vec<usize>,
    modularity: f64,
}

impl Partition {
    /// Canonicalizes `labels` and scores them on `graph`; a zero graph scores 0.
    pub fn new(graph: &WeightedGraph, labels: &[usize]) -> Result<Self> {
        let labels = canonical_labels(labels);
        let modularity = match modularity(graph, &labels) {
            Ok(q) => q,
            Err(Error::UndefinedModularity) => 0.0,
            Err(e) => return Err(e),
        };
        Ok(Self { labels, modularity })
    }

    pub fn singletons(n: usize) -> Self {
        Self {
            labels: (0..n).collect(),
            modularity: 0.0,
        }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, node: usize) -> usize {
        self.labels[node]
    }

    pub fn modularity(&self) -> f64 {
        self.modularity
    }

    pub fn community_count(&self) -> usize {
        community_count(&self.labels)
    }

    pub fn communities(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.community_count()];
        for (node, &c) in self.labels.iter().enumerate() {
            groups[c].push(node);
        }
        groups
    }
}

pub(crate) fn canonical_labels(labels: &[usize]) -> Vec<usize> {
    let mut map: Vec<(usize, usize)> = Vec::new();
    labels
        .iter()
        .map(|&l| match map.iter().find(|(old, _)| *old == l) {
            Some(&(_, new)) => new,
            None => {
                let new = map.len();
                map.push((l, new));
                new
            }
        })
        .collect()
}

/// Number of distinct labels.
pub fn community_count(labels: &[usize]) -> usize {
    let mut seen: Vec<usize> = labels.to_vec();
    seen.sort_unstable();
    seen.dedup();
    seen.len()
}

/// Largest graph [`brute_force_best_partition`] accepts.
pub const BRUTE_FORCE_LIMIT: usize = 10;

/// Exhaustively scores every set partition and returns the first one with
/// maximal modularity. Enumeration follows restricted growth strings, so the
/// all-in-one partition is visited first.
pub fn brute_force_best_partition(graph: &WeightedGraph) -> Result<Partition> {
    let n = graph.n;
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooManyNodes(n));
    }
    if n == 0 {
        return Ok(Partition::singletons(0));
    }
    if graph.two_m() <= 0.0 {
        return Ok(Partition::singletons(n));
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    for_each_set_partition(n, &mut |labels| {
        let q = dense_modularity(n, &graph.weights, labels);
        if best.as_ref().is_none_or(|(bq, _)| q > *bq + 1e-12) {
            best = Some((q, labels.to_vec()));
        }
    });
    let (modularity, labels) = best.expect("at least one partition");
    Ok(Partition { labels, modularity })
}

/// Calls `visit` with every set partition of `n` nodes as a restricted
/// growth string.
pub fn for_each_set_partition(n: usize, visit: &mut dyn FnMut(&[usize])) {
    fn recurse(labels: &mut Vec<usize>, n: usize, max_label: usize, visit: &mut dyn FnMut(&[usize])) {
        if labels.len() == n {
            visit(labels);
            return;
        }
        let upper = if labels.is_empty() { 0 } else { max_label + 1 };
        for l in 0..=upper {
            labels.push(l);
            recurse(labels, n, max_label.max(l), visit);
            labels.pop();
        }
    }
    if n == 0 {
        visit(&[]);
        return;
    }
    recurse(&mut Vec::with_capacity(n), n, 0, visit);
}
