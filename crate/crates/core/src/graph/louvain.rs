//! Two-phase Louvain modularity optimization.
//!
//! Phase one moves single nodes to the neighbouring community with the
//! largest positive modularity gain, visiting nodes in a shuffled order.
//! Phase two collapses communities into super-nodes. The two repeat until a
//! level produces no move.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{canonical_labels, dense_modularity, Partition, WeightedGraph};

/// Gains below this are treated as no improvement.
const MIN_GAIN: f64 = 1e-12;
/// Sweep cap per level; sweeps only continue while some node moved.
const MAX_SWEEPS: usize = 1_000;

/// Result of a Louvain run with the modularity after each pass.
///
/// `pass_modularity[0]` is the all-singletons starting point; each further
/// entry follows one move-and-aggregate pass.
#[derive(Debug, Clone, PartialEq)]
pub struct LouvainRun {
    pub partition: Partition,
    pub pass_modularity: Vec<f64>,
}

/// Dense level graph; the diagonal holds twice the internal weight of a
/// super-node so strengths and `2m` are preserved across aggregation.
struct Level {
    n: usize,
    weights: Vec<f64>,
}

impl Level {
    fn row(&self, i: usize) -> &[f64] {
        &self.weights[i * self.n..(i + 1) * self.n]
    }

    fn aggregate(&self, labels: &[usize], n_comm: usize) -> Level {
        let mut weights = vec![0.0; n_comm * n_comm];
        for i in 0..self.n {
            for (j, w) in self.row(i).iter().enumerate() {
                weights[labels[i] * n_comm + labels[j]] += w;
            }
        }
        Level { n: n_comm, weights }
    }

    /// Local moving phase. Returns canonical labels and whether any node moved.
    fn move_nodes<R: Rng + ?Sized>(&self, two_m: f64, rng: &mut R) -> (Vec<usize>, bool) {
        let n = self.n;
        let strength: Vec<f64> = (0..n).map(|i| self.row(i).iter().sum()).collect();
        let mut community: Vec<usize> = (0..n).collect();
        let mut community_total = strength.clone();
        let mut order: Vec<usize> = (0..n).collect();
        // Scratch: weight from the current node into each community.
        let mut link = vec![0.0; n];
        let mut touched: Vec<usize> = Vec::with_capacity(n);
        let mut any_move = false;

        for _ in 0..MAX_SWEEPS {
            order.shuffle(rng);
            let mut moved = false;
            for &node in &order {
                let k = strength[node];
                if k == 0.0 {
                    continue;
                }
                let own = community[node];
                community_total[own] -= k;

                for &c in &touched {
                    link[c] = 0.0;
                }
                touched.clear();
                touched.push(own);
                for (other, &w) in self.row(node).iter().enumerate() {
                    if other == node || w == 0.0 {
                        continue;
                    }
                    let c = community[other];
                    if link[c] == 0.0 && !touched.contains(&c) {
                        touched.push(c);
                    }
                    link[c] += w;
                }

                let gain = |c: usize| link[c] - community_total[c] * k / two_m;
                let stay = gain(own);
                let mut best = own;
                let mut best_gain = stay;
                for &c in &touched {
                    let g = gain(c);
                    if g > best_gain {
                        best = c;
                        best_gain = g;
                    }
                }
                if best != own && best_gain - stay <= MIN_GAIN {
                    best = own;
                }

                community_total[best] += k;
                if best != own {
                    community[node] = best;
                    moved = true;
                }
            }
            if !moved {
                break;
            }
            any_move = true;
        }
        (canonical_labels(&community), any_move)
    }
}

pub fn louvain<R: Rng + ?Sized>(graph: &WeightedGraph, rng: &mut R) -> Partition {
    louvain_with_trace(graph, rng).partition
}

pub fn louvain_with_trace<R: Rng + ?Sized>(graph: &WeightedGraph, rng: &mut R) -> LouvainRun {
    let n = graph.node_count();
    let two_m = graph.two_m();
    if n == 0 || two_m <= 0.0 {
        return LouvainRun {
            partition: Partition::singletons(n),
            pass_modularity: vec![0.0],
        };
    }

    let singletons: Vec<usize> = (0..n).collect();
    let mut pass_modularity = vec![dense_modularity(n, graph.weights(), &singletons)];
    let mut membership = singletons;
    let mut level = Level {
        n,
        weights: graph.weights().to_vec(),
    };

    loop {
        let (labels, moved) = level.move_nodes(two_m, rng);
        if !moved {
            break;
        }
        let n_comm = labels.iter().max().map_or(0, |m| m + 1);
        for m in membership.iter_mut() {
            *m = labels[*m];
        }
        level = level.aggregate(&labels, n_comm);
        let trivial: Vec<usize> = (0..n_comm).collect();
        pass_modularity.push(dense_modularity(level.n, &level.weights, &trivial));
        if n_comm == 1 {
            break;
        }
    }

    let labels = canonical_labels(&membership);
    let modularity = dense_modularity(n, graph.weights(), &labels);
    LouvainRun {
        partition: Partition { labels, modularity },
        pass_modularity,
    }
}
