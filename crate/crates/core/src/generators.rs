//! Seeded random graphs for property checks and fixtures.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Edge weight distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Weights {
    Unit,
    /// Uniform on `[lo, hi)`.
    Uniform {
        lo: f64,
        hi: f64,
    },
    /// Uniform over the integers `1..=max`.
    Integer {
        max: u32,
    },
}

impl Weights {
    fn draw(self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Weights::Unit => 1.0,
            Weights::Uniform { lo, hi } => rng.random_range(lo..hi),
            Weights::Integer { max } => rng.random_range(1..=max) as f64,
        }
    }
}

/// Connected graph on `n` nodes: a random spanning tree plus each remaining
/// pair independently with probability `extra_p`.
pub fn random_connected_graph(
    n: usize,
    extra_p: f64,
    weights: Weights,
    seed: u64,
) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 nodes, got {n}"
        )));
    }
    if !(0.0..=1.0).contains(&extra_p) {
        return Err(Error::InvalidParameter(format!(
            "extra_p must lie in [0, 1], got {extra_p}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut present = vec![vec![false; n]; n];
    let mut edges = Vec::new();
    for k in 1..n {
        let u = order[k];
        let v = order[rng.random_range(0..k)];
        present[u][v] = true;
        present[v][u] = true;
        edges.push((u, v, weights.draw(&mut rng)));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if !present[i][j] && rng.random_bool(extra_p) {
                edges.push((i, j, weights.draw(&mut rng)));
            }
        }
    }
    Graph::from_edges(n, edges)
}

/// Every connected simple graph on exactly `n` labelled nodes (`n <= 6`),
/// with unit weights.
pub fn all_connected_graphs(n: usize) -> Result<Vec<Graph>> {
    if !(1..=6).contains(&n) {
        return Err(Error::InvalidParameter(format!(
            "exhaustive enumeration supports 1..=6 nodes, got {n}"
        )));
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let mut out = Vec::new();
    for mask in 0u32..(1 << pairs.len()) {
        let edges: Vec<(usize, usize, f64)> = pairs
            .iter()
            .enumerate()
            .filter(|(b, _)| mask >> b & 1 == 1)
            .map(|(_, &(i, j))| (i, j, 1.0))
            .collect();
        if let Ok(g) = Graph::from_edges(n, edges) {
            out.push(g);
        }
    }
    Ok(out)
}

/// All reweightings of `g` with each edge weight taken from `choices`.
pub fn all_weightings(g: &Graph, choices: &[f64]) -> Vec<Graph> {
    let m = g.n_edges();
    let k = choices.len();
    let total = k.pow(m as u32);
    (0..total)
        .map(|mut code| {
            let edges: Vec<(usize, usize, f64)> = g
                .edges()
                .iter()
                .map(|e| {
                    let w = choices[code % k];
                    code /= k;
                    (e.i, e.j, w)
                })
                .collect();
            Graph::from_edges(g.n_nodes(), edges).expect("reweighting keeps the graph valid")
        })
        .collect()
}

/// Planted partition: classes of the given sizes, each internally connected,
/// expected within-class degree `degree_in` and cross-class degree
/// `degree_out`. Returns the graph (connected) and the class of each node.
pub fn planted_partition(
    sizes: &[usize],
    degree_in: f64,
    degree_out: f64,
    seed: u64,
) -> Result<(Graph, Vec<usize>)> {
    if sizes.len() < 2 || sizes.iter().any(|&s| s < 2) {
        return Err(Error::InvalidParameter(
            "need at least two classes of at least two nodes".into(),
        ));
    }
    let n: usize = sizes.iter().sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut class = Vec::with_capacity(n);
    for (c, &s) in sizes.iter().enumerate() {
        class.extend(std::iter::repeat_n(c, s));
    }
    let mut start = vec![0; sizes.len()];
    for c in 1..sizes.len() {
        start[c] = start[c - 1] + sizes[c - 1];
    }
    let mut edges = Vec::new();
    // Random tree inside each class.
    for (c, &s) in sizes.iter().enumerate() {
        for k in 1..s {
            let parent = rng.random_range(0..k);
            edges.push((start[c] + k, start[c] + parent, 1.0));
        }
    }
    // Chain the classes together.
    for c in 1..sizes.len() {
        let u = start[c - 1] + rng.random_range(0..sizes[c - 1]);
        let v = start[c] + rng.random_range(0..sizes[c]);
        edges.push((u, v, 1.0));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let p = if class[i] == class[j] {
                degree_in / (sizes[class[i]] - 1) as f64
            } else {
                degree_out / (n - sizes[class[i]]) as f64
            };
            if rng.random_bool(p.min(1.0)) {
                edges.push((i, j, 1.0));
            }
        }
    }
    // Duplicates of tree edges merge by summation; reset to unit weights.
    let merged = Graph::from_edges(n, edges)?;
    let unit: Vec<(usize, usize, f64)> = merged.edges().iter().map(|e| (e.i, e.j, 1.0)).collect();
    Ok((Graph::from_edges(n, unit)?, class))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_graph_is_connected_and_reproducible() {
        let a = random_connected_graph(20, 0.1, Weights::Uniform { lo: 0.5, hi: 2.0 }, 7).unwrap();
        let b = random_connected_graph(20, 0.1, Weights::Uniform { lo: 0.5, hi: 2.0 }, 7).unwrap();
        assert!(a.is_connected());
        assert!(a.n_edges() >= 19);
        assert_eq!(a, b);
    }

    #[test]
    fn connected_graph_counts() {
        // labelled connected graphs: 1, 1, 4, 38, 728
        let counts: Vec<usize> = (1..=5)
            .map(|n| all_connected_graphs(n).unwrap().len())
            .collect();
        assert_eq!(counts, [1, 1, 4, 38, 728]);
    }

    #[test]
    fn weightings_enumerate_all() {
        let g = Graph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let all = all_weightings(&g, &[1.0, 2.0]);
        assert_eq!(all.len(), 4);
        assert!(all.iter().any(|h| h.edges().iter().all(|e| e.w == 2.0)));
    }

    #[test]
    fn planted_partition_sizes() {
        let (g, class) = planted_partition(&[5, 8, 12], 3.0, 0.5, 1).unwrap();
        assert_eq!(g.n_nodes(), 25);
        assert!(g.is_connected());
        assert_eq!(class.iter().filter(|&&c| c == 2).count(), 12);
        assert!(g.edges().iter().all(|e| e.w == 1.0));
    }
}
