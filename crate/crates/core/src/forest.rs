//! Exhaustive census of spanning rooted forests.
//!
//! The beta-weight of a forest is the product of its edge weights, each
//! multiplied by beta. A forest whose trees have sizes `s_1, ..., s_c` can be
//! rooted in `s_1 * ... * s_c` ways, so the rootings are counted analytically
//! instead of being enumerated. The matrix of rooted weights divided by the
//! total weight equals `(I + beta L)^{-1}`, which makes this module an
//! independent oracle for the kernel.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph};

/// Largest graph accepted by [`enumerate_rooted_forests`].
pub const MAX_FOREST_NODES: usize = 10;

/// Number of leading edge decisions fanned out to parallel workers.
const PREFIX_DEPTH: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct ForestCensus {
    total: f64,
    rooted: DMatrix<f64>,
}

impl ForestCensus {
    /// Total beta-weight of all spanning rooted forests.
    pub fn total_weight(&self) -> f64 {
        self.total
    }

    /// Weight of the forests in which `i` belongs to a tree rooted at `j`.
    pub fn rooted_weight(&self, i: usize, j: usize) -> f64 {
        self.rooted[(i, j)]
    }

    pub fn rooted_weights(&self) -> &DMatrix<f64> {
        &self.rooted
    }

    /// `rooted / total`, which should reproduce the kernel matrix.
    pub fn kernel(&self) -> DMatrix<f64> {
        &self.rooted / self.total
    }
}

/// Union-find with an undo log; no path compression so merges can be undone.
#[derive(Clone)]
struct Components {
    parent: Vec<usize>,
    size: Vec<usize>,
    history: Vec<(usize, usize)>,
}

impl Components {
    fn new(n: usize) -> Self {
        Components {
            parent: (0..n).collect(),
            size: vec![1; n],
            history: Vec::new(),
        }
    }

    fn find(&self, mut x: usize) -> usize {
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }

    /// Merges the classes of `a` and `b`; false if already joined.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        self.history.push((ra, rb));
        true
    }

    fn undo(&mut self) {
        let (ra, rb) = self.history.pop().expect("undo without union");
        self.parent[rb] = rb;
        self.size[ra] -= self.size[rb];
    }
}

struct Accumulator {
    total: f64,
    rooted: DMatrix<f64>,
}

struct Enumerator<'a> {
    n: usize,
    edges: &'a [Edge],
    beta: f64,
}

impl Enumerator<'_> {
    fn recurse(&self, pos: usize, weight: f64, comps: &mut Components, acc: &mut Accumulator) {
        if pos == self.edges.len() {
            self.record(weight, comps, acc);
            return;
        }
        self.recurse(pos + 1, weight, comps, acc);
        let e = self.edges[pos];
        if comps.union(e.i, e.j) {
            self.recurse(pos + 1, weight * self.beta * e.w, comps, acc);
            comps.undo();
        }
    }

    fn record(&self, weight: f64, comps: &Components, acc: &mut Accumulator) {
        let roots: Vec<usize> = (0..self.n).map(|v| comps.find(v)).collect();
        let rootings: f64 = (0..self.n)
            .filter(|&v| roots[v] == v)
            .map(|v| comps.size[v] as f64)
            .product();
        let contribution = weight * rootings;
        acc.total += contribution;
        for i in 0..self.n {
            // Fix the root of i's tree at j; the other trees root freely.
            let share = contribution / comps.size[roots[i]] as f64;
            for j in 0..self.n {
                if roots[j] == roots[i] {
                    acc.rooted[(i, j)] += share;
                }
            }
        }
    }
}

/// Enumerates every spanning rooted forest of `g` (at most
/// [`MAX_FOREST_NODES`] nodes) and accumulates their beta-weights.
pub fn enumerate_rooted_forests(g: &Graph, beta: f64) -> Result<ForestCensus> {
    let n = g.n_nodes();
    if n > MAX_FOREST_NODES {
        return Err(Error::TooLarge {
            n,
            limit: MAX_FOREST_NODES,
        });
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "beta must be positive, got {beta}"
        )));
    }
    let edges = g.edges();
    let depth = PREFIX_DEPTH.min(edges.len());
    let enumerator = Enumerator { n, edges, beta };

    // Acyclic choices for the first `depth` edges, each finished by a worker.
    let mut prefixes: Vec<(f64, Components)> = vec![(1.0, Components::new(n))];
    for e in &edges[..depth] {
        let mut next = Vec::with_capacity(prefixes.len() * 2);
        for (w, comps) in prefixes {
            let mut with = comps.clone();
            if with.union(e.i, e.j) {
                next.push((w * beta * e.w, with));
            }
            next.push((w, comps));
        }
        prefixes = next;
    }

    let partials: Vec<Accumulator> = prefixes
        .into_par_iter()
        .map(|(w, mut comps)| {
            let mut acc = Accumulator {
                total: 0.0,
                rooted: DMatrix::zeros(n, n),
            };
            enumerator.recurse(depth, w, &mut comps, &mut acc);
            acc
        })
        .collect();

    let mut total = 0.0;
    let mut rooted = DMatrix::zeros(n, n);
    for p in partials {
        total += p.total;
        rooted += p.rooted;
    }
    Ok(ForestCensus { total, rooted })
}
