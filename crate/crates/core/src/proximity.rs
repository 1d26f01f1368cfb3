//! Distances and proximity checks derived from the kernel `Q = (I + beta L)^{-1}`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::{laplacian, Graph};
use crate::solvers::CholeskyFactor;

/// Slack allowed when verifying the triangle inequality.
pub const METRIC_TOL: f64 = 1e-9;

/// Largest graph for which cutpoints are found by path enumeration.
pub const MAX_PATH_ENUMERATION_NODES: usize = 10;

/// Symmetric nonnegative matrix with zero diagonal satisfying the triangle
/// inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix(DMatrix<f64>);

impl DistanceMatrix {
    /// Validates the metric axioms up to [`METRIC_TOL`].
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: m.ncols(),
            });
        }
        for i in 0..n {
            if m[(i, i)].abs() > METRIC_TOL {
                return Err(Error::InvalidParameter(format!(
                    "nonzero diagonal {} at {i}",
                    m[(i, i)]
                )));
            }
            for j in 0..n {
                if m[(i, j)] < -METRIC_TOL || (m[(i, j)] - m[(j, i)]).abs() > METRIC_TOL {
                    return Err(Error::InvalidParameter(format!(
                        "entry ({i}, {j}) is negative or asymmetric"
                    )));
                }
            }
        }
        if let Some((i, j, k, excess)) = worst_triangle(&m) {
            if excess > METRIC_TOL {
                return Err(Error::NotMetric { i, j, k, excess });
            }
        }
        Ok(DistanceMatrix(m))
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }
}

/// Largest `d(i,k) - d(i,j) - d(j,k)` over all triples.
fn worst_triangle(m: &DMatrix<f64>) -> Option<(usize, usize, usize, f64)> {
    let n = m.nrows();
    let mut worst: Option<(usize, usize, usize, f64)> = None;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let excess = m[(i, k)] - m[(i, j)] - m[(j, k)];
                if worst.is_none_or(|w| excess > w.3) {
                    worst = Some((i, j, k, excess));
                }
            }
        }
    }
    worst
}

/// `rho_ij = beta (q_ii + q_jj - q_ij - q_ji)`.
pub fn adjusted_forest_distance(q: &DMatrix<f64>, beta: f64) -> Result<DistanceMatrix> {
    let n = q.nrows();
    let m = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            beta * (q[(i, i)] + q[(j, j)] - q[(i, j)] - q[(j, i)])
        }
    });
    DistanceMatrix::new(m)
}

/// `d_ij = -ln(q_ij / sqrt(q_ii q_jj))`. Requires a strictly positive kernel.
pub fn log_forest_distance(q: &DMatrix<f64>) -> Result<DistanceMatrix> {
    let n = q.nrows();
    for i in 0..n {
        for j in 0..n {
            if !(q[(i, j)] > 0.0) {
                return Err(Error::NonPositiveKernel(i, j));
            }
        }
    }
    let m = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            -(q[(i, j)] / (q[(i, i)] * q[(j, j)]).sqrt()).ln()
        }
    });
    DistanceMatrix::new(m)
}

/// Group inverse of a connected graph's Laplacian,
/// `H = (L + J/N)^{-1} - J/N` with `J` the all-ones matrix.
pub fn group_inverse(l: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = l.nrows();
    let j = DMatrix::from_element(n, n, 1.0 / n as f64);
    let shifted = l + &j;
    let inv = CholeskyFactor::new(&((&shifted + shifted.transpose()) * 0.5))
        .map_err(|e| match e {
            Error::NotPositiveDefinite => Error::Singular,
            other => other,
        })?
        .inverse();
    let h = inv - j;
    Ok((&h + h.transpose()) * 0.5)
}

/// Effective resistance between every pair, edge weights read as
/// conductances: `r_ij = h_ii + h_jj - 2 h_ij`.
pub fn resistance_distance(g: &Graph) -> Result<DistanceMatrix> {
    if !g.is_connected() {
        return Err(Error::Disconnected(g.component_sizes()));
    }
    let h = group_inverse(&laplacian(g).to_dense())?;
    let n = g.n_nodes();
    let m = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            h[(i, i)] + h[(j, j)] - 2.0 * h[(i, j)]
        }
    });
    DistanceMatrix::new(m)
}

/// `g` plus a hub node (index `n`) joined to every node by an edge of
/// weight `1 / beta`.
pub fn hub_augmented_graph(g: &Graph, beta: f64) -> Result<Graph> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "beta must be positive, got {beta}"
        )));
    }
    let n = g.n_nodes();
    let hub_weight = 1.0 / beta;
    let edges = g
        .edges()
        .iter()
        .map(|e| (e.i, e.j, e.w))
        .chain((0..n).map(|i| (i, n, hub_weight)));
    Graph::from_edges(n + 1, edges)
}

/// All-pairs shortest path lengths with per-edge length `length(w)`.
pub fn shortest_paths(g: &Graph, length: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let n = g.n_nodes();
    let mut d = DMatrix::from_element(n, n, f64::INFINITY);
    for i in 0..n {
        d[(i, i)] = 0.0;
    }
    for e in g.edges() {
        let l = length(e.w);
        if l < d[(e.i, e.j)] {
            d[(e.i, e.j)] = l;
            d[(e.j, e.i)] = l;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[(i, k)] + d[(k, j)];
                if via < d[(i, j)] {
                    d[(i, j)] = via;
                }
            }
        }
    }
    d
}

/// `must_visit[i][k][j]` is true when every path from `i` to `k` passes
/// through `j`. Found by enumerating simple paths, so limited to
/// [`MAX_PATH_ENUMERATION_NODES`] nodes.
pub fn cutpoint_table(g: &Graph) -> Result<Vec<Vec<Vec<bool>>>> {
    let n = g.n_nodes();
    if n > MAX_PATH_ENUMERATION_NODES {
        return Err(Error::TooLarge {
            n,
            limit: MAX_PATH_ENUMERATION_NODES,
        });
    }
    let mut table = vec![vec![vec![false; n]; n]; n];
    for i in 0..n {
        table[i][i][i] = true;
        for k in (i + 1)..n {
            let common = nodes_on_every_path(g, i, k);
            table[i][k] = common.clone();
            table[k][i] = common;
        }
    }
    Ok(table)
}

fn nodes_on_every_path(g: &Graph, from: usize, to: usize) -> Vec<bool> {
    struct Search<'a> {
        g: &'a Graph,
        to: usize,
        on_path: Vec<bool>,
        common: Option<Vec<bool>>,
    }

    impl Search<'_> {
        fn done(&self) -> bool {
            // Nothing but the endpoints left in common: no cutpoint to find.
            self.common
                .as_ref()
                .is_some_and(|c| c.iter().filter(|&&b| b).count() <= 2)
        }

        fn visit(&mut self, u: usize) {
            if self.done() {
                return;
            }
            if u == self.to {
                match &mut self.common {
                    Some(c) => {
                        for (ci, &p) in c.iter_mut().zip(&self.on_path) {
                            *ci &= p;
                        }
                    }
                    None => self.common = Some(self.on_path.clone()),
                }
                return;
            }
            for &(v, _) in self.g.neighbors(u) {
                if !self.on_path[v] {
                    self.on_path[v] = true;
                    self.visit(v);
                    self.on_path[v] = false;
                }
            }
        }
    }

    let mut search = Search {
        g,
        to,
        on_path: vec![false; g.n_nodes()],
        common: None,
    };
    search.on_path[from] = true;
    search.visit(from);
    search.common.unwrap_or_else(|| vec![false; g.n_nodes()])
}

/// Deviations from the 1-proximity axioms for a kernel matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProximityReport {
    /// `max_i |sum_k q_ik - 1|`
    pub max_row_sum_error: f64,
    /// `max (q_ji + q_jk - q_ik - q_jj)` over all triples; must be <= 0.
    pub max_triangle_excess: f64,
    /// `min (q_ii + q_jj - q_ij - q_ji)` over `i != j`; must be > 0.
    pub min_strict_margin: f64,
    /// `min (q_ii - q_ij)` over `i != j`; positive means egocentric.
    pub min_egocentric_gap: f64,
}

impl ProximityReport {
    pub fn holds(&self, row_tol: f64, triangle_slack: f64) -> bool {
        self.max_row_sum_error <= row_tol
            && self.max_triangle_excess <= triangle_slack
            && self.min_strict_margin > 0.0
            && self.min_egocentric_gap > 0.0
    }
}

pub fn check_proximity_axioms(q: &DMatrix<f64>) -> ProximityReport {
    let n = q.nrows();
    let mut report = ProximityReport {
        max_row_sum_error: 0.0,
        max_triangle_excess: f64::NEG_INFINITY,
        min_strict_margin: f64::INFINITY,
        min_egocentric_gap: f64::INFINITY,
    };
    for i in 0..n {
        report.max_row_sum_error = report.max_row_sum_error.max((q.row(i).sum() - 1.0).abs());
        for j in 0..n {
            if i != j {
                report.min_strict_margin = report
                    .min_strict_margin
                    .min(q[(i, i)] + q[(j, j)] - q[(i, j)] - q[(j, i)]);
                report.min_egocentric_gap = report.min_egocentric_gap.min(q[(i, i)] - q[(i, j)]);
            }
            for k in 0..n {
                report.max_triangle_excess = report
                    .max_triangle_excess
                    .max(q[(j, i)] + q[(j, k)] - q[(i, k)] - q[(j, j)]);
            }
        }
    }
    report
}

/// Result of checking `q_ij q_jk <= q_ik q_jj` over all triples.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionalReport {
    pub triples: usize,
    /// `max (q_ij q_jk - q_ik q_jj)`; must be <= 0 up to rounding.
    pub max_excess: f64,
    /// Filled when cutpoints were determined (small graphs only).
    pub cutpoints: Option<CutpointReport>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutpointReport {
    /// Triples where every `i`-`k` path visits `j`, endpoints included.
    pub equality_triples: usize,
    /// `max |q_ij q_jk - q_ik q_jj|` over those triples.
    pub max_equality_deviation: f64,
    /// Same deviation divided by `q_ik q_jj`.
    pub max_relative_equality_deviation: f64,
    /// `min (q_ik q_jj - q_ij q_jk)` over the remaining triples.
    pub min_strict_gap: f64,
    /// Same gap divided by `q_ik q_jj`.
    pub min_relative_gap: f64,
}

impl TransitionalReport {
    /// The inequality holds within `tol`; on cutpoint triples the two sides
    /// agree within relative `tol`, elsewhere they differ by more.
    pub fn holds(&self, tol: f64) -> bool {
        self.max_excess <= tol
            && self.cutpoints.is_none_or(|c| {
                c.max_relative_equality_deviation <= tol && c.min_relative_gap > tol
            })
    }
}

pub fn check_transitional_measure(q: &DMatrix<f64>, g: &Graph) -> Result<TransitionalReport> {
    let n = q.nrows();
    if g.n_nodes() != n {
        return Err(Error::DimensionMismatch {
            expected: g.n_nodes(),
            got: n,
        });
    }
    let table = if n <= MAX_PATH_ENUMERATION_NODES {
        Some(cutpoint_table(g)?)
    } else {
        None
    };
    let mut max_excess = f64::NEG_INFINITY;
    let mut cut = CutpointReport {
        equality_triples: 0,
        max_equality_deviation: 0.0,
        max_relative_equality_deviation: 0.0,
        min_strict_gap: f64::INFINITY,
        min_relative_gap: f64::INFINITY,
    };
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let lhs = q[(i, j)] * q[(j, k)];
                let rhs = q[(i, k)] * q[(j, j)];
                let excess = lhs - rhs;
                max_excess = max_excess.max(excess);
                if let Some(t) = &table {
                    let equality = if i == k { j == i } else { t[i][k][j] };
                    if equality {
                        cut.equality_triples += 1;
                        cut.max_equality_deviation = cut.max_equality_deviation.max(excess.abs());
                        cut.max_relative_equality_deviation =
                            cut.max_relative_equality_deviation.max(excess.abs() / rhs);
                    } else {
                        cut.min_strict_gap = cut.min_strict_gap.min(-excess);
                        cut.min_relative_gap = cut.min_relative_gap.min(-excess / rhs);
                    }
                }
            }
        }
    }
    Ok(TransitionalReport {
        triples: n * n * n,
        max_excess,
        cutpoints: table.map(|_| cut),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::kernel_matrix;

    fn k2() -> Graph {
        Graph::from_edges(2, [(0, 1, 1.0)]).unwrap()
    }

    fn path3() -> Graph {
        Graph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap()
    }

    fn triangle() -> Graph {
        Graph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap()
    }

    #[test]
    fn adjusted_forest_distance_k2() {
        let q = kernel_matrix(&k2(), 1.0).unwrap();
        let rho = adjusted_forest_distance(&q, 1.0).unwrap();
        assert!((rho.get(0, 1) - 2.0 / 3.0).abs() < 1e-14);
        assert_eq!(rho.get(0, 0), 0.0);
        let beta = 1e4;
        let q = kernel_matrix(&k2(), beta).unwrap();
        let rho = adjusted_forest_distance(&q, beta).unwrap();
        assert!((rho.get(0, 1) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn log_distance_cutpoint_additive_on_path() {
        for beta in [0.1, 1.0, 7.0] {
            let d = log_forest_distance(&kernel_matrix(&path3(), beta).unwrap()).unwrap();
            assert!((d.get(0, 1) + d.get(1, 2) - d.get(0, 2)).abs() < 1e-10);
            assert_eq!(d.get(1, 1), 0.0);
        }
        let d = log_forest_distance(&kernel_matrix(&triangle(), 1.0).unwrap()).unwrap();
        assert!(d.get(0, 1) + d.get(1, 2) > d.get(0, 2) + 1e-3);
    }

    #[test]
    fn log_distance_rejects_nonpositive() {
        let q = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        assert!(matches!(
            log_forest_distance(&q),
            Err(Error::NonPositiveKernel(0, 1))
        ));
    }

    #[test]
    fn distance_rejects_triangle_violation() {
        let m = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 5.0, 1.0, 0.0, 1.0, 5.0, 1.0, 0.0]);
        assert!(matches!(
            DistanceMatrix::new(m),
            Err(Error::NotMetric { .. })
        ));
    }

    #[test]
    fn resistance_small_networks() {
        assert!((resistance_distance(&k2()).unwrap().get(0, 1) - 1.0).abs() < 1e-12);
        assert!((resistance_distance(&path3()).unwrap().get(0, 2) - 2.0).abs() < 1e-12);
        // 1 ohm in parallel with 2 ohm
        assert!((resistance_distance(&triangle()).unwrap().get(0, 1) - 2.0 / 3.0).abs() < 1e-12);
        // tree: shortest path with resistances 1/w
        let tree = Graph::from_edges(4, [(0, 1, 2.0), (1, 2, 0.5), (1, 3, 4.0)]).unwrap();
        let r = resistance_distance(&tree).unwrap();
        let sp = shortest_paths(&tree, |w| 1.0 / w);
        assert!((r.as_matrix() - sp).amax() < 1e-12);
    }

    #[test]
    fn group_inverse_k2_and_identities() {
        let l = laplacian(&k2()).to_dense();
        let h = group_inverse(&l).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[0.25, -0.25, -0.25, 0.25]);
        assert!((&h - expected).amax() < 1e-15);

        let g = Graph::from_edges(
            5,
            [
                (0, 1, 1.0),
                (1, 2, 2.0),
                (2, 3, 1.0),
                (3, 4, 3.0),
                (4, 0, 1.0),
                (0, 2, 0.5),
            ],
        )
        .unwrap();
        let l = laplacian(&g).to_dense();
        let h = group_inverse(&l).unwrap();
        let ones = DMatrix::from_element(5, 1, 1.0);
        assert!((&h * ones).amax() < 1e-12);
        assert!((&l * &h * &l - &l).amax() < 1e-9);
        assert!((&h * &l * &h - &h).amax() < 1e-9);
        assert_eq!(h, h.transpose());
    }

    #[test]
    fn hub_graph_structure() {
        let hub = hub_augmented_graph(&k2(), 1.0).unwrap();
        assert_eq!(hub.n_nodes(), 3);
        assert_eq!(hub.n_edges(), 3);
        assert!(hub.edges().iter().all(|e| e.w == 1.0));
        let hub = hub_augmented_graph(&path3(), 4.0).unwrap();
        for e in hub.edges() {
            if e.j == 3 {
                assert_eq!(e.w, 0.25);
            } else {
                assert_eq!(e.w, 1.0);
            }
        }
    }

    #[test]
    fn cutpoints_by_enumeration() {
        let t = cutpoint_table(&path3()).unwrap();
        assert!(t[0][2][1]);
        assert!(t[0][2][0] && t[0][2][2]);
        let t = cutpoint_table(&triangle()).unwrap();
        assert!(!t[0][2][1]);
        // bowtie: two triangles sharing node 2
        let bow = Graph::from_edges(
            5,
            [
                (0, 1, 1.0),
                (1, 2, 1.0),
                (0, 2, 1.0),
                (2, 3, 1.0),
                (3, 4, 1.0),
                (2, 4, 1.0),
            ],
        )
        .unwrap();
        let t = cutpoint_table(&bow).unwrap();
        assert!(t[0][4][2]);
        assert!(!t[0][4][1]);
        assert!(!t[0][1][2]);
    }

    #[test]
    fn transitional_equality_on_path_strict_on_triangle() {
        let q = kernel_matrix(&path3(), 1.0).unwrap();
        assert!((q[(0, 1)] * q[(1, 2)] - q[(0, 2)] * q[(1, 1)]).abs() < 1e-12);
        let rep = check_transitional_measure(&q, &path3()).unwrap();
        assert!(rep.holds(1e-12), "{rep:?}");

        let q = kernel_matrix(&triangle(), 1.0).unwrap();
        let rep = check_transitional_measure(&q, &triangle()).unwrap();
        assert!(rep.holds(1e-12), "{rep:?}");
        let c = rep.cutpoints.unwrap();
        // only triples with j an endpoint (or i = j = k) are equalities
        assert_eq!(c.equality_triples, 3 * 3 + 3 * 3 - 3);
        // i = k case: q_ij q_ji < q_ii q_jj
        assert!(q[(0, 1)] * q[(1, 0)] < q[(0, 0)] * q[(1, 1)]);
    }

    #[test]
    fn proximity_axioms_hold() {
        let g = Graph::from_edges(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 2.0), (1, 3, 1.0)]).unwrap();
        for beta in [0.1, 1.0, 10.0] {
            let rep = check_proximity_axioms(&kernel_matrix(&g, beta).unwrap());
            assert!(rep.holds(1e-10, 1e-12), "{rep:?}");
        }
    }
}
