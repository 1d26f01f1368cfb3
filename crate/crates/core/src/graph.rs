//! Weighted undirected graphs and the operators built on them.
//!
//! A [`Graph`] stores each undirected edge once with `i < j` and a strictly
//! positive weight. Every operator used by the classification methods is
//! derived from it: the combinatorial Laplacian `L = D - A`, the normalized
//! Laplacian `D^{-1/2} L D^{-1/2}`, the standard random-walk matrix
//! `P = D^{-1} A` and the lazy symmetric walk `I - tau L`.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// One undirected edge, stored with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub w: f64,
}

/// Compressed sparse rows with sorted column indices.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Csr {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl Csr {
    pub(crate) fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            for (c, v) in row {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Csr {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub(crate) fn dim(&self) -> usize {
        self.n
    }

    pub(crate) fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub(crate) fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[range.clone()]
            .iter()
            .copied()
            .zip(self.vals[range].iter().copied())
    }

    pub(crate) fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[range.clone()].binary_search(&j) {
            Ok(pos) => self.vals[range.start + pos],
            Err(_) => 0.0,
        }
    }

    pub(crate) fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[p] * x[self.cols[p]];
            }
            *yi = acc;
        }
    }

    pub(crate) fn mul_mat(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.n, x.ncols());
        self.mul_mat_into(x, &mut out);
        out
    }

    pub(crate) fn mul_mat_into(&self, x: &DMatrix<f64>, out: &mut DMatrix<f64>) {
        debug_assert_eq!(x.nrows(), self.n);
        let n = self.n;
        if n == 0 {
            return;
        }
        for (xc, oc) in x
            .as_slice()
            .chunks_exact(n)
            .zip(out.as_mut_slice().chunks_exact_mut(n))
        {
            self.mul_vec_into(xc, oc);
        }
    }

    pub(crate) fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }
}

/// Sparse real symmetric matrix in CSR form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymMatrix {
    csr: Csr,
}

impl SparseSymMatrix {
    /// Builds from per-row `(column, value)` lists. Fails unless the pattern
    /// and values are exactly symmetric.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().flatten().find(|&&(c, _)| c >= n) {
            return Err(Error::InvalidParameter(format!(
                "column index {} out of range for dimension {n}",
                bad.0
            )));
        }
        let m = SparseSymMatrix {
            csr: Csr::from_rows(rows),
        };
        if !m.is_symmetric() {
            return Err(Error::InvalidParameter("matrix is not symmetric".into()));
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.csr.dim()
    }

    pub fn nnz(&self) -> usize {
        self.csr.nnz()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.csr.get(i, j)
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.csr.row(i)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.get(i, i)).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.dim()).all(|i| self.row(i).all(|(j, v)| self.get(j, i) == v))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.csr.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        self.csr.mul_vec_into(x, y);
    }

    pub fn mul_mat(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        self.csr.mul_mat(x)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        self.csr.to_dense()
    }

    /// `I + scale * self`, keeping the sparsity pattern plus the diagonal.
    pub fn identity_plus_scaled(&self, scale: f64) -> SparseSymMatrix {
        let rows = (0..self.dim())
            .map(|i| {
                let mut row: Vec<(usize, f64)> = self.row(i).map(|(j, v)| (j, scale * v)).collect();
                match row.iter_mut().find(|(j, _)| *j == i) {
                    Some(d) => d.1 += 1.0,
                    None => row.push((i, 1.0)),
                }
                row
            })
            .collect();
        SparseSymMatrix {
            csr: Csr::from_rows(rows),
        }
    }

    pub(crate) fn csr(&self) -> &Csr {
        &self.csr
    }
}

/// Row-stochastic transition matrix of a random walk on a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    csr: Csr,
    tau: Option<f64>,
}

impl TransitionMatrix {
    pub fn dim(&self) -> usize {
        self.csr.dim()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.csr.get(i, j)
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.csr.row(i)
    }

    /// Step size for the lazy walk `I - tau L`; `None` for `D^{-1} A`.
    pub fn tau(&self) -> Option<f64> {
        self.tau
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|i| self.row(i).map(|(_, v)| v).sum())
            .collect()
    }

    pub fn mul_mat(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        self.csr.mul_mat(x)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        self.csr.to_dense()
    }

    pub(crate) fn csr(&self) -> &Csr {
        &self.csr
    }
}

/// Undirected weighted similarity graph on nodes `0..n_nodes`.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    names: Vec<String>,
    adjacency: Vec<Vec<(usize, f64)>>,
    degrees: Vec<f64>,
}

impl Graph {
    /// Builds a connected graph. Edge endpoints may come in either order;
    /// repeated pairs have their weights summed.
    pub fn from_edges<I>(n_nodes: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let names = (0..n_nodes).map(|i| i.to_string()).collect();
        Self::build(names, edges, true)
    }

    /// Same as [`Graph::from_edges`] but accepts several components and
    /// isolated nodes.
    pub fn from_edges_allow_components<I>(n_nodes: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let names = (0..n_nodes).map(|i| i.to_string()).collect();
        Self::build(names, edges, false)
    }

    /// Connected graph whose node `i` is called `names[i]`.
    pub fn from_named_edges<I>(names: Vec<String>, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        Self::build(names, edges, true)
    }

    fn build<I>(names: Vec<String>, edges: I, require_connected: bool) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let n = names.len();
        if n == 0 {
            return Err(Error::InvalidParameter("graph has no nodes".into()));
        }
        let mut merged: HashMap<(usize, usize), f64> = HashMap::new();
        for (a, b, w) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidParameter(format!(
                    "edge ({a}, {b}) out of range for {n} nodes"
                )));
            }
            if a == b {
                return Err(Error::SelfLoop(names[a].clone()));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::NonPositiveWeight {
                    i: names[a].clone(),
                    j: names[b].clone(),
                    weight: w,
                });
            }
            *merged.entry((a.min(b), a.max(b))).or_insert(0.0) += w;
        }
        let mut edges: Vec<Edge> = merged
            .into_iter()
            .map(|((i, j), w)| Edge { i, j, w })
            .collect();
        edges.sort_by_key(|e| (e.i, e.j));

        let mut adjacency = vec![Vec::new(); n];
        for e in &edges {
            adjacency[e.i].push((e.j, e.w));
            adjacency[e.j].push((e.i, e.w));
        }
        for row in &mut adjacency {
            row.sort_by_key(|&(j, _)| j);
        }
        let degrees = adjacency
            .iter()
            .map(|row| row.iter().map(|&(_, w)| w).sum())
            .collect();
        let g = Graph {
            n,
            edges,
            names,
            adjacency,
            degrees,
        };
        if require_connected {
            let sizes = g.component_sizes();
            if sizes.len() > 1 {
                return Err(Error::Disconnected(sizes));
            }
        }
        Ok(g)
    }

    pub fn n_nodes(&self) -> usize {
        self.n
    }

    /// Number of undirected edges.
    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Number of nonzero off-diagonal entries of the adjacency matrix, i.e.
    /// each undirected edge counted in both directions.
    pub fn n_arcs(&self) -> usize {
        2 * self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> f64 {
        self.degrees[i]
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn max_degree(&self) -> f64 {
        self.degrees.iter().copied().fold(0.0, f64::max)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Map from external node name to dense index.
    pub fn name_index(&self) -> HashMap<&str, usize> {
        self.names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect()
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut stack = vec![start];
            let mut comp = Vec::new();
            while let Some(u) = stack.pop() {
                comp.push(u);
                for &(v, _) in &self.adjacency[u] {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn component_sizes(&self) -> Vec<usize> {
        self.components().iter().map(Vec::len).collect()
    }

    pub fn is_connected(&self) -> bool {
        self.component_sizes().len() == 1
    }

    /// Weighted adjacency matrix `A`.
    pub fn adjacency(&self) -> SparseSymMatrix {
        SparseSymMatrix {
            csr: Csr::from_rows(self.adjacency.clone()),
        }
    }

    /// Dense adjacency matrix.
    pub fn dense_adjacency(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for e in &self.edges {
            a[(e.i, e.j)] = e.w;
            a[(e.j, e.i)] = e.w;
        }
        a
    }
}

/// Options for [`load_edge_list`].
#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Accept graphs with more than one connected component.
    pub allow_components: bool,
}

/// Reads whitespace-separated `i j [w]` lines. `#` starts a comment. Node
/// tokens are arbitrary strings, numbered densely in order of first
/// appearance.
pub fn load_edge_list<R: BufRead>(reader: R, opts: LoadOptions) -> Result<Graph> {
    let mut names: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut edges = Vec::new();
    let mut intern = |tok: &str, names: &mut Vec<String>| -> usize {
        *index.entry(tok.to_string()).or_insert_with(|| {
            names.push(tok.to_string());
            names.len() - 1
        })
    };
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let content = line.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        if tokens.len() > 3 || tokens.len() < 2 {
            return Err(Error::Parse {
                line: lineno + 1,
                msg: format!("expected `i j [w]`, found {} fields", tokens.len()),
            });
        }
        let w = match tokens.get(2) {
            Some(tok) => tok.parse::<f64>().map_err(|e| Error::Parse {
                line: lineno + 1,
                msg: format!("bad weight {tok:?}: {e}"),
            })?,
            None => 1.0,
        };
        let a = intern(tokens[0], &mut names);
        let b = intern(tokens[1], &mut names);
        edges.push((a, b, w));
    }
    Graph::build(names, edges, !opts.allow_components)
}

pub fn parse_edge_list(text: &str, opts: LoadOptions) -> Result<Graph> {
    load_edge_list(text.as_bytes(), opts)
}

/// Writes the graph as an edge list that [`load_edge_list`] reads back into
/// an identical graph.
///
/// Lines are ordered so that node names first appear in index order, which
/// holds for every graph produced by the loader.
pub fn write_edge_list<W: Write>(g: &Graph, mut out: W) -> std::io::Result<()> {
    let n = g.n_nodes();
    let mut written = vec![false; g.n_edges()];
    let edge_pos: HashMap<(usize, usize), usize> = g
        .edges()
        .iter()
        .enumerate()
        .map(|(p, e)| ((e.i, e.j), p))
        .collect();
    let mut introduced = vec![false; n];
    let mut emit = |p: usize, first: usize, second: usize, out: &mut W| -> std::io::Result<()> {
        written[p] = true;
        let e = g.edges()[p];
        writeln!(out, "{} {} {}", g.name(first), g.name(second), e.w)
    };
    for v in 0..n {
        if introduced[v] {
            continue;
        }
        if let Some(&(u, _)) = g.neighbors(v).iter().find(|&&(u, _)| u < v) {
            emit(edge_pos[&(u, v)], u, v, &mut out)?;
            introduced[v] = true;
        } else if let Some(&(u, _)) = g
            .neighbors(v)
            .iter()
            .find(|&&(u, _)| u == v + 1)
            .or_else(|| g.neighbors(v).iter().find(|&&(u, _)| u > v))
        {
            // No lower neighbour: pair v with v + 1 when adjacent, which
            // keeps first appearances in index order for any loaded graph.
            emit(edge_pos[&(v, u)], v, u, &mut out)?;
            introduced[v] = true;
            introduced[u] = true;
        }
    }
    for (p, e) in g.edges().iter().enumerate() {
        if !written[p] {
            writeln!(out, "{} {} {}", g.name(e.i), g.name(e.j), e.w)?;
        }
    }
    Ok(())
}

/// Combinatorial Laplacian `L = D - A`.
pub fn laplacian(g: &Graph) -> SparseSymMatrix {
    let rows = (0..g.n_nodes())
        .map(|i| {
            let mut row: Vec<(usize, f64)> = g.neighbors(i).iter().map(|&(j, w)| (j, -w)).collect();
            row.push((i, g.degree(i)));
            row
        })
        .collect();
    SparseSymMatrix {
        csr: Csr::from_rows(rows),
    }
}

/// Normalized Laplacian `D^{-1/2} L D^{-1/2}`.
pub fn normalized_laplacian(g: &Graph) -> Result<SparseSymMatrix> {
    if let Some(i) = (0..g.n_nodes()).find(|&i| g.degree(i) <= 0.0) {
        return Err(Error::IsolatedNode(i));
    }
    let inv_sqrt: Vec<f64> = g.degrees().iter().map(|d| 1.0 / d.sqrt()).collect();
    let rows = (0..g.n_nodes())
        .map(|i| {
            let mut row: Vec<(usize, f64)> = g
                .neighbors(i)
                .iter()
                .map(|&(j, w)| (j, -w * inv_sqrt[i] * inv_sqrt[j]))
                .collect();
            row.push((i, 1.0));
            row
        })
        .collect();
    Ok(SparseSymMatrix {
        csr: Csr::from_rows(rows),
    })
}

/// Standard random walk `P = D^{-1} A`.
pub fn standard_transition(g: &Graph) -> Result<TransitionMatrix> {
    if let Some(i) = (0..g.n_nodes()).find(|&i| g.degree(i) <= 0.0) {
        return Err(Error::IsolatedNode(i));
    }
    let rows = (0..g.n_nodes())
        .map(|i| {
            let d = g.degree(i);
            g.neighbors(i).iter().map(|&(j, w)| (j, w / d)).collect()
        })
        .collect();
    Ok(TransitionMatrix {
        csr: Csr::from_rows(rows),
        tau: None,
    })
}

/// Lazy symmetric walk `I - tau L`. Requires `tau <= 1 / max degree` so the
/// diagonal stays nonnegative.
pub fn lazy_transition(g: &Graph, tau: f64) -> Result<TransitionMatrix> {
    let max = 1.0 / g.max_degree();
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "tau must be positive, got {tau}"
        )));
    }
    let l = laplacian(g);
    let mut rows = Vec::with_capacity(g.n_nodes());
    for i in 0..g.n_nodes() {
        let row: Vec<(usize, f64)> = l
            .row(i)
            .map(|(j, v)| (j, if i == j { 1.0 - tau * v } else { -(tau * v) }))
            .collect();
        if row.iter().any(|&(_, v)| v < 0.0) {
            return Err(Error::TauTooLarge { tau, max });
        }
        rows.push(row);
    }
    Ok(TransitionMatrix {
        csr: Csr::from_rows(rows),
        tau: Some(tau),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> Graph {
        Graph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap()
    }

    fn triangle() -> Graph {
        Graph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap()
    }

    #[test]
    fn loads_path() {
        let g = parse_edge_list("0 1\n1 2", LoadOptions::default()).unwrap();
        assert_eq!(g.n_nodes(), 3);
        assert_eq!(g.n_edges(), 2);
        assert_eq!(g.degrees(), &[1.0, 2.0, 1.0]);
    }

    #[test]
    fn duplicate_edges_merge() {
        let g = parse_edge_list("0 1 2.0\n0 1 1.0", LoadOptions::default()).unwrap();
        assert_eq!(g.n_edges(), 1);
        assert_eq!(g.edges()[0].w, 3.0);
        let g = parse_edge_list("0 1 2.0\n1 0 1.0", LoadOptions::default()).unwrap();
        assert_eq!(g.edges()[0].w, 3.0);
    }

    #[test]
    fn comments_and_names() {
        let text = "# header\nalice bob 2 # trailing\n\nbob carol\n";
        let g = parse_edge_list(text, LoadOptions::default()).unwrap();
        assert_eq!(g.names(), &["alice", "bob", "carol"]);
        assert_eq!(g.index_of("carol"), Some(2));
        assert_eq!(g.degree(1), 3.0);
    }

    #[test]
    fn rejects_bad_input() {
        let opts = LoadOptions::default();
        assert!(matches!(
            parse_edge_list("0 1 0", opts),
            Err(Error::NonPositiveWeight { .. })
        ));
        assert!(matches!(
            parse_edge_list("0 1 -2", opts),
            Err(Error::NonPositiveWeight { .. })
        ));
        assert!(matches!(
            parse_edge_list("0 0", opts),
            Err(Error::SelfLoop(_))
        ));
        assert!(matches!(
            parse_edge_list("0 1 x", opts),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_edge_list("0 1\n0", opts),
            Err(Error::Parse { line: 2, .. })
        ));
        match parse_edge_list("0 1\n2 3\n3 4", opts) {
            Err(Error::Disconnected(sizes)) => assert_eq!(sizes, vec![2, 3]),
            other => panic!("expected disconnected error, got {other:?}"),
        }
        let g = parse_edge_list(
            "0 1\n2 3\n3 4",
            LoadOptions {
                allow_components: true,
            },
        )
        .unwrap();
        assert_eq!(g.component_sizes(), vec![2, 3]);
    }

    #[test]
    fn laplacian_small_graphs() {
        let k2 = Graph::from_edges(2, [(0, 1, 1.0)]).unwrap();
        assert_eq!(
            laplacian(&k2).to_dense(),
            DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0])
        );
        let l = laplacian(&triangle()).to_dense();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(l[(i, j)], if i == j { 2.0 } else { -1.0 });
            }
        }
    }

    #[test]
    fn normalized_laplacian_values() {
        let k2 = Graph::from_edges(2, [(0, 1, 1.0)]).unwrap();
        assert_eq!(
            normalized_laplacian(&k2).unwrap().to_dense(),
            DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0])
        );
        let nl = normalized_laplacian(&triangle()).unwrap();
        assert_eq!(nl.get(0, 0), 1.0);
        assert!((nl.get(0, 1) + 0.5).abs() < 1e-15);
        let star = Graph::from_edges(4, [(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)]).unwrap();
        let nl = normalized_laplacian(&star).unwrap();
        assert!((nl.get(0, 2) + 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!(nl.is_symmetric());

        let iso = Graph::from_edges_allow_components(3, [(0, 1, 1.0)]).unwrap();
        assert!(matches!(
            normalized_laplacian(&iso),
            Err(Error::IsolatedNode(2))
        ));
    }

    #[test]
    fn transitions() {
        let p = standard_transition(&triangle()).unwrap();
        assert_eq!(p.get(0, 1), 0.5);
        assert_eq!(p.get(0, 0), 0.0);
        let p = standard_transition(&path3()).unwrap();
        assert_eq!(
            (0..3).map(|j| p.get(1, j)).collect::<Vec<_>>(),
            vec![0.5, 0.0, 0.5]
        );

        let k2 = Graph::from_edges(2, [(0, 1, 1.0)]).unwrap();
        let ph = lazy_transition(&k2, 0.5).unwrap();
        assert_eq!(ph.to_dense(), DMatrix::from_element(2, 2, 0.5));
        assert_eq!(ph.tau(), Some(0.5));

        let ph = lazy_transition(&path3(), 0.25).unwrap();
        assert_eq!(
            (0..3).map(|j| ph.get(1, j)).collect::<Vec<_>>(),
            vec![0.25, 0.5, 0.25]
        );

        let ph = lazy_transition(&path3(), 0.5).unwrap();
        assert_eq!(ph.get(1, 1), 0.0);

        match lazy_transition(&path3(), 0.6) {
            Err(Error::TauTooLarge { max, .. }) => assert_eq!(max, 0.5),
            other => panic!("expected TauTooLarge, got {other:?}"),
        }
    }

    #[test]
    fn identity_plus_scaled_matches_dense() {
        let l = laplacian(&path3());
        let m = l.identity_plus_scaled(2.0).to_dense();
        let expected = DMatrix::identity(3, 3) + l.to_dense() * 2.0;
        assert_eq!(m, expected);
    }

    #[test]
    fn round_trip_keeps_ids() {
        let text = "a b\nc d\nb c 2.5\nd a\n";
        let g = parse_edge_list(text, LoadOptions::default()).unwrap();
        let mut buf = Vec::new();
        write_edge_list(&g, &mut buf).unwrap();
        let g2 =
            parse_edge_list(std::str::from_utf8(&buf).unwrap(), LoadOptions::default()).unwrap();
        assert_eq!(g, g2);
    }
}
