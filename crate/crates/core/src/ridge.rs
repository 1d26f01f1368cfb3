//! Paired comparisons with `E(r_ij) = v_i - v_j` and their ridge estimate
//! `(lambda I + X^T X)^{-1} X^T r`, which is the regularized Laplacian
//! kernel with `beta = 1 / lambda` applied to `beta X^T r`.

use std::collections::HashMap;
use std::io::BufRead;

use log::warn;
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::kernels::regularized_laplacian_apply;
use crate::solvers::SolverSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub i: usize,
    pub j: usize,
    /// Observed result, modelled as `v_i - v_j` plus noise.
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonSet {
    n_items: usize,
    records: Vec<Comparison>,
    names: Vec<String>,
}

impl ComparisonSet {
    /// Items are named by their index.
    pub fn new(n_items: usize, records: Vec<Comparison>) -> Result<Self> {
        let names = (0..n_items).map(|i| i.to_string()).collect();
        Self::with_names(names, records)
    }

    pub fn with_names(names: Vec<String>, records: Vec<Comparison>) -> Result<Self> {
        let n_items = names.len();
        if records.is_empty() {
            return Err(Error::InvalidParameter("no comparisons".into()));
        }
        for c in &records {
            if c.i >= n_items || c.j >= n_items {
                return Err(Error::InvalidParameter(format!(
                    "comparison ({}, {}) out of range for {n_items} items",
                    c.i, c.j
                )));
            }
            if c.i == c.j {
                return Err(Error::InvalidParameter(format!(
                    "item {} compared with itself",
                    c.i
                )));
            }
            if !c.r.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "non-finite result on ({}, {})",
                    c.i, c.j
                )));
            }
        }
        Ok(ComparisonSet {
            n_items,
            records,
            names,
        })
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn records(&self) -> &[Comparison] {
        &self.records
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Same comparisons with every result negated.
    pub fn negated(&self) -> Self {
        ComparisonSet {
            n_items: self.n_items,
            records: self
                .records
                .iter()
                .map(|c| Comparison { r: -c.r, ..*c })
                .collect(),
            names: self.names.clone(),
        }
    }
}

/// Reads `i j r` lines. Items are arbitrary tokens numbered in order of
/// first appearance; `#` starts a comment.
pub fn load_comparisons<R: BufRead>(reader: R) -> Result<ComparisonSet> {
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut names = Vec::new();
    let mut records = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let content = line.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        if tokens.len() != 3 {
            return Err(Error::Parse {
                line: lineno + 1,
                msg: format!("expected `i j r`, found {} fields", tokens.len()),
            });
        }
        let mut id = |name: &str| {
            *ids.entry(name.to_string()).or_insert_with(|| {
                names.push(name.to_string());
                names.len() - 1
            })
        };
        let i = id(tokens[0]);
        let j = id(tokens[1]);
        let r: f64 = tokens[2].parse().map_err(|e| Error::Parse {
            line: lineno + 1,
            msg: format!("bad result {:?}: {e}", tokens[2]),
        })?;
        if i == j {
            return Err(Error::Parse {
                line: lineno + 1,
                msg: format!("item {} compared with itself", tokens[0]),
            });
        }
        records.push(Comparison { i, j, r });
    }
    ComparisonSet::with_names(names, records)
}

/// M x N matrix with `x_ki = 1`, `x_kj = -1` for the k-th comparison `(i, j)`.
pub fn incidence_matrix(c: &ComparisonSet) -> DMatrix<f64> {
    let mut x = DMatrix::zeros(c.records.len(), c.n_items);
    for (k, rec) in c.records.iter().enumerate() {
        x[(k, rec.i)] = 1.0;
        x[(k, rec.j)] = -1.0;
    }
    x
}

/// `s = X^T r`: for each item, results won minus results conceded.
pub fn comparison_sums(c: &ComparisonSet) -> Vec<f64> {
    let mut s = vec![0.0; c.n_items];
    for rec in &c.records {
        s[rec.i] += rec.r;
        s[rec.j] -= rec.r;
    }
    s
}

/// Graph whose edge weights count comparisons, so that its Laplacian is
/// `X^T X`. Isolated items are allowed.
pub fn comparison_graph(c: &ComparisonSet) -> Result<Graph> {
    Graph::from_edges_allow_components(c.n_items, c.records.iter().map(|rec| (rec.i, rec.j, 1.0)))
}

/// `(lambda I + X^T X)^{-1} X^T r`, computed as `(I + beta L)^{-1} beta s`
/// with `beta = 1 / lambda`.
pub fn ridge_estimate(c: &ComparisonSet, lambda: f64) -> Result<Vec<f64>> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    let g = comparison_graph(c)?;
    if !g.is_connected() {
        warn!(
            "comparison graph has components of sizes {:?}; values are only comparable within a component",
            g.component_sizes()
        );
    }
    let beta = 1.0 / lambda;
    let s = comparison_sums(c);
    let rhs = DMatrix::from_iterator(s.len(), 1, s.iter().map(|v| beta * v));
    let f = regularized_laplacian_apply(&g, beta, &rhs, &SolverSpec::auto(g.n_nodes()))?;
    Ok(f.as_matrix().column(0).iter().copied().collect())
}

/// Ridge parameter of the Bayesian model with prior variance `sigma1_sq` on
/// item values and noise variance `sigma2_sq`: `beta = sigma1_sq / sigma2_sq`.
pub fn bayes_beta(sigma1_sq: f64, sigma2_sq: f64) -> Result<f64> {
    if !(sigma1_sq > 0.0 && sigma2_sq > 0.0 && sigma1_sq.is_finite() && sigma2_sq.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "variances must be positive, got {sigma1_sq} and {sigma2_sq}"
        )));
    }
    Ok(sigma1_sq / sigma2_sq)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cmp(i: usize, j: usize, r: f64) -> Comparison {
        Comparison { i, j, r }
    }

    #[test]
    fn incidence_gram_is_laplacian() {
        let c = ComparisonSet::new(2, vec![cmp(0, 1, 1.0)]).unwrap();
        let x = incidence_matrix(&c);
        assert_eq!(x, DMatrix::from_row_slice(1, 2, &[1.0, -1.0]));
        let c = ComparisonSet::new(2, vec![cmp(0, 1, 1.0), cmp(0, 1, 0.5)]).unwrap();
        let x = incidence_matrix(&c);
        assert_eq!(
            x.transpose() * &x,
            DMatrix::from_row_slice(2, 2, &[2.0, -2.0, -2.0, 2.0])
        );
        let c =
            ComparisonSet::new(3, vec![cmp(0, 1, 1.0), cmp(1, 2, 1.0), cmp(0, 2, 1.0)]).unwrap();
        let x = incidence_matrix(&c);
        let gram = x.transpose() * &x;
        let l = crate::graph::laplacian(&comparison_graph(&c).unwrap()).to_dense();
        assert_eq!(gram, l);
    }

    #[test]
    fn two_items_closed_form() {
        let c = ComparisonSet::new(2, vec![cmp(0, 1, 1.0)]).unwrap();
        let v = ridge_estimate(&c, 1.0).unwrap();
        assert!((v[0] - 1.0 / 3.0).abs() < 1e-14);
        assert!((v[1] + 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn zero_results_and_large_lambda() {
        let c = ComparisonSet::new(3, vec![cmp(0, 1, 0.0), cmp(1, 2, 0.0)]).unwrap();
        assert!(ridge_estimate(&c, 0.3).unwrap().iter().all(|&v| v == 0.0));

        let c =
            ComparisonSet::new(3, vec![cmp(0, 1, 2.0), cmp(1, 2, -1.0), cmp(2, 0, 0.5)]).unwrap();
        let lambda = 1e8;
        let v = ridge_estimate(&c, lambda).unwrap();
        for (vi, si) in v.iter().zip(comparison_sums(&c)) {
            let approx = si / lambda;
            assert!(((vi - approx) / approx).abs() < 1e-6);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ComparisonSet::new(2, vec![cmp(1, 1, 1.0)]).is_err());
        assert!(ComparisonSet::new(2, vec![]).is_err());
        let c = ComparisonSet::new(2, vec![cmp(0, 1, 1.0)]).unwrap();
        assert!(ridge_estimate(&c, 0.0).is_err());
        assert!(ridge_estimate(&c, -1.0).is_err());
    }

    #[test]
    fn disconnected_items_estimated_per_component() {
        let c = ComparisonSet::new(5, vec![cmp(0, 1, 1.0), cmp(2, 3, 2.0)]).unwrap();
        let v = ridge_estimate(&c, 1.0).unwrap();
        assert!((v[0] - 1.0 / 3.0).abs() < 1e-14);
        assert!((v[2] - 2.0 / 3.0).abs() < 1e-14);
        assert_eq!(v[4], 0.0);
    }

    #[test]
    fn bayes_beta_ratio() {
        assert_eq!(bayes_beta(1.0, 1.0).unwrap(), 1.0);
        assert_eq!(bayes_beta(4.0, 2.0).unwrap(), 2.0);
        assert_eq!(bayes_beta(100.0, 1.0).unwrap(), 100.0);
        assert!(bayes_beta(0.0, 1.0).is_err());
    }

    #[test]
    fn load_named_items() {
        let text = "# league\nlions tigers 3\ntigers bears -1.5\n";
        let c = load_comparisons(text.as_bytes()).unwrap();
        assert_eq!(c.names(), ["lions", "tigers", "bears"]);
        assert_eq!(c.records()[1], cmp(1, 2, -1.5));
        assert!(load_comparisons("a a 1\n".as_bytes()).is_err());
        assert!(load_comparisons("a b\n".as_bytes()).is_err());
    }
}
