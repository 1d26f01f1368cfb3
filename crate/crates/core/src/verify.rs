//! Property checks comparing independent computations of the same quantity.
//!
//! Every check returns a [`Check`] holding the worst observed deviation and
//! the tolerance it was held to, so callers can print a report or assert.

use std::fmt;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::forest::enumerate_rooted_forests;
use crate::generators::{all_connected_graphs, all_weightings, random_connected_graph, Weights};
use crate::graph::{laplacian, lazy_transition, standard_transition, Graph};
use crate::kernels::regularized_system;
use crate::kernels::{
    generalized_ssl_apply, heat_kernel_apply, kernel_matrix, regularized_laplacian_apply, HeatKind,
    WeightChoice,
};
use crate::proximity::{
    adjusted_forest_distance, check_proximity_axioms, check_transitional_measure, group_inverse,
    hub_augmented_graph, log_forest_distance, resistance_distance, shortest_paths,
    MAX_PATH_ENUMERATION_NODES,
};
use crate::ridge::{comparison_sums, incidence_matrix, ridge_estimate, Comparison, ComparisonSet};
use crate::solvers::{cg_solve, cholesky_solve, power_iteration_solve, SolverKind, SolverSpec};
use crate::walk::{equivalent_beta, monte_carlo_geometric_walk, total_variation};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub observed: f64,
    /// Bound the observed value was compared with.
    pub bound: f64,
    pub detail: String,
}

impl Check {
    /// Passes when `observed <= bound`.
    fn at_most(name: &str, observed: f64, bound: f64, detail: String) -> Check {
        Check {
            name: name.to_string(),
            passed: observed <= bound,
            observed,
            bound,
            detail,
        }
    }

    /// Passes when `observed > bound`.
    fn above(name: &str, observed: f64, bound: f64, detail: String) -> Check {
        Check {
            name: name.to_string(),
            passed: observed > bound,
            observed,
            bound,
            detail,
        }
    }

    fn failed(name: &str, err: impl fmt::Display) -> Check {
        Check {
            name: name.to_string(),
            passed: false,
            observed: f64::NAN,
            bound: f64::NAN,
            detail: format!("error: {err}"),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<32} observed {:<12.3e} bound {:<10.1e} {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.observed,
            self.bound,
            self.detail
        )
    }
}

fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax()
}

/// Random connected graphs with node counts drawn from `2..=max_n`.
pub fn random_graphs(count: usize, max_n: usize, seed: u64) -> Result<Vec<Graph>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.random_range(2..=max_n.max(2));
            let p = rng.random_range(0.0..0.4);
            random_connected_graph(n, p, Weights::Uniform { lo: 0.2, hi: 3.0 }, rng.random())
        })
        .collect()
}

/// Forest census against the dense kernel on every connected graph with
/// `n <= max_n` nodes and edge weights from `weights`.
pub fn forest_oracle(max_n: usize, weights: &[f64], betas: &[f64], tol: f64) -> Check {
    let name = "forest census = kernel";
    let mut graphs = Vec::new();
    for n in 2..=max_n {
        match all_connected_graphs(n) {
            Ok(gs) => graphs.extend(gs.iter().flat_map(|g| all_weightings(g, weights))),
            Err(e) => return Check::failed(name, e),
        }
    }
    let worst: Result<f64> = graphs
        .par_iter()
        .map(|g| {
            let mut worst = 0.0f64;
            for &beta in betas {
                let census = enumerate_rooted_forests(g, beta)?;
                let row_gap = (0..g.n_nodes())
                    .map(|i| {
                        let row: f64 = census.rooted_weights().row(i).sum();
                        (row - census.total_weight()).abs() / census.total_weight()
                    })
                    .fold(0.0, f64::max);
                worst = worst
                    .max(max_abs_diff(&census.kernel(), &kernel_matrix(g, beta)?))
                    .max(row_gap);
            }
            Ok(worst)
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)));
    match worst {
        Ok(w) => Check::at_most(
            name,
            w,
            tol,
            format!(
                "{} weighted graphs, n <= {max_n}, {} betas",
                graphs.len(),
                betas.len()
            ),
        ),
        Err(e) => Check::failed(name, e),
    }
}

/// Worst values of the proximity axioms over a set of graphs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxiomSummary {
    pub row_sum_error: f64,
    pub triangle_excess: f64,
    pub strict_margin: f64,
    pub egocentric_gap: f64,
    pub transitional_excess: f64,
    pub cutpoint_graphs: usize,
    pub cutpoint_equality_deviation: f64,
    pub non_cutpoint_gap: f64,
}

pub fn proximity_axiom_summary(graphs: &[Graph], betas: &[f64]) -> Result<AxiomSummary> {
    let mut s = AxiomSummary {
        row_sum_error: 0.0,
        triangle_excess: f64::NEG_INFINITY,
        strict_margin: f64::INFINITY,
        egocentric_gap: f64::INFINITY,
        transitional_excess: f64::NEG_INFINITY,
        cutpoint_graphs: 0,
        cutpoint_equality_deviation: 0.0,
        non_cutpoint_gap: f64::INFINITY,
    };
    for g in graphs {
        for &beta in betas {
            let q = kernel_matrix(g, beta)?;
            let r = check_proximity_axioms(&q);
            s.row_sum_error = s.row_sum_error.max(r.max_row_sum_error);
            s.triangle_excess = s.triangle_excess.max(r.max_triangle_excess);
            s.strict_margin = s.strict_margin.min(r.min_strict_margin);
            s.egocentric_gap = s.egocentric_gap.min(r.min_egocentric_gap);
            let t = check_transitional_measure(&q, g)?;
            s.transitional_excess = s.transitional_excess.max(t.max_excess);
            if let Some(c) = t.cutpoints {
                s.cutpoint_graphs += 1;
                s.cutpoint_equality_deviation = s
                    .cutpoint_equality_deviation
                    .max(c.max_relative_equality_deviation);
                s.non_cutpoint_gap = s.non_cutpoint_gap.min(c.min_relative_gap);
            }
        }
    }
    Ok(s)
}

pub fn proximity_axioms(graphs: &[Graph], betas: &[f64]) -> Vec<Check> {
    let s = match proximity_axiom_summary(graphs, betas) {
        Ok(s) => s,
        Err(e) => return vec![Check::failed("proximity axioms", e)],
    };
    let detail = format!("{} graphs x {} betas", graphs.len(), betas.len());
    vec![
        Check::at_most(
            "kernel rows sum to 1",
            s.row_sum_error,
            1e-10,
            detail.clone(),
        ),
        Check::at_most(
            "proximity triangle inequality",
            s.triangle_excess,
            1e-12,
            detail.clone(),
        ),
        Check::above(
            "proximity triangle strict (i=k)",
            s.strict_margin,
            0.0,
            detail.clone(),
        ),
        Check::above("egocentrism", s.egocentric_gap, 0.0, detail.clone()),
        Check::at_most(
            "transitional inequality",
            s.transitional_excess,
            1e-12,
            detail,
        ),
        Check::at_most(
            "transitional equality on cutpoints",
            s.cutpoint_equality_deviation,
            1e-10,
            format!(
                "relative, {} graph/beta pairs with n <= {MAX_PATH_ENUMERATION_NODES}",
                s.cutpoint_graphs
            ),
        ),
        Check::above(
            "transitional strict off cutpoints",
            s.non_cutpoint_gap,
            1e-10,
            "relative gap".into(),
        ),
    ]
}

/// Generalized method with `W = I - tau L` against the regularized
/// Laplacian with `beta = 2 tau / mu`.
pub fn sigma_collapse(graphs: &[Graph], sigmas: &[f64], mus: &[f64], tol: f64) -> Check {
    let name = "sigma collapse to RL";
    let mut worst = 0.0f64;
    for (gi, g) in graphs.iter().enumerate() {
        let tau = 1.0 / g.max_degree() * if gi % 2 == 0 { 1.0 } else { 0.5 };
        let k = 3.min(g.n_nodes());
        let y = DMatrix::from_fn(g.n_nodes(), k, |i, c| if i % k == c { 1.0 } else { 0.0 });
        for &mu in mus {
            let beta = 2.0 * tau / mu;
            let rl = match regularized_laplacian_apply(
                g,
                beta,
                &y,
                &SolverSpec::new(SolverKind::DenseCholesky),
            ) {
                Ok(f) => f,
                Err(e) => return Check::failed(name, e),
            };
            for &sigma in sigmas {
                match generalized_ssl_apply(g, sigma, mu, WeightChoice::Lazy { tau }, &y) {
                    Ok(f) => worst = worst.max(max_abs_diff(f.as_matrix(), rl.as_matrix())),
                    Err(e) => return Check::failed(name, e),
                }
            }
        }
    }
    Check::at_most(
        name,
        worst,
        tol,
        format!(
            "{} graphs, {} sigmas, {} mus",
            graphs.len(),
            sigmas.len(),
            mus.len()
        ),
    )
}

/// Results of the three linear solvers on one right-hand side.
#[derive(Debug, Clone)]
pub struct SolverComparison {
    pub beta: f64,
    pub max_deviation: f64,
    pub power_converged: bool,
    pub power_iterations: usize,
    pub cg_iterations: usize,
}

pub fn compare_solvers(
    g: &Graph,
    beta: f64,
    rhs: &DMatrix<f64>,
    tol: f64,
) -> Result<SolverComparison> {
    let spec = SolverSpec::default()
        .with_tolerance(tol)
        .with_max_iterations(100_000);
    let (pi, pi_report) = power_iteration_solve(g, beta, rhs, &spec)?;
    let op = regularized_system(g, beta);
    let (cg, cg_report) = cg_solve(&op, rhs, &spec)?;
    let ch = cholesky_solve(&op.to_dense(), rhs)?;
    let dev = max_abs_diff(pi.as_matrix(), ch.as_matrix())
        .max(max_abs_diff(cg.as_matrix(), ch.as_matrix()));
    Ok(SolverComparison {
        beta,
        max_deviation: dev,
        power_converged: pi_report.converged,
        power_iterations: pi_report.iterations,
        cg_iterations: cg_report.iterations,
    })
}

pub fn cross_solver(graphs: &[Graph], betas: &[f64], tol: f64) -> Check {
    let name = "power = CG = Cholesky";
    let mut worst = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for g in graphs {
        let y = DMatrix::from_fn(
            g.n_nodes(),
            2,
            |_, _| if rng.random_bool(0.3) { 1.0 } else { 0.0 },
        );
        for &beta in betas {
            match compare_solvers(g, beta, &y, 1e-12) {
                Ok(c) => worst = worst.max(c.max_deviation),
                Err(e) => return Check::failed(name, e),
            }
        }
    }
    Check::at_most(
        name,
        worst,
        tol,
        format!("{} graphs, {} betas", graphs.len(), betas.len()),
    )
}

/// `|Q_beta - J/N - H/beta|` at `beta` and `2 beta`, and their ratio.
pub fn blackwell_errors(g: &Graph, beta: f64) -> Result<(f64, f64, f64)> {
    let n = g.n_nodes();
    let h = group_inverse(&laplacian(g).to_dense())?;
    let j = DMatrix::from_element(n, n, 1.0 / n as f64);
    let err = |b: f64| -> Result<f64> {
        let q = kernel_matrix(g, b)?;
        Ok((q - &j - &h / b).norm())
    };
    let (e1, e2) = (err(beta)?, err(2.0 * beta)?);
    Ok((e1, e2, e1 / e2))
}

pub fn blackwell(graphs: &[Graph], betas: &[f64]) -> Check {
    let name = "Blackwell second-order ratio";
    let mut worst = 0.0f64;
    for g in graphs {
        for &beta in betas {
            match blackwell_errors(g, beta) {
                Ok((_, _, ratio)) => worst = worst.max((ratio - 4.0).abs()),
                Err(e) => return Check::failed(name, e),
            }
        }
    }
    Check::at_most(name, worst, 1.0, "|ratio - 4|".into())
}

pub fn forest_distance_limit(graphs: &[Graph], beta: f64, tol: f64) -> Check {
    let name = "rho -> resistance";
    let mut worst = 0.0f64;
    for g in graphs {
        let rho = kernel_matrix(g, beta).and_then(|q| adjusted_forest_distance(&q, beta));
        match (rho, resistance_distance(g)) {
            (Ok(rho), Ok(r)) => worst = worst.max(max_abs_diff(rho.as_matrix(), r.as_matrix())),
            (Err(e), _) | (_, Err(e)) => return Check::failed(name, e),
        }
    }
    Check::at_most(name, worst, tol, format!("beta = {beta:e}"))
}

pub fn hub_identity(graphs: &[Graph], betas: &[f64], tol: f64) -> Check {
    let name = "hub graph identity";
    let mut worst = 0.0f64;
    for g in graphs {
        for &beta in betas {
            let n = g.n_nodes();
            let run = || -> Result<f64> {
                let rho = adjusted_forest_distance(&kernel_matrix(g, beta)?, beta)?;
                let r = resistance_distance(&hub_augmented_graph(g, beta)?)?;
                Ok(max_abs_diff(
                    rho.as_matrix(),
                    &r.as_matrix().view((0, 0), (n, n)).into_owned(),
                ))
            };
            match run() {
                Ok(d) => worst = worst.max(d),
                Err(e) => return Check::failed(name, e),
            }
        }
    }
    Check::at_most(name, worst, tol, format!("{} graphs", graphs.len()))
}

/// Largest relative error of `d_ij / d_ref` against `target_ij / target_ref`
/// over all pairs, with the reference pair `(0, 1)`.
pub fn ratio_error(d: &DMatrix<f64>, target: &DMatrix<f64>) -> f64 {
    let n = d.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let got = d[(i, j)] / d[(0, 1)];
            let want = target[(i, j)] / target[(0, 1)];
            worst = worst.max((got / want - 1.0).abs());
        }
    }
    worst
}

/// Log forest distance against shortest-path (small beta) and resistance
/// (large beta) distance, as relative error of distance ratios.
pub fn log_distance_asymptotics(g: &Graph, small_beta: f64, large_beta: f64) -> Result<(f64, f64)> {
    let sp = shortest_paths(g, |_| 1.0);
    let r = resistance_distance(g)?;
    let d_small = log_forest_distance(&kernel_matrix(g, small_beta)?)?;
    let d_large = log_forest_distance(&kernel_matrix(g, large_beta)?)?;
    Ok((
        ratio_error(d_small.as_matrix(), &sp),
        ratio_error(d_large.as_matrix(), r.as_matrix()),
    ))
}

/// Triangle `0-1-2` with pendant `3` on node `2`: shortest paths are unique
/// and the shortest-path and resistance distances are not proportional.
pub fn triangle_with_pendant() -> Graph {
    Graph::from_edges(4, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (2, 3, 1.0)]).expect("valid graph")
}

pub fn log_distance_limits(tol: f64) -> Vec<Check> {
    match log_distance_asymptotics(&triangle_with_pendant(), 1e-4, 1e4) {
        Ok((small, large)) => vec![
            Check::at_most(
                "log distance ~ shortest path",
                small,
                tol,
                "beta = 1e-4".into(),
            ),
            Check::at_most("log distance ~ resistance", large, tol, "beta = 1e4".into()),
        ],
        Err(e) => vec![Check::failed("log distance limits", e)],
    }
}

/// Total variation between the walk's empirical end distribution and the
/// kernel row, with the bound `4 sqrt(N / n_samples)`.
pub fn monte_carlo(graphs: &[Graph], n_samples: usize, seed: u64) -> Check {
    let name = "geometric walk -> kernel row";
    let mut worst_ratio = 0.0f64;
    let mut worst_tv = 0.0f64;
    for (k, g) in graphs.iter().enumerate() {
        let tau = 1.0 / g.max_degree();
        let q = 0.4;
        let beta = equivalent_beta(tau, q);
        let start = k % g.n_nodes();
        let run = || -> Result<f64> {
            let dist = monte_carlo_geometric_walk(g, tau, q, start, n_samples, seed + k as u64)?;
            let row: Vec<f64> = kernel_matrix(g, beta)?.row(start).iter().copied().collect();
            Ok(total_variation(&dist, &row))
        };
        match run() {
            Ok(tv) => {
                let bound = 4.0 * (g.n_nodes() as f64 / n_samples as f64).sqrt();
                worst_ratio = worst_ratio.max(tv / bound);
                worst_tv = worst_tv.max(tv);
            }
            Err(e) => return Check::failed(name, e),
        }
    }
    Check::at_most(
        name,
        worst_ratio,
        1.0,
        format!("TV / bound; worst TV {worst_tv:.2e}, {n_samples} samples"),
    )
}

/// Random comparison set with at most `max_items` items and
/// `max_comparisons` records.
pub fn random_comparisons(
    max_items: usize,
    max_comparisons: usize,
    rng: &mut ChaCha8Rng,
) -> ComparisonSet {
    let n = rng.random_range(2..=max_items.max(2));
    let m = rng.random_range(1..=max_comparisons.max(1));
    let truth: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
    let records = (0..m)
        .map(|_| {
            let i = rng.random_range(0..n);
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            let noise: f64 = rng.random_range(-0.5..0.5);
            Comparison {
                i,
                j,
                r: truth[i] - truth[j] + noise,
            }
        })
        .collect();
    ComparisonSet::new(n, records).expect("valid comparisons")
}

/// Ridge estimate through the kernel against the normal equations
/// `(lambda I + X^T X) v = X^T r` built from the incidence matrix.
pub fn ridge_equivalence(
    n_sets: usize,
    max_items: usize,
    max_comparisons: usize,
    seed: u64,
    tol: f64,
) -> Check {
    let name = "ridge = RL on comparison graph";
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..n_sets {
        let c = random_comparisons(max_items, max_comparisons, &mut rng);
        let lambda = 10f64.powf(rng.random_range(-2.0..2.0));
        let x = incidence_matrix(&c);
        let r = DMatrix::from_iterator(c.records().len(), 1, c.records().iter().map(|rec| rec.r));
        let lhs = DMatrix::identity(c.n_items(), c.n_items()) * lambda + x.transpose() * &x;
        let rhs = x.transpose() * r;
        let s = comparison_sums(&c);
        let direct = match lhs.lu().solve(&rhs) {
            Some(v) => v,
            None => return Check::failed(name, "normal equations singular"),
        };
        match ridge_estimate(&c, lambda) {
            Ok(v) => {
                for i in 0..c.n_items() {
                    worst = worst
                        .max((v[i] - direct[i]).abs())
                        .max((rhs[i] - s[i]).abs());
                }
            }
            Err(e) => return Check::failed(name, e),
        }
    }
    Check::at_most(name, worst, tol, format!("{n_sets} comparison sets"))
}

/// Operator identities: `L 1 = 0`, stochastic rows, `P_hat = I - tau L`.
pub fn operator_identities(graphs: &[Graph]) -> Check {
    let name = "Laplacian and transition identities";
    let mut worst = 0.0f64;
    for g in graphs {
        let l = laplacian(g);
        let ones = vec![1.0; g.n_nodes()];
        worst = worst.max(l.mul_vec(&ones).iter().fold(0.0, |a, v| a.max(v.abs())));
        let tau = 0.5 / g.max_degree();
        match (standard_transition(g), lazy_transition(g, tau)) {
            (Ok(p), Ok(ph)) => {
                for s in p.row_sums().iter().chain(ph.row_sums().iter()) {
                    worst = worst.max((s - 1.0).abs());
                }
                let expect = DMatrix::identity(g.n_nodes(), g.n_nodes()) - l.to_dense() * tau;
                worst = worst.max(max_abs_diff(&ph.to_dense(), &expect));
            }
            (Err(e), _) | (_, Err(e)) => return Check::failed(name, e),
        }
    }
    Check::at_most(name, worst, 1e-12, format!("{} graphs", graphs.len()))
}

/// `H(s + t) Y = H(s) H(t) Y` for every heat kernel.
pub fn heat_semigroup(graphs: &[Graph]) -> Check {
    let name = "heat kernel semigroup";
    let mut worst = 0.0f64;
    for g in graphs {
        let y = DMatrix::from_fn(g.n_nodes(), 2, |i, c| if i == c { 1.0 } else { 0.0 });
        for kind in [HeatKind::Standard, HeatKind::Normalized, HeatKind::PageRank] {
            let run = || -> Result<f64> {
                let whole = heat_kernel_apply(g, kind, 1.5, &y, 1e-14)?;
                let half = heat_kernel_apply(g, kind, 0.5, &y, 1e-14)?;
                let twice = heat_kernel_apply(g, kind, 1.0, half.as_matrix(), 1e-14)?;
                Ok(max_abs_diff(whole.as_matrix(), twice.as_matrix()))
            };
            match run() {
                Ok(d) => worst = worst.max(d),
                Err(e) => return Check::failed(name, e),
            }
        }
    }
    Check::at_most(name, worst, 1e-8, format!("{} graphs", graphs.len()))
}

fn k2() -> Graph {
    Graph::from_edges(2, [(0, 1, 1.0)]).expect("valid graph")
}

fn path3() -> Graph {
    Graph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)]).expect("valid graph")
}

fn triangle() -> Graph {
    Graph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).expect("valid graph")
}

/// The property suite at a size suitable for interactive use. Random graphs
/// have at most `max_nodes` nodes.
pub fn property_suite(max_nodes: usize, seed: u64) -> Vec<Check> {
    let max_nodes = max_nodes.max(2);
    let small = match random_graphs(10, max_nodes.min(10), seed) {
        Ok(g) => g,
        Err(e) => return vec![Check::failed("random graphs", e)],
    };
    let medium = match random_graphs(10, max_nodes, seed + 1) {
        Ok(g) => g,
        Err(e) => return vec![Check::failed("random graphs", e)],
    };
    let mut out = vec![
        operator_identities(&medium),
        forest_oracle(max_nodes.min(4), &[1.0, 2.0], &[0.5, 1.0, 2.0], 1e-12),
    ];
    out.extend(proximity_axioms(&medium, &[0.1, 1.0, 10.0]));
    out.push(sigma_collapse(
        &medium,
        &[-0.5, 0.0, 0.5, 1.0, 2.0],
        &[0.5, 2.0],
        1e-10,
    ));
    out.push(cross_solver(&medium, &[0.1, 1.0, 10.0], 1e-6));
    out.push(heat_semigroup(&small));
    out.push(blackwell(&small, &[100.0]));
    out.push(forest_distance_limit(
        &[k2(), path3(), triangle()],
        1e4,
        1e-3,
    ));
    out.push(hub_identity(&small, &[0.3, 1.0, 5.0], 1e-9));
    out.extend(log_distance_limits(0.02));
    out.push(monte_carlo(&small[..3], 100_000, seed));
    out.push(ridge_equivalence(
        10,
        20.min(max_nodes.max(2)),
        100,
        seed,
        1e-10,
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes() {
        for check in property_suite(6, 1) {
            assert!(check.passed, "{check}");
        }
    }

    #[test]
    fn check_display() {
        let c = Check::at_most("x", 2.0, 1.0, "d".into());
        assert!(!c.passed);
        assert!(c.to_string().starts_with("FAIL x"));
    }
}
