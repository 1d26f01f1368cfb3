//! Every classification method as "apply a kernel to the seed matrix".
//!
//! * Regularized Laplacian: `F = (I + beta L)^{-1} Y`.
//! * Heat kernels: `exp(-t L) Y`, `exp(-t D^{-1/2} L D^{-1/2}) Y` and
//!   `exp(-t (I - D^{-1} A)) Y`.
//! * Generalized family: `F = mu/(2+mu) (I - 2/(2+mu) D'^{-sigma} W D'^{sigma-1})^{-1} Y`
//!   with `W = A` or the lazy walk `W = I - tau L`. With `sigma = 0, W = A`
//!   this is the PageRank-based method.
//!
//! [`PreparedKernel`] does the per-parameter work (factorizations,
//! generators) once so that many seed matrices can share it.

use nalgebra::{DMatrix, Dyn, LU};

use crate::classify::ClassificationMatrix;
use crate::error::{Error, Result};
use crate::graph::{
    laplacian, lazy_transition, normalized_laplacian, standard_transition, Graph, SparseSymMatrix,
};
use crate::solvers::{
    cg_solve, expm_action, power_iteration_core, CholeskyFactor, SolverKind, SolverSpec,
    UniformizedGenerator, DENSE_LIMIT,
};

/// Default Poisson-tail mass dropped by heat-kernel evaluation.
pub const DEFAULT_HEAT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeatKind {
    /// `exp(-t L)`
    Standard,
    /// `exp(-t D^{-1/2} L D^{-1/2})`
    Normalized,
    /// `exp(-t (I - D^{-1} A))`
    PageRank,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightChoice {
    Adjacency,
    Lazy { tau: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelKind {
    RegularizedLaplacian {
        beta: f64,
    },
    Heat {
        kind: HeatKind,
        t: f64,
    },
    Generalized {
        sigma: f64,
        mu: f64,
        weights: WeightChoice,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub solver: SolverSpec,
    pub heat_tol: f64,
}

impl KernelSpec {
    pub fn new(kind: KernelKind, solver: SolverSpec) -> Self {
        KernelSpec {
            kind,
            solver,
            heat_tol: DEFAULT_HEAT_TOL,
        }
    }

    pub fn regularized_laplacian(beta: f64, solver: SolverSpec) -> Self {
        Self::new(KernelKind::RegularizedLaplacian { beta }, solver)
    }

    pub fn heat(kind: HeatKind, t: f64) -> Self {
        Self::new(KernelKind::Heat { kind, t }, SolverSpec::default())
    }

    pub fn generalized(sigma: f64, mu: f64, weights: WeightChoice) -> Self {
        Self::new(
            KernelKind::Generalized { sigma, mu, weights },
            SolverSpec::default(),
        )
    }

    pub fn with_heat_tol(mut self, tol: f64) -> Self {
        self.heat_tol = tol;
        self
    }

    /// Checks parameter ranges against `g`.
    pub fn validate(&self, g: &Graph) -> Result<()> {
        match self.kind {
            KernelKind::RegularizedLaplacian { beta } => {
                positive("beta", beta)?;
                self.solver.validate()
            }
            KernelKind::Heat { t, .. } => {
                if !(t >= 0.0 && t.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "t must be nonnegative, got {t}"
                    )));
                }
                if !(self.heat_tol > 0.0 && self.heat_tol < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "heat tolerance must lie in (0, 1), got {}",
                        self.heat_tol
                    )));
                }
                Ok(())
            }
            KernelKind::Generalized { sigma, mu, weights } => {
                if !sigma.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "sigma must be finite, got {sigma}"
                    )));
                }
                if !(mu > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "mu must be positive, got {mu}"
                    )));
                }
                if let WeightChoice::Lazy { tau } = weights {
                    let max = 1.0 / g.max_degree();
                    if !(tau > 0.0) {
                        return Err(Error::InvalidParameter(format!(
                            "tau must be positive, got {tau}"
                        )));
                    }
                    if tau * g.max_degree() > 1.0 {
                        return Err(Error::TauTooLarge { tau, max });
                    }
                }
                Ok(())
            }
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be positive, got {v}"
        )))
    }
}

/// Sparse `I + beta L`.
pub fn regularized_system(g: &Graph, beta: f64) -> SparseSymMatrix {
    laplacian(g).identity_plus_scaled(beta)
}

/// A kernel with its parameter-dependent setup done, ready to be applied to
/// any number of right-hand sides.
#[derive(Debug, Clone)]
pub struct PreparedKernel {
    n: usize,
    inner: Prepared,
}

#[derive(Debug, Clone)]
enum Prepared {
    Scaled(f64),
    Cholesky(CholeskyFactor),
    Cg {
        op: SparseSymMatrix,
        spec: SolverSpec,
    },
    Power {
        adjacency: SparseSymMatrix,
        degrees: Vec<f64>,
        beta: f64,
        spec: SolverSpec,
    },
    Heat {
        generator: UniformizedGenerator,
        t: f64,
        tol: f64,
    },
    Lu {
        lu: LU<f64, Dyn, Dyn>,
        scale: f64,
    },
}

impl PreparedKernel {
    pub fn new(g: &Graph, spec: &KernelSpec) -> Result<Self> {
        spec.validate(g)?;
        let n = g.n_nodes();
        let inner = match spec.kind {
            KernelKind::RegularizedLaplacian { beta } => match spec.solver.kind {
                SolverKind::DenseCholesky => {
                    guard_dense(n)?;
                    Prepared::Cholesky(CholeskyFactor::new(
                        &regularized_system(g, beta).to_dense(),
                    )?)
                }
                SolverKind::ConjugateGradient => Prepared::Cg {
                    op: regularized_system(g, beta),
                    spec: spec.solver,
                },
                SolverKind::PowerIteration => Prepared::Power {
                    adjacency: g.adjacency(),
                    degrees: g.degrees().to_vec(),
                    beta,
                    spec: spec.solver,
                },
            },
            KernelKind::Heat { t: 0.0, .. } => Prepared::Scaled(1.0),
            KernelKind::Heat { kind, t } => {
                let generator = match kind {
                    HeatKind::Standard => UniformizedGenerator::from_symmetric(&laplacian(g))?,
                    HeatKind::Normalized => {
                        UniformizedGenerator::from_symmetric(&normalized_laplacian(g)?)?
                    }
                    HeatKind::PageRank => {
                        UniformizedGenerator::from_transition(&standard_transition(g)?)
                    }
                };
                Prepared::Heat {
                    generator,
                    t,
                    tol: spec.heat_tol,
                }
            }
            KernelKind::Generalized { mu, .. } if mu.is_infinite() => Prepared::Scaled(1.0),
            KernelKind::Generalized { sigma, mu, weights } => {
                guard_dense(n)?;
                let system = generalized_system(g, sigma, mu, weights)?;
                let lu = system.lu();
                if !lu.is_invertible() {
                    return Err(Error::Singular);
                }
                Prepared::Lu {
                    lu,
                    scale: mu / (2.0 + mu),
                }
            }
        };
        Ok(PreparedKernel { n, inner })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn apply(&self, rhs: &DMatrix<f64>) -> Result<ClassificationMatrix> {
        if rhs.nrows() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: rhs.nrows(),
            });
        }
        let f = match &self.inner {
            Prepared::Scaled(s) => rhs * *s,
            Prepared::Cholesky(factor) => factor.solve(rhs)?,
            Prepared::Cg { op, spec } => {
                let (f, report) = cg_solve(op, rhs, spec)?;
                if !report.converged {
                    log::warn!(
                        "conjugate gradient stopped after {} iterations at residual {:e}",
                        report.iterations,
                        report.final_residual
                    );
                }
                f.into_matrix()
            }
            Prepared::Power {
                adjacency,
                degrees,
                beta,
                spec,
            } => {
                let (f, report) = power_iteration_core(adjacency.csr(), degrees, *beta, rhs, spec);
                if !report.converged {
                    log::warn!(
                        "power iteration stopped after {} iterations at relative change {:e}",
                        report.iterations,
                        report.final_residual
                    );
                }
                f.into_matrix()
            }
            Prepared::Heat { generator, t, tol } => {
                expm_action(generator, *t, rhs, *tol)?.into_matrix()
            }
            Prepared::Lu { lu, scale } => lu.solve(rhs).ok_or(Error::Singular)? * *scale,
        };
        Ok(ClassificationMatrix::new(f))
    }
}

fn guard_dense(n: usize) -> Result<()> {
    if n > DENSE_LIMIT {
        Err(Error::TooLarge {
            n,
            limit: DENSE_LIMIT,
        })
    } else {
        Ok(())
    }
}

/// Dense `I - 2/(2+mu) D'^{-sigma} W D'^{sigma-1}` with `D' = diag(W 1)`.
fn generalized_system(
    g: &Graph,
    sigma: f64,
    mu: f64,
    weights: WeightChoice,
) -> Result<DMatrix<f64>> {
    let n = g.n_nodes();
    let w = match weights {
        WeightChoice::Adjacency => g.dense_adjacency(),
        WeightChoice::Lazy { tau } => lazy_transition(g, tau)?.to_dense(),
    };
    let gen_degree: Vec<f64> = w.row_iter().map(|r| r.sum()).collect();
    if let Some(i) = gen_degree.iter().position(|&d| d <= 0.0) {
        return Err(Error::IsolatedNode(i));
    }
    let left: Vec<f64> = gen_degree.iter().map(|d| d.powf(-sigma)).collect();
    let right: Vec<f64> = gen_degree.iter().map(|d| d.powf(sigma - 1.0)).collect();
    let alpha = 2.0 / (2.0 + mu);
    Ok(DMatrix::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id - alpha * left[i] * w[(i, j)] * right[j]
    }))
}

/// `F = (I + beta L)^{-1} Y`, the unique minimizer of
/// `sum_k |F_k - Y_k|^2 + beta sum_k F_k^T L F_k`.
pub fn regularized_laplacian_apply(
    g: &Graph,
    beta: f64,
    rhs: &DMatrix<f64>,
    solver: &SolverSpec,
) -> Result<ClassificationMatrix> {
    PreparedKernel::new(g, &KernelSpec::regularized_laplacian(beta, *solver))?.apply(rhs)
}

/// `F = H(t) Y` for the chosen heat kernel.
pub fn heat_kernel_apply(
    g: &Graph,
    kind: HeatKind,
    t: f64,
    rhs: &DMatrix<f64>,
    tol: f64,
) -> Result<ClassificationMatrix> {
    PreparedKernel::new(g, &KernelSpec::heat(kind, t).with_heat_tol(tol))?.apply(rhs)
}

/// Generalized semi-supervised family, solved densely.
pub fn generalized_ssl_apply(
    g: &Graph,
    sigma: f64,
    mu: f64,
    weights: WeightChoice,
    rhs: &DMatrix<f64>,
) -> Result<ClassificationMatrix> {
    PreparedKernel::new(g, &KernelSpec::generalized(sigma, mu, weights))?.apply(rhs)
}

/// Dense regularized Laplacian kernel `Q = (I + beta L)^{-1}`.
pub fn kernel_matrix(g: &Graph, beta: f64) -> Result<DMatrix<f64>> {
    positive("beta", beta)?;
    guard_dense(g.n_nodes())?;
    let q = CholeskyFactor::new(&regularized_system(g, beta).to_dense())?.inverse();
    Ok((&q + q.transpose()) * 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k2() -> Graph {
        Graph::from_edges(2, [(0, 1, 1.0)]).unwrap()
    }

    fn path3() -> Graph {
        Graph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap()
    }

    fn e0(n: usize) -> DMatrix<f64> {
        let mut y = DMatrix::zeros(n, 1);
        y[(0, 0)] = 1.0;
        y
    }

    fn assert_close(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) {
        assert_eq!(a.shape(), b.shape());
        let diff = (a - b).amax();
        assert!(diff <= tol, "max deviation {diff:e} > {tol:e}\n{a}\n{b}");
    }

    #[test]
    fn rl_k2_identity_rhs() {
        let expected = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]) / 3.0;
        for kind in [
            SolverKind::DenseCholesky,
            SolverKind::ConjugateGradient,
            SolverKind::PowerIteration,
        ] {
            let f = regularized_laplacian_apply(
                &k2(),
                1.0,
                &DMatrix::identity(2, 2),
                &SolverSpec::new(kind),
            )
            .unwrap();
            assert_close(f.as_matrix(), &expected, 1e-9);
        }
        assert_close(&kernel_matrix(&k2(), 1.0).unwrap(), &expected, 1e-15);
    }

    #[test]
    fn rl_small_beta_is_identity() {
        let y = DMatrix::identity(3, 3);
        let f = regularized_laplacian_apply(&path3(), 1e-8, &y, &SolverSpec::default()).unwrap();
        assert!((f.as_matrix() - &y).amax() < 1e-6);
    }

    #[test]
    fn rl_path_dense_oracle() {
        // (I + L)^{-1} on the 3-path has first column (5, 2, 1) / 8.
        let expected = DMatrix::from_column_slice(3, 1, &[5.0, 2.0, 1.0]) / 8.0;
        let f = regularized_laplacian_apply(&path3(), 1.0, &e0(3), &SolverSpec::auto(3)).unwrap();
        assert_close(f.as_matrix(), &expected, 1e-14);
    }

    #[test]
    fn rl_rejects_bad_beta() {
        assert!(regularized_laplacian_apply(&k2(), 0.0, &e0(2), &SolverSpec::default()).is_err());
        assert!(kernel_matrix(&k2(), -1.0).is_err());
    }

    #[test]
    fn heat_zero_time_and_k2() {
        let y = DMatrix::from_row_slice(2, 2, &[0.2, 0.8, 0.4, 0.6]);
        for kind in [HeatKind::Standard, HeatKind::Normalized, HeatKind::PageRank] {
            let f = heat_kernel_apply(&k2(), kind, 0.0, &y, 1e-10).unwrap();
            assert_eq!(f.as_matrix(), &y);
        }
        let e = (-2.0f64).exp();
        let expected = DMatrix::from_column_slice(2, 1, &[(1.0 + e) / 2.0, (1.0 - e) / 2.0]);
        for kind in [HeatKind::Standard, HeatKind::Normalized, HeatKind::PageRank] {
            let f = heat_kernel_apply(&k2(), kind, 1.0, &e0(2), 1e-12).unwrap();
            assert_close(f.as_matrix(), &expected, 1e-11);
        }
        assert!(heat_kernel_apply(&k2(), HeatKind::Standard, -0.5, &e0(2), 1e-10).is_err());
    }

    #[test]
    fn generalized_lazy_equals_rl() {
        let g = Graph::from_edges(4, [(0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.0), (3, 0, 0.5)]).unwrap();
        let tau = 1.0 / g.max_degree();
        let mu = 0.7;
        let y = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        let rl = regularized_laplacian_apply(&g, 2.0 * tau / mu, &y, &SolverSpec::auto(4)).unwrap();
        for sigma in [0.0, 0.5, 1.0] {
            let f = generalized_ssl_apply(&g, sigma, mu, WeightChoice::Lazy { tau }, &y).unwrap();
            assert_close(f.as_matrix(), rl.as_matrix(), 1e-10);
        }
    }

    #[test]
    fn generalized_large_mu_keeps_seeds() {
        let y = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let mu = 1e8;
        let f = generalized_ssl_apply(&path3(), 0.0, mu, WeightChoice::Adjacency, &y).unwrap();
        let scale = mu / (2.0 + mu);
        assert!((f[(0, 0)] - scale).abs() < 1e-7);
        assert!((f[(2, 1)] - scale).abs() < 1e-7);
        let labels = crate::classify::classify(&f);
        assert_eq!(labels[0], 0);
        assert_eq!(labels[2], 1);
    }

    #[test]
    fn generalized_pagerank_path_oracle() {
        // sigma = 0, W = A, mu = 1/2 on the 3-path; solved by hand:
        // 0.2 * (I - 0.8 A D^{-1})^{-1} e0 = (17/45, 4/9, 8/45).
        let f = generalized_ssl_apply(&path3(), 0.0, 0.5, WeightChoice::Adjacency, &e0(3)).unwrap();
        let expected = DMatrix::from_column_slice(3, 1, &[17.0 / 45.0, 4.0 / 9.0, 8.0 / 45.0]);
        assert_close(f.as_matrix(), &expected, 1e-14);
    }

    #[test]
    fn generalized_rejects_bad_params() {
        let y = e0(3);
        assert!(generalized_ssl_apply(&path3(), 0.0, 0.0, WeightChoice::Adjacency, &y).is_err());
        assert!(matches!(
            generalized_ssl_apply(&path3(), 0.0, 1.0, WeightChoice::Lazy { tau: 0.9 }, &y),
            Err(Error::TauTooLarge { .. })
        ));
        let f = generalized_ssl_apply(&path3(), 0.0, f64::INFINITY, WeightChoice::Adjacency, &y)
            .unwrap();
        assert_eq!(f.as_matrix(), &y);
    }

    #[test]
    fn kernel_matrix_rows_sum_to_one() {
        let g = Graph::from_edges(
            5,
            [
                (0, 1, 1.0),
                (1, 2, 3.0),
                (2, 3, 0.5),
                (3, 4, 1.0),
                (4, 0, 2.0),
                (1, 3, 1.0),
            ],
        )
        .unwrap();
        let q = kernel_matrix(&g, 2.5).unwrap();
        for i in 0..5 {
            assert!((q.row(i).sum() - 1.0).abs() < 1e-10);
            for j in 0..5 {
                assert!(q[(i, j)] > 0.0);
                if i != j {
                    assert!(q[(i, i)] > q[(i, j)]);
                }
            }
        }
    }
}
