//! Numerical backends for applying `(I + beta L)^{-1}` and `exp(-t M)` to
//! blocks of right-hand sides.
//!
//! All solvers are pure functions of their inputs. Columns are independent
//! and the conjugate-gradient path solves them in parallel.

use nalgebra::{Cholesky, DMatrix, Dyn};
use rayon::prelude::*;

use crate::classify::ClassificationMatrix;
use crate::error::{Error, Result};
use crate::graph::{Csr, Graph, SparseSymMatrix, TransitionMatrix};

/// Largest dimension for which [`SolverSpec::auto`] picks the dense path.
pub const DENSE_AUTO_LIMIT: usize = 512;

/// Largest dimension accepted by dense kernel and factorization routines.
pub const DENSE_LIMIT: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    PowerIteration,
    ConjugateGradient,
    DenseCholesky,
}

impl SolverKind {
    pub fn tag(self) -> &'static str {
        match self {
            SolverKind::PowerIteration => "power",
            SolverKind::ConjugateGradient => "cg",
            SolverKind::DenseCholesky => "cholesky",
        }
    }
}

impl std::str::FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "power" | "power-iteration" => Ok(SolverKind::PowerIteration),
            "cg" | "conjugate-gradient" => Ok(SolverKind::ConjugateGradient),
            "cholesky" | "dense-cholesky" => Ok(SolverKind::DenseCholesky),
            other => Err(Error::InvalidParameter(format!("unknown solver {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSpec {
    pub kind: SolverKind,
    /// Relative tolerance. For CG: residual norm over right-hand-side norm.
    /// For power iteration: max-norm change over max-norm of the iterate.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverSpec {
    fn default() -> Self {
        SolverSpec {
            kind: SolverKind::ConjugateGradient,
            tolerance: 1e-10,
            max_iterations: 10_000,
        }
    }
}

impl SolverSpec {
    pub fn new(kind: SolverKind) -> Self {
        SolverSpec {
            kind,
            ..Default::default()
        }
    }

    /// Dense Cholesky for graphs up to [`DENSE_AUTO_LIMIT`] nodes, CG above.
    pub fn auto(n_nodes: usize) -> Self {
        if n_nodes <= DENSE_AUTO_LIMIT {
            Self::new(SolverKind::DenseCholesky)
        } else {
            Self::new(SolverKind::ConjugateGradient)
        }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_max_iterations(mut self, max_iterations: usize) -> Self {
        self.max_iterations = max_iterations;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "solver tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter(
                "max_iterations must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Convergence summary; for multi-column solves it reports the worst column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    pub final_residual: f64,
    pub converged: bool,
}

impl SolveReport {
    fn exact() -> Self {
        SolveReport {
            iterations: 0,
            final_residual: 0.0,
            converged: true,
        }
    }

    fn merge(self, other: SolveReport) -> SolveReport {
        SolveReport {
            iterations: self.iterations.max(other.iterations),
            final_residual: self.final_residual.max(other.final_residual),
            converged: self.converged && other.converged,
        }
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "beta must be positive, got {beta}"
        )))
    }
}

fn check_rows(expected: usize, rhs: &DMatrix<f64>) -> Result<()> {
    if rhs.nrows() == expected {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected,
            got: rhs.nrows(),
        })
    }
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Fixed-point iteration `F <- beta (I + beta D)^{-1} A F + (I + beta D)^{-1} Y`
/// started from `F = Y`.
///
/// The iteration matrix is substochastic with spectral radius below one, so
/// the scheme converges for every `beta > 0`, slowly when `beta * d_i` is
/// large. Stops when the max-norm change relative to the max-norm of the new
/// iterate drops below the tolerance. Hitting `max_iterations` is not an
/// error: the report says `converged = false`.
pub fn power_iteration_solve(
    g: &Graph,
    beta: f64,
    rhs: &DMatrix<f64>,
    spec: &SolverSpec,
) -> Result<(ClassificationMatrix, SolveReport)> {
    check_beta(beta)?;
    spec.validate()?;
    check_rows(g.n_nodes(), rhs)?;
    let adjacency = g.adjacency();
    Ok(power_iteration_core(
        adjacency.csr(),
        g.degrees(),
        beta,
        rhs,
        spec,
    ))
}

pub(crate) fn power_iteration_core(
    adjacency: &Csr,
    degrees: &[f64],
    beta: f64,
    rhs: &DMatrix<f64>,
    spec: &SolverSpec,
) -> (ClassificationMatrix, SolveReport) {
    let n = degrees.len();
    let walk_scale: Vec<f64> = degrees.iter().map(|d| beta / (1.0 + beta * d)).collect();
    let restart: Vec<f64> = degrees.iter().map(|d| 1.0 / (1.0 + beta * d)).collect();
    let mut injected = rhs.clone();
    for mut col in injected.column_iter_mut() {
        for (v, r) in col.iter_mut().zip(&restart) {
            *v *= r;
        }
    }

    let mut f = rhs.clone();
    let mut next = DMatrix::zeros(n, rhs.ncols());
    let mut report = SolveReport {
        iterations: 0,
        final_residual: f64::INFINITY,
        converged: false,
    };
    for iter in 1..=spec.max_iterations {
        adjacency.mul_mat_into(&f, &mut next);
        for c in 0..rhs.ncols() {
            for i in 0..n {
                next[(i, c)] = walk_scale[i] * next[(i, c)] + injected[(i, c)];
            }
        }
        let scale = max_abs(&next);
        let change = next
            .iter()
            .zip(f.iter())
            .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
        let rel = if scale > 0.0 { change / scale } else { change };
        std::mem::swap(&mut f, &mut next);
        report.iterations = iter;
        report.final_residual = rel;
        if rel <= spec.tolerance {
            report.converged = true;
            break;
        }
    }
    (ClassificationMatrix::new(f), report)
}

/// Conjugate gradients on each column of `rhs` from a zero initial guess.
///
/// `op` must be symmetric positive definite; a non-positive curvature
/// direction aborts with [`Error::CgBreakdown`]. Columns run in parallel.
pub fn cg_solve(
    op: &SparseSymMatrix,
    rhs: &DMatrix<f64>,
    spec: &SolverSpec,
) -> Result<(ClassificationMatrix, SolveReport)> {
    spec.validate()?;
    check_rows(op.dim(), rhs)?;
    let n = op.dim();
    let columns: Vec<Result<(Vec<f64>, SolveReport)>> = (0..rhs.ncols())
        .into_par_iter()
        .map(|c| {
            let b: Vec<f64> = rhs.column(c).iter().copied().collect();
            cg_column(op, &b, spec)
        })
        .collect();
    let mut out = DMatrix::zeros(n, rhs.ncols());
    let mut report = SolveReport::exact();
    for (c, col) in columns.into_iter().enumerate() {
        let (x, r) = col?;
        out.column_mut(c).copy_from_slice(&x);
        report = report.merge(r);
    }
    Ok((ClassificationMatrix::new(out), report))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn cg_column(
    op: &SparseSymMatrix,
    b: &[f64],
    spec: &SolverSpec,
) -> Result<(Vec<f64>, SolveReport)> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        return Ok((x, SolveReport::exact()));
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    let mut report = SolveReport {
        iterations: 0,
        final_residual: 1.0,
        converged: false,
    };
    for iter in 1..=spec.max_iterations {
        op.mul_vec_into(&p, &mut ap);
        let curvature = dot(&p, &ap);
        if curvature <= 0.0 || !curvature.is_finite() {
            return Err(Error::CgBreakdown(iter));
        }
        let alpha = rr / curvature;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_next = dot(&r, &r);
        report.iterations = iter;
        report.final_residual = rr_next.sqrt() / b_norm;
        if report.final_residual <= spec.tolerance {
            report.converged = true;
            break;
        }
        let gamma = rr_next / rr;
        for i in 0..n {
            p[i] = r[i] + gamma * p[i];
        }
        rr = rr_next;
    }
    Ok((x, report))
}

/// Reusable dense Cholesky factorization of an SPD matrix.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    factor: Cholesky<f64, Dyn>,
}

impl CholeskyFactor {
    pub fn new(op: &DMatrix<f64>) -> Result<Self> {
        let n = op.nrows();
        if op.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: op.ncols(),
            });
        }
        if n > DENSE_LIMIT {
            return Err(Error::TooLarge {
                n,
                limit: DENSE_LIMIT,
            });
        }
        if op != &op.transpose() {
            return Err(Error::InvalidParameter("matrix is not symmetric".into()));
        }
        Cholesky::new(op.clone())
            .map(|factor| CholeskyFactor { factor })
            .ok_or(Error::NotPositiveDefinite)
    }

    pub fn dim(&self) -> usize {
        self.factor.l_dirty().nrows()
    }

    pub fn solve(&self, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        check_rows(self.dim(), rhs)?;
        Ok(self.factor.solve(rhs))
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        self.factor.inverse()
    }
}

/// Dense factor-and-solve. Rejects non-symmetric or non-positive-definite
/// input.
pub fn cholesky_solve(op: &DMatrix<f64>, rhs: &DMatrix<f64>) -> Result<ClassificationMatrix> {
    let factor = CholeskyFactor::new(op)?;
    factor.solve(rhs).map(ClassificationMatrix::new)
}

/// A generator written as `M = rate * (I - S)` with `S` entry-wise
/// nonnegative, so that `exp(-t M) = e^{-rate t} sum_k (rate t)^k / k! S^k`.
#[derive(Debug, Clone)]
pub struct UniformizedGenerator {
    rate: f64,
    jump: Csr,
}

impl UniformizedGenerator {
    /// For a symmetric generator with nonpositive off-diagonal entries, such
    /// as `L` or the normalized Laplacian. Uses `rate = max_i M_ii`, the
    /// smallest rate that keeps `S` nonnegative.
    pub fn from_symmetric(m: &SparseSymMatrix) -> Result<Self> {
        let n = m.dim();
        let rate = m.diagonal().into_iter().fold(0.0, f64::max);
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let mut row = Vec::new();
            let mut has_diag = false;
            for (j, v) in m.row(i) {
                if i == j {
                    has_diag = true;
                    let s = if rate > 0.0 { 1.0 - v / rate } else { 1.0 };
                    if s < 0.0 {
                        return Err(Error::InvalidParameter(format!(
                            "negative diagonal entry {v} at row {i}"
                        )));
                    }
                    row.push((j, s));
                } else {
                    if v > 0.0 {
                        return Err(Error::InvalidParameter(format!(
                            "positive off-diagonal entry at ({i}, {j}); not a Laplacian-type generator"
                        )));
                    }
                    if rate > 0.0 {
                        row.push((j, -v / rate));
                    }
                }
            }
            if !has_diag {
                row.push((i, 1.0));
            }
            rows.push(row);
        }
        Ok(UniformizedGenerator {
            rate,
            jump: Csr::from_rows(rows),
        })
    }

    /// For `M = I - P` with `P` a transition matrix: `rate = 1`, `S = P`.
    pub fn from_transition(p: &TransitionMatrix) -> Self {
        UniformizedGenerator {
            rate: 1.0,
            jump: p.csr().clone(),
        }
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn dim(&self) -> usize {
        self.jump.dim()
    }

    /// Dense `M = rate (I - S)`.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        (DMatrix::identity(n, n) - self.jump.to_dense()) * self.rate
    }
}

/// Normalized Poisson(lambda) weights covering all but `tol` of the mass.
/// Returns the first index and the weights from there on.
pub(crate) fn poisson_window(lambda: f64, tol: f64) -> (usize, Vec<f64>) {
    let mode = lambda.floor() as usize;
    let half = tol / 2.0;

    // Unnormalized weights relative to the mode, built outward. The tail
    // bounds use the geometric decay of the ratio between consecutive terms.
    let mut right = Vec::new();
    let (mut k, mut u) = (mode, 1.0f64);
    loop {
        let next = u * lambda / (k + 1) as f64;
        let ratio = lambda / (k + 2) as f64;
        if next / (1.0 - ratio) < half {
            break;
        }
        right.push(next);
        u = next;
        k += 1;
    }

    let mut left = Vec::new();
    let (mut k, mut u) = (mode, 1.0f64);
    while k > 0 {
        let prev = u * k as f64 / lambda;
        let ratio = (k - 1) as f64 / lambda;
        if prev / (1.0 - ratio) < half {
            break;
        }
        left.push(prev);
        u = prev;
        k -= 1;
    }

    let first = mode - left.len();
    let mut weights: Vec<f64> = left.into_iter().rev().collect();
    weights.push(1.0);
    weights.extend(right);
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    (first, weights)
}

/// `exp(-t M) Y` by uniformization, truncating the Poisson series once the
/// dropped mass is below `tol`.
///
/// Every term is a nonnegative combination of `S^k Y`, so nonnegative input
/// gives nonnegative output and small entries keep full relative accuracy.
pub fn expm_action(
    generator: &UniformizedGenerator,
    t: f64,
    rhs: &DMatrix<f64>,
    tol: f64,
) -> Result<ClassificationMatrix> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "time must be nonnegative, got {t}"
        )));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must lie in (0, 1), got {tol}"
        )));
    }
    check_rows(generator.dim(), rhs)?;
    let lambda = generator.rate * t;
    if lambda == 0.0 {
        return Ok(ClassificationMatrix::new(rhs.clone()));
    }
    let (first, weights) = poisson_window(lambda, tol);
    let last = first + weights.len() - 1;

    let mut power = rhs.clone();
    let mut scratch = DMatrix::zeros(rhs.nrows(), rhs.ncols());
    let mut out = DMatrix::zeros(rhs.nrows(), rhs.ncols());
    for k in 0..=last {
        if k >= first {
            let w = weights[k - first];
            for (o, p) in out.iter_mut().zip(power.iter()) {
                *o += w * p;
            }
        }
        if k < last {
            generator.jump.mul_mat_into(&power, &mut scratch);
            std::mem::swap(&mut power, &mut scratch);
        }
    }
    Ok(ClassificationMatrix::new(out))
}
