use lssl_core::datasets::bundled_lesmis;
use lssl_core::generators::{random_connected_graph, Weights};
use lssl_core::graph::{laplacian, normalized_laplacian, standard_transition, Graph};
use lssl_core::kernels::regularized_system;
use lssl_core::solvers::{
    cg_solve, cholesky_solve, expm_action, power_iteration_solve, SolverSpec, UniformizedGenerator,
};
use lssl_core::verify::compare_solvers;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `exp(A)` by scaling and squaring with a Taylor series.
fn dense_expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let norm = a.iter().fold(0.0f64, |m, v| m.max(v.abs())) * n as f64;
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a / 2f64.powi(squarings);
    let mut term = DMatrix::identity(n, n);
    let mut sum = DMatrix::identity(n, n);
    for k in 1..30 {
        term = &term * &scaled / k as f64;
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

fn random_rhs(n: usize, k: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(n, k, |_, _| if rng.random_bool(0.3) { 1.0 } else { 0.0 })
}

#[test]
fn three_solvers_agree_on_random_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..25 {
        let n = rng.random_range(2..=50);
        let g = random_connected_graph(
            n,
            rng.random_range(0.0..0.3),
            Weights::Uniform { lo: 0.1, hi: 2.0 },
            rng.random(),
        )
        .unwrap();
        let beta = 10f64.powf(rng.random_range(-2.0..2.0));
        let y = random_rhs(n, 3, &mut rng);
        let c = compare_solvers(&g, beta, &y, 1e-12).unwrap();
        assert!(
            c.max_deviation < 1e-6,
            "n = {n}, beta = {beta}: {}",
            c.max_deviation
        );
    }
}

#[test]
fn power_iteration_matrix_is_contracting() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let n = rng.random_range(2..=15);
        let g = random_connected_graph(n, 0.3, Weights::Uniform { lo: 0.1, hi: 5.0 }, rng.random())
            .unwrap();
        for beta in [0.01, 1.0, 100.0, 1e4] {
            // beta (I + beta D)^{-1} A is similar to the symmetric
            // C^{1/2} A C^{1/2} with C = beta (I + beta D)^{-1}.
            let c: Vec<f64> = g
                .degrees()
                .iter()
                .map(|d| (beta / (1.0 + beta * d)).sqrt())
                .collect();
            let a = g.dense_adjacency();
            let sym = DMatrix::from_fn(n, n, |i, j| c[i] * a[(i, j)] * c[j]);
            let radius = sym
                .symmetric_eigenvalues()
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(radius < 1.0, "beta = {beta}: radius {radius}");
        }
    }
}

#[test]
fn lesmis_solver_examples() {
    let (g, truth) = bundled_lesmis().unwrap();
    let y = DMatrix::from_fn(g.n_nodes(), 6, |i, c| {
        if truth.class_of(i) == c && i % 5 == 0 {
            1.0
        } else {
            0.0
        }
    });
    let spec = SolverSpec::default().with_tolerance(1e-12);
    let (pi, report) = power_iteration_solve(&g, 1.0, &y, &spec).unwrap();
    assert!(report.converged);
    let op = regularized_system(&g, 1.0);
    let ch = cholesky_solve(&op.to_dense(), &y).unwrap();
    assert!((pi.as_matrix() - ch.as_matrix()).amax() < 1e-6);
    let (cg, report) = cg_solve(&op, &y, &spec).unwrap();
    assert!(report.converged && report.final_residual <= 1e-12);
    assert!((cg.as_matrix() - ch.as_matrix()).amax() < 1e-10);
}

#[test]
fn expm_matches_dense_oracle() {
    let tol = 1e-10;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let n = rng.random_range(2..=20);
        let g = random_connected_graph(n, 0.2, Weights::Uniform { lo: 0.5, hi: 2.0 }, rng.random())
            .unwrap();
        let y = random_rhs(n, 2, &mut rng);
        let generators = [
            UniformizedGenerator::from_symmetric(&laplacian(&g)).unwrap(),
            UniformizedGenerator::from_symmetric(&normalized_laplacian(&g).unwrap()).unwrap(),
            UniformizedGenerator::from_transition(&standard_transition(&g).unwrap()),
        ];
        for generator in &generators {
            for t in [0.1, 1.0, 7.5] {
                let oracle = dense_expm(&(generator.to_dense() * -t)) * &y;
                let f = expm_action(generator, t, &y, tol).unwrap();
                let err = (f.as_matrix() - &oracle).amax();
                assert!(err <= 10.0 * tol, "t = {t}: {err}");
            }
        }
    }
}

#[test]
fn expm_semigroup() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let g = random_connected_graph(12, 0.3, Weights::Unit, 9).unwrap();
    let generator = UniformizedGenerator::from_symmetric(&laplacian(&g)).unwrap();
    let y = random_rhs(12, 3, &mut rng);
    for (s, t) in [(0.3, 0.7), (2.0, 5.0), (10.0, 0.01)] {
        let whole = expm_action(&generator, s + t, &y, 1e-14).unwrap();
        let inner = expm_action(&generator, t, &y, 1e-14).unwrap();
        let split = expm_action(&generator, s, inner.as_matrix(), 1e-14).unwrap();
        assert!((whole.as_matrix() - split.as_matrix()).amax() < 1e-8);
    }
}

#[test]
fn expm_preserves_nonnegativity_and_mass() {
    let g = Graph::from_edges(
        5,
        [
            (0, 1, 1.0),
            (1, 2, 3.0),
            (2, 3, 1.0),
            (3, 4, 0.5),
            (0, 4, 2.0),
        ],
    )
    .unwrap();
    let generator = UniformizedGenerator::from_symmetric(&laplacian(&g)).unwrap();
    let y = DMatrix::from_fn(5, 2, |i, c| if i == 2 * c { 1.0 } else { 0.0 });
    for t in [0.01, 1.0, 50.0] {
        let f = expm_action(&generator, t, &y, 1e-12).unwrap();
        assert!(f.as_matrix().iter().all(|&v| v >= 0.0));
        for c in 0..2 {
            assert!((f.as_matrix().column(c).sum() - 1.0).abs() < 1e-10);
        }
    }
}
