//! Monte-Carlo estimate of a kernel row via the lazy random walk.
//!
//! A walk with transition matrix `I - tau L` run for a geometrically
//! distributed number of steps `K`, `P(K = k) = q (1 - q)^k`, ends at node
//! `j` with probability `[(I + beta L)^{-1}]_{start, j}` where
//! `beta = tau (1/q - 1)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{lazy_transition, Graph};

/// Samples handled by one rng stream. Fixed so results do not depend on the
/// number of worker threads.
const CHUNK: usize = 1 << 16;

/// `beta` matching a walk with step size `tau` and stopping probability `q`.
pub fn equivalent_beta(tau: f64, q: f64) -> f64 {
    tau * (1.0 / q - 1.0)
}

/// Empirical distribution of the walk's end point.
pub fn monte_carlo_geometric_walk(
    g: &Graph,
    tau: f64,
    q: f64,
    start: usize,
    n_samples: usize,
    rng_seed: u64,
) -> Result<Vec<f64>> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "q must lie in (0, 1), got {q}"
        )));
    }
    let n = g.n_nodes();
    if start >= n {
        return Err(Error::InvalidParameter(format!(
            "start node {start} out of range for {n} nodes"
        )));
    }
    if n_samples == 0 {
        return Err(Error::InvalidParameter("n_samples must be positive".into()));
    }
    let p = lazy_transition(g, tau)?;
    // Per-row cumulative distributions.
    let rows: Vec<(Vec<usize>, Vec<f64>)> = (0..n)
        .map(|i| {
            let mut targets = Vec::new();
            let mut cumulative = Vec::new();
            let mut acc = 0.0;
            for (j, v) in p.row(i) {
                if v > 0.0 {
                    acc += v;
                    targets.push(j);
                    cumulative.push(acc);
                }
            }
            (targets, cumulative)
        })
        .collect();
    let steps = Geometric::new(q).map_err(|e| Error::InvalidParameter(e.to_string()))?;

    let n_chunks = n_samples.div_ceil(CHUNK);
    let counts: Vec<Vec<u64>> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
            rng.set_stream(chunk as u64);
            let len = CHUNK.min(n_samples - chunk * CHUNK);
            let mut counts = vec![0u64; n];
            for _ in 0..len {
                let k = steps.sample(&mut rng);
                let mut node = start;
                for _ in 0..k {
                    let (targets, cumulative) = &rows[node];
                    let u: f64 = rng.random::<f64>() * cumulative[cumulative.len() - 1];
                    let pos = cumulative.partition_point(|&c| c <= u);
                    node = targets[pos.min(targets.len() - 1)];
                }
                counts[node] += 1;
            }
            counts
        })
        .collect();

    let mut total = vec![0u64; n];
    for c in counts {
        for (t, v) in total.iter_mut().zip(c) {
            *t += v;
        }
    }
    Ok(total
        .into_iter()
        .map(|c| c as f64 / n_samples as f64)
        .collect())
}

/// Total variation distance between two distributions on the same support.
pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}
