//! Seeds, the argmax decision rule, seed sampling and precision scoring.

use std::collections::BTreeMap;
use std::io::BufRead;

use nalgebra::DMatrix;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Seed assignment node -> class, ordered by node.
pub type Seeds = BTreeMap<usize, usize>;

/// N x K 0/1 matrix with `Y[i][k] = 1` iff node `i` is a seed of class `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelMatrix {
    y: DMatrix<f64>,
}

impl LabelMatrix {
    pub fn n_nodes(&self) -> usize {
        self.y.nrows()
    }

    pub fn n_classes(&self) -> usize {
        self.y.ncols()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.y
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.y
    }

    pub fn column_sums(&self) -> Vec<f64> {
        self.y.column_iter().map(|c| c.sum()).collect()
    }
}

/// N x K real matrix whose columns are the classification functions.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationMatrix(DMatrix<f64>);

impl ClassificationMatrix {
    pub fn new(f: DMatrix<f64>) -> Self {
        ClassificationMatrix(f)
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn n_nodes(&self) -> usize {
        self.0.nrows()
    }

    pub fn n_classes(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl std::ops::Index<(usize, usize)> for ClassificationMatrix {
    type Output = f64;

    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.0[idx]
    }
}

/// Ground-truth class of every node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    assignment: Vec<usize>,
    n_classes: usize,
}

impl GroundTruth {
    /// Class indices must be dense: every class in `0..=max` is non-empty.
    pub fn new(assignment: Vec<usize>) -> Result<Self> {
        let n_classes = assignment.iter().max().map_or(0, |m| m + 1);
        if n_classes == 0 {
            return Err(Error::InvalidParameter("ground truth is empty".into()));
        }
        let mut sizes = vec![0usize; n_classes];
        for &c in &assignment {
            sizes[c] += 1;
        }
        if let Some(k) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::EmptyClass(k));
        }
        Ok(GroundTruth {
            assignment,
            n_classes,
        })
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn class_of(&self, node: usize) -> usize {
        self.assignment[node]
    }

    pub fn n_nodes(&self) -> usize {
        self.assignment.len()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_classes];
        for &c in &self.assignment {
            sizes[c] += 1;
        }
        sizes
    }

    pub fn members(&self, class: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] == class)
            .collect()
    }
}

/// Reads `node class` lines (node names as in the graph's edge list).
/// Returns the labelled nodes; `#` starts a comment.
pub fn load_labels<R: BufRead>(reader: R, g: &Graph) -> Result<Seeds> {
    let index = g.name_index();
    let mut seeds = Seeds::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let content = line.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        if tokens.len() != 2 {
            return Err(Error::Parse {
                line: lineno + 1,
                msg: format!("expected `node class`, found {} fields", tokens.len()),
            });
        }
        let node = *index
            .get(tokens[0])
            .ok_or_else(|| Error::UnknownNode(tokens[0].to_string()))?;
        let class: usize = tokens[1].parse().map_err(|e| Error::Parse {
            line: lineno + 1,
            msg: format!("bad class index {:?}: {e}", tokens[1]),
        })?;
        if let Some(&prev) = seeds.get(&node) {
            if prev != class {
                return Err(Error::ConflictingLabel {
                    node,
                    first: prev,
                    second: class,
                });
            }
        }
        seeds.insert(node, class);
    }
    Ok(seeds)
}

/// Reads a label file that must cover every node of `g`.
pub fn load_ground_truth<R: BufRead>(reader: R, g: &Graph) -> Result<GroundTruth> {
    let seeds = load_labels(reader, g)?;
    let mut assignment = Vec::with_capacity(g.n_nodes());
    for i in 0..g.n_nodes() {
        match seeds.get(&i) {
            Some(&c) => assignment.push(c),
            None => {
                return Err(Error::MissingLabel {
                    node: g.name(i).to_string(),
                })
            }
        }
    }
    GroundTruth::new(assignment)
}

/// Builds the seed matrix `Y`.
pub fn build_label_matrix<I>(seeds: I, n_nodes: usize, n_classes: usize) -> Result<LabelMatrix>
where
    I: IntoIterator<Item = (usize, usize)>,
{
    let mut y = DMatrix::zeros(n_nodes, n_classes);
    let mut assigned: Vec<Option<usize>> = vec![None; n_nodes];
    for (node, class) in seeds {
        if node >= n_nodes {
            return Err(Error::InvalidParameter(format!(
                "seed node {node} out of range for {n_nodes} nodes"
            )));
        }
        if class >= n_classes {
            return Err(Error::InvalidParameter(format!(
                "seed class {class} out of range for {n_classes} classes"
            )));
        }
        match assigned[node] {
            Some(prev) if prev != class => {
                return Err(Error::ConflictingLabel {
                    node,
                    first: prev,
                    second: class,
                })
            }
            _ => assigned[node] = Some(class),
        }
        y[(node, class)] = 1.0;
    }
    if let Some(k) = (0..n_classes).find(|&k| y.column(k).sum() == 0.0) {
        return Err(Error::EmptyClass(k));
    }
    Ok(LabelMatrix { y })
}

/// Argmax per row; ties go to the smallest class index.
pub fn classify(f: &ClassificationMatrix) -> Vec<usize> {
    let m = f.as_matrix();
    (0..m.nrows())
        .map(|i| {
            let mut best = 0;
            for k in 1..m.ncols() {
                if m[(i, k)] > m[(i, best)] {
                    best = k;
                }
            }
            best
        })
        .collect()
}

/// Whether seed nodes take part in precision scoring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SeedScoring {
    #[default]
    ExcludeSeeds,
    IncludeSeeds,
}

/// Fraction of correctly classified non-seed nodes. Returns 1.0 when every
/// node is a seed.
pub fn precision(predicted: &[usize], truth: &GroundTruth, seeds: &Seeds) -> f64 {
    precision_with(predicted, truth, seeds, SeedScoring::ExcludeSeeds)
}

pub fn precision_with(
    predicted: &[usize],
    truth: &GroundTruth,
    seeds: &Seeds,
    scoring: SeedScoring,
) -> f64 {
    assert_eq!(
        predicted.len(),
        truth.n_nodes(),
        "prediction must cover all nodes"
    );
    let mut total = 0usize;
    let mut correct = 0usize;
    for (i, &p) in predicted.iter().enumerate() {
        if scoring == SeedScoring::ExcludeSeeds && seeds.contains_key(&i) {
            continue;
        }
        total += 1;
        if p == truth.class_of(i) {
            correct += 1;
        }
    }
    if total == 0 {
        1.0
    } else {
        correct as f64 / total as f64
    }
}

/// How seeds are drawn from each class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedStrategy {
    /// Uniformly among all members of the class.
    Uniform,
    /// Uniformly among the `pool` members of largest degree; degree ties
    /// broken by ascending node id.
    HighDegree { pool: usize },
}

/// Draws `per_class` seeds from every class. Deterministic in `rng_seed`.
pub fn sample_seeds(
    truth: &GroundTruth,
    g: &Graph,
    strategy: SeedStrategy,
    per_class: usize,
    rng_seed: u64,
) -> Result<Seeds> {
    if truth.n_nodes() != g.n_nodes() {
        return Err(Error::DimensionMismatch {
            expected: g.n_nodes(),
            got: truth.n_nodes(),
        });
    }
    if per_class == 0 {
        return Err(Error::InvalidParameter(
            "per_class must be at least 1".into(),
        ));
    }
    let smallest = truth.class_sizes().into_iter().min().unwrap_or(0);
    if per_class > smallest {
        return Err(Error::InvalidParameter(format!(
            "per_class = {per_class} exceeds the smallest class size {smallest}"
        )));
    }
    if let SeedStrategy::HighDegree { pool } = strategy {
        if per_class > pool {
            return Err(Error::InvalidParameter(format!(
                "per_class = {per_class} exceeds the high-degree pool size {pool}"
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut seeds = Seeds::new();
    for k in 0..truth.n_classes() {
        let mut candidates = truth.members(k);
        if let SeedStrategy::HighDegree { pool } = strategy {
            candidates.sort_by(|&a, &b| g.degree(b).total_cmp(&g.degree(a)).then(a.cmp(&b)));
            candidates.truncate(pool);
        }
        for pos in index::sample(&mut rng, candidates.len(), per_class) {
            seeds.insert(candidates[pos], k);
        }
    }
    Ok(seeds)
}
