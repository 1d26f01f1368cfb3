//! Precision-versus-parameter sweeps with repeated seed sampling.

use std::fmt;
use std::io::{BufRead, Write};
use std::path::PathBuf;
use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::classify::{
    build_label_matrix, classify, precision_with, sample_seeds, GroundTruth, SeedScoring,
    SeedStrategy, Seeds,
};
use crate::datasets::{bundled_lesmis, synthetic_wikimath};
use crate::error::{Error, Result};
use crate::graph::{load_edge_list, Graph, LoadOptions};
use crate::kernels::{HeatKind, KernelKind, KernelSpec, PreparedKernel, WeightChoice};
use crate::solvers::{SolverKind, SolverSpec};
use crate::ClassificationMatrix;

/// Classification method with one swept parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// `(I + beta L)^{-1}`, parameter `beta`.
    RegularizedLaplacian,
    /// Heat kernel, parameter `t`.
    Heat(HeatKind),
    /// Generalized method with `W = A` and `sigma = 0`, parameter `mu`.
    PageRank,
    /// Generalized method with `W = A` and the given `sigma`, parameter `mu`.
    Generalized { sigma: f64 },
}

impl Method {
    pub const ALL_TAGS: [&'static str; 6] = [
        "rl",
        "heat-standard",
        "heat-normalized",
        "heat-pagerank",
        "pagerank",
        "generalized",
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            Method::RegularizedLaplacian => "rl",
            Method::Heat(HeatKind::Standard) => "heat-standard",
            Method::Heat(HeatKind::Normalized) => "heat-normalized",
            Method::Heat(HeatKind::PageRank) => "heat-pagerank",
            Method::PageRank => "pagerank",
            Method::Generalized { .. } => "generalized",
        }
    }

    /// Name of the swept parameter.
    pub fn parameter(&self) -> &'static str {
        match self {
            Method::RegularizedLaplacian => "beta",
            Method::Heat(_) => "t",
            Method::PageRank | Method::Generalized { .. } => "mu",
        }
    }

    pub fn kernel_spec(&self, param: f64, solver: SolverSpec) -> KernelSpec {
        match *self {
            Method::RegularizedLaplacian => KernelSpec::regularized_laplacian(param, solver),
            Method::Heat(kind) => KernelSpec::new(KernelKind::Heat { kind, t: param }, solver),
            Method::PageRank => KernelSpec::new(
                KernelKind::Generalized {
                    sigma: 0.0,
                    mu: param,
                    weights: WeightChoice::Adjacency,
                },
                solver,
            ),
            Method::Generalized { sigma } => KernelSpec::new(
                KernelKind::Generalized {
                    sigma,
                    mu: param,
                    weights: WeightChoice::Adjacency,
                },
                solver,
            ),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = Error;

    /// `generalized` parses with `sigma = 0`; set it afterwards if needed.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rl" | "regularized-laplacian" => Ok(Method::RegularizedLaplacian),
            "heat-standard" | "heat" => Ok(Method::Heat(HeatKind::Standard)),
            "heat-normalized" => Ok(Method::Heat(HeatKind::Normalized)),
            "heat-pagerank" => Ok(Method::Heat(HeatKind::PageRank)),
            "pagerank" | "pr" => Ok(Method::PageRank),
            "generalized" => Ok(Method::Generalized { sigma: 0.0 }),
            other => Err(Error::InvalidParameter(format!(
                "unknown method {other:?}; expected one of {}",
                Method::ALL_TAGS.join(", ")
            ))),
        }
    }
}

/// `points` values spaced evenly in log scale from `lo` to `hi` inclusive.
pub fn logspace(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) || points == 0 {
        return Err(Error::InvalidParameter(format!(
            "bad log grid [{lo}, {hi}] with {points} points"
        )));
    }
    if points == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.log10(), hi.log10());
    Ok((0..points)
        .map(|k| {
            let e = a + (b - a) * k as f64 / (points - 1) as f64;
            if k == 0 {
                lo
            } else if k == points - 1 {
                hi
            } else {
                10f64.powf(e)
            }
        })
        .collect())
}

/// 25 log-spaced points over `[1e-3, 1e3]`.
pub fn default_grid() -> Vec<f64> {
    logspace(1e-3, 1e3, 25).expect("valid default grid")
}

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSource {
    LesMis,
    SyntheticWikiMath {
        seed: u64,
    },
    Files {
        edges: PathBuf,
        labels: PathBuf,
        allow_components: bool,
    },
}

impl DatasetSource {
    pub fn load(&self) -> Result<(Graph, GroundTruth)> {
        match self {
            DatasetSource::LesMis => bundled_lesmis(),
            DatasetSource::SyntheticWikiMath { seed } => synthetic_wikimath(*seed),
            DatasetSource::Files {
                edges,
                labels,
                allow_components,
            } => {
                let g = load_edge_list(
                    std::io::BufReader::new(std::fs::File::open(edges)?),
                    LoadOptions {
                        allow_components: *allow_components,
                    },
                )?;
                let truth = crate::classify::load_ground_truth(
                    std::io::BufReader::new(std::fs::File::open(labels)?),
                    &g,
                )?;
                Ok((g, truth))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub dataset: DatasetSource,
    pub method: Method,
    pub grid: Vec<f64>,
    pub strategy: SeedStrategy,
    pub per_class: usize,
    pub n_trials: usize,
    pub rng_seed: u64,
    /// `None` picks Cholesky up to 512 nodes and CG above.
    pub solver: Option<SolverKind>,
    pub tolerance: f64,
    pub scoring: SeedScoring,
}

impl SweepConfig {
    pub fn new(dataset: DatasetSource, method: Method) -> Self {
        SweepConfig {
            dataset,
            method,
            grid: default_grid(),
            strategy: SeedStrategy::Uniform,
            per_class: 2,
            n_trials: 100,
            rng_seed: 0,
            solver: None,
            tolerance: 1e-10,
            scoring: SeedScoring::ExcludeSeeds,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::InvalidParameter("grid is empty".into()));
        }
        if self.grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter(
                "grid must be strictly ascending".into(),
            ));
        }
        if self.n_trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        Ok(())
    }

    pub fn solver_for(&self, n_nodes: usize) -> SolverSpec {
        let base = match self.solver {
            Some(kind) => SolverSpec::new(kind),
            None => SolverSpec::auto(n_nodes),
        };
        base.with_tolerance(self.tolerance)
    }

    /// Seed of trial `trial`.
    pub fn trial_seed(&self, trial: usize) -> u64 {
        self.rng_seed ^ trial as u64
    }

    /// Parses `key: value` (or `key = value`) lines; `#` starts a comment.
    ///
    /// Keys: `dataset` (`lesmis`, `wikimath-synthetic`), `edges`, `labels`,
    /// `allow_components`, `method`, `sigma`, `grid` (comma-separated values),
    /// `grid_min`, `grid_max`, `grid_points`, `strategy` (`uniform`,
    /// `high-degree`), `pool`, `per_class`, `trials`, `seed`, `solver`,
    /// `tol`, `scoring` (`exclude-seeds`, `include-seeds`), `fixture_seed`.
    /// Relative file paths resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: Option<&std::path::Path>) -> Result<Self> {
        let mut kv: Vec<(String, String, usize)> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let split = content.find([':', '=']).ok_or_else(|| Error::Parse {
                line: lineno + 1,
                msg: format!("expected `key: value`, found {content:?}"),
            })?;
            let key = content[..split].trim().to_string();
            let value = content[split + 1..].trim().to_string();
            if kv.iter().any(|(k, _, _)| *k == key) {
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: format!("duplicate key {key:?}"),
                });
            }
            kv.push((key, value, lineno + 1));
        }
        let get = |key: &str| {
            kv.iter()
                .find(|(k, _, _)| k == key)
                .map(|(_, v, l)| (v.as_str(), *l))
        };
        fn num<T: FromStr>(key: &str, v: (&str, usize)) -> Result<T>
        where
            T::Err: fmt::Display,
        {
            v.0.parse().map_err(|e| Error::Parse {
                line: v.1,
                msg: format!("bad value for {key}: {e}"),
            })
        }
        fn flag(key: &str, v: (&str, usize)) -> Result<bool> {
            match v.0 {
                "true" | "yes" | "1" => Ok(true),
                "false" | "no" | "0" => Ok(false),
                other => Err(Error::Parse {
                    line: v.1,
                    msg: format!("bad boolean for {key}: {other:?}"),
                }),
            }
        }

        let known = [
            "dataset",
            "edges",
            "labels",
            "allow_components",
            "method",
            "sigma",
            "grid",
            "grid_min",
            "grid_max",
            "grid_points",
            "strategy",
            "pool",
            "per_class",
            "trials",
            "seed",
            "solver",
            "tol",
            "scoring",
            "fixture_seed",
        ];
        if let Some((k, _, l)) = kv.iter().find(|(k, _, _)| !known.contains(&k.as_str())) {
            return Err(Error::Parse {
                line: *l,
                msg: format!("unknown key {k:?}"),
            });
        }

        let resolve = |p: &str| -> PathBuf {
            let path = PathBuf::from(p);
            match base_dir {
                Some(dir) if path.is_relative() => dir.join(path),
                _ => path,
            }
        };
        let dataset = match (get("dataset"), get("edges"), get("labels")) {
            (Some(d), None, None) => match d.0 {
                "lesmis" | "les-miserables" => DatasetSource::LesMis,
                "wikimath-synthetic" | "wikimath" => DatasetSource::SyntheticWikiMath {
                    seed: get("fixture_seed")
                        .map(|v| num("fixture_seed", v))
                        .transpose()?
                        .unwrap_or(0),
                },
                other => {
                    return Err(Error::Parse {
                        line: d.1,
                        msg: format!("unknown dataset {other:?}"),
                    })
                }
            },
            (None, Some(e), Some(l)) => DatasetSource::Files {
                edges: resolve(e.0),
                labels: resolve(l.0),
                allow_components: get("allow_components")
                    .map(|v| flag("allow_components", v))
                    .transpose()?
                    .unwrap_or(false),
            },
            _ => {
                return Err(Error::InvalidParameter(
                    "config needs either `dataset` or both `edges` and `labels`".into(),
                ))
            }
        };

        let method_entry =
            get("method").ok_or_else(|| Error::InvalidParameter("config needs `method`".into()))?;
        let mut method: Method = method_entry.0.parse()?;
        if let Some(v) = get("sigma") {
            match &mut method {
                Method::Generalized { sigma } => *sigma = num("sigma", v)?,
                _ => {
                    return Err(Error::Parse {
                        line: v.1,
                        msg: "sigma only applies to method `generalized`".into(),
                    })
                }
            }
        }

        let mut cfg = SweepConfig::new(dataset, method);
        match (
            get("grid"),
            get("grid_min"),
            get("grid_max"),
            get("grid_points"),
        ) {
            (Some(v), None, None, None) => {
                cfg.grid =
                    v.0.split(',')
                        .map(|s| num("grid", (s.trim(), v.1)))
                        .collect::<Result<_>>()?;
            }
            (None, lo, hi, pts) if lo.is_some() || hi.is_some() || pts.is_some() => {
                let lo = lo.map(|v| num("grid_min", v)).transpose()?.unwrap_or(1e-3);
                let hi = hi.map(|v| num("grid_max", v)).transpose()?.unwrap_or(1e3);
                let pts = pts
                    .map(|v| num("grid_points", v))
                    .transpose()?
                    .unwrap_or(25);
                cfg.grid = logspace(lo, hi, pts)?;
            }
            (None, None, None, None) => {}
            _ => {
                return Err(Error::InvalidParameter(
                    "use either `grid` or `grid_min`/`grid_max`/`grid_points`".into(),
                ))
            }
        }
        cfg.strategy = match get("strategy") {
            None => SeedStrategy::Uniform,
            Some(("uniform", _)) => SeedStrategy::Uniform,
            Some(("high-degree", _)) => SeedStrategy::HighDegree {
                pool: get("pool")
                    .map(|v| num("pool", v))
                    .transpose()?
                    .unwrap_or(3),
            },
            Some((other, line)) => {
                return Err(Error::Parse {
                    line,
                    msg: format!("unknown strategy {other:?}"),
                })
            }
        };
        if let Some(v) = get("per_class") {
            cfg.per_class = num("per_class", v)?;
        }
        if let Some(v) = get("trials") {
            cfg.n_trials = num("trials", v)?;
        }
        if let Some(v) = get("seed") {
            cfg.rng_seed = num("seed", v)?;
        }
        if let Some(v) = get("solver") {
            cfg.solver = match v.0 {
                "auto" => None,
                s => Some(s.parse()?),
            };
        }
        if let Some(v) = get("tol") {
            cfg.tolerance = num("tol", v)?;
        }
        if let Some(v) = get("scoring") {
            cfg.scoring = match v.0 {
                "exclude-seeds" => SeedScoring::ExcludeSeeds,
                "include-seeds" => SeedScoring::IncludeSeeds,
                other => {
                    return Err(Error::Parse {
                        line: v.1,
                        msg: format!("unknown scoring {other:?}"),
                    })
                }
            };
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub method: String,
    pub param: f64,
    pub trial: usize,
    pub precision: f64,
}

/// Rows ordered by parameter, then trial.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

/// Mean and sample standard deviation of precision at one parameter value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub param: f64,
    pub mean: f64,
    pub std: f64,
    pub trials: usize,
}

impl SweepResult {
    /// Method tags in order of first appearance.
    pub fn methods(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.method) {
                out.push(r.method.clone());
            }
        }
        out
    }

    /// Per-parameter mean precision of `method`, in row order.
    pub fn curve(&self, method: &str) -> Vec<CurvePoint> {
        let mut out: Vec<(f64, Vec<f64>)> = Vec::new();
        for r in self.rows.iter().filter(|r| r.method == method) {
            match out.last_mut() {
                Some((p, v)) if *p == r.param => v.push(r.precision),
                _ => out.push((r.param, vec![r.precision])),
            }
        }
        out.into_iter()
            .map(|(param, v)| {
                let n = v.len() as f64;
                let mean = v.iter().sum::<f64>() / n;
                let var = if v.len() > 1 {
                    v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
                } else {
                    0.0
                };
                CurvePoint {
                    param,
                    mean,
                    std: var.sqrt(),
                    trials: v.len(),
                }
            })
            .collect()
    }

    pub fn merge(mut self, other: SweepResult) -> SweepResult {
        self.rows.extend(other.rows);
        self
    }
}

/// Formats `x` with 6 significant digits.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let e = x.abs().log10().floor() as i32;
    if (-5..6).contains(&e) {
        format!("{:.*}", (5 - e) as usize, x)
    } else {
        format!("{x:.5e}")
    }
}

pub fn write_csv<W: Write>(result: &SweepResult, mut out: W) -> std::io::Result<()> {
    writeln!(out, "method,param,trial,precision")?;
    for r in &result.rows {
        writeln!(
            out,
            "{},{},{},{}",
            r.method,
            format_sig6(r.param),
            r.trial,
            format_sig6(r.precision)
        )?;
    }
    Ok(())
}

pub fn read_csv<R: BufRead>(reader: R) -> Result<SweepResult> {
    let mut rows = Vec::new();
    let mut lines = reader.lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    if header.trim() != "method,param,trial,precision" {
        return Err(Error::Parse {
            line: 1,
            msg: "expected header `method,param,trial,precision`".into(),
        });
    }
    for (k, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let lineno = k + 2;
        let bad = |msg: String| Error::Parse { line: lineno, msg };
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != 4 {
            return Err(bad(format!("expected 4 fields, found {}", fields.len())));
        }
        rows.push(SweepRow {
            method: fields[0].to_string(),
            param: fields[1]
                .parse()
                .map_err(|e| bad(format!("bad param: {e}")))?,
            trial: fields[2]
                .parse()
                .map_err(|e| bad(format!("bad trial: {e}")))?,
            precision: fields[3]
                .parse()
                .map_err(|e| bad(format!("bad precision: {e}")))?,
        });
    }
    Ok(SweepResult { rows })
}

/// Loads the configured dataset and runs the sweep.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let (g, truth) = cfg.dataset.load()?;
    run_sweep_on(&g, &truth, cfg)
}

/// Runs the sweep on an already loaded dataset (`cfg.dataset` is ignored).
///
/// Trial `t` draws its seeds with `cfg.trial_seed(t)`. For every grid value
/// the kernel is prepared once and applied to the seed matrices of all
/// trials side by side.
pub fn run_sweep_on(g: &Graph, truth: &GroundTruth, cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    if truth.n_nodes() != g.n_nodes() {
        return Err(Error::DimensionMismatch {
            expected: g.n_nodes(),
            got: truth.n_nodes(),
        });
    }
    let k = truth.n_classes();
    let seeds: Vec<Seeds> = (0..cfg.n_trials)
        .map(|t| sample_seeds(truth, g, cfg.strategy, cfg.per_class, cfg.trial_seed(t)))
        .collect::<Result<_>>()?;
    let n = g.n_nodes();
    let mut rhs = DMatrix::zeros(n, k * cfg.n_trials);
    for (t, s) in seeds.iter().enumerate() {
        let y = build_label_matrix(s.iter().map(|(&a, &b)| (a, b)), n, k)?;
        rhs.columns_mut(t * k, k).copy_from(y.as_matrix());
    }
    let solver = cfg.solver_for(n);
    let tag = cfg.method.tag();

    let per_param: Vec<Vec<SweepRow>> = cfg
        .grid
        .par_iter()
        .map(|&param| {
            let spec = cfg.method.kernel_spec(param, solver);
            let f = PreparedKernel::new(g, &spec)?.apply(&rhs)?;
            Ok(seeds
                .iter()
                .enumerate()
                .map(|(t, s)| {
                    let block =
                        ClassificationMatrix::new(f.as_matrix().columns(t * k, k).into_owned());
                    let predicted = classify(&block);
                    SweepRow {
                        method: tag.to_string(),
                        param,
                        trial: t,
                        precision: precision_with(&predicted, truth, s, cfg.scoring),
                    }
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(SweepResult {
        rows: per_param.into_iter().flatten().collect(),
    })
}
