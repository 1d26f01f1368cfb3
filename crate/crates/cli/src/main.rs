//! `lssl`: graph-based semi-supervised classification from the command line.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::info;

use lssl_core::classify::{build_label_matrix, classify, load_labels};
use lssl_core::datasets::{bundled_lesmis, synthetic_wikimath, write_dataset};
use lssl_core::experiments::{format_sig6, run_sweep, write_csv, Method, SweepConfig};
use lssl_core::graph::{load_edge_list, LoadOptions};
use lssl_core::kernels::PreparedKernel;
use lssl_core::ridge::{load_comparisons, ridge_estimate};
use lssl_core::verify::property_suite;
use lssl_core::{SolverKind, SolverSpec};

#[derive(Parser)]
#[command(
    name = "lssl",
    version,
    about = "Regularized Laplacian semi-supervised learning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify every node from a few labelled seeds.
    Classify(ClassifyArgs),
    /// Run a precision-vs-parameter sweep described by a config file.
    Sweep {
        /// `key: value` config file.
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the property suite and print a pass/fail table.
    Verify {
        /// Largest random graph used by the checks.
        #[arg(long, default_value_t = 12)]
        max_nodes: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Rate items from pairwise comparisons by ridge regression.
    Ridge {
        #[arg(long)]
        lambda: f64,
        /// File of `i j r` lines.
        #[arg(long)]
        input: PathBuf,
    },
    /// Write a bundled or synthetic dataset as edge and label files.
    Fixture {
        #[arg(value_enum)]
        name: FixtureName,
        #[arg(long)]
        edges: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        /// Generator seed for synthetic fixtures.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FixtureName {
    Lesmis,
    Wikimath,
}

#[derive(clap::Args)]
struct ClassifyArgs {
    /// Edge list of `i j [w]` lines.
    #[arg(long)]
    edges: PathBuf,
    /// Seed labels as `node class` lines.
    #[arg(long)]
    labels: PathBuf,
    /// One of rl, heat-standard, heat-normalized, heat-pagerank, pagerank, generalized.
    #[arg(long, default_value = "rl")]
    method: String,
    /// Regularization parameter of rl.
    #[arg(long)]
    beta: Option<f64>,
    /// Time parameter of the heat kernels.
    #[arg(long)]
    t: Option<f64>,
    /// Parameter of pagerank and generalized.
    #[arg(long)]
    mu: Option<f64>,
    /// Exponent of the generalized method.
    #[arg(long)]
    sigma: Option<f64>,
    /// cg, power or cholesky; chosen by graph size when omitted.
    #[arg(long)]
    solver: Option<String>,
    /// Solver tolerance; also the dropped Poisson mass for heat kernels.
    #[arg(long)]
    tol: Option<f64>,
    /// Accept graphs with more than one connected component.
    #[arg(long)]
    allow_components: bool,
}

/// Failure classes mapped to exit codes.
enum Failure {
    Input(String),
    Verification,
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.to_string())
    }
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn run_classify(args: ClassifyArgs, out: &mut impl Write) -> Result<(), Failure> {
    let mut method: Method = args.method.parse()?;
    match (&mut method, args.sigma) {
        (Method::Generalized { sigma }, Some(s)) => *sigma = s,
        (_, Some(_)) => {
            return Err(Failure::Input(
                "--sigma applies only to the generalized method".into(),
            ))
        }
        _ => {}
    }
    let given = [("beta", args.beta), ("t", args.t), ("mu", args.mu)];
    let wanted = method.parameter();
    if let Some((name, _)) = given.iter().find(|(n, v)| v.is_some() && *n != wanted) {
        return Err(Failure::Input(format!(
            "--{name} does not apply to {method}; use --{wanted}"
        )));
    }
    let param = given
        .iter()
        .find(|(n, _)| *n == wanted)
        .and_then(|(_, v)| *v)
        .ok_or_else(|| Failure::Input(format!("{method} needs --{wanted}")))?;

    let opts = LoadOptions {
        allow_components: args.allow_components,
    };
    let g = load_edge_list(open(&args.edges)?, opts)?;
    let seeds = load_labels(open(&args.labels)?, &g)?;
    let n_classes = seeds.values().max().map_or(0, |&c| c + 1);
    if n_classes == 0 {
        return Err(Failure::Input("label file contains no seeds".into()));
    }
    let y = build_label_matrix(seeds.iter().map(|(&i, &c)| (i, c)), g.n_nodes(), n_classes)?;

    let mut solver = match &args.solver {
        Some(s) => SolverSpec::new(s.parse::<SolverKind>()?),
        None => SolverSpec::auto(g.n_nodes()),
    };
    if let Some(tol) = args.tol {
        solver = solver.with_tolerance(tol);
    }
    let mut spec = method.kernel_spec(param, solver);
    if let Some(tol) = args.tol {
        spec = spec.with_heat_tol(tol);
    }
    info!(
        "{} nodes, {} edges, {} classes, {method} {wanted} = {param}",
        g.n_nodes(),
        g.n_edges(),
        n_classes
    );
    let f = PreparedKernel::new(&g, &spec)?.apply(y.as_matrix())?;
    for (i, class) in classify(&f).into_iter().enumerate() {
        writeln!(out, "{} {class}", g.name(i))?;
    }
    Ok(())
}

fn run_sweep_command(config: &Path, out_path: &Path, out: &mut impl Write) -> Result<(), Failure> {
    let text = std::fs::read_to_string(config)
        .map_err(|e| Failure::Input(format!("{}: {e}", config.display())))?;
    let cfg = SweepConfig::parse(&text, config.parent())?;
    let result = run_sweep(&cfg)?;
    let file = File::create(out_path)
        .map_err(|e| Failure::Input(format!("{}: {e}", out_path.display())))?;
    let mut csv = BufWriter::new(file);
    write_csv(&result, &mut csv)?;
    csv.flush()?;
    writeln!(out, "method {} mean std", cfg.method.parameter())?;
    for method in result.methods() {
        for p in result.curve(&method) {
            writeln!(
                out,
                "{method} {} {:.4} {:.4}",
                format_sig6(p.param),
                p.mean,
                p.std
            )?;
        }
    }
    Ok(())
}

fn run_verify(max_nodes: usize, seed: u64, out: &mut impl Write) -> Result<(), Failure> {
    let checks = property_suite(max_nodes, seed);
    let failed = checks.iter().filter(|c| !c.passed).count();
    for check in &checks {
        writeln!(out, "{check}")?;
    }
    writeln!(out, "{} checks, {failed} failed", checks.len())?;
    if failed > 0 {
        return Err(Failure::Verification);
    }
    Ok(())
}

fn run_ridge(lambda: f64, input: &Path, out: &mut impl Write) -> Result<(), Failure> {
    let c = load_comparisons(open(input)?)?;
    let v = ridge_estimate(&c, lambda)?;
    for (name, value) in c.names().iter().zip(v) {
        writeln!(out, "{name} {value}")?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    match cli.command {
        Command::Classify(args) => run_classify(args, &mut out)?,
        Command::Sweep { config, out: path } => run_sweep_command(&config, &path, &mut out)?,
        Command::Verify { max_nodes, seed } => {
            // Flush the table even when a check fails.
            let res = run_verify(max_nodes, seed, &mut out);
            out.flush()?;
            return res;
        }
        Command::Ridge { lambda, input } => run_ridge(lambda, &input, &mut out)?,
        Command::Fixture {
            name,
            edges,
            labels,
            seed,
        } => {
            let (g, truth) = match name {
                FixtureName::Lesmis => bundled_lesmis()?,
                FixtureName::Wikimath => synthetic_wikimath(seed)?,
            };
            write_dataset(&g, &truth, &edges, &labels)?;
            writeln!(
                out,
                "{} nodes, {} edges, {} classes",
                g.n_nodes(),
                g.n_edges(),
                truth.n_classes()
            )?;
        }
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Verification) => ExitCode::from(2),
    }
}
