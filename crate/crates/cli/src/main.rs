mod format;
mod matrix_file;

use std::fmt;
use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use unitparam::entanglement::{bound_b_plain, multipartite_bound_b, BoundReport};
use unitparam::scan::{distill_verdict, fig1_matrix, fig1_scan, optimize_bound, werner_state, ScanRow};
use unitparam::states::random_density;
use unitparam::{build_unitary, decompose, DensityMatrix, OptimizerConfig, ParamMatrix, Unitary};

use matrix_file::MatrixFile;

const INDEXING_NOTE: &str = "\
Indexing: basis labels in reports (sigma pairs such as ka=1, la=2) are
1-based, matching |1>..|d>. Matrix files and parameter vectors are 0-based,
row-major: entry (r, c) of a d x d file sits at data[r*d + c].

Exit codes: 0 success, 2 input error, 3 numerical failure.";

/// Composite unitary parameterization and m-concurrence bounds.
#[derive(Parser)]
#[command(name = "unitparam", version, after_help = INDEXING_NOTE)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the unitary built from a parameter matrix (JSON matrix file).
    GenUnitary(GenUnitary),
    /// Print the canonical parameter matrix of a unitary.
    Decompose {
        /// Unitary as a JSON matrix file.
        #[arg(long)]
        input: PathBuf,
    },
    /// Print a density matrix from one of the built-in families.
    GenState {
        #[command(subcommand)]
        kind: StateKind,
    },
    /// Report the m-concurrence lower bound B, optionally maximized over local unitaries.
    Bound(BoundArgs),
    /// Search for a 2x2 subspace witnessing distillability.
    Distill(DistillArgs),
    /// Scan alpha|Psi1><Psi1| + beta|Psi2><Psi2| + (1-alpha-beta)/9 over a grid; write CSV.
    Fig1(Fig1Args),
}

#[derive(Args)]
struct GenUnitary {
    /// Dimension d of the unitary.
    #[arg(long)]
    dim: usize,
    /// Draw the angles uniformly from their canonical ranges.
    #[arg(long, required_unless_present = "params", conflicts_with = "params")]
    seed: Option<u64>,
    /// Real d x d parameter matrix (diagonal: phases, upper: rotations, lower: relative phases).
    #[arg(long)]
    params: Option<PathBuf>,
}

#[derive(Subcommand)]
enum StateKind {
    /// w|Phi+><Phi+| + (1-w)I/4 on two qubits.
    Werner {
        #[arg(long)]
        weight: f64,
    },
    /// alpha|Psi1><Psi1| + beta|Psi2><Psi2| + (1-alpha-beta)I/9 on two qutrits.
    Mixture {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
    },
    /// Rank-at-most-k state from uniformly drawn parameters.
    Random {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        rank: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct SearchArgs {
    /// Optimizer restarts; the first always starts at identity unitaries.
    #[arg(long, default_value_t = 12)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SearchArgs {
    fn config(&self) -> Result<OptimizerConfig, CliError> {
        if self.restarts == 0 {
            return Err(CliError::Input("--restarts must be at least 1".into()));
        }
        Ok(OptimizerConfig {
            restarts: self.restarts,
            seed: self.seed,
            ..Default::default()
        })
    }
}

#[derive(Args)]
struct BoundArgs {
    /// Density matrix as a JSON matrix file.
    #[arg(long)]
    state: PathBuf,
    /// Local dimensions, e.g. 3,3. More than two gives the multipartite bound.
    #[arg(long, value_delimiter = ',', required = true)]
    dims: Vec<usize>,
    /// Also maximize the bound over local unitaries (bipartite only).
    #[arg(long)]
    optimize: bool,
    #[command(flatten)]
    search: SearchArgs,
    /// Divide bounds by sqrt(2(d-1)/d), the value for a maximally entangled state.
    #[arg(long)]
    normalize: bool,
}

#[derive(Args)]
struct DistillArgs {
    #[arg(long)]
    state: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    dims: Vec<usize>,
    /// Test the n-copy state rho^(x)n.
    #[arg(long, default_value_t = 1)]
    copies: usize,
    #[command(flatten)]
    search: SearchArgs,
}

#[derive(Args)]
struct Fig1Args {
    /// Grid step h, with 0 < h <= 0.25.
    #[arg(long)]
    step: f64,
    /// Add the optimized bound column.
    #[arg(long)]
    optimize: bool,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug)]
enum CliError {
    Input(String),
    Numerical(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Numerical(m) => f.write_str(m),
        }
    }
}

impl From<unitparam::Error> for CliError {
    fn from(e: unitparam::Error) -> Self {
        match e {
            unitparam::Error::ConvergenceFailure => CliError::Numerical(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                CliError::Input(_) => 2,
                CliError::Numerical(_) => 3,
            })
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::GenUnitary(args) => gen_unitary(args),
        Command::Decompose { input } => {
            let u = Unitary::new(MatrixFile::read(&input)?.into_matrix()?)?;
            let p = decompose(&u)?;
            print_json(&MatrixFile::from_real(p.dim(), p.dim(), p.as_slice()))
        }
        Command::GenState { kind } => {
            let rho = match kind {
                StateKind::Werner { weight } => werner_state(weight)?,
                StateKind::Mixture { alpha, beta } => DensityMatrix::new(fig1_matrix(alpha, beta), 1e-9)?,
                StateKind::Random { dim, rank, seed } => {
                    random_density(dim, rank, &mut ChaCha8Rng::seed_from_u64(seed))?
                }
            };
            print_json(&MatrixFile::from_matrix(rho.matrix()))
        }
        Command::Bound(args) => bound(args),
        Command::Distill(args) => distill(args),
        Command::Fig1(args) => fig1(args),
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Numerical(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn gen_unitary(args: GenUnitary) -> Result<(), CliError> {
    let d = args.dim;
    if d < 2 {
        return Err(CliError::Input("--dim must be at least 2".into()));
    }
    let p = match (args.seed, args.params) {
        (Some(seed), _) => ParamMatrix::random(d, &mut ChaCha8Rng::seed_from_u64(seed))?,
        (None, Some(path)) => {
            let (rows, cols, values) = MatrixFile::read(&path)?.into_real()?;
            if rows != d || cols != d {
                return Err(CliError::Input(format!(
                    "parameter file is {rows}x{cols}, expected {d}x{d}"
                )));
            }
            ParamMatrix::from_vec(d, values)?
        }
        (None, None) => unreachable!("clap requires --seed or --params"),
    };
    print_json(&MatrixFile::from_matrix(build_unitary(&p).matrix()))
}

fn read_state(path: &Path) -> Result<DensityMatrix, CliError> {
    Ok(DensityMatrix::new(MatrixFile::read(path)?.into_matrix()?, 1e-9)?)
}

fn bipartite_dims(dims: &[usize]) -> Result<(usize, usize), CliError> {
    match dims {
        [a, b] => Ok((*a, *b)),
        _ => Err(CliError::Input(format!(
            "expected two local dimensions, got {}",
            dims.len()
        ))),
    }
}

fn report_json(r: &BoundReport, scale: f64) -> Value {
    let terms: Vec<Value> = r
        .terms
        .iter()
        .map(|t| json!({ "ka": t.ka, "la": t.la, "kb": t.kb, "lb": t.lb, "x": t.x }))
        .collect();
    json!({ "bound": r.bound / scale, "bound_sq": r.bound_sq, "terms": terms })
}

fn bound(args: BoundArgs) -> Result<(), CliError> {
    let rho = read_state(&args.state)?;
    if args.dims.len() > 2 {
        if args.optimize {
            return Err(CliError::Input("--optimize needs exactly two local dimensions".into()));
        }
        let r = multipartite_bound_b(&rho, &args.dims, None)?;
        let parts: Vec<Value> = r
            .parts
            .iter()
            .map(|(bp, rep)| {
                let label = |s: &[usize]| s.iter().map(|i| i + 1).collect::<Vec<_>>();
                json!({ "alpha": label(&bp.alpha), "beta": label(&bp.beta), "bound_sq": rep.bound_sq })
            })
            .collect();
        return print_json(
            &json!({ "dims": args.dims, "bound": r.bound, "bound_sq": r.bound_sq, "bipartitions": parts }),
        );
    }
    let (da, db) = bipartite_dims(&args.dims)?;
    let plain = bound_b_plain(&rho, da, db)?;
    let scale = if args.normalize { plain.normalization } else { 1.0 };
    let mut out = json!({
        "dims": [da, db],
        "normalized": args.normalize,
        "normalization": plain.normalization,
        "plain": report_json(&plain, scale),
    });
    if args.optimize {
        let opt = optimize_bound(&rho, da, db, &args.search.config()?)?;
        let la = da * da - da;
        let mut o = report_json(&opt.report, scale);
        o["params_a"] = json!(opt.run.best_params[..la]);
        o["params_b"] = json!(opt.run.best_params[la..]);
        o["evaluations"] = json!(opt.run.evaluations);
        o["restarts"] = json!(opt.run.restarts);
        out["optimized"] = o;
    }
    print_json(&out)
}

fn distill(args: DistillArgs) -> Result<(), CliError> {
    let rho = read_state(&args.state)?;
    let (da, db) = bipartite_dims(&args.dims)?;
    let v = distill_verdict(&rho, da, db, args.copies, &args.search.config()?)?;
    print_json(&json!({
        "max_x_sq": v.max_x_sq,
        "distillable_witness": v.witness,
        "param_count": v.param_count,
        "copies": v.copies,
        "local_dims": [v.local_dims.0, v.local_dims.1],
    }))
}

fn fig1(args: Fig1Args) -> Result<(), CliError> {
    let cfg = args.search.config()?;
    // fail on an unwritable path before spending time on the scan
    let file =
        File::create(&args.out).map_err(|e| CliError::Input(format!("cannot write {}: {e}", args.out.display())))?;
    let rows = fig1_scan(args.step, args.optimize.then_some(&cfg))?;
    write_scan(file, &rows).map_err(|e| CliError::Input(format!("cannot write {}: {e}", args.out.display())))?;
    println!("wrote {} rows to {}", rows.len(), args.out.display());
    Ok(())
}

fn write_scan(file: File, rows: &[ScanRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(file);
    w.write_record(["alpha", "beta", "is_state", "is_ppt", "bound_plain", "bound_opt"])?;
    for r in rows {
        w.write_record([
            format::sig(r.alpha, 12),
            format::sig(r.beta, 12),
            r.is_state.to_string(),
            r.is_ppt.to_string(),
            format::sig(r.bound_plain, 12),
            r.bound_opt.map(|b| format::sig(b, 12)).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
