use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use varinv::gen::{self, GeneratorKind, HILBERT_RECOMMENDED_MAX};
use varinv::io::{self, ComparisonRow, TraceFormat, TraceMeta};
use varinv::sweep::compare_methods;
use varinv::dense::frob_norm;
use varinv::solver::compute_residual;
use varinv::{AnyMatrix, DenomMode, Matrix, Method, Scalar, SolveReport, SolverConfig};

/// Iterative dense matrix inversion with Schultz-type methods.
#[derive(Parser, Debug)]
#[command(name = "varinv", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a test matrix and write it in Matrix Market format.
    Gen {
        #[command(flatten)]
        gen: GenArgs,
        /// Destination file; standard output when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Invert one matrix with one method.
    Run {
        #[arg(long, default_value = "sshp2")]
        method: Method,
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Run several methods on the same matrix and tabulate the results.
    Compare {
        /// Comma-separated list, at least two.
        #[arg(long, value_delimiter = ',', default_value = "sshp2,hp2,hp3")]
        methods: Vec<Method>,
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        solve: SolveArgs,
        /// Write the comparison table as CSV.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct GenArgs {
    /// spd, diag-dominant, hilbert, two-eig, random-complex or symmetric.
    #[arg(long = "gen", value_name = "KIND")]
    kind: GeneratorKind,
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// First eigenvalue of two-eig.
    #[arg(long, default_value_t = 2.0)]
    eig_a: f64,
    /// Second eigenvalue of two-eig.
    #[arg(long, default_value_t = 5.0)]
    eig_b: f64,
    /// Let two-eig produce equal eigenvalues.
    #[arg(long)]
    allow_degenerate: bool,
    /// Produce a complex matrix.
    #[arg(long)]
    complex: bool,
}

#[derive(Args, Debug)]
struct SourceArgs {
    /// Matrix Market input file.
    #[arg(long, conflicts_with = "kind", required_unless_present = "kind")]
    input: Option<PathBuf>,
    /// Generate the matrix instead of reading it.
    #[arg(long = "gen", value_name = "KIND")]
    kind: Option<GeneratorKind>,
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2.0)]
    eig_a: f64,
    #[arg(long, default_value_t = 5.0)]
    eig_b: f64,
    #[arg(long)]
    allow_degenerate: bool,
    /// Solve in complex arithmetic even for real input.
    #[arg(long)]
    complex: bool,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long, default_value_t = 1e-10)]
    eps: f64,
    #[arg(long, default_value_t = 1000)]
    max_iter: usize,
    /// Determinant tolerance (default 1e-12 real, 1e-5 complex).
    #[arg(long)]
    denom_tol: Option<f64>,
    /// Compare the determinant against the tolerance times max(1, c00 c11).
    #[arg(long)]
    denom_rel: bool,
    /// Write the iteration trace here.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Trace format; taken from the trace file extension when omitted.
    #[arg(long)]
    format: Option<TraceFormat>,
    /// Rebuild the residual from A every iteration instead of propagating it.
    #[arg(long)]
    recompute_residual: bool,
}

impl SolveArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            epsilon: self.eps,
            max_iter: self.max_iter,
            denom_tol: self.denom_tol,
            denom_mode: if self.denom_rel {
                DenomMode::Relative
            } else {
                DenomMode::Absolute
            },
            recompute_residual: self.recompute_residual,
            ..SolverConfig::default()
        }
    }

    fn trace_format(&self, path: &Path) -> TraceFormat {
        self.format.unwrap_or_else(|| TraceFormat::from_path(path))
    }
}

fn kind_with_params(kind: GeneratorKind, a: f64, b: f64, allow_degenerate: bool) -> GeneratorKind {
    match kind {
        GeneratorKind::TwoEig { .. } => GeneratorKind::TwoEig {
            a,
            b,
            allow_degenerate,
        },
        other => other,
    }
}

fn generate(kind: GeneratorKind, n: usize, seed: u64, complex: bool) -> Result<AnyMatrix> {
    if kind == GeneratorKind::Hilbert && n > HILBERT_RECOMMENDED_MAX {
        eprintln!(
            "warning: hilbert matrices beyond n = {HILBERT_RECOMMENDED_MAX} are too ill-conditioned to invert in double precision"
        );
    }
    let m = gen::generate(kind, n, seed).with_context(|| format!("generating {kind} matrix"))?;
    Ok(if complex { AnyMatrix::Complex(m.into_complex()) } else { m })
}

/// The matrix to solve and, when generated, its seed.
fn load(src: &SourceArgs) -> Result<(AnyMatrix, Option<u64>)> {
    let (m, seed) = match (&src.input, src.kind) {
        (Some(path), _) => (
            io::read_matrix_market(path).with_context(|| format!("reading {}", path.display()))?,
            None,
        ),
        (None, Some(kind)) => {
            let kind = kind_with_params(kind, src.eig_a, src.eig_b, src.allow_degenerate);
            (generate(kind, src.n, src.seed, false)?, Some(src.seed))
        }
        (None, None) => bail!("either --input or --gen is required"),
    };
    let (rows, cols) = m.shape();
    if rows != cols {
        bail!("matrix must be square, got {rows}x{cols}");
    }
    Ok((if src.complex { AnyMatrix::Complex(m.into_complex()) } else { m }, seed))
}

/// `||I - A X||_F` computed from scratch.
fn check_residual<T: Scalar>(a: &Matrix<T>, r: &SolveReport<T>) -> Result<f64> {
    Ok(frob_norm(&compute_residual(a, &r.x)?))
}

/// Warn when the propagated residual has drifted away from the true one.
fn warn_on_drift<T: Scalar>(r: &SolveReport<T>, check_res: f64) {
    if r.converged && (check_res.is_nan() || check_res >= r.config.epsilon) {
        eprintln!(
            "warning: {}: recomputed residual {check_res:.3e} is above eps although the propagated residual is {:.3e}; \
             the input is likely too ill-conditioned, try --recompute-residual",
            r.method, r.final_res
        );
    }
}

fn summary<T: Scalar>(r: &SolveReport<T>, check_res: f64) -> String {
    format!(
        "method={} n={} iterations={} final_res={:.6e} check_res={:.6e} matmuls={} wall_ms={:.3} converged={} stop={}",
        r.method,
        r.n(),
        r.iterations,
        r.final_res,
        check_res,
        r.matmul_count,
        r.wall_ns as f64 / 1e6,
        r.converged,
        format!("{:?}", r.stop_reason).to_lowercase()
    )
}

/// `trace.csv` becomes `trace-hp2.csv`.
fn per_method_path(path: &Path, method: Method) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("trace");
    let name = match path.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}-{method}.{ext}"),
        None => format!("{stem}-{method}"),
    };
    path.with_file_name(name)
}

fn run_one<T: Scalar>(a: &Matrix<T>, method: Method, solve: &SolveArgs, seed: Option<u64>) -> Result<bool> {
    let cfg = solve.config();
    let report = varinv::solver::run(a, method, &cfg)?;
    let check_res = check_residual(a, &report)?;
    println!("{}", summary(&report, check_res));
    warn_on_drift(&report, check_res);
    if let Some(path) = &solve.trace {
        io::export_trace(&report, solve.trace_format(path), path, &TraceMeta { seed })
            .with_context(|| format!("writing trace {}", path.display()))?;
    }
    Ok(report.converged)
}

fn compare_all<T: Scalar>(
    a: &Matrix<T>,
    methods: &[Method],
    solve: &SolveArgs,
    seed: Option<u64>,
    output: Option<&Path>,
) -> Result<bool> {
    let cfg = solve.config();
    let reports = compare_methods(a, methods, &cfg)
        .into_iter()
        .collect::<varinv::Result<Vec<_>>>()?;
    println!(
        "{:<8} {:>10} {:>8} {:>14} {:>10} {:>10} {:>14}",
        "method", "iterations", "matmuls", "final_res", "converged", "wall_ms", "check_res"
    );
    let mut checks = Vec::with_capacity(reports.len());
    for r in &reports {
        let check_res = check_residual(a, r)?;
        println!(
            "{:<8} {:>10} {:>8} {:>14.6e} {:>10} {:>10.3} {:>14.6e}",
            r.method.as_str(),
            r.iterations,
            r.matmul_count,
            r.final_res,
            r.converged,
            r.wall_ns as f64 / 1e6,
            check_res
        );
        checks.push(check_res);
    }
    for (r, &c) in reports.iter().zip(&checks) {
        warn_on_drift(r, c);
    }
    if let Some(path) = output {
        let rows: Vec<ComparisonRow> = reports.iter().map(ComparisonRow::from_report).collect();
        let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        io::write_comparison_csv(&rows, std::io::BufWriter::new(file))?;
    }
    if let Some(path) = &solve.trace {
        let format = solve.trace_format(path);
        for r in &reports {
            let p = per_method_path(path, r.method);
            io::export_trace(r, format, &p, &TraceMeta { seed })
                .with_context(|| format!("writing trace {}", p.display()))?;
        }
    }
    Ok(reports.iter().all(|r| r.converged))
}

fn execute(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Gen { gen: g, output } => {
            let kind = kind_with_params(g.kind, g.eig_a, g.eig_b, g.allow_degenerate);
            let m = generate(kind, g.n, g.seed, g.complex)?;
            match output {
                Some(path) => io::write_any_matrix_market(&m, &path)
                    .with_context(|| format!("writing {}", path.display()))?,
                None => print!(
                    "{}",
                    match &m {
                        AnyMatrix::Real(m) => io::format_matrix_market(m),
                        AnyMatrix::Complex(m) => io::format_matrix_market(m),
                    }
                ),
            }
            Ok(true)
        }
        Command::Run {
            method,
            source,
            solve,
        } => {
            let (m, seed) = load(&source)?;
            match &m {
                AnyMatrix::Real(a) => run_one(a, method, &solve, seed),
                AnyMatrix::Complex(a) => run_one(a, method, &solve, seed),
            }
        }
        Command::Compare {
            methods,
            source,
            solve,
            output,
        } => {
            if methods.len() < 2 {
                bail!("compare needs at least two methods, got {}", methods.len());
            }
            let (m, seed) = load(&source)?;
            match &m {
                AnyMatrix::Real(a) => compare_all(a, &methods, &solve, seed, output.as_deref()),
                AnyMatrix::Complex(a) => compare_all(a, &methods, &solve, seed, output.as_deref()),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
