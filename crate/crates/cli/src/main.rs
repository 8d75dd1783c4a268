use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use loopmp::engine::ConvergenceConfig;
use loopmp::graph::ViewMode;
use loopmp_cli::bench::{bench_ising, bench_triangle, BenchMethod, BenchResult, IsingBenchConfig, TriangleBenchConfig};
use loopmp_cli::commands::{self, HoodKind, InferOptions, Method, Target, View};

#[derive(Parser)]
#[command(name = "loopmp", version, about = "Message passing on loopy graphical models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an engine on a graph file and write the inference report.
    Infer(InferArgs),
    /// Partition-function errors on random periodic triangle chains.
    BenchTriangle(BenchTriangleArgs),
    /// Partition-function errors on an Ising triangle chain across temperatures.
    BenchIsing(BenchIsingArgs),
    /// Map a graph into another class.
    Transform(TransformArgs),
    /// Draw a neighborhood as DOT.
    Neighborhood(NeighborhoodArgs),
    /// Check a graph file and summarize its structure.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct Convergence {
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long = "max-iter", default_value_t = 2000)]
    max_iter: usize,
    #[arg(long, default_value_t = 0.0)]
    damping: f64,
}

impl Convergence {
    fn config(&self) -> ConvergenceConfig {
        ConvergenceConfig { tolerance: self.tol, max_iterations: self.max_iter, damping: self.damping }
    }
}

#[derive(Args)]
struct Output {
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Bp,
    Kcn,
    Te,
    GmKcn,
    Blockbp,
}

#[derive(Args)]
struct InferArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, value_enum, default_value = "kcn")]
    method: MethodArg,
    #[arg(long, default_value_t = 3)]
    l0: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Compare against full enumeration when affordable.
    #[arg(long)]
    exact: bool,
    #[command(flatten)]
    convergence: Convergence,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum BenchMethodArg {
    Bp,
    Kcn,
    Te4,
    Te2,
}

impl From<BenchMethodArg> for BenchMethod {
    fn from(m: BenchMethodArg) -> Self {
        match m {
            BenchMethodArg::Bp => BenchMethod::Bp,
            BenchMethodArg::Kcn => BenchMethod::Kcn,
            BenchMethodArg::Te4 => BenchMethod::Te4,
            BenchMethodArg::Te2 => BenchMethod::Te2,
        }
    }
}

#[derive(Args)]
struct BenchTriangleArgs {
    #[arg(long, value_delimiter = ',', default_value = "5,15,30,50")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    instances: usize,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "bp,kcn,te4,te2")]
    methods: Vec<BenchMethodArg>,
    #[arg(long, default_value_t = 3)]
    l0: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: TableFormat,
    #[arg(long, default_value_t = 1e-13)]
    tol: f64,
    #[arg(long = "max-iter", default_value_t = 5000)]
    max_iter: usize,
    #[arg(long, default_value_t = 0.0)]
    damping: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct BenchIsingArgs {
    #[arg(long, default_value_t = 50)]
    n: usize,
    /// Use an open chain instead of a periodic one.
    #[arg(long)]
    open: bool,
    /// Temperatures; defaults to 0.1, 0.2, ..., 4.0.
    #[arg(long, value_delimiter = ',')]
    temps: Vec<f64>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "bp,kcn,te4,te2")]
    methods: Vec<BenchMethodArg>,
    #[arg(long, default_value_t = 3)]
    l0: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: TableFormat,
    #[arg(long, default_value_t = 1e-13)]
    tol: f64,
    #[arg(long = "max-iter", default_value_t = 5000)]
    max_iter: usize,
    #[arg(long, default_value_t = 0.0)]
    damping: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    Network,
    Tn,
    Tn3,
    TnToNetwork,
    NetworkToTn,
}

#[derive(Args)]
struct TransformArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, value_enum)]
    to: TargetArg,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Kcn,
    Tensor,
    Wzpz,
}

#[derive(Clone, Copy, ValueEnum)]
enum ViewArg {
    Auto,
    Network,
    Tn,
    Bipartite,
}

#[derive(Args)]
struct NeighborhoodArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Name of the center node (a variable or factor name).
    #[arg(long)]
    center: String,
    #[arg(long, default_value_t = 3)]
    l0: usize,
    #[arg(long, value_enum, default_value = "kcn")]
    kind: KindArg,
    #[arg(long, value_enum, default_value = "auto")]
    view: ViewArg,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value_t = 3)]
    l0: usize,
}

struct Failure {
    code: i32,
    message: String,
}

impl From<loopmp::Error> for Failure {
    fn from(e: loopmp::Error) -> Self {
        Failure { code: commands::exit_code(&e), message: e.to_string() }
    }
}

fn read(path: &PathBuf) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure { code: commands::EXIT_INVALID, message: format!("{}: {e}", path.display()) })
}

fn write(output: &Output, text: &str) -> Result<(), Failure> {
    match &output.out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure { code: 1, message: format!("{}: {e}", p.display()) }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn table(result: &BenchResult, format: TableFormat) -> String {
    for r in &result.rows {
        let at = r.t_emp.map_or(format!("n={}", r.n), |t| format!("T={t}"));
        eprintln!("{at} {}: {:.3}s", r.method.name(), r.runtime.as_secs_f64());
    }
    match format {
        TableFormat::Csv => result.to_csv(),
        TableFormat::Json => result.to_json() + "\n",
    }
}

fn run(cli: Cli) -> Result<i32, Failure> {
    match cli.command {
        Command::Infer(a) => {
            let method = match a.method {
                MethodArg::Bp => Method::Bp,
                MethodArg::Kcn => Method::Kcn,
                MethodArg::Te => Method::Te,
                MethodArg::GmKcn => Method::GmKcn,
                MethodArg::Blockbp => Method::BlockBp,
            };
            let cfg = a.convergence.config();
            cfg.validate()?;
            let opts = InferOptions { method, l0: a.l0, seed: a.seed, convergence: cfg, exact: a.exact };
            let out = commands::infer(&read(&a.graph)?, &opts)?;
            write(&a.output, &(serde_json::to_string_pretty(&out).expect("report serializes") + "\n"))?;
            Ok(if out.report.converged { commands::EXIT_OK } else { commands::EXIT_NOT_CONVERGED })
        }
        Command::BenchTriangle(a) => {
            let cfg = TriangleBenchConfig {
                sizes: a.sizes,
                instances: a.instances,
                seed: a.seed,
                methods: a.methods.into_iter().map(Into::into).collect(),
                l0: a.l0,
                convergence: ConvergenceConfig { tolerance: a.tol, max_iterations: a.max_iter, damping: a.damping },
            };
            let result = bench_triangle(&cfg)?;
            write(&a.output, &table(&result, a.format))?;
            Ok(commands::EXIT_OK)
        }
        Command::BenchIsing(a) => {
            let mut cfg = IsingBenchConfig {
                n: a.n,
                periodic: !a.open,
                methods: a.methods.into_iter().map(Into::into).collect(),
                l0: a.l0,
                convergence: ConvergenceConfig { tolerance: a.tol, max_iterations: a.max_iter, damping: a.damping },
                ..IsingBenchConfig::default()
            };
            if !a.temps.is_empty() {
                cfg.temperatures = a.temps;
            }
            let result = bench_ising(&cfg)?;
            write(&a.output, &table(&result, a.format))?;
            Ok(commands::EXIT_OK)
        }
        Command::Transform(a) => {
            let to = match a.to {
                TargetArg::Network => Target::Network,
                TargetArg::Tn => Target::Tn,
                TargetArg::Tn3 => Target::Tn3,
                TargetArg::TnToNetwork => Target::TnToNetwork,
                TargetArg::NetworkToTn => Target::NetworkToTn,
            };
            write(&a.output, &(commands::transform(&read(&a.graph)?, to)? + "\n"))?;
            Ok(commands::EXIT_OK)
        }
        Command::Neighborhood(a) => {
            let kind = match a.kind {
                KindArg::Kcn => HoodKind::Kcn,
                KindArg::Tensor => HoodKind::Tensor,
                KindArg::Wzpz => HoodKind::Wzpz,
            };
            let view = match a.view {
                ViewArg::Auto => View::Auto,
                ViewArg::Network => View::Fixed(ViewMode::Network),
                ViewArg::Tn => View::Fixed(ViewMode::TensorNetwork),
                ViewArg::Bipartite => View::Fixed(ViewMode::Bipartite),
            };
            write(&a.output, &commands::neighborhood(&read(&a.graph)?, &a.center, a.l0, kind, view)?)?;
            Ok(commands::EXIT_OK)
        }
        Command::Validate(a) => {
            println!("{}", commands::validate(&read(&a.graph)?, a.l0)?);
            Ok(commands::EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { commands::EXIT_INVALID } else { commands::EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code as u8)
        }
    }
}
