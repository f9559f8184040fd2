//! Thin command-line front end: `converge` runs the convergence study,
//! `solve` runs a single simulation from a JSON config, `verify` runs the
//! oracle suites.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use poroline::harness::{self, checks, Config};

#[derive(Parser)]
#[command(
    name = "poroline",
    version,
    about = "Biot poroelasticity with 1D line sources"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Suppress informational output.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the manufactured-solution convergence study and print the table.
    Converge(ConvergeArgs),
    /// Run a single simulation from a config file.
    Solve(SolveArgs),
    /// Run the oracle verification suites.
    Verify,
}

#[derive(Args)]
struct ConvergeArgs {
    /// Mesh subdivisions per level.
    #[arg(long, value_delimiter = ',', default_values_t = vec![8usize, 16, 32])]
    levels: Vec<usize>,
    /// Optional config file for material parameters.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Time step override (s).
    #[arg(long)]
    tau: Option<f64>,
    /// Final time override (s).
    #[arg(long = "T")]
    t_final: Option<f64>,
}

#[derive(Args)]
struct SolveArgs {
    /// JSON config file; missing keys default to the tissue parameter set.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Export reconstructed fields to a legacy VTK file.
    #[arg(long)]
    export: Option<PathBuf>,
    /// Time step override (s).
    #[arg(long)]
    tau: Option<f64>,
    /// Final time override (s).
    #[arg(long = "T")]
    t_final: Option<f64>,
}

fn load_config(path: &Option<PathBuf>) -> poroline::Result<Config> {
    match path {
        Some(p) => Config::from_file(p),
        None => Ok(Config::default()),
    }
}

fn run_converge(args: &ConvergeArgs, quiet: bool) -> poroline::Result<()> {
    let mut config = load_config(&args.config)?;
    if let Some(tau) = args.tau {
        config.time_step = tau;
    }
    if let Some(t) = args.t_final {
        config.final_time = t;
    }
    let params = config.material_params()?;
    let solver = config.solver_config();
    if !quiet {
        eprintln!("running convergence study at levels {:?}", args.levels);
    }
    let report = harness::run_convergence_study(&args.levels, &params, &solver)?;
    print!("{}", report.table());
    Ok(())
}

fn run_solve(args: &SolveArgs, quiet: bool) -> poroline::Result<()> {
    let mut config = load_config(&args.config)?;
    if let Some(tau) = args.tau {
        config.time_step = tau;
    }
    if let Some(t) = args.t_final {
        config.final_time = t;
    }
    let system = harness::build_system(&config)?;
    if !quiet {
        eprintln!(
            "solving: n = {}, dofs (u, p, w) = ({}, {}, {})",
            config.mesh_n,
            system.dofs().n_u,
            system.dofs().n_p,
            system.dofs().n_w
        );
    }
    let trajectory = harness::run_physical(&system)?;
    let last = trajectory.states.last().expect("at least one step");
    if !quiet {
        for (step, iters) in trajectory.iterations.iter().enumerate() {
            eprintln!(
                "  step {:3}  t = {:5.2}  fixed-stress iterations: {iters}",
                step + 1,
                (step + 1) as f64 * config.time_step
            );
        }
    }
    println!(
        "final state at t = {}: ||u|| = {:.6e}, ||p_r|| = {:.6e}, ||w_r|| = {:.6e}",
        last.t,
        poroline::fem::sparse::norm2(&last.u),
        poroline::fem::sparse::norm2(&last.p_r),
        poroline::fem::sparse::norm2(&last.w_r)
    );
    let export = args
        .export
        .clone()
        .or_else(|| config.output_path.clone().map(PathBuf::from));
    if let Some(path) = export {
        harness::export_fields(&system, last, &path)?;
        println!("fields written to {}", path.display());
    }
    Ok(())
}

fn run_verify() -> poroline::Result<bool> {
    let results = checks::run_all();
    for r in &results {
        println!(
            "{}: {} — {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.detail
        );
    }
    Ok(checks::all_passed(&results))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Converge(args) => run_converge(args, cli.quiet).map(|_| true),
        Command::Solve(args) => run_solve(args, cli.quiet).map(|_| true),
        Command::Verify => run_verify(),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
