//! `sbcn`: compile switched Boolean control networks, solve the
//! infinite-horizon average-cost problem, and export graphs, laws, and
//! trajectories.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand, ValueEnum};

use sbcn_core::mmc;
use sbcn_core::model::ProblemInstance;
use sbcn_core::ostg::{build_ostg, Ostg};
use sbcn_core::policy::{self, FeedbackLaw};
use sbcn_core::{all_initial, ostg};

use sbcn_cli::format::{
    load_problem, load_rules_model, validate_instance, write_output,
    LoadedProblem, StateRef,
};
use sbcn_cli::{bit_budget, export, validation, CliError};

#[derive(Parser)]
#[command(name = "sbcn", version, about = "Average-cost optimal control of switched Boolean control networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum GraphFormat {
    Json,
    Dot,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Assemble a rule file into network transition matrices.
    Compile {
        /// Rule file path.
        #[arg(long)]
        model: PathBuf,
        /// Output JSON path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve a problem file: graph construction, minimum-mean cycle,
    /// and feedback-law synthesis.
    Solve {
        #[arg(long)]
        problem: PathBuf,
        /// Initial state override (index or bit string).
        #[arg(long)]
        x0: Option<String>,
        /// Output directory for ostg.json / ostg.dot / mmc.json /
        /// law.json (summary only when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print per-phase wall-clock timing.
        #[arg(long)]
        timing: bool,
    },
    /// Solve from every admissible initial state at once.
    SolveAll {
        #[arg(long)]
        problem: PathBuf,
        /// Output JSON path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the closed loop for T steps and emit a trajectory CSV.
    Simulate {
        #[arg(long)]
        problem: PathBuf,
        /// Feedback-law JSON (re-solves the problem when omitted).
        #[arg(long)]
        law: Option<PathBuf>,
        #[arg(short = 'T', long = "horizon")]
        horizon: u32,
        #[arg(long)]
        x0: Option<String>,
        /// Output CSV path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time each pipeline phase over repeated runs.
    Bench {
        #[arg(long)]
        problem: PathBuf,
        /// Runs per phase; the median is reported.
        #[arg(long, default_value_t = 5)]
        repeats: u32,
        /// Recorded in the report header for reproducibility.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Export the optimal state transition graph.
    ExportGraph {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        x0: Option<String>,
        /// json: vertices and edges; dot: Graphviz; csv: the
        /// dynamic-programming table.
        #[arg(long, value_enum, default_value_t = GraphFormat::Json)]
        format: GraphFormat,
        /// Output path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli.command) {
        eprintln!("{}", e);
        std::process::exit(e.exit_code() as i32);
    }
}

fn run(command: Command) -> Result<(), CliError> {
    let budget = bit_budget()?;
    match command {
        Command::Compile { model, out } => cmd_compile(&model, out.as_deref(), budget),
        Command::Solve { problem, x0, out, timing } => {
            cmd_solve(&problem, x0.as_deref(), out.as_deref(), timing, budget)
        }
        Command::SolveAll { problem, out } => cmd_solve_all(&problem, out.as_deref(), budget),
        Command::Simulate { problem, law, horizon, x0, out } => {
            cmd_simulate(&problem, law.as_deref(), horizon, x0.as_deref(), out.as_deref(), budget)
        }
        Command::Bench { problem, repeats, seed } => cmd_bench(&problem, repeats, seed, budget),
        Command::ExportGraph { problem, x0, format, out } => {
            cmd_export_graph(&problem, x0.as_deref(), format, out.as_deref(), budget)
        }
    }
}

fn emit(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_output(path, content),
        None => {
            print!("{}", content);
            Ok(())
        }
    }
}

/// Loads a problem and applies an `--x0` override given as a delta
/// index or a bit string.
fn load(problem: &Path, x0: Option<&str>, budget: u32) -> Result<LoadedProblem, CliError> {
    let mut loaded = load_problem(problem, budget)?;
    if let Some(text) = x0 {
        let model = &loaded.instance.model;
        let state_ref = if text.chars().all(|c| c == '0' || c == '1')
            && model.state_bits().map_or(false, |n| text.len() as u32 == n)
        {
            StateRef::Bits(text.to_string())
        } else {
            let index: u32 = text
                .parse()
                .map_err(|_| validation(format!("bad --x0 value `{}`", text)))?;
            StateRef::Index(index)
        };
        loaded.instance.x0 = state_ref.resolve(model.state_count(), model.state_bits())?;
        loaded.has_x0 = true;
    }
    validate_instance(&loaded.instance)?;
    Ok(loaded)
}

fn build_graph(instance: &ProblemInstance) -> Result<Ostg, CliError> {
    build_ostg(instance).map_err(|e| match e {
        ostg::OstgError::StateNotAdmissible(x) => {
            validation(format!("initial state excluded: {}", x))
        }
        other => validation(other.to_string()),
    })
}

fn solve_graph(graph: &Ostg) -> Result<mmc::MmcResult, CliError> {
    mmc::solve(graph).map_err(|e| validation(e.to_string()))
}

fn cmd_compile(model_path: &Path, out: Option<&Path>, budget: u32) -> Result<(), CliError> {
    let model = load_rules_model(model_path, budget)?;
    eprintln!(
        "n={} m={} z={} N={} M={}",
        model.state_bits().map_or(0, |b| b),
        model.input_bits().map_or(0, |b| b),
        model.subsystem_count(),
        model.state_count(),
        model.input_count()
    );
    emit(out, &export::to_pretty(&export::model_json(&model)))
}

fn cmd_solve(
    problem: &Path,
    x0: Option<&str>,
    out: Option<&Path>,
    timing: bool,
    budget: u32,
) -> Result<(), CliError> {
    let t0 = Instant::now();
    let loaded = load(problem, x0, budget)?;
    let t_load = t0.elapsed();

    let t1 = Instant::now();
    let graph = build_graph(&loaded.instance)?;
    let t_graph = t1.elapsed();

    let t2 = Instant::now();
    let result = solve_graph(&graph)?;
    let t_solve = t2.elapsed();

    let t3 = Instant::now();
    let law = policy::synthesize(&graph, &result);
    let t_synth = t3.elapsed();

    if let Some(dir) = out {
        let model = &loaded.instance.model;
        write_output(&dir.join("ostg.json"), &export::to_pretty(&export::ostg_json(model, &graph)))?;
        write_output(&dir.join("ostg.dot"), &export::ostg_dot(model, &graph))?;
        write_output(&dir.join("mmc.json"), &export::to_pretty(&export::mmc_json(&result)))?;
        write_output(&dir.join("law.json"), &export::to_pretty(&export::law_json(&law)))?;
    }

    println!("x0 = {}", graph.x0());
    println!("vertices = {}, edges = {}", graph.vertex_count(), graph.edge_count());
    println!("mu* = {}", result.mu_star);
    println!("v* = {}, k* = {}", result.v_star, result.k_star);
    println!("cycle = {:?}", result.cycle);
    println!("transient = {:?}", result.transient);
    if timing {
        println!(
            "timing: load {:?}, graph {:?}, dp {:?}, synthesis {:?}",
            t_load, t_graph, t_solve, t_synth
        );
    }
    Ok(())
}

fn cmd_solve_all(problem: &Path, out: Option<&Path>, budget: u32) -> Result<(), CliError> {
    let loaded = load(problem, None, budget)?;
    let instance = &loaded.instance;
    let solution = all_initial::solve_all(&instance.model, &instance.constraints, &instance.cost)
        .map_err(|e| validation(e.to_string()))?;
    eprintln!(
        "{} states solved over {} iterations",
        solution.per_state.len(),
        solution.iterations
    );
    emit(out, &export::to_pretty(&export::solve_all_json(&solution)))
}

fn cmd_simulate(
    problem: &Path,
    law_path: Option<&Path>,
    horizon: u32,
    x0: Option<&str>,
    out: Option<&Path>,
    budget: u32,
) -> Result<(), CliError> {
    let loaded = load(problem, x0, budget)?;
    let law: FeedbackLaw = match law_path {
        Some(path) => export::law_from_json(&sbcn_cli::format::read_to_string(path)?)?,
        None => {
            let graph = build_graph(&loaded.instance)?;
            let result = solve_graph(&graph)?;
            policy::synthesize(&graph, &result)
        }
    };
    let (trajectory, average) = policy::simulate(&loaded.instance, &law, horizon)
        .map_err(|e| validation(e.to_string()))?;
    eprintln!("average cost over T={} steps: {}", horizon, average);
    emit(out, &export::trajectory_csv(&loaded.instance, &law, &trajectory)?)
}

fn median(mut samples: Vec<Duration>) -> (Duration, Duration, Duration) {
    samples.sort();
    let min = samples[0];
    let max = *samples.last().expect("at least one sample");
    (samples[samples.len() / 2], min, max)
}

fn time_phase<T>(repeats: u32, mut f: impl FnMut() -> Result<T, CliError>) -> Result<(T, Vec<Duration>), CliError> {
    let mut samples = Vec::new();
    let mut value = None;
    for _ in 0..repeats.max(1) {
        let start = Instant::now();
        let v = f()?;
        samples.push(start.elapsed());
        value = Some(v);
    }
    Ok((value.expect("repeats >= 1"), samples))
}

fn cmd_bench(problem: &Path, repeats: u32, seed: Option<u64>, budget: u32) -> Result<(), CliError> {
    let cpus = std::thread::available_parallelism().map_or(1, |n| n.get());
    println!(
        "machine: {} {}, {} cpus; repeats = {}, seed = {:?}",
        std::env::consts::OS,
        std::env::consts::ARCH,
        cpus,
        repeats,
        seed
    );

    let (loaded, t_compile) = time_phase(repeats, || load(problem, None, budget))?;
    let (graph, t_graph) = time_phase(repeats, || build_graph(&loaded.instance))?;
    let (result, t_dp) = time_phase(repeats, || solve_graph(&graph))?;
    let (law, t_synth) = time_phase(repeats, || Ok(policy::synthesize(&graph, &result)))?;

    println!("phase       median       min          max");
    for (name, samples) in [
        ("compile", t_compile),
        ("graph", t_graph),
        ("dp", t_dp),
        ("synthesis", t_synth),
    ] {
        let (med, min, max) = median(samples);
        println!("{:<10}  {:<11?}  {:<11?}  {:<11?}", name, med, min, max);
    }
    println!("mu* = {}, vertices = {}, law states = {}", result.mu_star, graph.vertex_count(), law.ku.len());
    Ok(())
}

fn cmd_export_graph(
    problem: &Path,
    x0: Option<&str>,
    format: GraphFormat,
    out: Option<&Path>,
    budget: u32,
) -> Result<(), CliError> {
    let loaded = load(problem, x0, budget)?;
    let graph = build_graph(&loaded.instance)?;
    let content = match format {
        GraphFormat::Json => export::to_pretty(&export::ostg_json(&loaded.instance.model, &graph)),
        GraphFormat::Dot => export::ostg_dot(&loaded.instance.model, &graph),
        GraphFormat::Csv => {
            let table = mmc::karp_dp(&graph);
            export::karp_csv(&graph, &table)
        }
    };
    emit(out, &content)
}
