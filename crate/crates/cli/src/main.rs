use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use pqe_core::bench::{
    exit_status, run_bench_with, summarize, write_csv, BenchConfig, DEFAULT_SEED,
};
use pqe_core::dimacs::{parse_problem, parse_solution, write_cnf, write_problem, write_solution};
use pqe_core::formula::Assignment;
use pqe_core::gen::{generate, GenParams};
use pqe_core::oracle::{
    brute_equiv, enumerate_boundary_points, naive_pqe_solve, OracleCaps, OracleError,
};
use pqe_core::problem::{PqeProblem, Removability, Solution};
use pqe_core::report::{exit_code, sha256_hex, InputDigests, RunReport};
use pqe_core::sat::Limits;
use pqe_core::verifier::{
    ver_pqe, ver_pqe_with_database, VerifyOptions, WitnessKind, DEFAULT_ITERATION_CAP,
};

const EXIT_REFUTED: u8 = 1;
const EXIT_RESOURCE: u8 = 2;
const EXIT_USAGE: u8 = 3;
const SEED_ENV: &str = "PQEVERIFY_SEED";

#[derive(Parser, Debug)]
#[command(
    name = "pqeverify",
    version,
    about = "Verify solutions of partial quantifier elimination"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check that a solution H is correct for a problem.
    Verify(VerifyArgs),
    /// Compare both sides of the PQE equation by brute force.
    CheckEquiv(ProblemAndSolution),
    /// Count boundary points of the target clauses and classify them.
    Census(CensusArgs),
    /// Produce a solution with the brute-force reference solver.
    SolveRef(SolveRefArgs),
    /// Generate a random problem.
    Gen(GenArgs),
    /// Generate a family of problems, derive and verify a solution for each.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct ProblemAndSolution {
    /// Problem in PQE-DIMACS format.
    #[arg(short = 'f', long = "formula")]
    problem: PathBuf,
    /// Solution in DIMACS CNF format.
    #[arg(short = 's', long)]
    solution: PathBuf,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    files: ProblemAndSolution,
    /// Wall-time budget in seconds.
    #[arg(long, value_name = "SEC")]
    time_limit: Option<f64>,
    /// Conflict budget over the whole run.
    #[arg(long, value_name = "N")]
    conflict_limit: Option<u64>,
    /// Keep plugging clauses at full length.
    #[arg(long)]
    no_shorten: bool,
    /// Write the JSON report here ("-" for standard output).
    #[arg(long, value_name = "PATH")]
    json: Option<PathBuf>,
    /// Dump the final SAT clause database in DIMACS CNF.
    #[arg(long, value_name = "PATH")]
    dump_db: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CensusArgs {
    /// Problem in PQE-DIMACS format.
    #[arg(short = 'f', long = "formula")]
    problem: PathBuf,
    /// Take boundary points of F ∧ H instead of F.
    #[arg(short = 's', long)]
    solution: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SolveRefArgs {
    /// Problem in PQE-DIMACS format.
    #[arg(short = 'f', long = "formula")]
    problem: PathBuf,
    /// Output path; standard output when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct GenFlags {
    /// Fraction of variables left unquantified.
    #[arg(long, default_value_t = 0.5)]
    y_fraction: f64,
    /// Fraction of two-literal clauses; the rest have three.
    #[arg(long, default_value_t = 0.2)]
    two_lit_fraction: f64,
    /// Number of target clauses.
    #[arg(long, default_value_t = 1)]
    targets: usize,
}

#[derive(Args, Debug)]
struct GenArgs {
    /// Number of variables.
    #[arg(long, default_value_t = 70)]
    vars: u32,
    /// Defaults to twice the number of variables.
    #[arg(long)]
    clauses: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    flags: GenFlags,
    /// Output path; standard output when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Variable counts, one group per value.
    #[arg(long, value_delimiter = ',', default_values_t = [70u32, 75, 80, 85])]
    sizes: Vec<u32>,
    /// Problems per size.
    #[arg(long, default_value_t = 25)]
    per_size: usize,
    /// Family seed; falls back to $PQEVERIFY_SEED, then a fixed default.
    #[arg(long)]
    seed: Option<u64>,
    /// Per-instance wall-time budget in seconds.
    #[arg(long, default_value_t = 600.0, value_name = "SEC")]
    timeout: f64,
    /// Keep plugging clauses at full length.
    #[arg(long)]
    no_shorten: bool,
    #[command(flatten)]
    flags: GenFlags,
    /// CSV output path; standard output when absent.
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<OracleError>().is_some() {
                ExitCode::from(EXIT_RESOURCE)
            } else {
                ExitCode::from(EXIT_USAGE)
            }
        }
    }
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Verify(args) => verify(args),
        Command::CheckEquiv(args) => check_equiv(args),
        Command::Census(args) => census(args),
        Command::SolveRef(args) => solve_ref(args),
        Command::Gen(args) => gen(args),
        Command::Bench(args) => bench(args),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_problem(path: &Path) -> Result<(PqeProblem, String)> {
    let text = read(path)?;
    let problem = parse_problem(&text).with_context(|| format!("{}", path.display()))?;
    Ok((problem, text))
}

fn load_solution(path: &Path, problem: &PqeProblem) -> Result<(Solution, String)> {
    let text = read(path)?;
    let h = parse_solution(&text, problem).with_context(|| format!("{}", path.display()))?;
    Ok((h, text))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) if p != Path::new("-") => {
            fs::write(p, text).with_context(|| format!("cannot write {}", p.display()))
        }
        _ => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

/// `y1=0 y2=1 x3=1`: ascending ids, prefixed by role.
fn format_point(problem: &PqeProblem, point: &Assignment) -> String {
    point
        .iter()
        .map(|(v, b)| {
            let role = if problem.is_quantified(v) { 'x' } else { 'y' };
            format!("{role}{}={}", v.id(), b as u8)
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn verify(args: VerifyArgs) -> Result<u8> {
    let (problem, problem_text) = load_problem(&args.files.problem)?;
    let (h, solution_text) = load_solution(&args.files.solution, &problem)?;
    let time_budget = match args.time_limit {
        Some(t) if !(t >= 0.0 && t.is_finite()) => {
            anyhow::bail!("--time-limit must be a non-negative number")
        }
        Some(t) => Some(Duration::from_secs_f64(t)),
        None => None,
    };
    let options = VerifyOptions {
        limits: Limits {
            max_conflicts: args.conflict_limit,
            time_budget,
        },
        shorten: !args.no_shorten,
        iteration_cap: DEFAULT_ITERATION_CAP,
    };

    let start = Instant::now();
    let verdict = match &args.dump_db {
        Some(path) => {
            let (verdict, db) = ver_pqe_with_database(&problem, &h, options);
            fs::write(path, write_cnf(&db))
                .with_context(|| format!("cannot write {}", path.display()))?;
            verdict
        }
        None => ver_pqe(&problem, &h, options),
    };
    let wall = start.elapsed().as_secs_f64();

    let digests = InputDigests {
        problem_sha256: sha256_hex(problem_text.as_bytes()),
        solution_sha256: sha256_hex(solution_text.as_bytes()),
    };
    let report = RunReport::new(&problem, &h, &verdict, &options, digests, wall);
    let json_to_stdout = args.json.as_deref() == Some(Path::new("-"));
    if let Some(path) = &args.json {
        write_output(Some(path), &(report.to_json() + "\n"))?;
    }
    if !json_to_stdout {
        let mut out = io::stdout().lock();
        writeln!(out, "status: {}", verdict.status)?;
        if let Some(limit) = verdict.resource {
            writeln!(out, "resource: {limit}")?;
        }
        if let Some(w) = &verdict.witness {
            let source = match w.kind {
                WitnessKind::Implication => "solution",
                WitnessKind::Redundancy => "problem",
            };
            writeln!(out, "clause: {source} clause {}", w.clause_index + 1)?;
            writeln!(out, "witness: {}", format_point(&problem, &w.point))?;
        }
        writeln!(
            out,
            "sat calls: {} implication, {} redundancy; plugging clauses: {}",
            verdict.stats.sat_calls_implication,
            verdict.stats.sat_calls_redundancy,
            verdict.stats.plugging_clauses_added
        )?;
        writeln!(out, "time: {wall:.3}s")?;
    }
    Ok(exit_code(verdict.status) as u8)
}

fn check_equiv(args: ProblemAndSolution) -> Result<u8> {
    let (problem, _) = load_problem(&args.problem)?;
    let (h, _) = load_solution(&args.solution, &problem)?;
    let report = brute_equiv(&problem, &h, &OracleCaps::default())?;
    if report.equivalent {
        println!("equivalent");
        return Ok(0);
    }
    println!("not equivalent");
    if let Some(y) = &report.first_divergence {
        println!("at: {}", format_point(&problem, y));
    }
    if let Some((lhs, rhs)) = report.side_values {
        println!(
            "exists X [F] = {}, H and exists X [F \\ G] = {}",
            lhs as u8, rhs as u8
        );
    }
    Ok(EXIT_REFUTED)
}

fn census(args: CensusArgs) -> Result<u8> {
    let (problem, _) = load_problem(&args.problem)?;
    let h = match &args.solution {
        Some(path) => Some(load_solution(path, &problem)?.0),
        None => None,
    };
    let c = enumerate_boundary_points(&problem, h.as_ref(), &OracleCaps::default())?;
    println!("boundary points: {}", c.total);
    println!("removable: {}", c.removable);
    println!("unremovable: {}", c.unremovable);
    for (p, kind) in &c.samples {
        let kind = match kind {
            Removability::YRemovable => "removable",
            Removability::YUnremovable => "unremovable",
        };
        println!("{kind}: {}", format_point(&problem, p));
    }
    Ok(0)
}

fn solve_ref(args: SolveRefArgs) -> Result<u8> {
    let (problem, _) = load_problem(&args.problem)?;
    let h = naive_pqe_solve(&problem, &OracleCaps::default())?;
    write_output(args.output.as_deref(), &write_solution(&h))?;
    Ok(0)
}

fn gen(args: GenArgs) -> Result<u8> {
    let params = GenParams {
        num_vars: args.vars,
        num_clauses: args.clauses.unwrap_or(2 * args.vars as usize),
        y_fraction: args.flags.y_fraction,
        two_lit_fraction: args.flags.two_lit_fraction,
        targets: args.flags.targets,
        seed: args.seed,
    };
    let problem = generate(&params)?;
    write_output(args.output.as_deref(), &write_problem(&problem))?;
    Ok(0)
}

fn bench_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .with_context(|| format!("{SEED_ENV} is not an unsigned integer: {s:?}")),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn bench(args: BenchArgs) -> Result<u8> {
    if !(args.timeout >= 0.0 && args.timeout.is_finite()) {
        anyhow::bail!("--timeout must be a non-negative number");
    }
    let config = BenchConfig {
        sizes: args.sizes,
        per_size: args.per_size,
        base: GenParams {
            y_fraction: args.flags.y_fraction,
            two_lit_fraction: args.flags.two_lit_fraction,
            targets: args.flags.targets,
            seed: bench_seed(args.seed)?,
            ..GenParams::default()
        },
        instance_timeout: Duration::from_secs_f64(args.timeout),
        shorten: !args.no_shorten,
    };
    let records = run_bench_with(&config, |r| {
        let status = r
            .status
            .map_or("derive_timeout".to_string(), |s| s.to_string());
        eprintln!(
            "instance {:>4}  vars {:>3}  |H| {:>4}  {:<14} {:.3}s",
            r.instance, r.num_vars, r.solution_clauses, status, r.verify_time_s
        );
    })?;

    match &args.csv {
        Some(path) => {
            let file = fs::File::create(path)
                .with_context(|| format!("cannot write {}", path.display()))?;
            write_csv(&records, file)?;
        }
        None => write_csv(&records, io::stdout().lock())?,
    }
    for s in summarize(&records) {
        eprintln!(
            "vars {:>3}: {} instances, {} derive timeouts, {} verify timeouts, mean {:.4}s, max {:.4}s",
            s.num_vars, s.instances, s.derive_timeouts, s.timeouts, s.mean_verify_time_s, s.max_verify_time_s
        );
    }

    Ok(exit_status(&records) as u8)
}
