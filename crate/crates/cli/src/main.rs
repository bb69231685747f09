use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fairspread::fixtures::{
    bipartite_blowup_instance, fixture_by_name, pof_instance, star_instance, two_node_instance, TheoryInstance,
    Verification,
};
use fairspread::graph::{load_communities, load_edge_list};
use fairspread::harness::{emit_csv, evaluate_stored_solution, run_experiment, write_csv, ExperimentConfig};
use fairspread::{Model, Solution};

#[derive(Parser)]
#[command(name = "fairspread", version, about = "Influence maximization under demographic parity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON or TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// CSV output path (stdout when omitted).
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Full JSON report output path.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Build a theory instance and print its facts.
    Fixture {
        /// star, two_node, bipartite_blowup or pof
        name: String,
        /// Re-derive every fact by exact enumeration; exit nonzero on mismatch.
        #[arg(long)]
        check: bool,
        /// Size parameter (N for star and blow-up, n for pof).
        #[arg(long)]
        size: Option<usize>,
        /// ε of the star instance.
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
    },
    /// Evaluate a stored solution on a fresh live-edge sample.
    Eval {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        communities: PathBuf,
        /// Solution JSON with a `kind` of seed_set, independent or distribution.
        #[arg(long)]
        solution: PathBuf,
        #[arg(long)]
        directed: bool,
        #[arg(long, default_value = "ic")]
        model: Model,
        /// Weight range for unweighted edge lists.
        #[arg(long, default_value_t = 0.4)]
        w_max: f64,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = fairspread::diffusion::default_draws())]
        draws: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn build_fixture(name: &str, size: Option<usize>, eps: f64) -> fairspread::Result<TheoryInstance> {
    match (name, size) {
        ("star", _) => star_instance(size.unwrap_or(10), eps),
        ("two_node", _) => two_node_instance(),
        ("bipartite_blowup", Some(n)) => bipartite_blowup_instance(n),
        ("pof", Some(n)) => pof_instance(n),
        _ => fixture_by_name(name),
    }
}

fn run(cli: Cli) -> fairspread::Result<ExitCode> {
    match cli.command {
        Command::Run { config, csv, json } => {
            let config = ExperimentConfig::from_file(&config)?;
            let report = run_experiment(&config)?;
            for f in &report.failures {
                eprintln!("warning: {} {} graph {} rep {}: {}", f.algorithm, f.eta, f.graph, f.rep, f.message);
            }
            match csv {
                Some(path) => emit_csv(&report, &path)?,
                None => write_csv(&report, std::io::stdout().lock())?,
            }
            if let Some(path) = json {
                std::fs::write(path, report.to_json()?)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Fixture { name, check, size, eps } => {
            let inst = match build_fixture(&name, size, eps) {
                Ok(inst) => inst,
                Err(e @ fairspread::Error::FixtureCheck { .. }) => {
                    eprintln!("FAIL {e}");
                    return Ok(ExitCode::FAILURE);
                }
                Err(e) => return Err(e),
            };
            println!(
                "{}: n={} edges={} communities={} k={}",
                inst.name(),
                inst.graph.node_count(),
                inst.graph.edge_count(),
                inst.communities.len(),
                inst.k
            );
            if !check {
                for f in &inst.facts {
                    println!("  {} = {}", f.label, f.value);
                }
                return Ok(ExitCode::SUCCESS);
            }
            if let Verification::Skipped { reason } = &inst.verification {
                println!("  verification skipped: {reason}");
                for f in &inst.facts {
                    println!("  {} = {} (unverified)", f.label, f.value);
                }
                return Ok(ExitCode::SUCCESS);
            }
            let mut ok = true;
            for c in inst.checks()? {
                let status = if c.passed() { "ok" } else { "FAIL" };
                ok &= c.passed();
                println!("  {status:4} {} expected {} got {}", c.label, c.expected, c.actual);
            }
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Eval { graph, communities, solution, directed, model, w_max, samples, draws, seed } => {
            let g = load_edge_list(&std::fs::read_to_string(&graph)?, directed)?;
            let g = if g.is_weighted() { g } else { g.assign_uniform_weights(w_max, seed)? };
            let c = load_communities(&std::fs::read_to_string(&communities)?, &g)?;
            let s: Solution = serde_json::from_str(&std::fs::read_to_string(&solution)?)?;
            let report = evaluate_stored_solution(&g, &c, &s, model, samples, draws, seed)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(ExitCode::SUCCESS)
        }
    }
}
