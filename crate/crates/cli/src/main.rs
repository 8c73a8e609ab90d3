use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod report;

use report::{error_envelope, to_csv, to_json, EXIT_INPUT};

#[derive(Parser, Debug)]
#[command(name = "qflowsec", version, about = "Quantitative information-flow analysis of quantum automata")]
struct Cli {
    #[command(flatten)]
    global: Global,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Worker threads (default: available parallelism)
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Validation tolerance for states, channels and measurements
    #[arg(long, global = true, default_value_t = qflowsec::config::TOL_VALIDATION)]
    tol: f64,

    /// Write the JSON report here ("-" for stdout)
    #[arg(long, global = true)]
    json: Option<PathBuf>,

    /// Write the report flattened to path,value rows here ("-" for stdout)
    #[arg(long, global = true)]
    csv: Option<PathBuf>,

    /// Suppress the human-readable summary
    #[arg(long, short, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a model file and check every state, channel and measurement
    Validate {
        #[arg(long)]
        model: PathBuf,
    },
    /// Execute an action sequence and report the final state and observations
    Run {
        #[arg(long)]
        model: PathBuf,
        /// Comma-separated agent:command pairs, e.g. "Alice:Rx,Bob:CNOT"
        #[arg(long, default_value = "")]
        seq: String,
    },
    /// Bounded insecurity degree, or an interference degree with --query
    Analyze {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        depth: usize,
        /// Use the policy section of the model (the default when --query is absent)
        #[arg(long)]
        policy_from_model: bool,
        /// G1,D,G2 with '+' joining several names, e.g. "Alice,Rx+CNOT,Bob"
        #[arg(long)]
        query: Option<String>,
    },
    /// Check unwinding conditions for an equivalence (mode one) or pseudo-distance (mode two)
    Unwind {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        /// builtin:total|zero|trace|reduced|canonical[:N] or table:FILE
        #[arg(long)]
        oracle: String,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        eps_s: Option<f64>,
        #[arg(long)]
        eps_o: Option<f64>,
        #[arg(long)]
        eps_l: Option<f64>,
        /// Fit the smallest constants on the tested states
        #[arg(long, conflicts_with_all = ["eps_s", "eps_o", "eps_l"])]
        fit_eps: bool,
    },
    /// Compose two systems and optionally check the compositional bound
    Compose {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        #[arg(long, value_enum, default_value_t = Kind::Direct)]
        kind: Kind,
        /// Extras for a generalised composition
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        check_bound: bool,
        #[arg(long, default_value_t = 2)]
        depth: usize,
    },
    /// Audit an access matrix against the reference monitor assumptions
    AccessCheck {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, required_unless_present = "fit")]
        theta: Option<f64>,
        #[arg(long, required_unless_present = "fit")]
        eps: Option<f64>,
        /// Fit the smallest constants, then audit with them
        #[arg(long, conflicts_with_all = ["theta", "eps"])]
        fit: bool,
        #[arg(long)]
        depth: usize,
        #[arg(long, value_enum, default_value_t = KRangeArg::ReadSets)]
        k_range: KRangeArg,
    },
    /// Recompute the published worked values and compare
    Examples,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum Mode {
    One,
    Two,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Direct,
    Generalised,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum KRangeArg {
    ReadSets,
    AllSubsets,
}

fn name(c: &Command) -> &'static str {
    match c {
        Command::Validate { .. } => "validate",
        Command::Run { .. } => "run",
        Command::Analyze { .. } => "analyze",
        Command::Unwind { .. } => "unwind",
        Command::Compose { .. } => "compose",
        Command::AccessCheck { .. } => "access-check",
        Command::Examples => "examples",
    }
}

fn emit(g: &Global, json: &serde_json::Value, result: Option<&serde_json::Value>) -> Result<(), String> {
    if let Some(p) = &g.json {
        report::write(p, &to_json(json)).map_err(|e| format!("{}: {e}", p.display()))?;
    }
    if let Some(p) = &g.csv {
        report::write(p, &to_csv(result.unwrap_or(json))).map_err(|e| format!("{}: {e}", p.display()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = cli.global.clone();
    let command = name(&cli.command);
    if !(g.tol > 0.0 && g.tol.is_finite()) {
        eprintln!("error: --tol must be positive");
        return ExitCode::from(EXIT_INPUT as u8);
    }
    if let Some(n) = g.jobs {
        if n == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(EXIT_INPUT as u8);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .expect("global pool is configured once");
    }
    let code = match commands::run(cli.command, &g) {
        Ok(out) => {
            if !g.quiet {
                for line in &out.summary {
                    println!("{line}");
                }
            }
            let env = out.envelope();
            match emit(&g, &env, Some(&env["result"])) {
                Ok(()) => out.exit,
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_INPUT
                }
            }
        }
        Err(e) => {
            eprintln!("error [{}]: {e}", e.kind());
            let env = error_envelope(command, e.kind(), &e.to_string());
            if let Err(w) = emit(&g, &env, None) {
                eprintln!("error: {w}");
            }
            EXIT_INPUT
        }
    };
    ExitCode::from(code as u8)
}
