//! `kgc construct`: runs an RML mapping and writes N-Quads.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kgc_core::construct::{execute_plan, plan_mapping, ConstructError, ConstructOptions, DEFAULT_BASE};
use kgc_core::optimizer::{check_rule, RuleFamily};
use kgc_core::term::is_valid_iri;
use kgc_core::Diagnostics;

const EXIT_USAGE: u8 = 1;
const EXIT_IO: u8 = 4;

/// Rewrite checks per rule when `--seed` is given.
const SEEDED_TRIALS: usize = 100;

#[derive(Parser)]
#[command(name = "kgc", version, about = "Knowledge graph construction from RML mappings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a mapping and write the generated quads as N-Quads.
    Construct(ConstructArgs),
}

#[derive(Args)]
struct ConstructArgs {
    /// RML mapping document (Turtle).
    #[arg(long)]
    mapping: PathBuf,
    /// Base IRI for relative IRIs in the mapping and generated IRIs.
    #[arg(long, default_value = DEFAULT_BASE)]
    base: String,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory that rml:source paths are relative to. Defaults to the
    /// mapping file's directory.
    #[arg(long, env = "KGC_DATA_ROOT")]
    data_root: Option<PathBuf>,
    /// Rewrite the plan before executing it.
    #[arg(long)]
    optimize: bool,
    /// Write the plan (and, with --optimize, the optimized plan and the
    /// rewrite trace) to this file instead of executing it.
    #[arg(long)]
    dump_plan: Option<PathBuf>,
    /// Seed for a randomized check of the rewrite rules, run before
    /// optimizing.
    #[arg(long)]
    seed: Option<u64>,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<ConstructError> for Failure {
    fn from(e: ConstructError) -> Self {
        Failure {
            code: e.exit_code() as u8,
            message: e.to_string(),
        }
    }
}

fn io_failure(what: &str, path: &Path, e: io::Error) -> Failure {
    Failure {
        code: EXIT_IO,
        message: format!("{what} {}: {e}", path.display()),
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| io_failure("cannot write", p, e)),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|()| out.flush())
                .map_err(|e| io_failure("cannot write", Path::new("<stdout>"), e))
        }
    }
}

fn self_check(seed: u64) -> Result<(), Failure> {
    for family in RuleFamily::ALL {
        let report = check_rule(family, seed, SEEDED_TRIALS).map_err(|e| Failure {
            code: EXIT_IO,
            message: format!("rule check {family}: {e}"),
        })?;
        eprintln!("rule check {family}: {} trials, {} counterexamples", report.trials, report.counterexamples.len());
        if let Some(c) = report.counterexamples.first() {
            return Err(Failure {
                code: EXIT_IO,
                message: format!("rule {family} failed its check:\n{c}"),
            });
        }
    }
    Ok(())
}

fn run(args: ConstructArgs) -> Result<(), Failure> {
    if !is_valid_iri(&args.base) {
        return Err(Failure {
            code: EXIT_USAGE,
            message: format!("--base {:?} is not an absolute IRI", args.base),
        });
    }
    let mapping = fs::read(&args.mapping).map_err(|e| io_failure("cannot read mapping", &args.mapping, e))?;
    let data_root = args.data_root.clone().unwrap_or_else(|| {
        args.mapping
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_default()
    });
    if let Some(seed) = args.seed {
        self_check(seed)?;
    }
    let options = ConstructOptions {
        base: args.base.clone(),
        data_root,
        optimize: args.optimize,
    };
    let diagnostics = Diagnostics::new();
    let result = plan_mapping(&mapping, &options, &diagnostics).and_then(|plans| {
        if let Some(path) = &args.dump_plan {
            return Ok(Err((path.clone(), plans.dump())));
        }
        execute_plan(plans.final_plan(), &diagnostics).map(Ok)
    });
    for w in diagnostics.warnings() {
        eprintln!("warning: {w}");
    }
    match result? {
        Ok(dataset) => write_output(args.out.as_deref(), &dataset.to_nquads()),
        Err((path, dump)) => fs::write(&path, dump).map_err(|e| io_failure("cannot write", &path, e)),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let Command::Construct(args) = cli.command;
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("kgc: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
