mod bench;
mod report;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ncsolve_core::{brute_oracle, emit_smtlib, parse_instance_json, solve, BoundsProfile, SolverConfig};

use report::{oracle_report, ResultDocument};

#[derive(Parser)]
#[command(name = "ncsolve", version, about = "Decide ¬Contains(N, H) with regular constraints")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and print a JSON result.
    Solve {
        #[arg(long)]
        input: PathBuf,
        /// Cross-check the verdict against brute force up to this value length.
        #[arg(long, value_name = "L")]
        oracle_check: Option<usize>,
        /// Write the instance as an SMT-LIB script to this file.
        #[arg(long, value_name = "PATH")]
        emit_smt: Option<PathBuf>,
        #[command(flatten)]
        opts: SolveOpts,
    },
    /// Solve every `*.json` file in a directory and print a CSV table.
    Bench {
        dir: PathBuf,
        /// Write one `.smt2` file per instance into this directory.
        #[arg(long, value_name = "PATH")]
        emit_smt: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[command(flatten)]
        opts: SolveOpts,
    },
}

#[derive(Args)]
struct SolveOpts {
    /// `paper` or `scaled:F` with F in (0, 1].
    #[arg(long, default_value = "paper")]
    bounds_profile: BoundsProfile,
    #[arg(long, default_value_t = 8)]
    iter_bound: usize,
    #[arg(long, default_value_t = 100_000)]
    max_paths: usize,
    /// Log pipeline stages to standard error.
    #[arg(long)]
    trace: bool,
    /// Accepted for reproducible invocations; the solver is deterministic.
    #[arg(long)]
    seed: Option<u64>,
}

impl SolveOpts {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            profile: self.bounds_profile,
            iter_bound: self.iter_bound,
            max_paths: self.max_paths,
            ..SolverConfig::default()
        }
    }

    fn init_logging(&self) {
        let level = if self.trace { log::LevelFilter::Debug } else { log::LevelFilter::Warn };
        env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
    }
}

const INPUT_ERROR: u8 = 1;
const INTERNAL_ERROR: u8 = 2;

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("ncsolve: {msg}");
    ExitCode::from(code)
}

fn run_solve(input: PathBuf, oracle_check: Option<usize>, emit_smt: Option<PathBuf>, opts: SolveOpts) -> ExitCode {
    let text = match fs::read_to_string(&input) {
        Ok(t) => t,
        Err(e) => return fail(INPUT_ERROR, format!("{}: {e}", input.display())),
    };
    let inst = match parse_instance_json(&text) {
        Ok(i) => i,
        Err(e) => return fail(INPUT_ERROR, format!("{}: {e}", input.display())),
    };
    if let Some(path) = emit_smt {
        let written = File::create(&path).map(BufWriter::new).and_then(|mut sink| {
            emit_smtlib(&inst, &mut sink)?;
            sink.flush()
        });
        if let Err(e) = written {
            return fail(INPUT_ERROR, format!("{}: {e}", path.display()));
        }
    }
    let cfg = opts.config();
    let verdict = match solve(&inst, &cfg) {
        Ok(v) => v,
        Err(e) => return fail(INTERNAL_ERROR, e),
    };
    let mut doc = ResultDocument::new(&inst, &verdict, cfg.profile.to_string());
    if let Some(bound) = oracle_check {
        doc.oracle = Some(oracle_report(&verdict, &brute_oracle(&inst, bound), bound));
    }
    let line = serde_json::to_string(&doc).expect("result document serializes");
    println!("{line}");
    match &doc.oracle {
        Some(o) if !o.agrees => fail(INTERNAL_ERROR, format!("verdict disagrees with the oracle at bound {}", o.bound)),
        _ => ExitCode::SUCCESS,
    }
}

fn run_bench(dir: PathBuf, emit_smt: Option<PathBuf>, workers: usize, opts: SolveOpts) -> ExitCode {
    let files = match bench::corpus_files(&dir) {
        Ok(f) => f,
        Err(e) => return fail(INPUT_ERROR, format!("{}: {e}", dir.display())),
    };
    if let Some(out) = &emit_smt {
        if let Err(e) = fs::create_dir_all(out) {
            return fail(INPUT_ERROR, format!("{}: {e}", out.display()));
        }
    }
    let cfg = opts.config();
    let rows = match bench::run(&files, &cfg, workers, emit_smt.as_deref()) {
        Ok(r) => r,
        Err(e) => return fail(INTERNAL_ERROR, e),
    };
    for row in &rows {
        if let Some(e) = &row.error {
            eprintln!("ncsolve: {}: {e}", row.file);
        }
    }
    let stdout = io::stdout();
    match bench::write_csv(&mut stdout.lock(), &rows, &cfg.profile.to_string()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(INTERNAL_ERROR, e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Solve { input, oracle_check, emit_smt, opts } => {
            opts.init_logging();
            run_solve(input, oracle_check, emit_smt, opts)
        }
        Command::Bench { dir, emit_smt, workers, opts } => {
            opts.init_logging();
            run_bench(dir, emit_smt, workers, opts)
        }
    }
}
