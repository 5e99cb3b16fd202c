//! `lamplighter` command-line tool. Exit codes: 0 definite answer or pass,
//! 2 unknown, 1 error or failed check.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lamplighter::cli::{run, run_automaton, AutomatonOp, Command, Format, RunOptions};
use lamplighter::oracle::SearchBudget;

#[derive(Parser)]
#[command(name = "lamplighter", version, about = "Submonoid membership, knapsack and S-unit equations over F_p[X^±]-modules")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Output format on stdout
    #[arg(long, value_enum, default_value = "text")]
    format: Fmt,
    /// Directory for the automaton, report and intermediate files
    #[arg(long)]
    out: Option<PathBuf>,
    /// Kernel state cap `N`, or oracle limits `L,W,B` (word length,
    /// translation window, lamp support)
    #[arg(long, value_parser = parse_budget)]
    budget: Option<BudgetFlag>,
    /// Cap on the bounded words of the first reduction step
    #[arg(long)]
    max_len: Option<usize>,
    /// Maximum length of the matrix sequence in the kernel exploration
    #[arg(long)]
    kernel_depth: Option<usize>,
    /// Box half-width for validation, oracle and check
    #[arg(long)]
    window: Option<i64>,
    /// File with a [decomposition] section
    #[arg(long)]
    hint: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide membership or compute a solution automaton
    Solve { file: PathBuf, #[command(flatten)] common: Common },
    /// Print every intermediate instance of the reduction
    Reduce { file: PathBuf, #[command(flatten)] common: Common },
    /// Run the brute-force baseline
    Oracle { file: PathBuf, #[command(flatten)] common: Common },
    /// Compare the pipeline with the baseline
    Check { file: PathBuf, #[command(flatten)] common: Common },
    /// Set operations on automaton files
    Automaton {
        #[arg(value_enum)]
        op: Op,
        files: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Fmt {
    Text,
    Dot,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Op {
    Show,
    Minimize,
    Complement,
    Union,
    Intersect,
    Difference,
    Equals,
    Subset,
    Empty,
    Enumerate,
}

#[derive(Clone, Copy)]
enum BudgetFlag {
    States(usize),
    Search(SearchBudget),
}

fn parse_budget(s: &str) -> Result<BudgetFlag, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let bad = |e: std::num::ParseIntError| format!("{s:?}: {e}");
    match parts.as_slice() {
        [n] => n.parse().map(BudgetFlag::States).map_err(bad),
        [l, w, b] => Ok(BudgetFlag::Search(SearchBudget {
            max_len: l.parse().map_err(bad)?,
            window: w.parse().map_err(bad)?,
            support: b.parse().map_err(bad)?,
        })),
        _ => Err(format!("{s:?}: expected N or L,W,B")),
    }
}

fn options(c: Common) -> RunOptions {
    let (max_states, search) = match c.budget {
        Some(BudgetFlag::States(n)) => (Some(n), None),
        Some(BudgetFlag::Search(s)) => (None, Some(s)),
        None => (None, None),
    };
    RunOptions {
        format: match c.format {
            Fmt::Text => Format::Text,
            Fmt::Dot => Format::Dot,
            Fmt::Json => Format::Json,
        },
        out: c.out,
        hint: c.hint,
        max_states,
        kernel_depth: c.kernel_depth,
        window: c.window,
        max_len: c.max_len,
        search,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.cmd {
        Cmd::Solve { file, common } => run(&file, Command::Solve, &options(common)),
        Cmd::Reduce { file, common } => run(&file, Command::Reduce, &options(common)),
        Cmd::Oracle { file, common } => run(&file, Command::Oracle, &options(common)),
        Cmd::Check { file, common } => run(&file, Command::Check, &options(common)),
        Cmd::Automaton { op, files, common } => {
            let op = match op {
                Op::Show => AutomatonOp::Show,
                Op::Minimize => AutomatonOp::Minimize,
                Op::Complement => AutomatonOp::Complement,
                Op::Union => AutomatonOp::Union,
                Op::Intersect => AutomatonOp::Intersect,
                Op::Difference => AutomatonOp::Difference,
                Op::Equals => AutomatonOp::Equals,
                Op::Subset => AutomatonOp::Subset,
                Op::Empty => AutomatonOp::Empty,
                Op::Enumerate => AutomatonOp::Enumerate,
            };
            run_automaton(op, &files, &options(common))
        }
    };
    match result {
        Ok(out) => {
            print!("{}", out.stdout);
            ExitCode::from(out.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
