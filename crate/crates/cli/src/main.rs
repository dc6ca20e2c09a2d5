use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ramsey_core::Ordinal;

mod commands;
mod report;

use commands::CliError;

const ORDINAL_HELP: &str = "Ordinals below w^2 are written k, w, w+r, w*q or w*q+r (e.g. 3, w, w*2+1).";

/// Finite approximations of the spaces R_alpha (alpha < w^2): blocks,
/// canonical relations, exhaustive Ramsey searches and the embedding order.
#[derive(Parser, Debug)]
#[command(name = "ramsey-approx", version, after_help = EXIT_HELP)]
struct Cli {
    /// Output format; `count` prints a bare number unless `json` is asked for.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for the parallel searches.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Cap on relations or colourings a search may visit.
    #[arg(long, global = true, env = "RAMSEY_BUDGET")]
    budget: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

const EXIT_HELP: &str = "Exit codes: 0 ok, 1 I/O failure, 2 invalid parameters or input, \
3 property violation, 4 infeasible at this budget or size, 5 no witness.";

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Dot,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the block T_alpha(n) or S_alpha(n).
    #[command(after_help = ORDINAL_HELP)]
    Tree {
        #[arg(long)]
        alpha: Ordinal,
        #[arg(long)]
        n: u32,
        /// Which block: the tree T or the structure S.
        #[arg(long, value_enum, ignore_case = true, default_value = "t")]
        kind: BlockKind,
    },
    /// Exact number of canonical relations on R_k(n) or AR^n_k.
    Count {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        n: u32,
        #[arg(long, value_enum, ignore_case = true, default_value = "r")]
        what: CountWhat,
    },
    /// List R_alpha(n)|T_alpha(m), AR^n_alpha below m, or the family of sets S.
    #[command(after_help = ORDINAL_HELP)]
    Enumerate {
        #[arg(value_enum, ignore_case = true)]
        what: EnumWhat,
        #[arg(long)]
        alpha: Ordinal,
        #[arg(long)]
        n: u32,
        /// Host bound; for `dc`, omit it to list every downset of S_alpha(n).
        #[arg(long)]
        m: Option<u32>,
    },
    /// Find a canonizing witness for a relation read from a JSON file.
    #[command(after_help = CANONIZE_HELP)]
    Canonize(CanonizeArgs),
    /// Run one of the verification suites.
    Verify {
        #[command(subcommand)]
        suite: Suite,
    },
    /// Hasse diagram of the embedding order on the realizable sets S_alpha(n, m).
    #[command(after_help = ORDINAL_HELP)]
    Order {
        #[arg(long)]
        alpha: Ordinal,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        m: u32,
    },
}

const CANONIZE_HELP: &str = "The input is a JSON object with either \"classes\" (lists of indices) or \
\"labels\" (a restricted growth string), and optionally \"schema\": \"ramsey-approx/1\". Indices refer \
to the order printed by `enumerate r` (block mode) or `enumerate ar` (ar mode) with the same alpha, n, m.";

#[derive(Args, Debug)]
pub struct CanonizeArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub alpha: Ordinal,
    #[arg(long)]
    pub n: u32,
    /// Level of the witness `y` (block mode) or length of `a` (ar mode).
    #[arg(long)]
    pub k: u32,
    #[arg(long)]
    pub m: u32,
    #[arg(long, value_enum, ignore_case = true, default_value = "block")]
    pub mode: CanonizeMode,
}

#[derive(Subcommand, Debug)]
pub enum Suite {
    /// The block containments for gamma <= beta over a range of l.
    #[command(after_help = "Ranges are written a, a..b (b excluded) or a..=b.")]
    Dagger {
        #[arg(long)]
        gamma: Ordinal,
        #[arg(long)]
        beta: Ordinal,
        #[arg(long)]
        l: String,
    },
    /// Least m at which every 2-colouring of R_alpha(n)|T_alpha(m) is
    /// monochromatic below some y of level k.
    Pigeonhole(SearchArgs),
    /// Least m at which every relation on R_alpha(n)|T_alpha(m) is canonical
    /// below some y of level k.
    Fct(SearchArgs),
    /// Separation of the canonical relations of R_alpha(n) by blocks n..m.
    Distinctness {
        #[arg(long)]
        alpha: Ordinal,
        #[arg(long)]
        n: u32,
        /// Blocks up to n + slack are tried.
        #[arg(long, default_value_t = 4)]
        slack: u32,
    },
}

#[derive(Args, Debug)]
pub struct SearchArgs {
    #[arg(long)]
    pub alpha: Ordinal,
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub k: u32,
    #[arg(long)]
    pub max_m: u32,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum BlockKind {
    T,
    S,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum CountWhat {
    R,
    Ar,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum EnumWhat {
    R,
    Ar,
    Dc,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum CanonizeMode {
    Block,
    Ar,
}

fn run(cli: Cli) -> Result<u8, CliError> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::Invalid("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Invalid(e.to_string()))?;
    }
    let ctx = commands::Ctx {
        format: cli.format,
        out: cli.out,
        budget: cli.budget.unwrap_or(ramsey_core::verify::DEFAULT_BUDGET),
    };
    match cli.command {
        Command::Tree { alpha, n, kind } => commands::tree(&ctx, alpha, n, kind),
        Command::Count { k, n, what } => commands::count(&ctx, k, n, what),
        Command::Enumerate { what, alpha, n, m } => commands::enumerate(&ctx, what, alpha, n, m),
        Command::Canonize(args) => commands::canonize(&ctx, &args),
        Command::Verify { suite } => commands::verify(&ctx, &suite),
        Command::Order { alpha, n, m } => commands::order(&ctx, alpha, n, m),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
