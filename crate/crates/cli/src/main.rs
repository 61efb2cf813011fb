//! `covruler`: design and check compressive covariance samplers.
//!
//! JSON goes to stdout, diagnostics to stderr. Exit codes: 0 success,
//! 1 negative verdict or table mismatch, 2 search budget exhausted,
//! 64 usage error, 66 unreadable input file.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use covruler::admissibility::{
    banded_report, circulant_report, is_sampler_nonuniform, universal_report, AdmissibilityReport,
};
use covruler::bounds::{asymptotic_ratios, cardinality_bounds};
use covruler::construct::{circular_from_half_linear, construct_near_minimal_linear};
use covruler::htbasis::{basis_for, BasisKind, BasisRecord, HTBasis};
use covruler::randsamp::{monte_carlo_threshold, plan, Subspace};
use covruler::search::{minimal_ruler, SearchBudget, SearchStatus};
use covruler::sets::{periodize, IndexSet, Ruler, RulerKind};
use covruler::table::{compute_table, diff, golden_table, parse_golden, TableOptions};

const DEFAULT_BUDGET_SECONDS: u64 = 300;
const DEFAULT_SEED: u64 = 20_240_601;

const EXIT_NEGATIVE: u8 = 1;
const EXIT_BUDGET: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_NOINPUT: u8 = 66;

#[derive(Parser)]
#[command(name = "covruler", version, about = "Sparse-ruler design and covariance sampler checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Design a linear or circular sparse ruler, optionally periodic.
    Design(DesignArgs),
    /// Check whether a sampling pattern identifies a covariance subspace.
    Verify(VerifyArgs),
    /// Minimal block rows for random periodic compression.
    PlanRandom(PlanArgs),
    /// Minimal cardinalities per block length against the golden table.
    Table(TableArgs),
    /// Cardinality and compression-ratio bounds.
    Bounds(BoundsArgs),
}

#[derive(Args)]
struct BudgetArgs {
    /// Wall-clock search limit in seconds.
    #[arg(long, alias = "budget", env = "COVRULER_BUDGET_SECONDS", default_value_t = DEFAULT_BUDGET_SECONDS)]
    budget_seconds: u64,
    /// Node limit for the search.
    #[arg(long)]
    max_nodes: Option<u64>,
    /// Worker threads for the search.
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

impl BudgetArgs {
    fn budget(&self) -> SearchBudget {
        let mut b = SearchBudget::unlimited()
            .with_time_limit(Duration::from_secs(self.budget_seconds))
            .with_parallel_width(self.threads);
        if let Some(n) = self.max_nodes {
            b = b.with_max_nodes(n);
        }
        b
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Linear,
    Circular,
}

impl From<KindArg> for RulerKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Linear => RulerKind::Linear,
            KindArg::Circular => RulerKind::Circular,
        }
    }
}

#[derive(Args)]
struct PeriodArgs {
    /// Block length N of a periodic pattern.
    #[arg(long, requires = "blocks")]
    period: Option<usize>,
    /// Number of blocks L of a periodic pattern.
    #[arg(long, requires = "period")]
    blocks: Option<usize>,
}

impl PeriodArgs {
    fn get(&self) -> Option<(usize, usize)> {
        self.period.zip(self.blocks)
    }
}

#[derive(Args)]
struct DesignArgs {
    /// Ruler length (K - 1); implied by --period and --blocks when omitted.
    #[arg(long)]
    length: Option<usize>,
    #[arg(long, value_enum)]
    kind: KindArg,
    #[command(flatten)]
    periodic: PeriodArgs,
    /// Exhaustive minimal search (default).
    #[arg(long, conflicts_with = "heuristic")]
    exact: bool,
    /// Deterministic construction instead of search.
    #[arg(long)]
    heuristic: bool,
    #[command(flatten)]
    budget: BudgetArgs,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum MethodArg {
    Shortcut,
    Rank,
}

#[derive(Args)]
struct VerifyArgs {
    /// Comma-separated marks; the base block when --period is given.
    #[arg(long, value_delimiter = ',', required = true)]
    marks: Vec<usize>,
    /// Pattern length K - 1; implied by --period and --blocks when omitted.
    #[arg(long)]
    length: Option<usize>,
    /// toeplitz, circulant, banded:D or custom:FILE
    #[arg(long)]
    subspace: String,
    #[command(flatten)]
    periodic: PeriodArgs,
    #[arg(long, value_enum, default_value = "shortcut")]
    method: MethodArg,
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long = "N")]
    n: usize,
    #[arg(long = "L", default_value_t = 1)]
    l: usize,
    /// toeplitz, circulant, banded:D or custom:Q
    #[arg(long)]
    subspace: String,
    /// Monte Carlo trials per block size around the threshold.
    #[arg(long)]
    verify: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long, default_value_t = 5)]
    from: usize,
    #[arg(long, default_value_t = 60)]
    to: usize,
    /// Search every cell exhaustively up to this N.
    #[arg(long, default_value_t = 0)]
    exact_up_to: usize,
    /// Override --exact-up-to for the half-length column.
    #[arg(long)]
    exact_half_up_to: Option<usize>,
    /// Override --exact-up-to for the circular column.
    #[arg(long)]
    exact_circular_up_to: Option<usize>,
    /// Golden table JSON; the built-in table is used when omitted.
    #[arg(long)]
    golden: Option<PathBuf>,
    #[command(flatten)]
    budget: BudgetArgs,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, required_unless_present = "asymptotic", conflicts_with = "asymptotic")]
    length: Option<usize>,
    #[arg(long, value_enum, required_unless_present = "asymptotic")]
    kind: Option<KindArg>,
    /// Asymptotic compression ratios for block length N and L blocks.
    #[arg(long, requires = "n")]
    asymptotic: bool,
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long = "L", default_value_t = 1)]
    l: usize,
}

/// Outcome of a subcommand: a JSON document and an exit code.
struct Outcome {
    json: serde_json::Value,
    code: u8,
}

enum Failure {
    Usage(String),
    NoInput(String),
}

impl From<covruler::Error> for Failure {
    fn from(e: covruler::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("serializable output")
}

fn resolve_length(length: Option<usize>, period: Option<(usize, usize)>) -> Result<usize, Failure> {
    match (length, period) {
        (Some(len), Some((n, l))) if len + 1 != n * l => Err(Failure::Usage(format!(
            "--length {len} does not match --period {n} x --blocks {l}"
        ))),
        (Some(len), _) => Ok(len),
        (None, Some((n, l))) if n > 0 && l > 0 => Ok(n * l - 1),
        (None, Some(_)) => Err(Failure::Usage("--period and --blocks must be positive".into())),
        (None, None) => Err(Failure::Usage("--length is required".into())),
    }
}

fn design(args: &DesignArgs) -> Result<Outcome, Failure> {
    let kind = RulerKind::from(args.kind);
    let length = resolve_length(args.length, args.periodic.get())?;
    let base_len = match args.periodic.get() {
        Some((n, _)) => n - 1,
        None => length,
    };
    let base = if args.heuristic {
        match kind {
            RulerKind::Linear => construct_near_minimal_linear(base_len),
            RulerKind::Circular => circular_from_half_linear(base_len),
        }
    } else {
        let r = minimal_ruler(base_len, kind, &args.budget.budget());
        eprintln!(
            "search: {:?}, {} nodes, {:.3}s",
            r.status,
            r.nodes_explored,
            r.elapsed.as_secs_f64()
        );
        match (r.status, r.ruler) {
            (SearchStatus::Optimal, Some(ruler)) => ruler,
            _ => {
                return Ok(Outcome {
                    json: serde_json::json!({"status": "budget_exceeded", "ruler": null}),
                    code: EXIT_BUDGET,
                })
            }
        }
    };
    let ruler = match args.periodic.get() {
        Some((n, l)) => Ruler::new(periodize(base.marks(), n, l)?, length, kind)?.with_period(n, l)?,
        None => base,
    };
    Ok(Outcome {
        json: to_json(&ruler),
        code: 0,
    })
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::NoInput(format!("{}: {e}", path.display())))
}

fn load_custom_basis(path: &Path, k: usize) -> Result<HTBasis, Failure> {
    let text = read_file(path)?;
    let rec: BasisRecord =
        serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    if rec.k != k {
        return Err(Failure::Usage(format!("basis has K = {} but the pattern spans {k}", rec.k)));
    }
    Ok(HTBasis::from_record(&rec)?)
}

fn verify(args: &VerifyArgs) -> Result<Outcome, Failure> {
    let period = args.periodic.get();
    let length = resolve_length(args.length, period)?;
    let k = length + 1;
    let base = IndexSet::new(args.marks.iter().copied());
    let marks = match period {
        Some((n, l)) => periodize(&base, n, l)?,
        None => base.clone(),
    };
    if marks.largest().is_some_and(|m| m > length) {
        return Err(Failure::Usage(format!("marks exceed length {length}")));
    }
    let report: AdmissibilityReport = if let Some(path) = args.subspace.strip_prefix("custom:") {
        let basis = load_custom_basis(Path::new(path), k)?;
        is_sampler_nonuniform(&marks, &basis)?
    } else {
        let kind: BasisKind = args.subspace.parse()?;
        match (args.method, kind) {
            (MethodArg::Rank, kind) => is_sampler_nonuniform(&marks, &basis_for(kind, k)?)?,
            (MethodArg::Shortcut, BasisKind::Toeplitz) => universal_report(&marks, k)?,
            (MethodArg::Shortcut, BasisKind::Circulant) => circulant_report(&marks, k)?,
            (MethodArg::Shortcut, BasisKind::Banded(d)) => match period {
                Some((n, l)) => banded_report(&base, n, l, d)?,
                None => banded_report(&marks, k, 1, d)?,
            },
            (MethodArg::Shortcut, BasisKind::Custom) => unreachable!("custom parsed above"),
        }
    };
    Ok(Outcome {
        json: to_json(&report),
        code: if report.admissible { 0 } else { EXIT_NEGATIVE },
    })
}

fn plan_random(args: &PlanArgs) -> Result<Outcome, Failure> {
    let subspace: Subspace = args.subspace.parse()?;
    let p = plan(args.n, args.l, subspace)?;
    let mut json = to_json(&p);
    if let Some(trials) = args.verify {
        if matches!(subspace, Subspace::Custom(_)) {
            return Err(Failure::Usage("--verify needs a built-in subspace".into()));
        }
        let report = monte_carlo_threshold(args.n, args.l, subspace, trials, args.seed)?;
        for r in &report.rates {
            eprintln!(
                "M = {}: {}/{} admissible, {} tolerance events",
                r.m, r.admissible, r.trials, r.tolerance_events
            );
        }
        json["seed"] = args.seed.into();
        json["trials"] = trials.into();
        json["rates"] = to_json(&report.rates);
    }
    Ok(Outcome { json, code: 0 })
}

fn table(args: &TableArgs) -> Result<Outcome, Failure> {
    let golden = match &args.golden {
        Some(path) => parse_golden(&read_file(path)?)?,
        None => golden_table(),
    };
    let opts = TableOptions {
        exact_lsr_up_to: args.exact_up_to,
        exact_hlsr_up_to: args.exact_half_up_to.unwrap_or(args.exact_up_to),
        exact_csr_up_to: args.exact_circular_up_to.unwrap_or(args.exact_up_to),
        budget: args.budget.budget(),
    };
    let rows = compute_table(args.from, args.to, &golden, &opts)?;
    let mismatches = diff(&rows, &golden);
    for m in &mismatches {
        eprintln!("N = {}: {} computed {} but golden {}", m.n, m.column, m.computed, m.golden);
    }
    Ok(Outcome {
        json: serde_json::json!({"rows": rows, "mismatches": mismatches}),
        code: if mismatches.is_empty() { 0 } else { EXIT_NEGATIVE },
    })
}

fn bounds(args: &BoundsArgs) -> Result<Outcome, Failure> {
    let json = if args.asymptotic {
        let n = args.n.expect("clap enforces --N");
        if n == 0 || args.l == 0 {
            return Err(Failure::Usage("--N and --L must be positive".into()));
        }
        to_json(&asymptotic_ratios(n, args.l))
    } else {
        let kind = args.kind.expect("clap enforces --kind").into();
        to_json(&cardinality_bounds(args.length.expect("clap enforces --length"), kind))
    };
    Ok(Outcome { json, code: 0 })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(EXIT_USAGE);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let result = match &cli.command {
        Command::Design(a) => design(a),
        Command::Verify(a) => verify(a),
        Command::PlanRandom(a) => plan_random(a),
        Command::Table(a) => table(a),
        Command::Bounds(a) => bounds(a),
    };
    match result {
        Ok(out) => {
            let text = serde_json::to_string_pretty(&out.json).expect("valid json");
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            ExitCode::from(out.code)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::NoInput(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_NOINPUT)
        }
    }
}
