//! `matchmarket`: solve, sweep and simulate matching-market chains.

mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use matchmarket::chain::build_matrix;
use matchmarket::metrics::{analytic_team_rates, threshold_sweep};
use matchmarket::montecarlo::{simulate, SimulationConfig};
use matchmarket::solve::{stationary_direct, tv_distance};
use matchmarket::table::{parse_grid, solve_table, sweep_table, Cell, Table};
use matchmarket::{ChainKind, Error, Method, Probability64, ThresholdConfig, Welfare64};

use output::{emit_simulation, emit_table, Format};

#[derive(Parser, Debug)]
#[command(name = "matchmarket", version, about = "Stationary laws of threshold matching markets")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, env = "MATCHMARKET_FORMAT", default_value = "csv")]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Stationary distribution of one chain.
    #[command(subcommand)]
    Solve(SolveCmd),
    /// Stationary distributions over a grid of p and thresholds.
    #[command(subcommand)]
    Sweep(SweepCmd),
    /// Full-market Monte Carlo run compared against the exact law.
    Simulate(SimulateArgs),
    /// Welfare rate for each threshold setting; flags the best.
    Welfare(WelfareArgs),
}

#[derive(Subcommand, Debug)]
enum SolveCmd {
    Twoway {
        #[arg(long)]
        kbar: u32,
        #[arg(long, value_parser = parse_p)]
        p: f64,
    },
    Assortative {
        #[arg(long)]
        kbar: u32,
        #[arg(long, value_parser = parse_p)]
        p: f64,
        /// Aggregate states by population symmetry.
        #[arg(long)]
        lumped: bool,
    },
    Disassortative {
        #[arg(long)]
        kh: u32,
        #[arg(long)]
        kl: u32,
        #[arg(long, value_parser = parse_p)]
        p: f64,
    },
}

#[derive(Args, Debug)]
struct PGrid {
    /// One or more comma-separated values of p.
    #[arg(long, value_parser = parse_p, value_delimiter = ',', conflicts_with = "p_grid")]
    p: Vec<f64>,
    /// Grid `start:stop:step` with 0 < start <= stop < 1.
    #[arg(long, value_parser = parse_grid_arg)]
    p_grid: Option<Grid>,
}

impl PGrid {
    fn points(&self) -> Vec<f64> {
        match &self.p_grid {
            Some(g) => g.0.clone(),
            None => self.p.clone(),
        }
    }
}

#[derive(Clone, Debug)]
struct Grid(Vec<f64>);

#[derive(Subcommand, Debug)]
enum SweepCmd {
    Twoway {
        #[arg(long, alias = "kbar-list", value_delimiter = ',', required = true)]
        kbar: Vec<u32>,
        #[command(flatten)]
        grid: PGrid,
    },
    Assortative {
        #[arg(long, alias = "kbar-list", value_delimiter = ',', required = true)]
        kbar: Vec<u32>,
        #[command(flatten)]
        grid: PGrid,
        #[arg(long)]
        lumped: bool,
    },
    Disassortative {
        #[arg(long, alias = "kh", value_delimiter = ',', required = true)]
        kh_list: Vec<u32>,
        #[arg(long, alias = "kl", value_delimiter = ',', required = true)]
        kl_list: Vec<u32>,
        #[command(flatten)]
        grid: PGrid,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    Twoway,
    Assortative,
    Disassortative,
}

impl From<KindArg> for ChainKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Twoway => ChainKind::TwoWay,
            KindArg::Assortative => ChainKind::Assortative,
            KindArg::Disassortative => ChainKind::Disassortative,
        }
    }
}

#[derive(Args, Debug)]
struct SimulateArgs {
    kind: KindArg,
    #[arg(long, value_parser = parse_p)]
    p: f64,
    #[arg(long)]
    steps: u64,
    #[arg(long)]
    seed: u64,
    /// Discarded initial periods; defaults to 10% of the steps.
    #[arg(long)]
    burn_in: Option<u64>,
    /// Batches for the team-rate standard errors.
    #[arg(long)]
    batches: Option<u64>,
    #[arg(long, required_if_eq_any = [("kind", "twoway"), ("kind", "assortative")])]
    kbar: Option<u32>,
    #[arg(long, required_if_eq("kind", "disassortative"))]
    kh: Option<u32>,
    #[arg(long, required_if_eq("kind", "disassortative"))]
    kl: Option<u32>,
}

#[derive(Args, Debug)]
struct WelfareArgs {
    kind: KindArg,
    #[arg(long, value_parser = parse_p)]
    p: f64,
    #[arg(long, alias = "kbar-list", value_delimiter = ',')]
    kbar: Vec<u32>,
    #[arg(long, alias = "kh", value_delimiter = ',')]
    kh_list: Vec<u32>,
    #[arg(long, alias = "kl", value_delimiter = ',')]
    kl_list: Vec<u32>,
    /// Waiting cost per agent per period.
    #[arg(long, default_value_t = 0.1)]
    cost: f64,
    /// Team utilities: by number of High members (0..=3) for three-way
    /// markets, or `Hh,Hl,Lh,Ll` for two-way.
    #[arg(long, value_delimiter = ',')]
    utilities: Vec<f64>,
}

fn parse_p(s: &str) -> Result<f64, String> {
    let p: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if p > 0.0 && p < 1.0 {
        Ok(p)
    } else {
        Err(format!("p must lie strictly between 0 and 1, got {s}"))
    }
}

fn parse_grid_arg(s: &str) -> Result<Grid, String> {
    parse_grid(s).map(Grid).map_err(|e| e.to_string())
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidProbability(_)
            | Error::InvalidThreshold(_)
            | Error::InvalidState(_)
            | Error::InvalidParams(_)
            | Error::MissingUtility(_) => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<String, Failure> {
    match &cli.command {
        Command::Solve(cmd) => {
            let table = match *cmd {
                SolveCmd::Twoway { kbar, p } => {
                    solve_table(ChainKind::TwoWay, p, ThresholdConfig::symmetric(kbar), false)?
                }
                SolveCmd::Assortative { kbar, p, lumped } => {
                    solve_table(ChainKind::Assortative, p, ThresholdConfig::symmetric(kbar), lumped)?
                }
                SolveCmd::Disassortative { kh, kl, p } => solve_table(
                    ChainKind::Disassortative,
                    p,
                    ThresholdConfig::disassortative(kh, kl),
                    false,
                )?,
            };
            Ok(emit_table(&table, cli.format))
        }
        Command::Sweep(cmd) => {
            let (kind, grid, thresholds, lumped): (_, &PGrid, Vec<_>, _) = match cmd {
                SweepCmd::Twoway { kbar, grid } => (
                    ChainKind::TwoWay,
                    grid,
                    kbar.iter().map(|&k| ThresholdConfig::symmetric(k)).collect(),
                    false,
                ),
                SweepCmd::Assortative { kbar, grid, lumped } => (
                    ChainKind::Assortative,
                    grid,
                    kbar.iter().map(|&k| ThresholdConfig::symmetric(k)).collect(),
                    *lumped,
                ),
                SweepCmd::Disassortative { kh_list, kl_list, grid } => (
                    ChainKind::Disassortative,
                    grid,
                    threshold_pairs(kh_list, kl_list),
                    false,
                ),
            };
            let ps = grid.points();
            if ps.is_empty() {
                return Err(Failure::Usage("give --p or --p-grid".into()));
            }
            Ok(emit_table(&sweep_table(kind, &ps, &thresholds, lumped)?, cli.format))
        }
        Command::Simulate(args) => run_simulate(args, cli.format),
        Command::Welfare(args) => run_welfare(args, cli.format),
    }
}

fn threshold_pairs(kh: &[u32], kl: &[u32]) -> Vec<ThresholdConfig> {
    kh.iter()
        .flat_map(|&h| kl.iter().map(move |&l| ThresholdConfig::disassortative(h, l)))
        .collect()
}

fn run_simulate(args: &SimulateArgs, format: Format) -> Result<String, Failure> {
    let kind = ChainKind::from(args.kind);
    let t = match kind {
        ChainKind::Disassortative => {
            ThresholdConfig::disassortative(args.kh.unwrap_or(0), args.kl.unwrap_or(0))
        }
        _ => ThresholdConfig::symmetric(args.kbar.unwrap_or(0)),
    };
    let mut config = SimulationConfig::new(kind, args.p, t, args.steps, args.seed);
    if let Some(b) = args.burn_in {
        config = config.with_burn_in(b);
    }
    if let Some(b) = args.batches {
        config.batches = b;
    }
    let report = simulate(&config)?;
    let prob = Probability64::new(args.p)?;
    let exact = stationary_direct(&build_matrix(kind, &prob, t)?)?;
    let tv = tv_distance(&report.empirical.probs, &exact.probs);
    let rates = analytic_team_rates(&exact, kind, &prob, t)?;
    Ok(emit_simulation(&report, &exact, &rates, tv, format))
}

fn run_welfare(args: &WelfareArgs, format: Format) -> Result<String, Failure> {
    let kind = ChainKind::from(args.kind);
    let thresholds: Vec<ThresholdConfig> = match kind {
        ChainKind::Disassortative => threshold_pairs(&args.kh_list, &args.kl_list),
        _ => args.kbar.iter().map(|&k| ThresholdConfig::symmetric(k)).collect(),
    };
    if thresholds.is_empty() {
        return Err(Failure::Usage(match kind {
            ChainKind::Disassortative => "give --kh-list and --kl-list".into(),
            _ => "give --kbar".into(),
        }));
    }
    let w = if args.utilities.is_empty() {
        Welfare64::example(kind).with_waiting_cost(args.cost)
    } else if kind == ChainKind::TwoWay {
        let u = &args.utilities;
        if u.len() != 4 {
            return Err(Failure::Usage("two-way utilities take 4 values".into()));
        }
        Welfare64::two_way(u[0], u[1], u[2], u[3], args.cost)?
    } else {
        Welfare64::by_high_count(3, &args.utilities, args.cost)?
    };
    if w.waiting_cost <= 0.0 {
        return Err(Failure::Usage(format!("waiting cost must be positive, got {}", args.cost)));
    }
    w.validate_for(kind)?;

    let prob = Probability64::new(args.p)?;
    let rows = threshold_sweep(kind, &prob, &thresholds, &w)?;
    let columns = match kind {
        ChainKind::Disassortative => vec!["p", "kh", "kl", "welfare", "mean_total_waiting", "best"],
        _ => vec!["p", "kbar", "welfare", "mean_total_waiting", "best"],
    };
    let mut table = Table::empty(columns, 3);
    table.method = Method::DirectSolve;
    for r in rows {
        let mut row = vec![Cell::Real(args.p)];
        match kind {
            ChainKind::Disassortative => {
                row.push(Cell::Int(r.thresholds.k_high as i64));
                row.push(Cell::Int(r.thresholds.k_low as i64));
            }
            _ => row.push(Cell::Int(r.thresholds.k_bar as i64)),
        }
        row.extend([Cell::Real(r.welfare), Cell::Real(r.mean_total_waiting), Cell::Bool(r.best)]);
        table.rows.push(row);
    }
    table.blocks.push(0..table.rows.len());
    Ok(emit_table(&table, format))
}
