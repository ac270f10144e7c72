//! `utc-eq`: learn linear correlated equilibria in extensive-form games
//! and measure linear-swap equilibrium gaps.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use utc_eq::cli::{self, RunConfig};

#[derive(Parser)]
#[command(name = "utc-eq", version, about = "No-linear-swap-regret learning in extensive-form games")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run learning dynamics on one game and log per-iteration gaps.
    Run(RunArgs),
    /// Benchmark per-iteration times across one or more games.
    Bench(BenchArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Algorithm id: utc-cfr-rm+ or utc-cfr-rm.
    #[arg(long, default_value = "utc-cfr-rm+")]
    algo: String,
    /// Iteration limit.
    #[arg(long, default_value_t = 1000)]
    iters: u64,
    /// Wall-clock limit in seconds; the run stops at whichever limit hits
    /// first.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Random seed recorded with the run (the dynamics are deterministic).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fixed-point tolerance asserted online at every iteration.
    #[arg(long, default_value_t = 1e-9)]
    eps_fp: f64,
    /// Gap evaluation and logging cadence, in iterations.
    #[arg(long, default_value_t = 50)]
    log_every: u64,
    /// Rescale utilities into [0, 1] before learning.
    #[arg(long)]
    normalize: bool,
}

#[derive(Args)]
struct RunArgs {
    /// Game spec: kuhn:P=,D= | leduc:P=,R=,S= | sheriff:N=,B=,R= | fig1 |
    /// fig3 | file:<path>.
    #[arg(long)]
    game: String,
    #[command(flatten)]
    common: CommonArgs,
    /// Output stem: writes <out>.csv and <out>.json.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Omit wall-clock columns from the CSV (byte-reproducible output).
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Game spec; repeat the flag to benchmark several games.
    #[arg(long, required = true)]
    game: Vec<String>,
    #[command(flatten)]
    common: CommonArgs,
    /// Optional path for a machine-readable JSON report.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn to_config(game: String, c: &CommonArgs, out: Option<PathBuf>, no_timing: bool) -> RunConfig {
    RunConfig {
        game,
        algo: c.algo.clone(),
        iters: c.iters,
        time_limit: c.time_limit,
        seed: c.seed,
        eps_fp: c.eps_fp,
        log_every: c.log_every,
        out,
        no_timing,
        normalize: c.normalize,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Run(args) => {
            let cfg = to_config(args.game, &args.common, args.out, args.no_timing);
            cli::run(&cfg).map(|art| {
                println!(
                    "game={} iters={} terminated={} gap_max={} gap_sum={}",
                    art.summary.game,
                    art.summary.iterations,
                    art.summary.terminated,
                    art.summary.final_gap_max,
                    art.summary.final_gap_sum
                );
                if let Some(p) = &art.csv_path {
                    println!("csv: {}", p.display());
                }
                if let Some(p) = &art.json_path {
                    println!("summary: {}", p.display());
                }
            })
        }
        Cmd::Bench(args) => {
            let cfgs: Vec<RunConfig> = args
                .game
                .iter()
                .map(|g| to_config(g.clone(), &args.common, None, false))
                .collect();
            cli::bench(&cfgs).and_then(|report| {
                print!("{}", report.table());
                if let Some(path) = &args.out {
                    std::fs::write(path, serde_json::to_string_pretty(&report).unwrap())?;
                    println!("report: {}", path.display());
                }
                Ok(())
            })
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
