use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use serde_json::Value;

use diamond_relay::capacity::{approximate_capacity, schedule_rate, CapacityResult, Schedule};
use diamond_relay::experiments::{metadata_json, raw_csv, run_monte_carlo, stats_csv, Fading, MonteCarloConfig};
use diamond_relay::format::format_g;
use diamond_relay::lp::SolveMode;
use diamond_relay::network::{DiamondNetwork, NetworkFile};
use diamond_relay::theory::{bound, opt4};
use diamond_relay::worst_case::{verify_tightness, worst_network, FamilyId, TightnessReport};

/// Approximate capacity, best-relay selection and worst-case ratios for
/// Gaussian half-duplex diamond relay networks.
///
/// Link capacities are in bits per channel use (base-2 logarithm). Ratios
/// do not depend on the base. Numbers are printed with 9 significant digits.
#[derive(Debug, Parser)]
#[command(name = "diamond", version)]
struct Cli {
    /// Increase log verbosity (-v info, -vv debug, -vvv trace).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the capacity LP of a network.
    Capacity(CapacityArgs),
    /// Report the relay with the largest single-relay capacity (1-based).
    BestRelay(InputArgs),
    /// Ratio of the best single-relay capacity to the network capacity.
    Ratio(SolveArgs),
    /// Print `n,bound(n),opt4(n)`.
    Bound {
        #[arg(short)]
        n: usize,
    },
    /// Write a worst-case network as JSON.
    Worst(WorstArgs),
    /// Check a worst-case family against the bound and print one CSV row.
    Verify(VerifyArgs),
    /// Rate achieved by a given schedule on a network.
    ScheduleRate(ScheduleRateArgs),
    /// Seeded Monte-Carlo study of the ratio; writes box-plot statistics.
    Montecarlo(MonteCarloArgs),
    /// Rescale to unit single-relay capacities and sort by `ell`.
    Normalize(NormalizeArgs),
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Network JSON file.
    #[arg(short, long)]
    input: PathBuf,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Solve in exact rational arithmetic (decimal inputs only).
    #[arg(long)]
    exact: bool,
}

#[derive(Debug, Args)]
struct CapacityArgs {
    #[command(flatten)]
    solve: SolveArgs,
    /// Write the full result (value, schedule, tight cuts) as JSON.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Print the full result as JSON instead of the bare value.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct FamilyArgs {
    /// Worst-case family.
    #[arg(long)]
    family: FamilyId,
    /// Number of relays.
    #[arg(short)]
    n: usize,
    /// Large finite stand-in for the infinite link of the even2/odd families.
    #[arg(long = "L", value_name = "X")]
    l: Option<f64>,
}

#[derive(Debug, Args)]
struct WorstArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Output file; standard output if omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Allowed |ratio - bound(n)|.
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    /// Print the CSV header line first.
    #[arg(long)]
    header: bool,
}

#[derive(Debug, Args)]
struct ScheduleRateArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Schedule JSON: an object mapping state masks to weights, or a
    /// `capacity --json` result whose `schedule` field is used.
    #[arg(short, long)]
    schedule: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FadingKind {
    Rayleigh,
    LogUniform,
}

#[derive(Debug, Args)]
struct MonteCarloArgs {
    #[arg(long, default_value_t = 1)]
    n_min: usize,
    #[arg(long, default_value_t = 10)]
    n_max: usize,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// RNG seed (required; there is no time-based seeding).
    #[arg(long)]
    seed: u64,
    /// Statistics CSV; a `<file>.meta.json` record is written beside it.
    /// Standard output if omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Also write every sampled ratio as `n,trial,ratio`.
    #[arg(long)]
    raw: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FadingKind::Rayleigh)]
    fading: FadingKind,
    /// Rayleigh scale parameter.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Log-uniform lower end.
    #[arg(long, default_value_t = 0.01)]
    lo: f64,
    /// Log-uniform upper end.
    #[arg(long, default_value_t = 100.0)]
    hi: f64,
}

#[derive(Debug, Args)]
struct NormalizeArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Output file; standard output if omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Capacity(a) => {
            let net = read_network(&a.solve.input.input)?;
            let res = solve(&net, a.solve.exact)?;
            if let Some(path) = &a.output {
                write_file(path, &(res.to_json() + "\n"))?;
            }
            if a.json {
                println!("{}", res.to_json());
            } else {
                println!("{}", format_g(res.value));
            }
        }
        Command::BestRelay(a) => {
            let net = read_network(&a.input)?;
            let (i, c) = net.best_relay();
            println!("{},{}", i + 1, format_g(c));
        }
        Command::Ratio(a) => {
            let net = read_network(&a.input.input)?;
            let cn = solve(&net, a.exact)?.value;
            let c1 = net.best_relay().1;
            if !(cn > 0.0) {
                bail!("network capacity is zero; the ratio is undefined");
            }
            let r = if net.len() == 1 { 1.0 } else { c1 / cn };
            println!("{}", format_g(r));
        }
        Command::Bound { n } => {
            println!("{},{},{}", n, format_g(bound(n)?), format_g(opt4(n)?));
        }
        Command::Worst(a) => {
            let f = &a.family;
            let net = worst_network(f.family, f.n, resolve_l(f))?;
            emit(a.output.as_deref(), &(NetworkFile::from_network(&net).to_json() + "\n"))?;
        }
        Command::Verify(a) => {
            let f = &a.family;
            let report = verify_tightness(f.family, f.n, resolve_l(f), a.tol)?;
            if a.header {
                println!("{}", TightnessReport::CSV_HEADER);
            }
            println!("{}", report.csv_row());
            if !report.pass {
                bail!("gap {} exceeds tolerance {}", format_g(report.gap), format_g(a.tol));
            }
        }
        Command::ScheduleRate(a) => {
            let net = read_network(&a.input.input)?;
            let text = read_file(&a.schedule)?;
            let value: Value = serde_json::from_str(&text)
                .with_context(|| format!("malformed schedule JSON in {}", a.schedule.display()))?;
            let value = value.get("schedule").cloned().unwrap_or(value);
            let sched = Schedule::from_json_value(net.len(), &value)?;
            println!("{}", format_g(schedule_rate(&net, &sched)?));
        }
        Command::Montecarlo(a) => montecarlo(&a)?,
        Command::Normalize(a) => {
            let net = read_network(&a.input.input)?;
            let norm = net.normalize()?;
            emit(a.output.as_deref(), &(NetworkFile::from_normalized(&norm).to_json() + "\n"))?;
        }
    }
    Ok(())
}

fn montecarlo(a: &MonteCarloArgs) -> Result<()> {
    if a.n_min == 0 || a.n_min > a.n_max {
        bail!("need 1 <= n-min <= n-max, got {}..{}", a.n_min, a.n_max);
    }
    let fading = match a.fading {
        FadingKind::Rayleigh => {
            if !(a.sigma > 0.0 && a.sigma.is_finite()) {
                bail!("sigma must be positive and finite");
            }
            Fading::Rayleigh { sigma: a.sigma }
        }
        FadingKind::LogUniform => {
            if !(a.lo > 0.0 && a.lo <= a.hi && a.hi.is_finite()) {
                bail!("need 0 < lo <= hi < inf");
            }
            Fading::LogUniform { lo: a.lo, hi: a.hi }
        }
    };
    let cfg = MonteCarloConfig { n_list: (a.n_min..=a.n_max).collect(), trials: a.trials, seed: a.seed, fading };
    let out = run_monte_carlo(&cfg)?;
    let csv = stats_csv(&out.stats);
    match &a.output {
        Some(path) => {
            write_file(path, &csv)?;
            let mut meta = path.clone().into_os_string();
            meta.push(".meta.json");
            write_file(Path::new(&meta), &(metadata_json(&cfg, &out) + "\n"))?;
        }
        None => print!("{csv}"),
    }
    if let Some(path) = &a.raw {
        write_file(path, &raw_csv(&out.raw))?;
    }
    Ok(())
}

fn resolve_l(f: &FamilyArgs) -> Option<f64> {
    if f.l.is_some() && !f.family.uses_l() {
        log::warn!("--L is ignored for family {}", f.family);
    }
    f.l
}

fn solve(net: &DiamondNetwork, exact: bool) -> Result<CapacityResult> {
    let mode = if exact { SolveMode::Exact } else { SolveMode::Float };
    let res = approximate_capacity(net, mode)?;
    info!("{} pivots, schedule support {}", res.diagnostics.pivots, res.support_size);
    if let Some(v) = &res.diagnostics.exact_value {
        info!("exact value {v}");
    }
    Ok(res)
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn read_network(path: &Path) -> Result<DiamondNetwork> {
    let text = read_file(path)?;
    NetworkFile::parse(&text).with_context(|| format!("in {}", path.display()))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))?;
    info!("wrote {}", path.display());
    Ok(())
}

fn emit(path: Option<&Path>, contents: &str) -> Result<()> {
    match path {
        Some(p) => write_file(p, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn parses_worst() {
        let cli = Cli::try_parse_from(["diamond", "worst", "--family", "odd1", "-n", "5", "--L", "1e9"]).unwrap();
        match cli.command {
            Command::Worst(a) => {
                assert_eq!(a.family.family, FamilyId::Odd1);
                assert_eq!(a.family.n, 5);
                assert_eq!(a.family.l, Some(1e9));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn seed_is_required() {
        assert!(Cli::try_parse_from(["diamond", "montecarlo", "--trials", "3"]).is_err());
    }
}
