use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use tisched::bench::{format_table, BenchRow};
use tisched::generate::{generate_instance, GeneratorConfig};
use tisched::io::{parse_instance_with, parse_solution, serialize_instance, serialize_solution, ParseOptions};
use tisched::oracle::{brute_force_optimal, OracleLimits};
use tisched::{check, evaluate, solve, Instance, PredUpdate, SearchBudget, SearchConfig, T4Mode};

#[derive(Parser)]
#[command(name = "tisched", version, about = "Technicians and interventions scheduling")]
struct Cli {
    /// Repeat for more detail (-v: permutation sweep, -vv: every iteration).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct InstanceArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Requirement rows count technicians per exact level instead of "level or better".
    #[arg(long)]
    exact_levels: bool,
}

impl InstanceArgs {
    fn load(&self) -> Result<Instance> {
        load_instance(&self.instance, self.exact_levels)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute a schedule.
    Solve {
        #[command(flatten)]
        input: InstanceArgs,
        /// Wall-clock budget in seconds.
        #[arg(long, default_value_t = 10.0)]
        time_limit: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Restricted candidate list width; 0 is the deterministic greedy.
        #[arg(long, default_value_t = tisched::construct::DEFAULT_ALPHA)]
        alpha: f64,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Fixed number of constructions instead of a time limit (reproducible).
        #[arg(long)]
        iterations: Option<u64>,
        #[arg(long, default_value = "priority")]
        t4_mode: T4Mode,
        #[arg(long, default_value = "direct")]
        pred_update: PredUpdate,
        /// Restart criteria from their initial values after every iteration.
        #[arg(long)]
        reset_criteria: bool,
    },
    /// Validate a solution; exit status 2 when it violates a constraint.
    Check {
        #[command(flatten)]
        input: InstanceArgs,
        #[arg(long)]
        solution: PathBuf,
        #[arg(long, default_value = "priority")]
        t4_mode: T4Mode,
    },
    /// Exact optimum of a tiny instance by enumeration.
    Oracle {
        #[command(flatten)]
        input: InstanceArgs,
        #[arg(long, default_value_t = OracleLimits::default().max_days)]
        max_days: u32,
        #[arg(long, default_value_t = OracleLimits::default().node_budget)]
        node_budget: u64,
        #[arg(long, default_value = "priority")]
        t4_mode: T4Mode,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a random instance.
    Gen {
        #[arg(long)]
        interventions: usize,
        #[arg(long)]
        technicians: usize,
        #[arg(long)]
        domains: usize,
        #[arg(long)]
        levels: usize,
        #[arg(long, default_value_t = 0.1)]
        density: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 120)]
        hmax: u64,
        #[arg(long, default_value_t = 0.2)]
        budget_fraction: f64,
        #[arg(long, default_value_t = 3)]
        max_team_size: usize,
        /// Probability of a technician being off on each of the first `calendar_days` days.
        #[arg(long, default_value_t = 0.0)]
        unavailability: f64,
        #[arg(long, default_value_t = 0)]
        calendar_days: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve every instance of a directory and report gaps to reference values.
    Bench {
        #[arg(long)]
        dir: PathBuf,
        /// CSV of `instance,best` rows; instance names are file stems.
        #[arg(long = "ref")]
        reference: Option<PathBuf>,
        #[arg(long, default_value_t = 1200.0)]
        time_limit: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        exact_levels: bool,
    },
}

fn load_instance(path: &Path, exact_levels: bool) -> Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_instance_with(&text, ParseOptions { exact_level_requirements: exact_levels })
        .with_context(|| format!("parsing {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn wall_clock(seconds: f64) -> Result<Duration> {
    Duration::try_from_secs_f64(seconds)
        .ok()
        .filter(|d| !d.is_zero())
        .with_context(|| format!("time limit {seconds} must be a positive number of seconds"))
}

fn read_reference(path: &Path) -> Result<BTreeMap<String, u64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut out = BTreeMap::new();
    for record in reader.records() {
        let record = record?;
        let (Some(name), Some(best)) = (record.get(0), record.get(1)) else { continue };
        // a header row simply fails to parse
        if let Ok(best) = best.parse() {
            out.insert(name.to_string(), best);
        }
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Solve { input, time_limit, seed, alpha, out, iterations, t4_mode, pred_update, reset_criteria } => {
            let instance = input.load()?;
            let budget = match iterations {
                Some(n) => SearchBudget::Iterations(n),
                None => SearchBudget::WallClock(wall_clock(time_limit)?),
            };
            let config = SearchConfig { budget, seed, alpha, pred_update, t4_mode, reset_criteria };
            let outcome = solve(&instance, &config)?;
            let report = check(&instance, &outcome.solution);
            if !report.is_empty() {
                bail!("internal error: solver produced an infeasible schedule\n{report}");
            }
            let plan = &outcome.plan;
            eprintln!(
                "z={} hired={:?} cost={} weight={} exact={} p1={} p2={}",
                outcome.objective.z,
                plan.hired,
                plan.total_cost,
                plan.total_weight,
                plan.exact,
                outcome.sweep.best,
                outcome.sweep.second
            );
            emit(out.as_deref(), &serialize_solution(&outcome.solution, &outcome.objective))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Check { input, solution, t4_mode } => {
            let instance = input.load()?;
            let text = fs::read_to_string(&solution).with_context(|| format!("reading {}", solution.display()))?;
            let solution =
                parse_solution(&text, &instance).with_context(|| format!("parsing {}", solution.display()))?;
            let report = check(&instance, &solution);
            println!("{}", evaluate(&instance, &solution, t4_mode));
            print!("{report}");
            Ok(if report.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
        Command::Oracle { input, max_days, node_budget, t4_mode, out } => {
            let instance = input.load()?;
            let limits = OracleLimits { max_days, node_budget, ..Default::default() };
            let result = brute_force_optimal(&instance, &limits, t4_mode)?;
            eprintln!("z*={} nodes={}", result.objective.z, result.nodes);
            emit(out.as_deref(), &serialize_solution(&result.solution, &result.objective))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Gen {
            interventions,
            technicians,
            domains,
            levels,
            density,
            seed,
            hmax,
            budget_fraction,
            max_team_size,
            unavailability,
            calendar_days,
            out,
        } => {
            let config = GeneratorConfig {
                interventions,
                technicians,
                domains,
                levels,
                density,
                seed,
                hmax,
                budget_fraction,
                max_team_size,
                unavailability,
                calendar_days,
                ..Default::default()
            };
            let instance = generate_instance(&config)?;
            emit(out.as_deref(), &serialize_instance(&instance))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench { dir, reference, time_limit, seed, exact_levels } => {
            let reference = match reference {
                Some(path) => read_reference(&path)?,
                None => BTreeMap::new(),
            };
            let budget = SearchBudget::WallClock(wall_clock(time_limit)?);
            let mut files: Vec<PathBuf> = fs::read_dir(&dir)
                .with_context(|| format!("listing {}", dir.display()))?
                .map(|e| e.map(|e| e.path()))
                .collect::<Result<_, _>>()?;
            files.retain(|p| p.is_file() && p.extension().is_none_or(|e| e != "csv"));
            files.sort();
            let mut rows = Vec::new();
            for path in files {
                let instance = match load_instance(&path, exact_levels) {
                    Ok(i) => i,
                    Err(e) => {
                        log::warn!("skipping {}: {e:#}", path.display());
                        continue;
                    }
                };
                let name = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
                let config = SearchConfig { budget, seed, ..Default::default() };
                let outcome = solve(&instance, &config).with_context(|| format!("solving {name}"))?;
                log::info!("{name}: z={}", outcome.objective.z);
                rows.push(BenchRow {
                    best: reference.get(&name).copied(),
                    instance: name,
                    interventions: instance.interventions().len(),
                    technicians: instance.technicians().len(),
                    domains: instance.domains(),
                    levels: instance.levels(),
                    obj: outcome.objective.z,
                });
            }
            print!("{}", format_table(&rows));
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).parse_default_env().format_timestamp(None).init();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
