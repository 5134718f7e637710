use std::path::PathBuf;
use std::process::ExitCode;

use bcsim::engine::{run_experiment, Metric, Scenario};
use bcsim::io::{emit_reports, load_config, write_param_rows, RunInfo};
use bcsim::{Error, Result};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "bcsim", version, about = "Breast-cancer lockdown microsimulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the paired scenario experiment and write reports.
    Simulate(SimulateArgs),
    /// Print every calibrated parameter as CSV.
    DumpParams {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ScenarioArg {
    Covid,
    Nocovid,
    Both,
}

#[derive(clap::Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_enum, default_value_t = ScenarioArg::Both)]
    scenario: ScenarioArg,
    /// Overrides `simulation.replications`.
    #[arg(long)]
    replications: Option<u32>,
    /// Overrides `simulation.base_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; required unless `--dump-params` is given.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Give each scenario its own random streams.
    #[arg(long)]
    no_crn: bool,
    /// Overrides `simulation.population_fraction`.
    #[arg(long)]
    fraction: Option<f64>,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Print the calibrated parameters as CSV and exit.
    #[arg(long)]
    dump_params: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::DumpParams { config } => dump_params(&config),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bcsim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dump_params(config: &std::path::Path) -> Result<()> {
    let loaded = load_config(config)?;
    let exp = loaded.experiment(vec![Scenario::NoCovid])?;
    let rows = loaded.calibration_dump(&exp.params)?;
    write_param_rows(&rows, std::io::stdout().lock())
}

fn simulate(args: SimulateArgs) -> Result<()> {
    if args.dump_params {
        return dump_params(&args.config);
    }
    let out = args
        .out
        .clone()
        .ok_or_else(|| Error::config("--out is required when running a simulation"))?;
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::config(format!("cannot configure {n} threads: {e}")))?;
    }

    let mut loaded = load_config(&args.config)?;
    let sim = &mut loaded.file.simulation;
    if let Some(n) = args.replications {
        sim.replications = n;
    }
    if let Some(s) = args.seed {
        sim.base_seed = s;
    }
    if let Some(f) = args.fraction {
        sim.population_fraction = f;
    }
    if args.no_crn {
        sim.common_random_numbers = false;
    }
    sim.validate()?;

    let scenarios = match args.scenario {
        ScenarioArg::Covid => vec![Scenario::Covid],
        ScenarioArg::Nocovid => vec![Scenario::NoCovid],
        ScenarioArg::Both => vec![Scenario::NoCovid, Scenario::Covid],
    };
    let exp = loaded.experiment(scenarios)?;
    let mut info = RunInfo::now(
        args.config.display().to_string(),
        loaded.text.clone(),
        loaded.calibration_dump(&exp.params)?,
    );
    let started = std::time::Instant::now();
    let result = run_experiment(&exp)?;
    info.finish();
    emit_reports(&result, &info, &out)?;

    println!(
        "{} replications x {} scenario(s), cohort {} persons, {:.1}s",
        exp.config.replications,
        result.runs.len(),
        result.cohort_size,
        started.elapsed().as_secs_f64()
    );
    for runs in &result.runs {
        let total = mean(&result.samples(runs.scenario, Metric::TotalCost, None));
        let deaths = mean(&result.samples(runs.scenario, Metric::CancerDeaths, None));
        println!(
            "  {:<8} total cost {:>9.1} M PLN, cancer deaths {:>8.0}",
            runs.scenario.name(),
            total / 1e6,
            deaths
        );
    }
    if result.runs.len() == 2 {
        for metric in [Metric::TotalCost, Metric::CancerDeaths] {
            if let Ok(d) = result.difference(metric, None, 0.95) {
                let unit = if metric.is_cost() { 1e6 } else { 1.0 };
                println!(
                    "  excess {:<12} {:.1} [{:.1}, {:.1}] p = {:.2e}",
                    metric.name(),
                    d.summary.mean / unit,
                    d.summary.ci_low / unit,
                    d.summary.ci_high / unit,
                    d.p_value.unwrap_or(f64::NAN)
                );
            }
        }
    }
    println!("reports written to {}", out.display());
    Ok(())
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len().max(1) as f64
}
