use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use roughflow::experiment::{
    evaluate_checks, hopf_selftest, write_artifacts, write_residuals_csv, write_trajectory_csv,
    Experiment, ExperimentConfig, RunOutcome,
};
use roughflow::Error;

#[derive(Parser)]
#[command(
    name = "roughflow",
    version,
    about = "Rough differential equation experiments"
)]
struct Cli {
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; defaults to the config's `output`, then `roughflow-out`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for the residual sweeps.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the coefficients of the lifted driver over `[start, end]`.
    Lift {
        /// Defaults to the start of the driver's domain.
        #[arg(long)]
        start: Option<f64>,
        /// Defaults to the end of the driver's domain.
        #[arg(long)]
        end: Option<f64>,
    },
    /// Check coassociativity and the antipode on all forests up to a grade.
    HopfSelftest {
        #[arg(long, default_value_t = 2)]
        width: usize,
        #[arg(long, default_value_t = 4)]
        max_grade: usize,
    },
    /// Solve on the driver's knots and write `solution.csv`.
    Solve,
    /// Dyadic residual study: `residuals.csv` and `report.json`.
    Residuals,
    /// Davie versus Bailleul slope table.
    Equivalence,
    /// Approximate-flow defect study.
    FlowCheck,
}

enum Failure {
    Invalid(String),
    Numerical(String),
    Threshold(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Invalid(e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("numerical failure: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Threshold(m)) => {
            eprintln!("threshold failure: {m}");
            ExitCode::from(3)
        }
    }
}

fn load(cli: &Cli) -> Result<Experiment, Failure> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Failure::Invalid("--config is required for this subcommand".into()))?;
    let mut config = ExperimentConfig::from_file(path)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    Ok(Experiment::load(config)?)
}

fn out_dir(cli: &Cli, exp: Option<&Experiment>) -> Result<PathBuf, Failure> {
    let dir = cli
        .out
        .clone()
        .or_else(|| exp.and_then(|e| e.config.output.clone()))
        .unwrap_or_else(|| PathBuf::from("roughflow-out"));
    std::fs::create_dir_all(&dir).map_err(Error::from)?;
    Ok(dir)
}

fn create(dir: &Path, name: &str) -> Result<std::fs::File, Failure> {
    Ok(std::fs::File::create(dir.join(name)).map_err(Error::from)?)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Invalid("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Invalid(e.to_string()))?;
    }
    match &cli.command {
        Command::HopfSelftest { width, max_grade } => {
            if *width == 0 || *max_grade == 0 || *max_grade > 6 {
                return Err(Failure::Invalid(
                    "need width >= 1 and 1 <= max-grade <= 6".into(),
                ));
            }
            let r = hopf_selftest(*width, *max_grade);
            println!("width {}  max grade {}", r.width, r.max_grade);
            for (n, c) in r.tree_counts.iter().enumerate() {
                println!("trees with {} nodes: {c}", n + 1);
            }
            for (n, c) in r.forest_counts.iter().enumerate() {
                println!("forests of grade {n}: {c}");
            }
            println!(
                "coassociativity failures: {}",
                r.coassociativity_failures.len()
            );
            println!("antipode failures: {}", r.antipode_failures.len());
            if let Some(out) = &cli.out {
                std::fs::create_dir_all(out).map_err(Error::from)?;
                let json = serde_json::to_string_pretty(&r).map_err(Error::from)?;
                std::fs::write(out.join("hopf_selftest.json"), json + "\n").map_err(Error::from)?;
            }
            if !r.passed() {
                return Err(Failure::Threshold("Hopf identities violated".into()));
            }
        }
        Command::Lift { start, end } => {
            let exp = load(cli)?;
            let knots = exp.driver.knots();
            let s = start.unwrap_or(knots[0]);
            let t = end.unwrap_or(*knots.last().unwrap());
            let rows = exp.lift_coefficients(s, t)?;
            let dir = out_dir(cli, Some(&exp))?;
            let mut w = csv::Writer::from_writer(create(&dir, "lift.csv")?);
            w.write_record(["s", "t", "key", "value"])
                .map_err(Error::from)?;
            for (k, v) in &rows {
                println!("{k:>12}  {v:+.12e}");
                w.write_record([s.to_string(), t.to_string(), k.clone(), format!("{v:e}")])
                    .map_err(Error::from)?;
            }
            w.flush().map_err(Error::from)?;
        }
        Command::Solve => {
            let exp = load(cli)?;
            let z = exp.solve()?;
            let dir = out_dir(cli, Some(&exp))?;
            write_trajectory_csv(&z, create(&dir, "solution.csv")?)?;
            println!("final state {:?}", z.final_state());
        }
        Command::Residuals => {
            let exp = load(cli)?;
            let outcome = exp.run()?;
            let dir = out_dir(cli, Some(&exp))?;
            write_artifacts(&outcome, &dir)?;
            print_checks(&outcome);
            verdict(&outcome)?;
        }
        Command::Equivalence => {
            let exp = load(cli)?;
            let outcome = exp.run()?;
            let dir = out_dir(cli, Some(&exp))?;
            write_artifacts(&outcome, &dir)?;
            let davie = outcome.report("davie", "-").and_then(|r| r.slope);
            let mut w = csv::Writer::from_writer(create(&dir, "equivalence.csv")?);
            w.write_record(["kind", "f_id", "slope", "r_squared", "gap_to_davie"])
                .map_err(Error::from)?;
            println!(
                "{:<10} {:<10} {:>8} {:>8} {:>8}",
                "kind", "f_id", "slope", "R^2", "gap"
            );
            let rows = outcome
                .reports_of("davie")
                .chain(outcome.reports_of("bailleul"));
            let fmt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.4}"));
            for r in rows {
                let gap = match (r.slope, davie) {
                    (Some(a), Some(b)) => Some((a - b).abs()),
                    _ => None,
                };
                println!(
                    "{:<10} {:<10} {:>8} {:>8} {:>8}",
                    r.kind,
                    r.f_id,
                    fmt(r.slope),
                    fmt(r.r_squared),
                    fmt(gap)
                );
                w.write_record([
                    r.kind.clone(),
                    r.f_id.clone(),
                    fmt(r.slope),
                    fmt(r.r_squared),
                    fmt(gap),
                ])
                .map_err(Error::from)?;
            }
            w.flush().map_err(Error::from)?;
            let checks = outcome.checks_for(&["davie", "bailleul", "spread"]);
            if let Some(c) = checks.iter().find(|c| !c.passed) {
                return Err(Failure::Threshold(format!("{}: {}", c.name, c.detail)));
            }
        }
        Command::FlowCheck => {
            let exp = load(cli)?;
            let report = exp.flow_study()?;
            let dir = out_dir(cli, Some(&exp))?;
            write_residuals_csv(
                std::slice::from_ref(&report),
                create(&dir, "flow_check.csv")?,
            )?;
            let checks = evaluate_checks(std::slice::from_ref(&report), &exp.config.thresholds);
            for c in &checks {
                println!(
                    "{} {}: {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
            }
            if !checks.iter().all(|c| c.passed) {
                return Err(Failure::Threshold("approximate-flow defect".into()));
            }
        }
    }
    Ok(())
}

fn print_checks(outcome: &RunOutcome) {
    for c in &outcome.checks {
        println!(
            "{} {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
}

fn verdict(outcome: &RunOutcome) -> Result<(), Failure> {
    match outcome.checks.iter().find(|c| !c.passed) {
        None => Ok(()),
        Some(c) => Err(Failure::Threshold(format!("{}: {}", c.name, c.detail))),
    }
}
