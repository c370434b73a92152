mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use solenoid_core::charfun::EquationVerdict;
use solenoid_core::rat::format_rational;
use solenoid_core::sampler::{linear_form, project_batch, required_depth, sample_stream, EquidistReport, Verdict};
use solenoid_core::scenarios::{classify_and_conclude, counterexample_pr1, scenario_remark_r3};
use solenoid_core::solenoid::solve_k_vector;
use solenoid_core::{Multiplicity, SteinitzSpec};

use config::{missing, RunConfig};
use output::Table;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] solenoid_core::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "solenoid", version, about = "Characteristic functions and equidistribution on a-adic solenoids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Seed for every random stream; overrides the config.
    #[arg(long, global = true, env = "SOLENOID_SEED")]
    seed: Option<u64>,
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    depth: Option<usize>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the solenoid class and its automorphism group.
    Classify { config: PathBuf },
    /// Exact equation check, decomposition and conclusion.
    Check { config: PathBuf },
    /// Monte Carlo comparison of the law with its linear form.
    Simulate { config: PathBuf },
    /// Nonnegative integer vectors k with sum k_j p^(-2j) = 1.
    SolveCoeffs { config: PathBuf },
    /// Build the two-prime counterexample bundle.
    Counterexample { config: PathBuf },
}

/// Process outcome, mapped onto the exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Ok,
    Negative,
    Unknown,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Negative) => ExitCode::from(1),
        Ok(Outcome::Unknown) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Classify { config } => classify(cli, &RunConfig::load(config)?),
        Command::Check { config } => check(cli, &RunConfig::load(config)?),
        Command::Simulate { config } => simulate(cli, config, &RunConfig::load(config)?),
        Command::SolveCoeffs { config } => solve_coeffs(cli, &RunConfig::load(config)?),
        Command::Counterexample { config } => counterexample(cli, config, &RunConfig::load(config)?),
    }
}

fn emit<T: Serialize>(cli: &Cli, report: &T, table: impl FnOnce() -> Table) -> Result<(), CliError> {
    match cli.format {
        Format::Json => {
            let text = serde_json::to_string_pretty(report).expect("reports serialize");
            println!("{text}");
        }
        Format::Csv => table().write(std::io::stdout())?,
    }
    Ok(())
}

/// `dir/stem.suffix` next to the config file.
fn beside(config: &Path, suffix: &str) -> PathBuf {
    let stem = config.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
    config.with_file_name(format!("{stem}.{suffix}"))
}

#[derive(Serialize)]
struct ClassifyReport<'a> {
    solenoid: &'a SteinitzSpec,
    circle: bool,
    class: solenoid_core::SolenoidClass,
    automorphisms: String,
}

fn classify(cli: &Cli, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let spec = cfg.solenoid()?;
    let report = ClassifyReport {
        solenoid: spec,
        circle: spec.is_circle(),
        class: spec.classify(),
        automorphisms: spec.automorphism_group_description(),
    };
    emit(cli, &report, || {
        let mut t = Table::new(&["field", "value"]);
        t.row(["solenoid".into(), spec.to_string()]);
        t.row(["circle".into(), report.circle.to_string()]);
        t.row(["class".into(), format!("{:?}", report.class)]);
        t.row(["automorphisms".into(), report.automorphisms.clone()]);
        t
    })?;
    Ok(Outcome::Ok)
}

fn check(cli: &Cli, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let spec = cfg.solenoid()?;
    let coeffs = cfg.coefficients(spec)?;
    let f = cfg.cf(spec)?;
    let verdict = classify_and_conclude(spec, coeffs, &f)?;
    emit(cli, &verdict, || {
        let mut t = Table::new(&["field", "value"]);
        t.row(["class".into(), format!("{:?}", verdict.class)]);
        t.row(["coefficients".into(), verdict.coefficients.join(" ")]);
        t.row(["sum_of_squares_one".into(), verdict.sum_of_squares_one.to_string()]);
        t.row(["equation".into(), output::equation_cell(verdict.equation.as_ref())]);
        t.row(["decomposition".into(), output::extraction_cell(verdict.decomposition.as_ref())]);
        t.row(["conclusion".into(), format!("{:?}", verdict.conclusion)]);
        t
    })?;
    Ok(match verdict.equation {
        Some(EquationVerdict::Holds) => Outcome::Ok,
        Some(EquationVerdict::Fails { .. }) => Outcome::Negative,
        Some(EquationVerdict::Unknown { .. }) => Outcome::Unknown,
        None => Outcome::Negative,
    })
}

fn simulate(cli: &Cli, path: &Path, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let spec = cfg.solenoid()?;
    let coeffs = cfg.coefficients(spec)?;
    let law = cfg.sampler()?;
    let sim = &cfg.simulation;
    let n = cli.n.or(sim.n).unwrap_or(100_000);
    let depth = cli.depth.or(sim.depth).unwrap_or(6);
    let seed = cli.seed.or(sim.seed).unwrap_or(0);
    let alpha = cli.alpha.or(sim.alpha).unwrap_or(0.01);
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(CliError::Config(format!("alpha = {alpha} is not in (0, 1)")));
    }
    let report: EquidistReport = solenoid_core::sampler::monte_carlo_equidist(
        spec,
        law,
        coeffs,
        n,
        depth,
        sim.charset.as_deref(),
        seed,
        alpha,
    )?;

    // the same streams the report was computed from
    let sample_depth = required_depth(spec, coeffs, depth)?;
    let reference = project_batch(spec, &sample_stream(spec, law, sample_depth, n, seed, 0)?, depth)?;
    let copies = (0..coeffs.len())
        .map(|j| sample_stream(spec, law, sample_depth, n, seed, j as u64 + 1))
        .collect::<Result<Vec<_>, _>>()?;
    let l = linear_form(spec, &copies, coeffs, depth)?;
    for (name, batch) in [("reference", &reference), ("linear_form", &l)] {
        let mut t = Table::new(&["depth", "coord"]);
        for x in &batch.coords {
            t.row([batch.depth.to_string(), x.to_string()]);
        }
        t.write(std::fs::File::create(beside(path, &format!("{name}.csv")))?)?;
    }

    emit(cli, &report, || {
        let mut t = Table::new(&["test", "parameter", "statistic", "p_value"]);
        for c in &report.characters {
            t.row(["cf_gap".into(), c.y.to_string(), c.statistic.to_string(), c.p_value.to_string()]);
        }
        for d in &report.depths {
            t.row(["kuiper".into(), d.depth.to_string(), d.statistic.to_string(), d.p_value.to_string()]);
        }
        t
    })?;
    Ok(match report.verdict {
        Verdict::Consistent => Outcome::Ok,
        Verdict::Inconsistent => Outcome::Negative,
    })
}

#[derive(Serialize)]
struct SolveReport {
    p: u64,
    l: usize,
    count: usize,
    solutions: Vec<Vec<u64>>,
}

fn solve_coeffs(cli: &Cli, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = cfg.p.ok_or_else(|| missing("p"))?;
    let l = cfg.l.ok_or_else(|| missing("l"))?;
    let solutions = solve_k_vector(p, l).map_err(|e| CliError::Config(e.to_string()))?;
    let report = SolveReport { p, l, count: solutions.len(), solutions };
    emit(cli, &report, || {
        let header: Vec<String> = (1..=l).map(|j| format!("k{j}")).collect();
        let mut t = Table::new(&header.iter().map(String::as_str).collect::<Vec<_>>());
        for k in &report.solutions {
            t.row(k.iter().map(u64::to_string));
        }
        t
    })?;
    Ok(Outcome::Ok)
}

fn counterexample(cli: &Cli, path: &Path, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = cfg.p.ok_or_else(|| missing("p"))?;
    let q = cfg.q.ok_or_else(|| missing("q"))?;
    let c = cfg.c.clone().ok_or_else(|| missing("c"))?;
    let spec = match &cfg.solenoid {
        Some(s) => s.clone(),
        None => SteinitzSpec::new([(p, Multiplicity::Infinite), (q, Multiplicity::Infinite)])
            .map_err(|e| CliError::Config(e.to_string()))?,
    };
    let config_err = |e: solenoid_core::Error| match e {
        solenoid_core::Error::PreconditionViolated(_) | solenoid_core::Error::NotPrime(_) => {
            CliError::Config(e.to_string())
        }
        other => CliError::Core(other),
    };
    let bundle = counterexample_pr1(&spec, p, q, &c).map_err(config_err)?;
    let gaussian = match &cfg.sigma {
        Some(sigma) => Some(scenario_remark_r3(&spec, p, q, &c, sigma).map_err(config_err)?),
        None => None,
    };
    let passed = bundle.passed() && gaussian.as_ref().is_none_or(|g| g.passed());

    #[derive(Serialize)]
    struct Full<'a> {
        solenoid: &'a SteinitzSpec,
        bundle: &'a solenoid_core::scenarios::CounterexampleBundle,
        #[serde(skip_serializing_if = "Option::is_none")]
        gaussian: Option<&'a solenoid_core::scenarios::GaussianCounterexample>,
        passed: bool,
    }
    let full = Full { solenoid: &spec, bundle: &bundle, gaussian: gaussian.as_ref(), passed };
    let text = serde_json::to_string_pretty(&full).expect("reports serialize");
    std::fs::write(beside(path, "bundle.json"), format!("{text}\n"))?;
    emit(cli, &full, || {
        let mut t = Table::new(&["field", "value"]);
        t.row(["p".into(), p.to_string()]);
        t.row(["q".into(), q.to_string()]);
        t.row(["c".into(), format_rational(&c)]);
        t.row(["a".into(), bundle.a.to_string()]);
        t.row(["b".into(), bundle.b.clone()]);
        let coeffs: Vec<String> = bundle.coeffs.iter().map(|a| a.to_string()).collect();
        t.row(["coefficients".into(), coeffs.join(" ")]);
        for check in bundle.checks.iter().chain(gaussian.iter().flat_map(|g| &g.checks)) {
            t.row([check.name.clone(), check.passed.to_string()]);
        }
        t
    })?;
    Ok(if passed { Outcome::Ok } else { Outcome::Negative })
}
