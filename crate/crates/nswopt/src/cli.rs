//! Subcommand dispatch and exit codes.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use nswopt_core::conflp::{solve_unweighted_best, solve_weighted};
use nswopt_core::generate::{
    example1_instance, footnote, random_one_sided, random_two_sided, random_weighted, GenConfig, ValueFamily,
};
use nswopt_core::model::{ln_nsw_weighted, nsw_one_sided, nsw_two_sided, Allocation, Matching};
use nswopt_core::onesided::solve_one_sided_with_clock;
use nswopt_core::oracle::{exact_one_sided, exact_two_sided, exact_weighted, EnumerationBudget, DEFAULT_BUDGET};
use nswopt_core::twosided::{solve_two_sided, solve_two_sided_ptas};
use nswopt_core::{TwoSidedInstance, WeightedInstance};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::bench::{parse_config, run_bench};
use crate::io::{instance_to_string, load_instance, FormatError, Instance};
use crate::{report, StdClock};

pub const BUDGET_VAR: &str = "NSWOPT_BUDGET";

/// Errors the CLI raises itself, beyond core and format errors.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("model mismatch: {0}")]
    Mismatch(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("verification failed: {0}")]
    Rejected(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Alg {
    OneSided,
    TwoSided,
    Ptas,
    Weighted,
    Combined,
}

impl Alg {
    pub fn name(self) -> &'static str {
        match self {
            Alg::OneSided => "one-sided",
            Alg::TwoSided => "two-sided",
            Alg::Ptas => "ptas",
            Alg::Weighted => "weighted",
            Alg::Combined => "combined",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenModel {
    OneSided,
    TwoSided,
    Weighted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Footnote,
    Example1,
}

#[derive(Debug, Parser)]
#[command(name = "nswopt", version, about = "Capacitated Nash social welfare solvers and exact oracles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random or preset instance.
    Gen(GenArgs),
    /// Run an approximation algorithm on an instance file.
    Solve(SolveArgs),
    /// Solve an instance exactly by enumeration.
    Exact(ExactArgs),
    /// Run a benchmark sweep described by a JSON config and write CSV.
    Bench(BenchArgs),
    /// Check a result file against its instance.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum, default_value = "one-sided")]
    pub model: GenModel,
    /// additive, capped, coverage or xos
    #[arg(long, default_value = "additive")]
    pub family: String,
    #[arg(long, conflicts_with_all = ["model", "family"])]
    pub preset: Option<Preset>,
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 6)]
    pub m: usize,
    #[arg(long, default_value_t = 1)]
    pub min_capacity: usize,
    #[arg(long, default_value_t = 3)]
    pub max_capacity: usize,
    /// Denominator of generated values, at most 1000.
    #[arg(long, default_value_t = 10)]
    pub denominator: i64,
    /// Footnote preset: items per agent.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Footnote preset: common item value.
    #[arg(long, default_value_t = 1)]
    pub c: i64,
    /// Footnote preset: capacity of every agent.
    #[arg(long, default_value_t = 1)]
    pub capacity: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub instance: PathBuf,
    #[arg(long, value_enum)]
    pub alg: Alg,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    pub instance: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    pub config: PathBuf,
    /// Overrides the config's output path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub instance: PathBuf,
    pub result: PathBuf,
    /// Relative tolerance for the reported NSW.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// 2 for bad or infeasible input, 3 for exhausted resources, 1 otherwise.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    use nswopt_core::Error as E;
    fn core_code(e: &E) -> i32 {
        match e {
            E::ResourceLimit(_) => 3,
            _ => 2,
        }
    }
    if let Some(e) = err.downcast_ref::<E>() {
        return core_code(e);
    }
    if let Some(e) = err.downcast_ref::<FormatError>() {
        return match e {
            FormatError::Model(e) => core_code(e),
            FormatError::Io(_) => 1,
            _ => 2,
        };
    }
    if err.downcast_ref::<CliError>().is_some() {
        return 2;
    }
    1
}

fn emit(text: &str, out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn emit_json(value: &Value, out: Option<&Path>) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(&text, out)
}

/// Enumeration budget, overridable through `NSWOPT_BUDGET`.
pub fn budget_from_env() -> anyhow::Result<u64> {
    match std::env::var(BUDGET_VAR) {
        Err(_) => Ok(DEFAULT_BUDGET),
        Ok(raw) => {
            let parsed = raw
                .trim()
                .parse::<u64>()
                .ok()
                .or_else(|| raw.trim().parse::<f64>().ok().filter(|v| *v >= 1.0 && v.fract() == 0.0).map(|v| v as u64));
            parsed.ok_or_else(|| CliError::Invalid(format!("{BUDGET_VAR}={raw:?} is not a positive integer")).into())
        }
    }
}

fn load(path: &Path) -> anyhow::Result<Instance> {
    load_instance(path).with_context(|| format!("loading {}", path.display()))
}

fn mismatch(alg: Alg, inst: &Instance) -> anyhow::Error {
    CliError::Mismatch(format!("--alg {} cannot run on a {} instance", alg.name(), inst.model_name())).into()
}

fn gen(args: &GenArgs) -> anyhow::Result<()> {
    let inst = match args.preset {
        Some(Preset::Footnote) => Instance::OneSided(footnote(args.n, args.k, args.c, args.capacity)?),
        Some(Preset::Example1) => Instance::OneSided(example1_instance()),
        None => {
            let family = ValueFamily::parse(&args.family)
                .ok_or_else(|| CliError::Invalid(format!("unknown family {:?}", args.family)))?;
            if args.denominator < 1 || args.denominator > nswopt_core::generate::MAX_DENOMINATOR {
                return Err(CliError::Invalid("denominator must lie in 1..=1000".into()).into());
            }
            if args.min_capacity == 0 || args.min_capacity > args.max_capacity {
                return Err(CliError::Invalid("need 1 <= min-capacity <= max-capacity".into()).into());
            }
            let mut cfg = GenConfig::new(args.n, args.m, family).capacities(args.min_capacity, args.max_capacity);
            cfg.denominator = args.denominator;
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            match args.model {
                GenModel::OneSided => Instance::OneSided(random_one_sided(&mut rng, &cfg)?),
                GenModel::TwoSided => Instance::TwoSided(random_two_sided(&mut rng, &cfg)?),
                GenModel::Weighted => Instance::Weighted(random_weighted(&mut rng, &cfg)?),
            }
        }
    };
    emit(&instance_to_string(&inst), args.out.as_deref())
}

fn solve(args: &SolveArgs) -> anyhow::Result<()> {
    if !(args.eps > 0.0 && args.eps.is_finite()) {
        return Err(CliError::Invalid("--eps must be positive".into()).into());
    }
    let inst = load(&args.instance)?;
    let value = match (args.alg, &inst) {
        (Alg::OneSided, Instance::OneSided(i)) => report::one_sided(&solve_one_sided_with_clock(i, args.eps, &StdClock::new())?),
        (Alg::TwoSided, Instance::TwoSided(i)) => report::two_sided(&solve_two_sided(i)?),
        (Alg::Ptas, Instance::TwoSided(i)) => report::ptas(&solve_two_sided_ptas(i, args.eps)?),
        (Alg::Combined, Instance::TwoSided(i)) => {
            report::combined(&solve_unweighted_best(i, args.eps, args.trials, args.seed)?)
        }
        (Alg::Weighted, Instance::Weighted(i)) => report::weighted(&solve_weighted(i, args.eps, args.trials, args.seed)?),
        (Alg::Weighted, Instance::TwoSided(i)) => {
            let uniform = WeightedInstance::uniform(i.clone())?;
            report::weighted(&solve_weighted(&uniform, args.eps, args.trials, args.seed)?)
        }
        (alg, inst) => return Err(mismatch(alg, inst)),
    };
    emit_json(&value, args.out.as_deref())
}

fn exact(args: &ExactArgs) -> anyhow::Result<()> {
    let budget = EnumerationBudget::new(budget_from_env()?);
    let value = match load(&args.instance)? {
        Instance::OneSided(i) => report::exact_one_sided(&exact_one_sided(&i, budget)?),
        Instance::TwoSided(i) => report::exact_two_sided(&exact_two_sided(&i, budget)?),
        Instance::Weighted(i) => report::exact_weighted(&exact_weighted(&i, budget)?),
    };
    emit_json(&value, args.out.as_deref())
}

fn bench(args: &BenchArgs) -> anyhow::Result<()> {
    let text = fs::read_to_string(&args.config).with_context(|| format!("reading {}", args.config.display()))?;
    let cfg = parse_config(&text)?;
    let budget = budget_from_env()?;
    let out = args.out.clone().or_else(|| cfg.out.clone());
    let mut buf = Vec::new();
    let failures = run_bench(&cfg, budget, &mut buf)?;
    if failures > 0 {
        eprintln!("bench: {failures} row(s) incomplete");
    }
    emit(std::str::from_utf8(&buf)?, out.as_deref())
}

fn field<'a>(result: &'a Value, keys: &[&str]) -> Option<&'a Value> {
    keys.iter().find_map(|k| result.get(*k))
}

fn parse_matching(value: &Value) -> anyhow::Result<Matching> {
    let assignment: Vec<Option<usize>> = serde_json::from_value(value.clone())
        .map_err(|e| CliError::Invalid(format!("bad matching: {e}")))?;
    Ok(Matching::new(assignment))
}

fn check_matching(market: &TwoSidedInstance, matching: &Matching) -> anyhow::Result<()> {
    matching
        .validate(market.capacities(), market.m())
        .map_err(|e| CliError::Rejected(format!("matching is infeasible: {e}")))?;
    Ok(())
}

fn verify(args: &VerifyArgs) -> anyhow::Result<()> {
    let inst = load(&args.instance)?;
    let text = fs::read_to_string(&args.result).with_context(|| format!("reading {}", args.result.display()))?;
    let result: Value =
        serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("bad result file: {e}")))?;
    let nsw = match &inst {
        Instance::OneSided(i) => {
            let bundles = field(&result, &["allocation"])
                .ok_or_else(|| CliError::Mismatch("one-sided results need an allocation".into()))?;
            let alloc: Allocation = Allocation::new(
                serde_json::from_value(bundles.clone())
                    .map_err(|e| CliError::Invalid(format!("bad allocation: {e}")))?,
            );
            if !alloc.is_feasible(i) {
                return Err(CliError::Rejected("allocation is infeasible".into()).into());
            }
            nsw_one_sided(i, &alloc)
        }
        Instance::TwoSided(i) => {
            let value = field(&result, &["matching", "best_matching"])
                .ok_or_else(|| CliError::Mismatch("two-sided results need a matching".into()))?;
            let matching = parse_matching(value)?;
            check_matching(i, &matching)?;
            nsw_two_sided(i, &matching)
        }
        Instance::Weighted(i) => {
            let value = field(&result, &["best_matching", "matching"])
                .ok_or_else(|| CliError::Mismatch("two-sided results need a matching".into()))?;
            let matching = parse_matching(value)?;
            check_matching(i.market(), &matching)?;
            let ln = ln_nsw_weighted(i.market(), &matching, &i.firm_weights_f64(), &i.worker_weights_f64())?;
            if ln == f64::NEG_INFINITY {
                0.0
            } else {
                ln.exp()
            }
        }
    };
    let reported = result.get("nsw").and_then(Value::as_f64);
    if let Some(r) = reported {
        if (r - nsw).abs() > args.tol * nsw.abs().max(1.0) {
            return Err(CliError::Rejected(format!("reported NSW {r} but the result has NSW {nsw}")).into());
        }
    }
    emit_json(&json!({"feasible": true, "nsw": nsw, "reported_nsw": reported}), args.out.as_deref())
}

pub fn dispatch(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Gen(a) => gen(a),
        Command::Solve(a) => solve(a),
        Command::Exact(a) => exact(a),
        Command::Bench(a) => bench(a),
        Command::Verify(a) => verify(a),
    }
}

/// Runs the CLI on the given arguments and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let infeasible: anyhow::Error = nswopt_core::Error::Infeasible("x".into()).into();
        assert_eq!(exit_code(&infeasible), 2);
        let resource: anyhow::Error = nswopt_core::Error::ResourceLimit("x".into()).into();
        assert_eq!(exit_code(&resource.context("while solving")), 3);
        let wrapped: anyhow::Error = FormatError::Model(nswopt_core::Error::ResourceLimit("x".into())).into();
        assert_eq!(exit_code(&wrapped), 3);
        assert_eq!(exit_code(&CliError::Mismatch("x".into()).into()), 2);
        assert_eq!(exit_code(&anyhow::anyhow!("other")), 1);
    }
}
