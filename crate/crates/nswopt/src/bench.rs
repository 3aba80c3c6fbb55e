//! Benchmark sweeps: solver against oracle over a grid of random instances.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context};
use nswopt_core::conflp::{combined_bound, solve_unweighted_best, solve_weighted};
use nswopt_core::generate::{random_one_sided, random_two_sided, random_weighted, GenConfig, ValueFamily};
use nswopt_core::onesided::solve_one_sided_with_clock;
use nswopt_core::oracle::{exact_one_sided, exact_two_sided, exact_weighted, EnumerationBudget, MAX_ORACLE_ITEMS};
use nswopt_core::twosided::{ratio_bound, solve_two_sided, solve_two_sided_ptas};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::cli::{Alg, CliError};
use crate::StdClock;

pub const HEADER: [&str; 11] = [
    "family", "n", "m", "eps", "seed", "alg_nsw", "opt_nsw", "ratio", "bound", "queries", "millis",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BenchFamily {
    OneSided,
    TwoSided,
    Weighted,
}

impl BenchFamily {
    fn name(self) -> &'static str {
        match self {
            BenchFamily::OneSided => "one-sided",
            BenchFamily::TwoSided => "two-sided",
            BenchFamily::Weighted => "weighted",
        }
    }

    fn default_alg(self) -> Alg {
        match self {
            BenchFamily::OneSided => Alg::OneSided,
            BenchFamily::TwoSided => Alg::TwoSided,
            BenchFamily::Weighted => Alg::Weighted,
        }
    }
}

fn default_capacities() -> [usize; 2] {
    [1, 3]
}

fn default_valuation() -> String {
    "additive".into()
}

fn default_eps() -> Vec<f64> {
    vec![0.1]
}

fn default_trials() -> usize {
    100
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub family: BenchFamily,
    #[serde(default)]
    pub alg: Option<Alg>,
    pub n: Vec<usize>,
    pub m: Vec<usize>,
    /// Inclusive `[min, max]` range capacities are drawn from.
    #[serde(default = "default_capacities")]
    pub capacities: [usize; 2],
    #[serde(default = "default_valuation")]
    pub valuation: String,
    #[serde(default = "default_eps")]
    pub eps: Vec<f64>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub budget: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl BenchConfig {
    pub fn alg(&self) -> Alg {
        self.alg.unwrap_or_else(|| self.family.default_alg())
    }

    fn validate(&self) -> anyhow::Result<ValueFamily> {
        let family = ValueFamily::parse(&self.valuation)
            .ok_or_else(|| CliError::Invalid(format!("unknown valuation kind {:?}", self.valuation)))?;
        let ok = matches!(
            (self.family, self.alg()),
            (BenchFamily::OneSided, Alg::OneSided)
                | (BenchFamily::TwoSided, Alg::TwoSided | Alg::Ptas | Alg::Combined)
                | (BenchFamily::Weighted, Alg::Weighted)
        );
        if !ok {
            return Err(CliError::Mismatch(format!(
                "algorithm {} does not run on the {} family",
                self.alg().name(),
                self.family.name()
            ))
            .into());
        }
        let [lo, hi] = self.capacities;
        if lo == 0 || lo > hi {
            return Err(CliError::Invalid(format!("bad capacity range [{lo}, {hi}]")).into());
        }
        if self.n.contains(&0) {
            return Err(CliError::Invalid("n must be positive".into()).into());
        }
        if self.eps.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
            return Err(CliError::Invalid("eps values must be positive".into()).into());
        }
        Ok(family)
    }
}

#[derive(Debug, Default)]
struct Row {
    alg_nsw: Option<f64>,
    opt_nsw: Option<f64>,
    bound: Option<f64>,
    queries: Option<u64>,
    millis: Option<f64>,
}

struct Outcome {
    nsw: f64,
    bound: f64,
    queries: u64,
}

fn cell(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Instance stream for one grid point; independent of `eps` so every `eps`
/// sees the same instance.
fn instance_rng(seed: u64, n: usize, m: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((n as u64) << 32) | m as u64);
    rng
}

fn run_row(
    cfg: &BenchConfig,
    family: ValueFamily,
    n: usize,
    m: usize,
    eps: f64,
    seed: u64,
    budget: u64,
) -> anyhow::Result<(Row, Vec<String>)> {
    let gen = GenConfig::new(n, m, family).capacities(cfg.capacities[0], cfg.capacities[1]);
    let mut rng = instance_rng(seed, n, m);
    let mut row = Row::default();
    let mut errors = Vec::new();
    let x = m as f64 / n as f64;
    let started = Instant::now();

    // the oracle enumerates (n+1)^m partial or n^m full assignments
    let states = match cfg.family {
        BenchFamily::OneSided => (n as f64 + 1.0).powi(m as i32),
        _ => (n as f64).powi(m as i32),
    };
    let oracle_ok = m <= MAX_ORACLE_ITEMS && states <= budget as f64;

    let (solved, opt) = match cfg.family {
        BenchFamily::OneSided => {
            let inst = random_one_sided(&mut rng, &gen)?;
            let solved = solve_one_sided_with_clock(&inst, eps, &StdClock::new()).map(|s| Outcome {
                nsw: s.diagnostics.nsw,
                bound: 6.0 * (1.0 + eps),
                queries: s.diagnostics.queries,
            });
            row.millis = Some(started.elapsed().as_secs_f64() * 1e3);
            let opt = oracle_ok.then(|| exact_one_sided(&inst, EnumerationBudget::new(budget)).map(|b| b.nsw));
            (solved, opt)
        }
        BenchFamily::TwoSided => {
            let inst = random_two_sided(&mut rng, &gen)?;
            let solved = match cfg.alg() {
                Alg::Ptas => solve_two_sided_ptas(&inst, eps).map(|s| (s.nsw, 1.0 + eps)),
                Alg::Combined => {
                    solve_unweighted_best(&inst, eps, cfg.trials, seed).map(|s| (s.nsw, combined_bound(x, eps)))
                }
                _ => solve_two_sided(&inst).map(|s| (s.diagnostics.nsw, ratio_bound(x))),
            }
            .map(|(nsw, bound)| Outcome {
                nsw,
                bound,
                queries: inst.queries(),
            });
            row.millis = Some(started.elapsed().as_secs_f64() * 1e3);
            let opt = oracle_ok.then(|| exact_two_sided(&inst, EnumerationBudget::new(budget)).map(|b| b.nsw));
            (solved, opt)
        }
        BenchFamily::Weighted => {
            let inst = random_weighted(&mut rng, &gen)?;
            let solved = solve_weighted(&inst, eps, cfg.trials, seed).map(|s| Outcome {
                nsw: s.nsw,
                bound: (eps + inst.firm_weight_total() / std::f64::consts::E).exp(),
                queries: inst.market().queries(),
            });
            row.millis = Some(started.elapsed().as_secs_f64() * 1e3);
            let opt = oracle_ok.then(|| exact_weighted(&inst, EnumerationBudget::new(budget)).map(|b| b.nsw));
            (solved, opt)
        }
    };
    match solved {
        Ok(out) => {
            row.alg_nsw = Some(out.nsw);
            row.bound = Some(out.bound);
            row.queries = Some(out.queries);
        }
        Err(e) => {
            row.millis = None;
            errors.push(format!("solver: {e}"));
        }
    }
    match opt {
        Some(Ok(v)) => row.opt_nsw = Some(v),
        Some(Err(e)) => errors.push(format!("oracle: {e}")),
        None => {}
    }
    Ok((row, errors))
}

fn ratio(alg: f64, opt: f64) -> f64 {
    if opt == 0.0 {
        1.0
    } else if alg == 0.0 {
        f64::INFINITY
    } else {
        opt / alg
    }
}

/// Writes one CSV row per grid point in `n, m, eps, seed` order. Failed rows
/// keep their key columns and leave the rest empty.
pub fn run_bench(cfg: &BenchConfig, budget: u64, out: impl Write) -> anyhow::Result<usize> {
    let family = cfg.validate()?;
    let budget = cfg.budget.unwrap_or(budget);
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(HEADER)?;
    let mut failures = 0;
    for &n in &cfg.n {
        for &m in &cfg.m {
            for &eps in &cfg.eps {
                for &seed in &cfg.seeds {
                    let (row, errors) = match run_row(cfg, family, n, m, eps, seed, budget) {
                        Ok(r) => r,
                        Err(e) => (Row::default(), vec![format!("generator: {e}")]),
                    };
                    for e in &errors {
                        eprintln!("bench n={n} m={m} eps={eps} seed={seed}: {e}");
                    }
                    failures += usize::from(!errors.is_empty());
                    let ratio = row.alg_nsw.zip(row.opt_nsw).map(|(a, o)| ratio(a, o));
                    writer.write_record([
                        cfg.family.name().to_string(),
                        n.to_string(),
                        m.to_string(),
                        eps.to_string(),
                        seed.to_string(),
                        cell(row.alg_nsw),
                        cell(row.opt_nsw),
                        cell(ratio),
                        cell(row.bound),
                        row.queries.map(|q| q.to_string()).unwrap_or_default(),
                        row.millis.map(|t| format!("{t:.3}")).unwrap_or_default(),
                    ])?;
                }
            }
        }
    }
    writer.flush().context("writing CSV")?;
    Ok(failures)
}

pub fn parse_config(text: &str) -> anyhow::Result<BenchConfig> {
    match serde_json::from_str(text) {
        Ok(cfg) => Ok(cfg),
        Err(e) => bail!(CliError::Invalid(format!("bad bench config: {e}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(text: &str) -> String {
        let cfg = parse_config(text).unwrap();
        let mut buf = Vec::new();
        run_bench(&cfg, 1_000_000, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn empty_grid_is_header_only() {
        let csv = run(r#"{"family":"one-sided","n":[],"m":[3],"seeds":[0]}"#);
        assert_eq!(csv, format!("{}\n", HEADER.join(",")));
    }

    #[test]
    fn oracle_skipped_over_budget() {
        let cfg = parse_config(r#"{"family":"two-sided","n":[3],"m":[12],"seeds":[1],"budget":1000}"#).unwrap();
        let mut buf = Vec::new();
        run_bench(&cfg, 0, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
        assert!(!row[5].is_empty());
        assert_eq!((row[6], row[7]), ("", ""));
    }

    #[test]
    fn mismatched_alg_rejected() {
        let cfg = parse_config(r#"{"family":"one-sided","alg":"ptas","n":[2],"m":[3],"seeds":[0]}"#).unwrap();
        assert!(run_bench(&cfg, 100, Vec::new()).is_err());
    }
}
