use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{dependent_rounding, solve_conf_lp, ConfLpSolution};
use crate::error::{Error, Result};
use crate::model::{ln_nsw_weighted, nsw_two_sided, Matching, TwoSidedInstance, WeightedInstance};
use crate::twosided::{fill_capacities, ratio_bound, solve_two_sided, TwoSidedDiagnostics};

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    /// Master seed of the run; the trial index selects the stream.
    pub seed: u64,
    pub stream: u64,
    /// `None` when the rounded matching has weighted NSW zero.
    pub ln_nsw: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDiagnostics {
    pub lp_objective: f64,
    /// `lp_objective − Σ η_i / e`, the expected log-NSW the analysis targets.
    pub floor: f64,
    pub trials: Vec<TrialRecord>,
    /// The configuration LP is infeasible, so every matching has weighted
    /// NSW zero.
    pub zero_optimum: bool,
    pub lp: Option<ConfLpSolution>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSolution {
    pub matching: Matching,
    pub ln_nsw: f64,
    pub nsw: f64,
    pub diagnostics: WeightedDiagnostics,
}

fn from_ln(ln: f64) -> f64 {
    if ln == f64::NEG_INFINITY {
        0.0
    } else {
        libm::exp(ln)
    }
}

/// Rounding stream `trial` of master seed `seed`.
pub(crate) fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Solves the configuration LP, draws `trials` independent roundings and
/// keeps the one with the highest weighted NSW (earliest on ties).
pub fn solve_weighted(inst: &WeightedInstance, eps: f64, trials: usize, seed: u64) -> Result<WeightedSolution> {
    if trials == 0 {
        return Err(Error::invalid("need at least one rounding trial"));
    }
    let market = inst.market();
    let eta = inst.firm_weights_f64();
    let zeta = inst.worker_weights_f64();
    let lp = match solve_conf_lp(inst, eps) {
        Ok(lp) => lp,
        Err(Error::Infeasible(_)) => {
            let matching = fill_capacities(market);
            let ln = ln_nsw_weighted(market, &matching, &eta, &zeta)?;
            return Ok(WeightedSolution {
                matching,
                ln_nsw: ln,
                nsw: from_ln(ln),
                diagnostics: WeightedDiagnostics {
                    lp_objective: f64::NEG_INFINITY,
                    floor: f64::NEG_INFINITY,
                    trials: Vec::new(),
                    zero_optimum: true,
                    lp: None,
                },
            });
        }
        Err(e) => return Err(e),
    };
    let mut best: Option<(Matching, f64)> = None;
    let mut records = Vec::with_capacity(trials);
    for trial in 0..trials as u64 {
        let mut rng = trial_rng(seed, trial);
        let matching = dependent_rounding(&lp.x, &mut rng);
        let ln = ln_nsw_weighted(market, &matching, &eta, &zeta)?;
        records.push(TrialRecord {
            seed,
            stream: trial,
            ln_nsw: (ln > f64::NEG_INFINITY).then_some(ln),
        });
        if best.as_ref().map_or(true, |(_, b)| ln > *b) {
            best = Some((matching, ln));
        }
    }
    let (matching, ln) = best.expect("at least one trial");
    Ok(WeightedSolution {
        matching,
        ln_nsw: ln,
        nsw: from_ln(ln),
        diagnostics: WeightedDiagnostics {
            lp_objective: lp.objective,
            floor: lp.objective - inst.firm_weight_total() / core::f64::consts::E,
            trials: records,
            zero_optimum: false,
            lp: Some(lp),
        },
    })
}

/// `min(x^{1/(1+x)}, e^{1/(e(x+1)) + ε})` for `x = m/n`.
pub fn combined_bound(x: f64, eps: f64) -> f64 {
    let lp_side = libm::exp(1.0 / (core::f64::consts::E * (x + 1.0)) + eps);
    ratio_bound(x).min(lp_side)
}

#[derive(Debug, Clone, PartialEq)]
pub enum CombinedBranch {
    Flow,
    Weighted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CombinedSolution {
    pub matching: Matching,
    pub nsw: f64,
    pub branch: CombinedBranch,
    pub flow_nsw: f64,
    pub weighted_nsw: f64,
    /// Guaranteed ratio for this `m/n`.
    pub bound: f64,
    pub flow: TwoSidedDiagnostics,
    pub weighted: WeightedDiagnostics,
}

/// Runs the flow algorithm and the weighted pipeline with uniform weights,
/// returning the matching with the higher NSW (the flow one on ties).
pub fn solve_unweighted_best(
    inst: &TwoSidedInstance,
    eps: f64,
    trials: usize,
    seed: u64,
) -> Result<CombinedSolution> {
    let flow = solve_two_sided(inst)?;
    let uniform = WeightedInstance::uniform(inst.clone())?;
    let weighted = solve_weighted(&uniform, eps, trials, seed)?;
    let flow_nsw = flow.diagnostics.nsw;
    let weighted_nsw = nsw_two_sided(inst, &weighted.matching);
    let x = inst.m() as f64 / inst.n() as f64;
    let (matching, nsw, branch) = if weighted_nsw > flow_nsw {
        (weighted.matching, weighted_nsw, CombinedBranch::Weighted)
    } else {
        (flow.matching, flow_nsw, CombinedBranch::Flow)
    };
    Ok(CombinedSolution {
        matching,
        nsw,
        branch,
        flow_nsw,
        weighted_nsw,
        bound: combined_bound(x, eps),
        flow: flow.diagnostics,
        weighted: weighted.diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Valuation;
    use crate::rational::{int, Rational};
    use alloc::vec;

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    fn small_market() -> TwoSidedInstance {
        TwoSidedInstance::new(
            vec![Valuation::additive(ints(&[3, 1])).unwrap()],
            vec![ints(&[1]), ints(&[1])],
            vec![2],
        )
        .unwrap()
    }

    #[test]
    fn uniform_small_market() {
        let inst = WeightedInstance::uniform(small_market()).unwrap();
        let sol = solve_weighted(&inst, 0.1, 5, 1).unwrap();
        assert!((sol.nsw - libm::cbrt(4.0)).abs() < 1e-9);
        assert_eq!(sol.diagnostics.trials.len(), 5);
    }

    #[test]
    fn reproducible() {
        let inst = WeightedInstance::uniform(small_market()).unwrap();
        let a = solve_weighted(&inst, 0.1, 3, 42).unwrap();
        let b = solve_weighted(&inst, 0.1, 3, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_trials_rejected() {
        let inst = WeightedInstance::uniform(small_market()).unwrap();
        assert!(solve_weighted(&inst, 0.1, 0, 1).is_err());
    }

    #[test]
    fn combined_bound_peak() {
        let x = libm::exp(1.0 / core::f64::consts::E);
        let expected = libm::exp(1.0 / (core::f64::consts::E * (x + 1.0)));
        assert!((combined_bound(x, 0.0) - expected).abs() < 1e-9);
        assert!((expected - 1.163).abs() < 1e-3);
        assert_eq!(combined_bound(1.0, 0.0), 1.0);
    }

    #[test]
    fn combined_picks_better_branch() {
        let sol = solve_unweighted_best(&small_market(), 0.1, 4, 3).unwrap();
        assert!(sol.nsw >= sol.flow_nsw && sol.nsw >= sol.weighted_nsw);
        assert_eq!(sol.matching.assignment, vec![Some(0), Some(0)]);
    }
}
