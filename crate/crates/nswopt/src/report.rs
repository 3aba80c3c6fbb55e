//! Result JSON for solver and oracle runs.

use nswopt_core::conflp::{CombinedBranch, CombinedSolution, WeightedSolution};
use nswopt_core::model::{Allocation, Matching};
use nswopt_core::onesided::OneSidedSolution;
use nswopt_core::oracle::{ExactOneSided, ExactTwoSided, ExactWeighted};
use nswopt_core::twosided::{PtasBranch, PtasSolution, TwoSidedDiagnostics, TwoSidedSolution};
use serde_json::{json, Value};

fn allocation(a: &Allocation) -> Value {
    json!(a.bundles)
}

fn matching(m: &Matching) -> Value {
    json!(m.assignment)
}

fn flow_fields(d: &TwoSidedDiagnostics) -> Value {
    json!({
        "surrogate": d.surrogate,
        "nsw": d.nsw,
        "x_ratio": d.x_ratio,
        "bound": d.bound,
        "flow_cost": d.flow_cost,
        "augmentations": d.augmentations,
    })
}

pub fn one_sided(sol: &OneSidedSolution) -> Value {
    let d = &sol.diagnostics;
    json!({
        "model": "one-sided",
        "alg": "one-sided",
        "allocation": allocation(&sol.allocation),
        "swaps": d.swaps,
        "iterations_bound": d.iterations_bound,
        "queries": d.queries,
        "phase_ms": {
            "matching": d.phase_ms.matching,
            "local_search": d.phase_ms.local_search,
            "rematch": d.phase_ms.rematch,
        },
        "nsw": d.nsw,
    })
}

pub fn two_sided(sol: &TwoSidedSolution) -> Value {
    let mut out = flow_fields(&sol.diagnostics);
    out["model"] = json!("two-sided");
    out["alg"] = json!("two-sided");
    out["matching"] = matching(&sol.matching);
    out
}

pub fn ptas(sol: &PtasSolution) -> Value {
    let mut out = json!({
        "model": "two-sided",
        "alg": "ptas",
        "matching": matching(&sol.matching),
        "nsw": sol.nsw,
    });
    match &sol.branch {
        PtasBranch::Enumeration { leaves } => {
            out["branch"] = json!("enumeration");
            out["leaves"] = json!(leaves);
        }
        PtasBranch::Flow(d) => {
            out["branch"] = json!("flow");
            out["flow"] = flow_fields(d);
        }
    }
    out
}

pub fn weighted(sol: &WeightedSolution) -> Value {
    let d = &sol.diagnostics;
    let (columns, marginals) = match &d.lp {
        Some(lp) => (
            lp.columns
                .iter()
                .map(|c| json!({"firm": c.firm, "set": c.set, "weight": c.weight, "coefficient": c.coefficient}))
                .collect(),
            json!(lp.x.x),
        ),
        None => (Vec::new(), Value::Null),
    };
    json!({
        "model": "two-sided",
        "alg": "weighted",
        "lp_objective": d.lp_objective,
        "columns": columns,
        "x_marginals": marginals,
        "trials": d
            .trials
            .iter()
            .map(|t| json!({"seed": t.seed, "stream": t.stream, "ln_nsw": t.ln_nsw}))
            .collect::<Vec<_>>(),
        "best_matching": matching(&sol.matching),
        "ln_nsw": finite(sol.ln_nsw),
        "nsw": sol.nsw,
    })
}

pub fn combined(sol: &CombinedSolution) -> Value {
    json!({
        "model": "two-sided",
        "alg": "combined",
        "matching": matching(&sol.matching),
        "nsw": sol.nsw,
        "branch": match sol.branch {
            CombinedBranch::Flow => "flow",
            CombinedBranch::Weighted => "weighted",
        },
        "flow_nsw": sol.flow_nsw,
        "weighted_nsw": sol.weighted_nsw,
        "bound": sol.bound,
        "lp_objective": sol.weighted.lp_objective,
    })
}

/// `null` stands for `-inf`, which JSON cannot carry.
fn finite(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

pub fn exact_one_sided(best: &ExactOneSided) -> Value {
    json!({
        "model": "one-sided",
        "exact": true,
        "allocation": allocation(&best.allocation),
        "product": best.product.to_string(),
        "ln_nsw": finite(best.ln_nsw),
        "nsw": best.nsw,
        "states": best.states,
    })
}

pub fn exact_two_sided(best: &ExactTwoSided) -> Value {
    json!({
        "model": "two-sided",
        "exact": true,
        "matching": matching(&best.matching),
        "product": best.product.to_string(),
        "ln_nsw": finite(best.ln_nsw),
        "nsw": best.nsw,
        "states": best.states,
    })
}

pub fn exact_weighted(best: &ExactWeighted) -> Value {
    json!({
        "model": "two-sided",
        "exact": true,
        "best_matching": matching(&best.matching),
        "ln_nsw": finite(best.ln_nsw),
        "nsw": best.nsw,
        "states": best.states,
    })
}
