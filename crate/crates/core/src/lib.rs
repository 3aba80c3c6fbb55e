//! Approximation algorithms for Nash social welfare under capacity constraints.
//!
//! The crate is `no_std` (it needs `alloc`) and covers three settings:
//!
//! * [`onesided`]: items allocated to agents with submodular valuations and
//!   per-agent capacities, solved by matching, swap-based local search and
//!   rematching.
//! * [`twosided`]: workers matched to capacitated firms where both sides have
//!   preferences, solved through a min-cost flow on a surrogate objective, plus
//!   exhaustive search when the number of firms is small.
//! * [`conflp`]: the weighted two-sided objective, solved through a
//!   configuration LP (column generation with a knapsack pricing oracle) and
//!   marginal-preserving dependent rounding.
//!
//! [`oracle`] holds brute-force solvers and independent checkers used to
//! validate all of the above.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod clock;
pub mod conflp;
pub mod error;
pub mod flow;
pub mod generate;
pub mod model;
pub mod onesided;
pub mod oracle;
pub mod rational;
pub mod twosided;

pub use error::{Error, Result};
pub use model::{
    Allocation, Matching, OneSidedInstance, TwoSidedInstance, Valuation, ValuationKind,
    WeightedInstance,
};
pub use rational::Rational;

/// Relative tolerance used for every log-domain comparison.
pub const LOG_TOLERANCE: f64 = 1e-9;
