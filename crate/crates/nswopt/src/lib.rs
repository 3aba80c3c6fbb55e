//! JSON instance format, command-line front end and benchmark sweeps for
//! `nswopt-core`.

pub mod bench;
pub mod cli;
pub mod io;
pub mod report;

use std::time::Instant;

use nswopt_core::clock::Clock;

/// Wall clock measured from construction.
#[derive(Debug, Clone, Copy)]
pub struct StdClock {
    start: Instant,
}

impl StdClock {
    pub fn new() -> Self {
        StdClock { start: Instant::now() }
    }
}

impl Default for StdClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for StdClock {
    fn now_ms(&self) -> f64 {
        self.start.elapsed().as_secs_f64() * 1e3
    }
}
