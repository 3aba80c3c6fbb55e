//! Optional wall-clock hook used for phase timings in solver diagnostics.

/// Millisecond clock. The core crate has no access to a system clock, so
/// callers that want timings pass one in.
pub trait Clock {
    fn now_ms(&self) -> f64;
}

/// Clock that always reads zero.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoClock;

impl Clock for NoClock {
    fn now_ms(&self) -> f64 {
        0.0
    }
}
