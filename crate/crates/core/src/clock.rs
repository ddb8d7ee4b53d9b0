//! Wall-clock vs. logical timing.
//!
//! Deterministic backends must produce byte-identical transcripts across
//! runs, so any wall-clock reading would break golden comparisons. The
//! logical clock reports zero for every duration and timestamp; the wall
//! clock reports real values for live-endpoint runs.

use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunClock {
    Wall,
    Logical,
}

impl RunClock {
    /// Run `f`, returning its result and the elapsed milliseconds (zero under
    /// the logical clock).
    pub fn time<T>(&self, f: impl FnOnce() -> T) -> (T, u64) {
        match self {
            RunClock::Wall => {
                let start = Instant::now();
                let out = f();
                (out, start.elapsed().as_millis() as u64)
            }
            RunClock::Logical => (f(), 0),
        }
    }

    /// Unix timestamp in milliseconds, zero under the logical clock.
    pub fn now_unix_ms(&self) -> u64 {
        match self {
            RunClock::Wall => std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_millis() as u64)
                .unwrap_or(0),
            RunClock::Logical => 0,
        }
    }
}
