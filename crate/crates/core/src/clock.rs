/// Source of elapsed time for the solvers.
///
/// `now` returns seconds since an arbitrary fixed origin; only differences
/// between two readings are used.
pub trait Clock {
    fn now(&self) -> f64;
}

/// A clock that never advances. Every reported duration is zero.
#[derive(Debug, Clone, Copy, Default)]
pub struct NullClock;

impl Clock for NullClock {
    fn now(&self) -> f64 {
        0.0
    }
}
