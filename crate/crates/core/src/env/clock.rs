use serde::{Deserialize, Serialize};

/// Microseconds since scenario start.
pub type Micros = u64;

/// Virtual time source shared by the channel and every frontend.
///
/// Only moves forward, and only when something calls [`VirtualClock::advance`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VirtualClock {
    now: Micros,
}

impl VirtualClock {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn starting_at(now: Micros) -> Self {
        Self { now }
    }

    pub fn now(&self) -> Micros {
        self.now
    }

    /// Virtual milliseconds, as stamped on received packets.
    pub fn millis(&self) -> u64 {
        self.now / 1_000
    }

    pub fn advance(&mut self, dt: Micros) -> Micros {
        self.now += dt;
        self.now
    }
}
