//! Deterministic simulated RF channel.
//!
//! Emissions are scheduled in virtual time; frontends query RSSI and hard OOK
//! symbols through [`Environment`]. Receiver actors (rolling-code car units)
//! are evaluated as frames complete while the clock advances.

mod clock;
mod emission;
mod environment;
pub mod filter;
mod receiver;
mod scenario;

pub use clock::{Micros, VirtualClock};
pub use emission::{CarrierWave, Emission, Modulation};
pub use environment::{EmissionId, Environment, ReceptionEvent, RssiObservation};
pub use receiver::{Decision, RollingCodeReceiver};
pub use scenario::{ActorSpec, BeaconSpec, CarReceiverSpec, EnvScenario, KeyFobSpec, MouseSpec};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EnvError {
    #[error("unknown actor {0:?}")]
    UnknownActor(String),
    #[error("actor {0:?} is not a receiver")]
    NotAReceiver(String),
    #[error("actor {0:?} is not a key fob")]
    NotAKeyFob(String),
    #[error("scenario: {0}")]
    Scenario(String),
}
