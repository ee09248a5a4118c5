//! Declarative scenario files (TOML).

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::clock::Micros;
use super::EnvError;

fn default_sigma() -> f64 {
    1.0
}
fn default_squelch_margin() -> f64 {
    10.0
}
fn default_capture_margin() -> f64 {
    6.0
}
fn one() -> u32 {
    1
}
fn default_window() -> u32 {
    16
}
fn default_mouse_preamble() -> u32 {
    8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvScenario {
    pub seed: u64,
    pub noise_floor_dbm: f64,
    #[serde(default = "default_sigma")]
    pub rssi_noise_sigma_db: f64,
    /// Promiscuous/OOK decision threshold above the noise floor.
    #[serde(default = "default_squelch_margin")]
    pub squelch_margin_db: f64,
    /// How far a modulated signal must exceed a steady carrier to be sliced.
    #[serde(default = "default_capture_margin")]
    pub capture_margin_db: f64,
    #[serde(default)]
    pub actors: Vec<ActorSpec>,
}

impl EnvScenario {
    pub fn quiet(seed: u64) -> Self {
        Self {
            seed,
            noise_floor_dbm: -100.0,
            rssi_noise_sigma_db: 0.0,
            squelch_margin_db: default_squelch_margin(),
            capture_margin_db: default_capture_margin(),
            actors: Vec::new(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, EnvError> {
        let s: Self = toml::from_str(text).map_err(|e| EnvError::Scenario(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, EnvError> {
        let text = std::fs::read_to_string(path).map_err(|e| EnvError::Scenario(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        let mut seen = BTreeSet::new();
        for a in &self.actors {
            if !seen.insert(a.id()) {
                return Err(EnvError::Scenario(format!("duplicate actor id {:?}", a.id())));
            }
            let rate = match a {
                ActorSpec::KeyFob(f) => f.bitrate,
                ActorSpec::CarReceiver(r) => r.bitrate,
                ActorSpec::Mouse(m) => m.bitrate,
                ActorSpec::Beacon(b) => b.bitrate,
            };
            if !(rate > 0.0) {
                return Err(EnvError::Scenario(format!("actor {:?}: bitrate must be positive", a.id())));
            }
        }
        if self.rssi_noise_sigma_db < 0.0 {
            return Err(EnvError::Scenario("rssi_noise_sigma_db must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ActorSpec {
    KeyFob(KeyFobSpec),
    CarReceiver(CarReceiverSpec),
    Mouse(MouseSpec),
    Beacon(BeaconSpec),
}

impl ActorSpec {
    pub fn id(&self) -> &str {
        match self {
            ActorSpec::KeyFob(a) => &a.id,
            ActorSpec::CarReceiver(a) => &a.id,
            ActorSpec::Mouse(a) => &a.id,
            ActorSpec::Beacon(a) => &a.id,
        }
    }
}

/// Rolling-code transmitter. Each press sends `code (u32 BE) ++ tail`, CRC appended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyFobSpec {
    pub id: String,
    pub carrier_hz: f64,
    pub bitrate: f64,
    pub power_dbm: f64,
    pub preamble_len: u32,
    #[serde(with = "crate::hexbytes")]
    pub sync_word: Vec<u8>,
    pub first_code: u32,
    #[serde(with = "crate::hexbytes", default)]
    pub tail: Vec<u8>,
    /// Press times, µs.
    #[serde(default)]
    pub presses: Vec<Micros>,
    #[serde(default = "one")]
    pub repeat_count: u32,
    #[serde(default)]
    pub inter_repeat_gap_us: Micros,
}

/// Receiver that accepts rolling codes inside a forward window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarReceiverSpec {
    pub id: String,
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub bitrate: f64,
    #[serde(with = "crate::hexbytes")]
    pub sync_word: Vec<u8>,
    pub next_code: u32,
    #[serde(default = "default_window")]
    pub window: u32,
    /// Byte offset of the u32 code inside the decoded payload.
    #[serde(default)]
    pub code_offset: usize,
}

/// Periodic 2.4 GHz HID-style transmitter; the address doubles as sync word.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MouseSpec {
    pub id: String,
    pub carrier_hz: f64,
    pub bitrate: f64,
    pub power_dbm: f64,
    #[serde(with = "crate::hexbytes")]
    pub address: Vec<u8>,
    #[serde(with = "crate::hexbytes")]
    pub payload: Vec<u8>,
    #[serde(default = "default_mouse_preamble")]
    pub preamble_len: u32,
    pub start_us: Micros,
    pub period_us: Micros,
    pub count: u32,
}

/// Arbitrary scheduled emission.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeaconSpec {
    pub id: String,
    pub carrier_hz: f64,
    pub bitrate: f64,
    pub power_dbm: f64,
    pub preamble_len: u32,
    #[serde(with = "crate::hexbytes", default)]
    pub sync_word: Vec<u8>,
    #[serde(with = "crate::hexbytes")]
    pub payload: Vec<u8>,
    #[serde(default)]
    pub crc: bool,
    pub start_us: Micros,
    #[serde(default = "one")]
    pub repeat_count: u32,
    #[serde(default)]
    pub inter_repeat_gap_us: Micros,
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
seed = 7
noise_floor_dbm = -100.0
rssi_noise_sigma_db = 1.0

[[actors]]
kind = "key_fob"
id = "fob"
carrier_hz = 434.42e6
bitrate = 3400.0
power_dbm = -40.0
preamble_len = 526
sync_word = "d391"
first_code = 1000
tail = "01a5c3f0"
presses = [1000000, 2000000]

[[actors]]
kind = "car_receiver"
id = "car"
carrier_hz = 434.42e6
bandwidth_hz = 300e3
bitrate = 3400.0
sync_word = "d391"
next_code = 1000
"#;

    #[test]
    fn parses_and_defaults() {
        let s = EnvScenario::from_toml(SAMPLE).unwrap();
        assert_eq!(s.seed, 7);
        assert_eq!(s.squelch_margin_db, 10.0);
        assert_eq!(s.actors.len(), 2);
        match &s.actors[1] {
            ActorSpec::CarReceiver(c) => assert_eq!(c.window, 16),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicate_ids_rejected() {
        let dup = SAMPLE.replace("id = \"car\"", "id = \"fob\"");
        assert!(matches!(EnvScenario::from_toml(&dup), Err(EnvError::Scenario(_))));
    }
}
