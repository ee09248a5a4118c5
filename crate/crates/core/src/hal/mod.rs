//! Transceiver-agnostic proxy over the virtual frontends.
//!
//! [`RadioHal`] owns the simulated channel and every attached frontend; each
//! call is routed by [`RadioId`] to exactly one frontend.

mod config;
mod demod;
mod frontend;
mod profile;
mod registers;

use serde::{Deserialize, Serialize};

pub use config::{ModemConfig, PacketLen, PartialModemConfig, RadioMode};
pub use demod::{bits_to_bytes, DemodEvent, FrameFormat, PacketDemod, PromiscuousCapture};
pub use frontend::{Frontend, RadioCounters, CAL_BIN_HZ, TX_REPEAT_GAP_US};
pub use profile::{FrontendKind, FrontendProfile, TimingModel};
pub use registers::RegisterFile;

use crate::env::{Environment, Micros};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HalError {
    #[error("unknown radio {0:?}")]
    UnknownRadio(String),
    #[error("{hz} Hz is outside the {profile} band")]
    OutOfBand { hz: f64, profile: String },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("payload of {len} bytes exceeds limit {max}")]
    Oversize { len: usize, max: usize },
    #[error("register 0x{0:02x} out of range")]
    RegisterOutOfRange(u8),
}

/// Index of an attached frontend; shown to users as `radioA`, `radioB`, ...
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RadioId(pub usize);

impl RadioId {
    pub fn name(&self) -> String {
        format!("radio{}", (b'A' + self.0 as u8) as char)
    }

    pub fn from_name(name: &str) -> Option<Self> {
        let rest = name.strip_prefix("radio")?;
        let mut chars = rest.chars();
        let c = chars.next()?;
        (chars.next().is_none() && c.is_ascii_uppercase()).then(|| RadioId((c as u8 - b'A') as usize))
    }
}

impl std::fmt::Display for RadioId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.name())
    }
}

/// A received frame plus the receiver state at reception time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Packet {
    #[serde(with = "crate::hexbytes")]
    pub data: Vec<u8>,
    pub rx_radio: String,
    pub carrier_freq: f64,
    pub bit_rate: f64,
    pub rssi: f64,
    pub millis: u64,
}

impl Packet {
    pub fn hex(&self) -> String {
        hex::encode(&self.data)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RadioStatus {
    pub name: String,
    pub profile: String,
    pub mode: RadioMode,
    pub config: PartialModemConfig,
    pub counters: RadioCounters,
    pub last_rssi: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RadioHal {
    env: Environment,
    radios: Vec<Frontend>,
}

impl RadioHal {
    pub fn new(env: Environment) -> Self {
        Self { env, radios: Vec::new() }
    }

    /// Attaches a frontend; ids are handed out in attachment order.
    pub fn attach(&mut self, profile: FrontendProfile) -> RadioId {
        let id = RadioId(self.radios.len());
        self.radios.push(Frontend::new(id.name(), profile));
        id
    }

    pub fn env(&self) -> &Environment {
        &self.env
    }

    pub fn env_mut(&mut self) -> &mut Environment {
        &mut self.env
    }

    pub fn now(&self) -> Micros {
        self.env.now()
    }

    pub fn advance(&mut self, dt: Micros) -> Micros {
        self.env.advance(dt)
    }

    pub fn radio_ids(&self) -> impl Iterator<Item = RadioId> {
        (0..self.radios.len()).map(RadioId)
    }

    pub fn lookup(&self, name: &str) -> Result<RadioId, HalError> {
        RadioId::from_name(name)
            .filter(|id| id.0 < self.radios.len())
            .ok_or_else(|| HalError::UnknownRadio(name.to_string()))
    }

    pub fn radio(&self, id: RadioId) -> Result<&Frontend, HalError> {
        self.radios.get(id.0).ok_or_else(|| HalError::UnknownRadio(id.name()))
    }

    fn parts(&mut self, id: RadioId) -> Result<(&mut Frontend, &mut Environment), HalError> {
        let fe = self.radios.get_mut(id.0).ok_or_else(|| HalError::UnknownRadio(id.name()))?;
        Ok((fe, &mut self.env))
    }

    pub fn set_mode(&mut self, id: RadioId, mode: RadioMode) -> Result<(), HalError> {
        let (fe, env) = self.parts(id)?;
        fe.set_mode(mode, env);
        Ok(())
    }

    pub fn set_modem_config(&mut self, id: RadioId, partial: &PartialModemConfig) -> Result<Vec<&'static str>, HalError> {
        let (fe, env) = self.parts(id)?;
        fe.set_modem_config(partial, env)
    }

    pub fn modem_config(&self, id: RadioId) -> Result<&ModemConfig, HalError> {
        Ok(self.radio(id)?.config())
    }

    pub fn transmit(&mut self, id: RadioId, data: &[u8], repeat: u32) -> Result<(), HalError> {
        let (fe, env) = self.parts(id)?;
        fe.transmit(data, repeat, env)
    }

    pub fn get_register(&self, id: RadioId, addr: u8) -> Result<u8, HalError> {
        self.radio(id)?.get_register(addr)
    }

    pub fn set_register(&mut self, id: RadioId, addr: u8, value: u8) -> Result<(), HalError> {
        let (fe, env) = self.parts(id)?;
        fe.set_register(addr, value, env)
    }

    pub fn poll_reception(&mut self, id: RadioId) -> Result<Vec<Packet>, HalError> {
        let fe = self.radios.get_mut(id.0).ok_or_else(|| HalError::UnknownRadio(id.name()))?;
        Ok(fe.poll_reception(&self.env))
    }

    pub fn sample_rssi(&mut self, id: RadioId) -> Result<f64, HalError> {
        let (fe, env) = self.parts(id)?;
        Ok(fe.sample_rssi(env))
    }

    pub fn capture_symbols(&mut self, id: RadioId, n: usize) -> Result<Vec<bool>, HalError> {
        let (fe, env) = self.parts(id)?;
        Ok(fe.capture_symbols(n, env))
    }

    pub fn precalibrate(&mut self, id: RadioId, from: f64, to: f64) -> Result<usize, HalError> {
        let (fe, env) = self.parts(id)?;
        Ok(fe.precalibrate(from, to, env))
    }

    pub fn status(&self, id: RadioId) -> Result<RadioStatus, HalError> {
        let fe = self.radio(id)?;
        Ok(RadioStatus {
            name: fe.name().to_string(),
            profile: fe.profile().name.clone(),
            mode: fe.mode(),
            config: PartialModemConfig::full(fe.config()),
            counters: fe.counters(),
            last_rssi: fe.last_rssi(),
        })
    }
}
