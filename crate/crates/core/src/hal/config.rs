use serde::{Deserialize, Serialize};

use super::profile::{FrontendKind, FrontendProfile};
use super::HalError;
use crate::env::Modulation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PacketLen {
    Fixed(usize),
    /// Length byte follows the sync word; value is the maximum.
    Variable(usize),
}

impl PacketLen {
    pub fn max(&self) -> usize {
        match *self {
            PacketLen::Fixed(n) | PacketLen::Variable(n) => n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum RadioMode {
    #[default]
    Idle,
    Rx,
    Tx,
    Promiscuous,
    Jam,
}

impl RadioMode {
    pub const ALL: [&'static str; 5] = ["IDLE", "RX", "TX", "PROMISCUOUS", "JAM"];

    pub fn as_str(&self) -> &'static str {
        match self {
            RadioMode::Idle => "IDLE",
            RadioMode::Rx => "RX",
            RadioMode::Tx => "TX",
            RadioMode::Promiscuous => "PROMISCUOUS",
            RadioMode::Jam => "JAM",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s.to_ascii_uppercase().as_str() {
            "IDLE" => RadioMode::Idle,
            "RX" => RadioMode::Rx,
            "TX" => RadioMode::Tx,
            "PROMISCUOUS" => RadioMode::Promiscuous,
            "JAM" => RadioMode::Jam,
            _ => return None,
        })
    }
}

/// Full physical-layer state of one frontend. Frequencies in Hz, rates in bits/s.
#[derive(Debug, Clone, PartialEq)]
pub struct ModemConfig {
    pub carrier_freq: f64,
    pub bit_rate: f64,
    pub freq_dev: f64,
    pub rx_bandwidth: f64,
    pub modulation: Modulation,
    pub tx_power: f64,
    pub is_promiscuous: bool,
    pub sync_word: Vec<u8>,
    pub preamble_len: u32,
    pub packet_len: PacketLen,
    pub crc_enabled: bool,
}

impl ModemConfig {
    pub fn default_for(profile: &FrontendProfile) -> Self {
        match profile.kind {
            FrontendKind::Vc1101 => Self {
                carrier_freq: 433.92e6,
                bit_rate: 4800.0,
                freq_dev: 47_607.0,
                rx_bandwidth: 203e3,
                modulation: Modulation::Ook,
                tx_power: 0.0,
                is_promiscuous: false,
                sync_word: vec![0xd3, 0x91],
                preamble_len: 32,
                packet_len: PacketLen::Fixed(8),
                crc_enabled: true,
            },
            FrontendKind::Vnrf24 => Self {
                carrier_freq: 2402e6,
                bit_rate: 2e6,
                freq_dev: 320e3,
                rx_bandwidth: 2e6,
                modulation: Modulation::Ook,
                tx_power: 0.0,
                is_promiscuous: false,
                sync_word: vec![0xe7; 5],
                preamble_len: 8,
                packet_len: PacketLen::Fixed(32),
                crc_enabled: true,
            },
        }
    }

    /// Bytes on air after the sync word (length byte, payload, checksum).
    pub fn frame_len(&self, payload: usize) -> usize {
        let len_byte = matches!(self.packet_len, PacketLen::Variable(_)) as usize;
        len_byte + payload + if self.crc_enabled { 2 } else { 0 }
    }
}

/// Sparse update; `None` fields are left untouched.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct PartialModemConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub carrier_freq: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bit_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub freq_dev: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rx_bandwidth: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulation: Option<Modulation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tx_power: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub is_promiscuous: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "crate::hexbytes::opt")]
    pub sync_word: Option<Vec<u8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preamble_len: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub is_fixed_packet_len: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub packet_len: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crc_enabled: Option<bool>,
}

impl PartialModemConfig {
    pub const FIELDS: [&'static str; 12] = [
        "carrierFreq",
        "bitRate",
        "freqDev",
        "rxBandwidth",
        "modulation",
        "txPower",
        "isPromiscuous",
        "syncWord",
        "preambleLen",
        "isFixedPacketLen",
        "packetLen",
        "crcEnabled",
    ];

    pub fn carrier(hz: f64) -> Self {
        Self { carrier_freq: Some(hz), ..Self::default() }
    }

    pub fn bitrate(bps: f64) -> Self {
        Self { bit_rate: Some(bps), ..Self::default() }
    }

    /// Every field of `cfg`, for read-back.
    pub fn full(cfg: &ModemConfig) -> Self {
        Self {
            carrier_freq: Some(cfg.carrier_freq),
            bit_rate: Some(cfg.bit_rate),
            freq_dev: Some(cfg.freq_dev),
            rx_bandwidth: Some(cfg.rx_bandwidth),
            modulation: Some(cfg.modulation),
            tx_power: Some(cfg.tx_power),
            is_promiscuous: Some(cfg.is_promiscuous),
            sync_word: Some(cfg.sync_word.clone()),
            preamble_len: Some(cfg.preamble_len),
            is_fixed_packet_len: Some(matches!(cfg.packet_len, PacketLen::Fixed(_))),
            packet_len: Some(cfg.packet_len.max()),
            crc_enabled: Some(cfg.crc_enabled),
        }
    }

    /// Validates against `profile` and returns the merged config plus the
    /// names of the fields that were provided.
    pub fn apply_to(&self, base: &ModemConfig, profile: &FrontendProfile) -> Result<(ModemConfig, Vec<&'static str>), HalError> {
        let mut cfg = base.clone();
        let mut applied = Vec::new();
        if let Some(f) = self.carrier_freq {
            if !profile.in_band(f) {
                return Err(HalError::OutOfBand { hz: f, profile: profile.name.clone() });
            }
            let step = profile.channel_step_hz;
            let q = (f / step).round() * step;
            if step > 1.0 && (q - f).abs() > 1e-3 {
                return Err(HalError::Unsupported(format!("{} tunes in {} Hz channels", profile.name, step)));
            }
            cfg.carrier_freq = q;
            applied.push("carrierFreq");
        }
        if let Some(r) = self.bit_rate {
            if !profile.supports_bitrate(r) {
                return Err(HalError::Unsupported(format!("bitrate {r} bps on {}", profile.name)));
            }
            cfg.bit_rate = (r * 100.0).round() / 100.0;
            applied.push("bitRate");
        }
        if let Some(d) = self.freq_dev {
            if !(d >= 0.0) {
                return Err(HalError::Unsupported(format!("frequency deviation {d}")));
            }
            cfg.freq_dev = d;
            applied.push("freqDev");
        }
        if let Some(bw) = self.rx_bandwidth {
            if !profile.filter_widths.contains(&bw) {
                return Err(HalError::Unsupported(format!("bandwidth {bw} Hz on {}", profile.name)));
            }
            cfg.rx_bandwidth = bw;
            applied.push("rxBandwidth");
        }
        if let Some(m) = self.modulation {
            cfg.modulation = m;
            applied.push("modulation");
        }
        if let Some(p) = self.tx_power {
            if p < profile.tx_power.0 || p > profile.tx_power.1 {
                return Err(HalError::Unsupported(format!("tx power {p} dBm on {}", profile.name)));
            }
            cfg.tx_power = p;
            applied.push("txPower");
        }
        if let Some(p) = self.is_promiscuous {
            cfg.is_promiscuous = p;
            applied.push("isPromiscuous");
        }
        if let Some(s) = &self.sync_word {
            if s.len() < profile.sync_len.0 || s.len() > profile.sync_len.1 {
                return Err(HalError::Unsupported(format!("{}-byte sync word on {}", s.len(), profile.name)));
            }
            cfg.sync_word = s.clone();
            applied.push("syncWord");
        }
        if let Some(p) = self.preamble_len {
            if profile.kind == FrontendKind::Vnrf24 && p != 8 {
                return Err(HalError::Unsupported(format!("{} preamble is fixed at 8 bits", profile.name)));
            }
            cfg.preamble_len = p;
            applied.push("preambleLen");
        }
        if self.is_fixed_packet_len.is_some() || self.packet_len.is_some() {
            let fixed = self.is_fixed_packet_len.unwrap_or(matches!(cfg.packet_len, PacketLen::Fixed(_)));
            let n = self.packet_len.unwrap_or(cfg.packet_len.max());
            if n == 0 || n > profile.max_packet_len() {
                return Err(HalError::Unsupported(format!("packet length {n} on {}", profile.name)));
            }
            cfg.packet_len = if fixed { PacketLen::Fixed(n) } else { PacketLen::Variable(n) };
            if self.is_fixed_packet_len.is_some() {
                applied.push("isFixedPacketLen");
            }
            if self.packet_len.is_some() {
                applied.push("packetLen");
            }
        }
        if let Some(c) = self.crc_enabled {
            cfg.crc_enabled = c;
            applied.push("crcEnabled");
        }
        Ok((cfg, applied))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_applies_only_given_fields() {
        let p = FrontendProfile::vc1101();
        let base = ModemConfig::default_for(&p);
        let (cfg, applied) = PartialModemConfig::default().apply_to(&base, &p).unwrap();
        assert!(applied.is_empty());
        assert_eq!(cfg, base);
        let (cfg, applied) = PartialModemConfig::carrier(434.42e6).apply_to(&base, &p).unwrap();
        assert_eq!(applied, vec!["carrierFreq"]);
        assert_eq!(cfg.carrier_freq, 434.42e6);
        assert_eq!(cfg.bit_rate, base.bit_rate);
    }

    #[test]
    fn profile_checks() {
        let nrf = FrontendProfile::vnrf24();
        let base = ModemConfig::default_for(&nrf);
        assert!(matches!(PartialModemConfig::bitrate(5e3).apply_to(&base, &nrf), Err(HalError::Unsupported(_))));
        assert!(matches!(PartialModemConfig::carrier(433.92e6).apply_to(&base, &nrf), Err(HalError::OutOfBand { .. })));
        assert!(PartialModemConfig::carrier(2405.5e6).apply_to(&base, &nrf).is_err());
        let cc = FrontendProfile::vc1101();
        let base = ModemConfig::default_for(&cc);
        let bad_bw = PartialModemConfig { rx_bandwidth: Some(100e3), ..Default::default() };
        assert!(bad_bw.apply_to(&base, &cc).is_err());
        let too_long = PartialModemConfig { packet_len: Some(300), ..Default::default() };
        assert!(too_long.apply_to(&base, &cc).is_err());
    }

    #[test]
    fn wire_names() {
        let p: PartialModemConfig =
            serde_json::from_str(r#"{"carrierFreq":434420000.0,"syncWord":"d391","isFixedPacketLen":true}"#).unwrap();
        assert_eq!(p.carrier_freq, Some(434.42e6));
        assert_eq!(p.sync_word, Some(vec![0xd3, 0x91]));
        assert!(serde_json::from_str::<PartialModemConfig>(r#"{"carrier":1.0}"#).is_err());
        let back = serde_json::to_value(PartialModemConfig::carrier(1.0)).unwrap();
        assert_eq!(back, serde_json::json!({"carrierFreq": 1.0}));
    }
}
