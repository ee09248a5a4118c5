use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::checksum::crc16;
use crate::env::Micros;
use crate::hal::{FrontendKind, Packet, PartialModemConfig, RadioId, RadioMode};
use crate::pipeline::{args, CommandSpec, Ctx, FieldSpec, FieldType, Module, ModuleError, Verdict};

const VENDORS: &str = include_str!("../../data/vendors.toml");
/// Bytes of a raw capture used as table key.
const PREFIX_LEN: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct VendorRule {
    pub prefix: String,
    pub label: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
pub struct VendorTable {
    #[serde(default, rename = "vendor")]
    pub rules: Vec<VendorRule>,
}

impl VendorTable {
    pub fn builtin() -> Self {
        toml::from_str(VENDORS).expect("bundled vendor table parses")
    }

    /// Label of the longest prefix matching `address`.
    pub fn classify(&self, address: &[u8]) -> Option<&str> {
        let hex = hex::encode(address);
        self.rules
            .iter()
            .filter(|r| hex.starts_with(&r.prefix.to_ascii_lowercase()))
            .max_by_key(|r| r.prefix.len())
            .map(|r| r.label.as_str())
    }
}

/// Payload length for which the trailing two bytes are a valid checksum.
pub fn validate_capture(raw: &[u8]) -> Option<usize> {
    let body = raw.get(PREFIX_LEN..)?;
    (1..body.len().saturating_sub(1)).find(|&n| {
        let crc = crc16(&body[..n]);
        body[n] == (crc & 0xff) as u8 && body[n + 1] == (crc >> 8) as u8
    })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PrefixStats {
    pub prefix: String,
    pub seen: u64,
    pub valid: u64,
    pub channels: Vec<u32>,
    pub vendor: Option<String>,
    pub payload_len: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Settings {
    radio: Option<String>,
    dwell_ms: Option<u64>,
    first_channel: Option<u32>,
    last_channel: Option<u32>,
}

/// Promiscuous channel sweep that ranks raw capture prefixes and labels
/// devices whose frames check out. Injection is deliberately absent.
pub struct MouseJack {
    radio_name: Option<String>,
    radio: Option<RadioId>,
    vendors: VendorTable,
    first_channel: u32,
    last_channel: u32,
    dwell_us: Micros,
    channel: u32,
    dwell_until: Micros,
    table: BTreeMap<String, PrefixStats>,
}

impl Default for MouseJack {
    fn default() -> Self {
        Self {
            radio_name: None,
            radio: None,
            vendors: VendorTable::builtin(),
            first_channel: 5,
            last_channel: 74,
            dwell_us: 20_000,
            channel: 5,
            dwell_until: 0,
            table: BTreeMap::new(),
        }
    }
}

impl MouseJack {
    pub const NAME: &'static str = "mousejack";

    pub fn with_vendors(vendors: VendorTable) -> Self {
        Self { vendors, ..Self::default() }
    }

    /// Prefixes sorted by decreasing frequency.
    pub fn ranking(&self) -> Vec<PrefixStats> {
        let mut v: Vec<_> = self.table.values().cloned().collect();
        v.sort_by(|a, b| b.seen.cmp(&a.seen).then(a.prefix.cmp(&b.prefix)));
        v
    }

    fn report(&self) -> Value {
        let devices: Vec<_> = self.ranking().into_iter().filter(|s| s.valid > 0).collect();
        json!({
            "scanning": self.radio.is_some(),
            "channel": self.channel,
            "ranking": self.ranking(),
            "devices": devices,
        })
    }

    fn resolve_radio(&self, ctx: &Ctx) -> Result<RadioId, ModuleError> {
        let id = match &self.radio_name {
            Some(n) => ctx.hal.lookup(n)?,
            None => ctx
                .hal
                .radio_ids()
                .find(|&id| ctx.hal.radio(id).is_ok_and(|r| r.profile().kind == FrontendKind::Vnrf24))
                .ok_or_else(|| ModuleError::Invalid("no 2.4 GHz radio attached".into()))?,
        };
        if ctx.hal.radio(id)?.profile().kind != FrontendKind::Vnrf24 {
            return Err(ModuleError::Invalid(format!("{} is not a 2.4 GHz radio", id.name())));
        }
        Ok(id)
    }

    fn tune(&mut self, ctx: &mut Ctx, id: RadioId, channel: u32) -> Result<(), ModuleError> {
        let hz = 2400e6 + channel as f64 * 1e6;
        ctx.hal.set_modem_config(id, &PartialModemConfig::carrier(hz))?;
        self.channel = channel;
        self.dwell_until = ctx.now() + self.dwell_us;
        Ok(())
    }

    fn start(&mut self, ctx: &mut Ctx) -> Result<(), ModuleError> {
        let id = self.resolve_radio(ctx)?;
        let p = PartialModemConfig {
            bit_rate: Some(2e6),
            is_promiscuous: Some(true),
            is_fixed_packet_len: Some(true),
            packet_len: Some(32),
            crc_enabled: Some(false),
            ..Default::default()
        };
        ctx.hal.set_modem_config(id, &p)?;
        ctx.hal.set_mode(id, RadioMode::Promiscuous)?;
        self.radio = Some(id);
        self.table.clear();
        self.tune(ctx, id, self.first_channel)
    }

    fn stop(&mut self, ctx: &mut Ctx) -> Result<(), ModuleError> {
        if let Some(id) = self.radio.take() {
            ctx.hal.set_mode(id, RadioMode::Idle)?;
        }
        Ok(())
    }
}

impl Module for MouseJack {
    fn name(&self) -> &str {
        Self::NAME
    }

    fn commands(&self) -> Vec<CommandSpec> {
        vec![
            CommandSpec::bare("start"),
            CommandSpec::bare("stop"),
            CommandSpec::bare("report"),
            CommandSpec::new(
                "set",
                vec![
                    FieldSpec::optional("radio", FieldType::Text),
                    FieldSpec::optional("dwell_ms", FieldType::uint(10_000)),
                    FieldSpec::optional("first_channel", FieldType::uint(125)),
                    FieldSpec::optional("last_channel", FieldType::uint(125)),
                ],
            ),
            CommandSpec::new(
                "inject",
                vec![FieldSpec::required("address", FieldType::Hex), FieldSpec::required("payload", FieldType::Hex)],
            ),
        ]
    }

    fn on_user_command(&mut self, verb: &str, a: &Value, ctx: &mut Ctx) -> Result<Value, ModuleError> {
        match verb {
            "start" => self.start(ctx)?,
            "stop" => self.stop(ctx)?,
            "report" => {}
            "set" => {
                let s: Settings = args(a)?;
                let first = s.first_channel.unwrap_or(self.first_channel);
                let last = s.last_channel.unwrap_or(self.last_channel);
                if first > last {
                    return Err(ModuleError::Invalid("first_channel after last_channel".into()));
                }
                if s.radio.is_some() {
                    self.radio_name = s.radio;
                }
                self.first_channel = first;
                self.last_channel = last;
                self.dwell_us = s.dwell_ms.map_or(self.dwell_us, |ms| ms * 1000);
            }
            "inject" => return Err(ModuleError::NotImplemented("payload injection is disarmed".into())),
            other => return Err(ModuleError::UnknownCommand(other.into())),
        }
        Ok(self.report())
    }

    fn on_loop(&mut self, ctx: &mut Ctx) -> Result<(), ModuleError> {
        let Some(id) = self.radio else {
            return Ok(());
        };
        if ctx.now() >= self.dwell_until {
            let next = if self.channel >= self.last_channel { self.first_channel } else { self.channel + 1 };
            self.tune(ctx, id, next)?;
        }
        Ok(())
    }

    fn on_packet_received(&mut self, pkt: &mut Packet, ctx: &mut Ctx) -> Result<Verdict, ModuleError> {
        let Some(id) = self.radio else {
            return Ok(Verdict::Continue);
        };
        if pkt.rx_radio != id.name() || pkt.data.len() < PREFIX_LEN {
            return Ok(Verdict::Continue);
        }
        let prefix = hex::encode(&pkt.data[..PREFIX_LEN]);
        let valid = validate_capture(&pkt.data);
        let channel = ((pkt.carrier_freq - 2400e6) / 1e6).round() as u32;
        let vendor = self.vendors.classify(&pkt.data[..PREFIX_LEN]).map(str::to_string);
        let entry = self.table.entry(prefix.clone()).or_insert_with(|| PrefixStats { prefix, ..Default::default() });
        entry.seen += 1;
        if !entry.channels.contains(&channel) {
            entry.channels.push(channel);
        }
        if let Some(n) = valid {
            entry.valid += 1;
            entry.payload_len = Some(n);
            entry.vendor = vendor;
            if entry.valid == 1 {
                let found = json!({"address": entry.prefix, "channel": channel, "vendor": entry.vendor, "payloadLen": n});
                ctx.emit("report", found);
            }
        }
        Ok(Verdict::Consume)
    }
}
