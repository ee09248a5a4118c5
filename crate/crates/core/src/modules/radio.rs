use serde::Deserialize;
use serde_json::{json, Value};

use crate::hal::{PartialModemConfig, RadioId, RadioMode};
use crate::pipeline::{args, CommandSpec, Ctx, FieldSpec, FieldType, Module, ModuleError};

/// Schema for the sparse modem config, in wire order.
pub fn modem_config_fields() -> Vec<FieldSpec> {
    PartialModemConfig::FIELDS
        .iter()
        .map(|&name| {
            let ty = match name {
                "modulation" => FieldType::one_of(&["OOK"]),
                "isPromiscuous" | "isFixedPacketLen" | "crcEnabled" => FieldType::Bool,
                "syncWord" => FieldType::Hex,
                "preambleLen" => FieldType::uint(65_535),
                "packetLen" => FieldType::uint(255),
                _ => FieldType::Float,
            };
            FieldSpec::optional(name, ty)
        })
        .collect()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RegisterArgs {
    addr: u8,
    value: Option<u8>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SendArgs {
    #[serde(with = "crate::hexbytes")]
    data: Vec<u8>,
    #[serde(default = "one")]
    repeat: u32,
}

fn one() -> u32 {
    1
}

/// Command surface of one frontend, addressed as `radioA`, `radioB`, ...
pub struct RadioModule {
    id: RadioId,
    name: String,
}

impl RadioModule {
    pub fn new(id: RadioId) -> Self {
        Self { id, name: id.name() }
    }

    fn mode(&self, mode: RadioMode, ctx: &mut Ctx) -> Result<Value, ModuleError> {
        ctx.hal.set_mode(self.id, mode)?;
        Ok(json!({"mode": mode}))
    }
}

impl Module for RadioModule {
    fn name(&self) -> &str {
        &self.name
    }

    fn commands(&self) -> Vec<CommandSpec> {
        let reg = FieldSpec::required("addr", FieldType::byte());
        vec![
            CommandSpec::new("set_modem_config", modem_config_fields()),
            CommandSpec::bare("get_modem_config"),
            CommandSpec::new("set_register", vec![reg.clone(), FieldSpec::required("value", FieldType::byte())]),
            CommandSpec::new("get_register", vec![reg]),
            CommandSpec::new("set_mode", vec![FieldSpec::required("mode", FieldType::one_of(&RadioMode::ALL))]),
            CommandSpec::bare("tx"),
            CommandSpec::bare("rx"),
            CommandSpec::bare("idle"),
            CommandSpec::bare("jam"),
            CommandSpec::new(
                "send",
                vec![FieldSpec::required("data", FieldType::Hex), FieldSpec::optional("repeat", FieldType::uint(255))],
            ),
            CommandSpec::bare("status"),
        ]
    }

    fn on_user_command(&mut self, verb: &str, a: &Value, ctx: &mut Ctx) -> Result<Value, ModuleError> {
        match verb {
            "set_modem_config" => {
                let partial: PartialModemConfig = args(a)?;
                let applied = ctx.hal.set_modem_config(self.id, &partial)?;
                Ok(json!({"applied": applied}))
            }
            "get_modem_config" => {
                let cfg = ctx.hal.modem_config(self.id)?;
                Ok(serde_json::to_value(PartialModemConfig::full(cfg)).expect("config serializes"))
            }
            "set_register" | "get_register" => {
                let r: RegisterArgs = args(a)?;
                if let Some(v) = r.value {
                    ctx.hal.set_register(self.id, r.addr, v)?;
                }
                Ok(json!({"addr": r.addr, "value": ctx.hal.get_register(self.id, r.addr)?}))
            }
            "set_mode" => {
                let s = a["mode"].as_str().unwrap_or_default();
                let mode = RadioMode::parse(s).ok_or_else(|| ModuleError::Invalid(format!("mode {s:?}")))?;
                self.mode(mode, ctx)
            }
            "tx" => self.mode(RadioMode::Tx, ctx),
            "rx" => self.mode(RadioMode::Rx, ctx),
            "idle" => self.mode(RadioMode::Idle, ctx),
            "jam" => self.mode(RadioMode::Jam, ctx),
            "send" => {
                let s: SendArgs = args(a)?;
                ctx.hal.transmit(self.id, &s.data, s.repeat)?;
                Ok(json!({"sent": s.data.len(), "repeat": s.repeat}))
            }
            "status" => Ok(serde_json::to_value(ctx.hal.status(self.id)?).expect("status serializes")),
            other => Err(ModuleError::UnknownCommand(other.into())),
        }
    }
}
