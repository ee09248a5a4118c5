use std::collections::VecDeque;

use serde::Deserialize;
use serde_json::{json, Value};

use crate::hal::{Packet, RadioId};
use crate::pipeline::{args, CommandSpec, Ctx, FieldSpec, FieldType, Module, ModuleError};

/// How many recent transmissions are remembered to avoid re-repeating our own echo.
const ECHO_MEMORY: usize = 16;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Configure {
    radio: Option<String>,
    count: Option<u32>,
}

/// Retransmits every forwarded packet on a chosen radio.
pub struct Repeater {
    radio: Option<RadioId>,
    count: u32,
    active: bool,
    recent: VecDeque<Vec<u8>>,
    sent: u64,
}

impl Default for Repeater {
    fn default() -> Self {
        Self { radio: None, count: 1, active: false, recent: VecDeque::new(), sent: 0 }
    }
}

impl Repeater {
    pub const NAME: &'static str = "repeater";

    fn state(&self) -> Value {
        json!({
            "enabled": self.active,
            "radio": self.radio.map(|r| r.name()),
            "count": self.count,
            "sent": self.sent,
        })
    }
}

/// Transmits `pkt` `count` times on `radio`.
pub fn repeat_packet(ctx: &mut Ctx, pkt: &Packet, radio: RadioId, count: u32) -> Result<(), ModuleError> {
    ctx.hal.transmit(radio, &pkt.data, count)?;
    Ok(())
}

impl Module for Repeater {
    fn name(&self) -> &str {
        Self::NAME
    }

    fn commands(&self) -> Vec<CommandSpec> {
        vec![
            CommandSpec::bare("enable"),
            CommandSpec::bare("disable"),
            CommandSpec::new(
                "configure",
                vec![FieldSpec::optional("radio", FieldType::Text), FieldSpec::optional("count", FieldType::uint(255))],
            ),
        ]
    }

    fn on_user_command(&mut self, verb: &str, a: &Value, ctx: &mut Ctx) -> Result<Value, ModuleError> {
        match verb {
            "enable" => {
                if self.radio.is_none() {
                    return Err(ModuleError::Invalid("no target radio configured".into()));
                }
                self.active = true;
            }
            "disable" => {
                self.active = false;
                ctx.take_repeats();
            }
            "configure" => {
                let c: Configure = args(a)?;
                if let Some(r) = c.radio {
                    self.radio = Some(ctx.hal.lookup(&r)?);
                }
                if let Some(n) = c.count {
                    self.count = n;
                }
            }
            other => return Err(ModuleError::UnknownCommand(other.into())),
        }
        Ok(self.state())
    }

    fn after_packet_received(&mut self, pkt: &Packet, ctx: &mut Ctx) -> Result<(), ModuleError> {
        if self.active && !self.recent.contains(&pkt.data) {
            ctx.queue_repeat(pkt.clone());
        }
        Ok(())
    }

    fn on_loop(&mut self, ctx: &mut Ctx) -> Result<(), ModuleError> {
        let Some(radio) = self.radio.filter(|_| self.active) else {
            return Ok(());
        };
        for pkt in ctx.take_repeats() {
            repeat_packet(ctx, &pkt, radio, self.count)?;
            self.sent += 1;
            if self.recent.len() == ECHO_MEMORY {
                self.recent.pop_front();
            }
            self.recent.push_back(pkt.data);
        }
        Ok(())
    }
}
