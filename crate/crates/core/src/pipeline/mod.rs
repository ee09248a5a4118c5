//! Firmware skeleton: the module API, the high/low priority loops and the
//! queues that decouple them.

mod node;
mod queue;
pub mod schema;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use node::{Node, NodeError, NodeStats, IterationStats, DEFAULT_LOOP_STEP_US};
pub use queue::{BoundedQueue, Overflow, QUEUE_CAPACITY};
pub use schema::{CommandSpec, FieldSpec, FieldType, ModuleSchema, SchemaDescriptor};

use crate::env::Micros;
use crate::hal::{HalError, Packet, RadioHal};

/// Topic prefix for host-bound messages.
pub const OUT_PREFIX: &str = "rfquack/out/";
/// Topic prefix for node-bound commands.
pub const IN_PREFIX: &str = "rfquack/in/";

#[derive(Debug, thiserror::Error)]
pub enum ModuleError {
    #[error(transparent)]
    Hal(#[from] HalError),
    #[error("invalid arguments: {0}")]
    Invalid(String),
    #[error("unknown command {0:?}")]
    UnknownCommand(String),
    #[error("not implemented: {0}")]
    NotImplemented(String),
    #[error("{0}")]
    Failed(String),
}

/// Decodes command arguments; `null` is treated as `{}`.
pub fn args<T: DeserializeOwned>(v: &Value) -> Result<T, ModuleError> {
    let v = if v.is_null() { Value::Object(Default::default()) } else { v.clone() };
    serde_json::from_value(v).map_err(|e| ModuleError::Invalid(e.to_string()))
}

/// What a module wants done with a packet it just inspected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Continue,
    /// Discard and stop propagation.
    Drop,
    /// The module keeps the packet; it is not forwarded.
    Consume,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Disposition {
    Forwarded,
    Dropped,
    Consumed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HostMessage {
    pub topic: String,
    pub payload: Value,
}

impl HostMessage {
    pub fn new(module: &str, kind: &str, payload: Value) -> Self {
        Self { topic: format!("{OUT_PREFIX}{module}/{kind}"), payload }
    }

    /// `(module, kind)` of an outbound topic.
    pub fn route(&self) -> Option<(&str, &str)> {
        self.topic.strip_prefix(OUT_PREFIX)?.split_once('/')
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Hook {
    Init,
    Loop,
    UserCommand,
    PacketReceived,
    AfterPacketReceived,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HookCall {
    pub module: String,
    pub hook: Hook,
}

/// What a hook may touch: the radios plus the node's outbound queues.
pub struct Ctx<'a> {
    pub hal: &'a mut RadioHal,
    module: &'a str,
    host: &'a mut BoundedQueue<HostMessage>,
    repeat: &'a mut BoundedQueue<Packet>,
}

impl<'a> Ctx<'a> {
    pub(crate) fn new(
        hal: &'a mut RadioHal,
        module: &'a str,
        host: &'a mut BoundedQueue<HostMessage>,
        repeat: &'a mut BoundedQueue<Packet>,
    ) -> Self {
        Self { hal, module, host, repeat }
    }

    pub fn now(&self) -> Micros {
        self.hal.now()
    }

    pub fn module(&self) -> &str {
        self.module
    }

    /// Sends `payload` to the host on `rfquack/out/<this module>/<kind>`.
    pub fn emit(&mut self, kind: &str, payload: Value) {
        self.host.push(HostMessage::new(self.module, kind, payload));
    }

    pub fn emit_packet(&mut self, pkt: &Packet) {
        self.emit("packet", serde_json::to_value(pkt).expect("packet serializes"));
    }

    pub fn queue_repeat(&mut self, pkt: Packet) -> bool {
        self.repeat.push(pkt)
    }

    pub fn take_repeats(&mut self) -> Vec<Packet> {
        self.repeat.drain().collect()
    }
}

/// The five-hook module API. Every hook runs on the node strand.
pub trait Module: Send {
    fn name(&self) -> &str;

    /// Commands accepted by [`Module::on_user_command`], for the schema.
    fn commands(&self) -> Vec<CommandSpec>;

    fn on_init(&mut self, _ctx: &mut Ctx) -> Result<(), ModuleError> {
        Ok(())
    }

    fn on_loop(&mut self, _ctx: &mut Ctx) -> Result<(), ModuleError> {
        Ok(())
    }

    /// `args` has already been validated against [`Module::commands`].
    fn on_user_command(&mut self, verb: &str, args: &Value, ctx: &mut Ctx) -> Result<Value, ModuleError>;

    fn on_packet_received(&mut self, _pkt: &mut Packet, _ctx: &mut Ctx) -> Result<Verdict, ModuleError> {
        Ok(Verdict::Continue)
    }

    fn after_packet_received(&mut self, _pkt: &Packet, _ctx: &mut Ctx) -> Result<(), ModuleError> {
        Ok(())
    }
}
