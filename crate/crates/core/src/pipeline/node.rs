use log::{debug, warn};
use serde::Serialize;
use serde_json::{json, Value};

use super::queue::{BoundedQueue, Overflow, QUEUE_CAPACITY};
use super::schema::{CommandSpec, FieldSpec, FieldType, ModuleSchema, SchemaDescriptor};
use super::{Ctx, Disposition, Hook, HookCall, HostMessage, Module, ModuleError, Verdict};
use crate::env::Micros;
use crate::hal::{Packet, RadioHal};

/// Virtual time charged for one loop iteration on top of radio work.
pub const DEFAULT_LOOP_STEP_US: Micros = 10;

/// Name under which the node answers its own commands.
const NODE: &str = "node";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NodeError {
    #[error("module {0:?} is already registered")]
    DuplicateModule(String),
    #[error("{0:?} is reserved")]
    Reserved(String),
    #[error("module {module:?} failed to initialize: {reason}")]
    Init { module: String, reason: String },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct NodeStats {
    pub iterations: u64,
    pub polled: u64,
    pub forwarded: u64,
    pub dropped: u64,
    pub consumed: u64,
    pub module_errors: u64,
    pub rx_queue_drops: u64,
    pub host_queue_drops: u64,
    pub repeat_queue_drops: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IterationStats {
    pub polled: usize,
    pub forwarded: usize,
    pub dropped: usize,
    pub consumed: usize,
    pub delivered: usize,
}

struct Slot {
    name: String,
    enabled: bool,
    priority: i32,
    module: Box<dyn Module>,
}

pub struct Node {
    hal: RadioHal,
    slots: Vec<Slot>,
    rx_queue: BoundedQueue<Packet>,
    host_queue: BoundedQueue<HostMessage>,
    repeat_queue: BoundedQueue<Packet>,
    step_us: Micros,
    hook_log: Option<Vec<HookCall>>,
    stats: NodeStats,
}

impl Node {
    pub fn new(hal: RadioHal) -> Self {
        Self::with_capacity(hal, QUEUE_CAPACITY)
    }

    pub fn with_capacity(hal: RadioHal, capacity: usize) -> Self {
        Self {
            hal,
            slots: Vec::new(),
            rx_queue: BoundedQueue::new(capacity, Overflow::DropNewest),
            host_queue: BoundedQueue::new(capacity, Overflow::DropOldest),
            repeat_queue: BoundedQueue::new(capacity, Overflow::DropNewest),
            step_us: DEFAULT_LOOP_STEP_US,
            hook_log: None,
            stats: NodeStats::default(),
        }
    }

    pub fn set_loop_step(&mut self, us: Micros) {
        self.step_us = us;
    }

    pub fn loop_step(&self) -> Micros {
        self.step_us
    }

    pub fn hal(&self) -> &RadioHal {
        &self.hal
    }

    pub fn hal_mut(&mut self) -> &mut RadioHal {
        &mut self.hal
    }

    pub fn now(&self) -> Micros {
        self.hal.now()
    }

    pub fn stats(&self) -> NodeStats {
        NodeStats {
            rx_queue_drops: self.rx_queue.dropped(),
            host_queue_drops: self.host_queue.dropped(),
            repeat_queue_drops: self.repeat_queue.dropped(),
            ..self.stats
        }
    }

    /// Starts recording every hook invocation.
    pub fn record_hooks(&mut self) {
        self.hook_log = Some(Vec::new());
    }

    pub fn hook_log(&self) -> &[HookCall] {
        self.hook_log.as_deref().unwrap_or(&[])
    }

    pub fn module_names(&self) -> Vec<&str> {
        self.slots.iter().map(|s| s.name.as_str()).collect()
    }

    pub fn is_enabled(&self, name: &str) -> Option<bool> {
        self.slots.iter().find(|s| s.name == name).map(|s| s.enabled)
    }

    pub fn set_enabled(&mut self, name: &str, enabled: bool) -> bool {
        match self.slots.iter_mut().find(|s| s.name == name) {
            Some(s) => {
                s.enabled = enabled;
                true
            }
            None => false,
        }
    }

    /// Adds a module; hooks run in ascending `priority`, ties in
    /// registration order. `on_init` runs immediately.
    pub fn register(&mut self, module: Box<dyn Module>, priority: i32) -> Result<(), NodeError> {
        let name = module.name().to_string();
        if name == NODE {
            return Err(NodeError::Reserved(name));
        }
        if self.slots.iter().any(|s| s.name == name) {
            return Err(NodeError::DuplicateModule(name));
        }
        let mut slot = Slot { name, enabled: true, priority, module };
        log_hook(&mut self.hook_log, &slot.name, Hook::Init);
        let mut ctx = Ctx::new(&mut self.hal, &slot.name, &mut self.host_queue, &mut self.repeat_queue);
        slot.module.on_init(&mut ctx).map_err(|e| NodeError::Init { module: slot.name.clone(), reason: e.to_string() })?;
        let at = self.slots.iter().position(|s| s.priority > priority).unwrap_or(self.slots.len());
        self.slots.insert(at, slot);
        Ok(())
    }

    pub fn schema(&self) -> SchemaDescriptor {
        let mut modules = vec![ModuleSchema { name: NODE.into(), commands: node_commands() }];
        modules.extend(self.slots.iter().map(|s| ModuleSchema { name: s.name.clone(), commands: s.module.commands() }));
        SchemaDescriptor { modules }
    }

    /// Runs the `onPacketReceived` chain and queues survivors for the low
    /// priority stage.
    pub fn dispatch_packet(&mut self, mut pkt: Packet) -> Disposition {
        let mut outcome = Disposition::Forwarded;
        for slot in self.slots.iter_mut().filter(|s| s.enabled) {
            log_hook(&mut self.hook_log, &slot.name, Hook::PacketReceived);
            let mut ctx = Ctx::new(&mut self.hal, &slot.name, &mut self.host_queue, &mut self.repeat_queue);
            match slot.module.on_packet_received(&mut pkt, &mut ctx) {
                Ok(Verdict::Continue) => {}
                Ok(Verdict::Drop) => {
                    outcome = Disposition::Dropped;
                    break;
                }
                Ok(Verdict::Consume) => {
                    outcome = Disposition::Consumed;
                    break;
                }
                Err(e) => {
                    self.stats.module_errors += 1;
                    report(&mut ctx, "onPacketReceived", &e);
                    outcome = Disposition::Dropped;
                    break;
                }
            }
        }
        if outcome == Disposition::Forwarded && !self.rx_queue.push(pkt) {
            outcome = Disposition::Dropped;
        }
        match outcome {
            Disposition::Forwarded => self.stats.forwarded += 1,
            Disposition::Dropped => self.stats.dropped += 1,
            Disposition::Consumed => self.stats.consumed += 1,
        }
        outcome
    }

    /// One high-priority pass followed by one low-priority pass, then the
    /// loop step is charged to the clock.
    pub fn run_loop_iteration(&mut self) -> IterationStats {
        let mut it = IterationStats::default();
        let ids: Vec<_> = self.hal.radio_ids().collect();
        for id in ids {
            let pkts = self.hal.poll_reception(id).expect("attached radio");
            for pkt in pkts {
                it.polled += 1;
                match self.dispatch_packet(pkt) {
                    Disposition::Forwarded => it.forwarded += 1,
                    Disposition::Dropped => it.dropped += 1,
                    Disposition::Consumed => it.consumed += 1,
                }
            }
        }
        self.stats.polled += it.polled as u64;

        while let Some(pkt) = self.rx_queue.pop() {
            for slot in self.slots.iter_mut().filter(|s| s.enabled) {
                log_hook(&mut self.hook_log, &slot.name, Hook::AfterPacketReceived);
                let mut ctx = Ctx::new(&mut self.hal, &slot.name, &mut self.host_queue, &mut self.repeat_queue);
                if let Err(e) = slot.module.after_packet_received(&pkt, &mut ctx) {
                    self.stats.module_errors += 1;
                    report(&mut ctx, "afterPacketReceived", &e);
                }
            }
            let msg = HostMessage::new(&pkt.rx_radio, "packet", serde_json::to_value(&pkt).expect("packet serializes"));
            self.host_queue.push(msg);
            it.delivered += 1;
        }

        for slot in self.slots.iter_mut().filter(|s| s.enabled) {
            log_hook(&mut self.hook_log, &slot.name, Hook::Loop);
            let mut ctx = Ctx::new(&mut self.hal, &slot.name, &mut self.host_queue, &mut self.repeat_queue);
            if let Err(e) = slot.module.on_loop(&mut ctx) {
                self.stats.module_errors += 1;
                report(&mut ctx, "onLoop", &e);
            }
        }

        self.hal.advance(self.step_us);
        self.stats.iterations += 1;
        it
    }

    /// Iterates until the clock reaches `now + us`.
    pub fn run_for(&mut self, us: Micros) -> IterationStats {
        let end = self.now() + us;
        let mut total = IterationStats::default();
        while self.now() < end {
            let it = self.run_loop_iteration();
            total.polled += it.polled;
            total.forwarded += it.forwarded;
            total.dropped += it.dropped;
            total.consumed += it.consumed;
            total.delivered += it.delivered;
        }
        total
    }

    /// Routes `<module>/<verb>` (an optional `rfquack/in/` prefix is
    /// stripped). The reply or error is also queued for the host.
    pub fn handle_user_command(&mut self, topic: &str, payload: &Value) -> Result<Value, String> {
        let topic = topic.strip_prefix(super::IN_PREFIX).unwrap_or(topic);
        let Some((module, verb)) = topic.split_once('/') else {
            return self.fail(topic, "", format!("malformed topic {topic:?}"));
        };
        if module == NODE {
            return self.node_command(verb, payload);
        }
        let Some(idx) = self.slots.iter().position(|s| s.name == module) else {
            return self.fail(module, verb, format!("unknown module {module:?}"));
        };
        let commands = self.slots[idx].module.commands();
        let Some(spec) = commands.iter().find(|c| c.verb == verb) else {
            return self.fail(module, verb, format!("unknown command {verb:?}"));
        };
        if let Err(e) = spec.validate(payload) {
            return self.fail(module, verb, e);
        }
        let slot = &mut self.slots[idx];
        log_hook(&mut self.hook_log, &slot.name, Hook::UserCommand);
        let mut ctx = Ctx::new(&mut self.hal, &slot.name, &mut self.host_queue, &mut self.repeat_queue);
        match slot.module.on_user_command(verb, payload, &mut ctx) {
            Ok(v) => {
                ctx.emit("reply", json!({"verb": verb, "result": v}));
                Ok(v)
            }
            Err(e) => {
                debug!("{module}/{verb}: {e}");
                ctx.emit("error", json!({"verb": verb, "error": e.to_string()}));
                Err(e.to_string())
            }
        }
    }

    fn fail(&mut self, module: &str, verb: &str, msg: String) -> Result<Value, String> {
        self.host_queue.push(HostMessage::new(module, "error", json!({"verb": verb, "error": msg})));
        Err(msg)
    }

    fn node_command(&mut self, verb: &str, payload: &Value) -> Result<Value, String> {
        let Some(spec) = node_commands().into_iter().find(|c| c.verb == verb) else {
            return self.fail(NODE, verb, format!("unknown command {verb:?}"));
        };
        if let Err(e) = spec.validate(payload) {
            return self.fail(NODE, verb, e);
        }
        let (kind, result) = match verb {
            "get_schema" => ("schema", serde_json::to_value(self.schema()).expect("schema serializes")),
            "stats" => ("reply", json!({"stats": self.stats(), "nowUs": self.now()})),
            "list" => {
                let mods: Vec<_> = self.slots.iter().map(|s| json!({"name": s.name, "enabled": s.enabled, "priority": s.priority})).collect();
                ("reply", Value::Array(mods))
            }
            "set_enabled" => {
                let name = payload["module"].as_str().unwrap_or_default().to_string();
                let on = payload["enabled"].as_bool().unwrap_or(true);
                if !self.set_enabled(&name, on) {
                    return self.fail(NODE, verb, format!("unknown module {name:?}"));
                }
                ("reply", json!({"module": name, "enabled": on}))
            }
            _ => unreachable!("validated against node_commands"),
        };
        let body = if kind == "schema" { result.clone() } else { json!({"verb": verb, "result": result}) };
        self.host_queue.push(HostMessage::new(NODE, kind, body));
        Ok(result)
    }

    /// Oldest queued host message.
    pub fn pop_host(&mut self) -> Option<HostMessage> {
        self.host_queue.pop()
    }

    pub fn drain_host(&mut self) -> Vec<HostMessage> {
        self.host_queue.drain().collect()
    }

    pub fn host_queue_len(&self) -> usize {
        self.host_queue.len()
    }
}

fn node_commands() -> Vec<CommandSpec> {
    vec![
        CommandSpec::bare("get_schema"),
        CommandSpec::bare("stats"),
        CommandSpec::bare("list"),
        CommandSpec::new(
            "set_enabled",
            vec![FieldSpec::required("module", FieldType::Text), FieldSpec::required("enabled", FieldType::Bool)],
        ),
    ]
}

fn log_hook(log: &mut Option<Vec<HookCall>>, module: &str, hook: Hook) {
    if let Some(l) = log {
        l.push(HookCall { module: module.to_string(), hook });
    }
}

fn report(ctx: &mut Ctx, hook: &str, e: &ModuleError) {
    warn!("{} {hook}: {e}", ctx.module());
    ctx.emit("error", json!({"hook": hook, "error": e.to_string()}));
}
