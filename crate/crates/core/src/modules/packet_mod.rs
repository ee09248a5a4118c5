use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::hal::Packet;
use crate::pipeline::{args, CommandSpec, Ctx, FieldSpec, FieldType, Module, ModuleError, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Op {
    And,
    Or,
    Xor,
    Not,
    #[serde(rename = "SLEFT")]
    ShiftLeft,
    #[serde(rename = "SRIGHT")]
    ShiftRight,
    Prepend,
    Append,
    Insert,
}

impl Op {
    /// Wire names in declaration order.
    pub const NAMES: [&'static str; 9] = ["AND", "OR", "XOR", "NOT", "SLEFT", "SRIGHT", "PREPEND", "APPEND", "INSERT"];

    pub fn takes_operand(&self) -> bool {
        matches!(self, Op::And | Op::Or | Op::Xor | Op::ShiftLeft | Op::ShiftRight)
    }

    pub fn is_splice(&self) -> bool {
        matches!(self, Op::Prepend | Op::Append | Op::Insert)
    }

    fn byte(&self, b: u8, operand: u8) -> u8 {
        match self {
            Op::And => b & operand,
            Op::Or => b | operand,
            Op::Xor => b ^ operand,
            Op::Not => !b,
            Op::ShiftLeft => b.checked_shl(operand as u32).unwrap_or(0),
            Op::ShiftRight => b.checked_shr(operand as u32).unwrap_or(0),
            Op::Prepend | Op::Append | Op::Insert => unreachable!("splice op"),
        }
    }
}

/// One rewrite rule as it travels on the wire.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct PacketModification {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub content: Option<u8>,
    pub operation: Op,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operand: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "crate::hexbytes::opt")]
    pub payload: Option<Vec<u8>>,
}

impl PacketModification {
    pub fn at(position: usize, operation: Op, operand: Option<u8>) -> Self {
        Self { position: Some(position), content: None, operation, operand, pattern: None, payload: None }
    }

    pub fn on_value(content: u8, operation: Op, operand: Option<u8>) -> Self {
        Self { position: None, content: Some(content), operation, operand, pattern: None, payload: None }
    }

    pub fn splice(operation: Op, position: Option<usize>, payload: Vec<u8>) -> Self {
        Self { position, content: None, operation, operand: None, pattern: None, payload: Some(payload) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModError {
    #[error("{0}")]
    Invalid(String),
    #[error("position {position} out of range for {len}-byte packet")]
    OutOfRange { position: usize, len: usize },
}

/// A validated rule with its gate compiled.
#[derive(Debug, Clone)]
pub struct CompiledMod {
    pub spec: PacketModification,
    gate: Option<Regex>,
}

impl CompiledMod {
    pub fn new(spec: PacketModification) -> Result<Self, ModError> {
        let op = spec.operation;
        let bad = |m: &str| Err(ModError::Invalid(format!("{op:?}: {m}")));
        if spec.position.is_some() && spec.content.is_some() {
            return bad("position and content are mutually exclusive");
        }
        if op.takes_operand() != spec.operand.is_some() {
            return bad(if op.takes_operand() { "operand required" } else { "operand not allowed" });
        }
        if op.is_splice() != spec.payload.is_some() {
            return bad(if op.is_splice() { "payload required" } else { "payload not allowed" });
        }
        match op {
            Op::Prepend | Op::Append if spec.position.is_some() || spec.content.is_some() => {
                return bad("takes neither position nor content")
            }
            Op::Insert if spec.position.is_none() => return bad("position required"),
            _ if !op.is_splice() && spec.position.is_none() && spec.content.is_none() => {
                return bad("position or content required")
            }
            _ => {}
        }
        let gate = match &spec.pattern {
            Some(p) => Some(Regex::new(p).map_err(|e| ModError::Invalid(e.to_string()))?),
            None => None,
        };
        Ok(Self { spec, gate })
    }

    /// Applies the rule in place. An out-of-range position leaves `data`
    /// untouched.
    pub fn apply(&self, data: &mut Vec<u8>) -> Result<(), ModError> {
        if let Some(g) = &self.gate {
            if !g.is_match(&hex::encode(&*data)) {
                return Ok(());
            }
        }
        let s = &self.spec;
        let op = s.operation;
        match op {
            Op::Prepend => {
                data.splice(0..0, s.payload.iter().flatten().copied());
            }
            Op::Append => data.extend(s.payload.iter().flatten()),
            Op::Insert => {
                let pos = s.position.expect("validated");
                if pos > data.len() {
                    return Err(ModError::OutOfRange { position: pos, len: data.len() });
                }
                data.splice(pos..pos, s.payload.iter().flatten().copied());
            }
            _ => {
                let operand = s.operand.unwrap_or(0);
                if let Some(pos) = s.position {
                    let len = data.len();
                    let b = data.get_mut(pos).ok_or(ModError::OutOfRange { position: pos, len })?;
                    *b = op.byte(*b, operand);
                } else if let Some(c) = s.content {
                    for b in data.iter_mut().filter(|b| **b == c) {
                        *b = op.byte(*b, operand);
                    }
                }
            }
        }
        Ok(())
    }
}

/// Left fold of every rule over `data`; skipped rules are reported by index.
pub fn apply_all(mods: &[CompiledMod], data: &mut Vec<u8>) -> Vec<(usize, ModError)> {
    let mut skipped = Vec::new();
    for (i, m) in mods.iter().enumerate() {
        if let Err(e) = m.apply(data) {
            skipped.push((i, e));
        }
    }
    skipped
}

pub fn modification_fields() -> Vec<FieldSpec> {
    vec![
        FieldSpec::optional("position", FieldType::uint(255)),
        FieldSpec::optional("content", FieldType::byte()),
        FieldSpec::required("operation", FieldType::one_of(&Op::NAMES)),
        FieldSpec::optional("operand", FieldType::byte()),
        FieldSpec::optional("pattern", FieldType::Text),
        FieldSpec::optional("payload", FieldType::Hex),
    ]
}

#[derive(Default)]
pub struct PacketModEngine {
    mods: Vec<CompiledMod>,
}

impl PacketModEngine {
    pub const NAME: &'static str = "packet_mod";

    pub fn push(&mut self, spec: PacketModification) -> Result<usize, ModError> {
        self.mods.push(CompiledMod::new(spec)?);
        Ok(self.mods.len())
    }

    pub fn mods(&self) -> &[CompiledMod] {
        &self.mods
    }

    fn listing(&self) -> Value {
        let rules: Vec<_> = self.mods.iter().map(|m| &m.spec).collect();
        json!({"count": rules.len(), "rules": rules})
    }
}

impl Module for PacketModEngine {
    fn name(&self) -> &str {
        Self::NAME
    }

    fn commands(&self) -> Vec<CommandSpec> {
        vec![CommandSpec::new("add", modification_fields()), CommandSpec::bare("reset"), CommandSpec::bare("list")]
    }

    fn on_user_command(&mut self, verb: &str, a: &Value, _ctx: &mut Ctx) -> Result<Value, ModuleError> {
        match verb {
            "add" => {
                let spec: PacketModification = args(a)?;
                self.push(spec).map_err(|e| ModuleError::Invalid(e.to_string()))?;
                Ok(self.listing())
            }
            "reset" => {
                self.mods.clear();
                Ok(self.listing())
            }
            "list" => Ok(self.listing()),
            other => Err(ModuleError::UnknownCommand(other.into())),
        }
    }

    fn on_packet_received(&mut self, pkt: &mut Packet, ctx: &mut Ctx) -> Result<Verdict, ModuleError> {
        for (rule, e) in apply_all(&self.mods, &mut pkt.data) {
            ctx.emit("warning", json!({"rule": rule, "warning": e.to_string()}));
        }
        Ok(Verdict::Continue)
    }
}
