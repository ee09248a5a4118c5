use regex::Regex;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::hal::Packet;
use crate::pipeline::{args, CommandSpec, Ctx, FieldSpec, FieldType, Module, ModuleError, Verdict};

/// Regex over the lowercase hex text of a payload.
#[derive(Debug, Clone)]
pub struct FilterRule {
    pub pattern: Regex,
    pub negate: bool,
}

impl FilterRule {
    pub fn new(pattern: &str, negate: bool) -> Result<Self, regex::Error> {
        Ok(Self { pattern: Regex::new(pattern)?, negate })
    }

    pub fn accepts(&self, hex_text: &str) -> bool {
        self.pattern.is_match(hex_text) != self.negate
    }
}

/// True when every rule accepts; an empty list accepts everything.
pub fn filter_accepts(rules: &[FilterRule], data: &[u8]) -> bool {
    let text = hex::encode(data);
    rules.iter().all(|r| r.accepts(&text))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AddArgs {
    pattern: String,
    #[serde(default)]
    negate: bool,
}

#[derive(Default)]
pub struct PacketFilter {
    rules: Vec<FilterRule>,
}

impl PacketFilter {
    pub const NAME: &'static str = "packet_filter";

    pub fn rules(&self) -> &[FilterRule] {
        &self.rules
    }

    fn listing(&self) -> Value {
        let rules: Vec<_> = self.rules.iter().map(|r| json!({"pattern": r.pattern.as_str(), "negate": r.negate})).collect();
        json!({"count": rules.len(), "rules": rules})
    }
}

impl Module for PacketFilter {
    fn name(&self) -> &str {
        Self::NAME
    }

    fn commands(&self) -> Vec<CommandSpec> {
        vec![
            CommandSpec::new(
                "add",
                vec![FieldSpec::required("pattern", FieldType::Text), FieldSpec::optional("negate", FieldType::Bool)],
            ),
            CommandSpec::bare("clear"),
            CommandSpec::bare("list"),
        ]
    }

    fn on_user_command(&mut self, verb: &str, a: &Value, _ctx: &mut Ctx) -> Result<Value, ModuleError> {
        match verb {
            "add" => {
                let a: AddArgs = args(a)?;
                let rule = FilterRule::new(&a.pattern, a.negate).map_err(|e| ModuleError::Invalid(e.to_string()))?;
                self.rules.push(rule);
                Ok(self.listing())
            }
            "clear" => {
                self.rules.clear();
                Ok(self.listing())
            }
            "list" => Ok(self.listing()),
            other => Err(ModuleError::UnknownCommand(other.into())),
        }
    }

    fn on_packet_received(&mut self, pkt: &mut Packet, _ctx: &mut Ctx) -> Result<Verdict, ModuleError> {
        Ok(if filter_accepts(&self.rules, &pkt.data) { Verdict::Continue } else { Verdict::Drop })
    }
}
