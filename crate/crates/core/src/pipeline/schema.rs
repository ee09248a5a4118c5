//! Machine-readable description of every routable command, used both to
//! validate inbound payloads and to let clients build their own bindings.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum FieldType {
    Bool,
    Int { min: i64, max: i64 },
    Float,
    /// Byte string as hex text.
    Hex,
    Text,
    Enum { values: Vec<String> },
    List { item: Box<FieldType> },
}

impl FieldType {
    pub fn byte() -> Self {
        FieldType::Int { min: 0, max: 255 }
    }

    pub fn uint(max: i64) -> Self {
        FieldType::Int { min: 0, max }
    }

    pub fn one_of(values: &[&str]) -> Self {
        FieldType::Enum { values: values.iter().map(|s| s.to_string()).collect() }
    }

    fn check(&self, v: &Value) -> Result<(), String> {
        match self {
            FieldType::Bool if v.is_boolean() => Ok(()),
            FieldType::Int { min, max } => match v.as_i64() {
                Some(n) if n >= *min && n <= *max => Ok(()),
                Some(n) => Err(format!("{n} outside [{min}, {max}]")),
                None => Err(format!("expected integer, got {v}")),
            },
            FieldType::Float if v.is_number() => Ok(()),
            FieldType::Hex => match v.as_str() {
                Some(s) if hex::decode(s).is_ok() => Ok(()),
                _ => Err(format!("expected hex string, got {v}")),
            },
            FieldType::Text if v.is_string() => Ok(()),
            FieldType::Enum { values } => match v.as_str() {
                Some(s) if values.iter().any(|x| x == s) => Ok(()),
                _ => Err(format!("expected one of {values:?}, got {v}")),
            },
            FieldType::List { item } => match v.as_array() {
                Some(a) => a.iter().try_for_each(|x| item.check(x)),
                None => Err(format!("expected list, got {v}")),
            },
            other => Err(format!("expected {other:?}, got {v}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: FieldType,
    pub optional: bool,
}

impl FieldSpec {
    pub fn required(name: &str, ty: FieldType) -> Self {
        Self { name: name.into(), ty, optional: false }
    }

    pub fn optional(name: &str, ty: FieldType) -> Self {
        Self { name: name.into(), ty, optional: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommandSpec {
    pub verb: String,
    pub fields: Vec<FieldSpec>,
}

impl CommandSpec {
    pub fn new(verb: &str, fields: Vec<FieldSpec>) -> Self {
        Self { verb: verb.into(), fields }
    }

    pub fn bare(verb: &str) -> Self {
        Self::new(verb, Vec::new())
    }

    /// Rejects unknown and missing fields and type mismatches. `null` counts
    /// as an empty object.
    pub fn validate(&self, payload: &Value) -> Result<(), String> {
        let empty = Map::new();
        let obj = match payload {
            Value::Null => &empty,
            Value::Object(m) => m,
            other => return Err(format!("payload must be an object, got {other}")),
        };
        if let Some(k) = obj.keys().find(|k| !self.fields.iter().any(|f| &f.name == *k)) {
            return Err(format!("unknown field {k:?} for {}", self.verb));
        }
        for f in &self.fields {
            match obj.get(&f.name) {
                None | Some(Value::Null) if f.optional => {}
                None | Some(Value::Null) => return Err(format!("missing field {:?}", f.name)),
                Some(v) => f.ty.check(v).map_err(|e| format!("{}: {e}", f.name))?,
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModuleSchema {
    pub name: String,
    pub commands: Vec<CommandSpec>,
}

/// Node-wide catalog: one entry per registered module, plus shared enums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemaDescriptor {
    pub modules: Vec<ModuleSchema>,
}

impl SchemaDescriptor {
    pub fn command(&self, module: &str, verb: &str) -> Option<&CommandSpec> {
        self.modules.iter().find(|m| m.name == module)?.commands.iter().find(|c| c.verb == verb)
    }

    /// Every `<module>/<verb>` pair.
    pub fn topics(&self) -> Vec<String> {
        self.modules
            .iter()
            .flat_map(|m| m.commands.iter().map(move |c| format!("{}/{}", m.name, c.verb)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn spec() -> CommandSpec {
        CommandSpec::new(
            "add",
            vec![
                FieldSpec::required("pattern", FieldType::Text),
                FieldSpec::optional("negate", FieldType::Bool),
                FieldSpec::optional("op", FieldType::one_of(&["AND", "OR"])),
                FieldSpec::optional("i", FieldType::byte()),
            ],
        )
    }

    #[test]
    fn accepts_valid() {
        spec().validate(&json!({"pattern": "^aa", "negate": true, "op": "OR", "i": 7})).unwrap();
        spec().validate(&json!({"pattern": "^aa", "negate": null})).unwrap();
    }

    #[test]
    fn rejects_bad() {
        let s = spec();
        assert!(s.validate(&json!({"pattern": "x", "extra": 1})).unwrap_err().contains("unknown"));
        assert!(s.validate(&json!({})).unwrap_err().contains("missing"));
        assert!(s.validate(&json!({"pattern": 3})).is_err());
        assert!(s.validate(&json!({"pattern": "x", "op": "XOR"})).is_err());
        assert!(s.validate(&json!({"pattern": "x", "i": 256})).is_err());
        assert!(s.validate(&json!([1])).is_err());
        assert!(CommandSpec::bare("x").validate(&Value::Null).is_ok());
    }
}
