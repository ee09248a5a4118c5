//! Helpers for protocol tests: schema-driven random payloads and an
//! in-memory sink.

use std::io::Write;
use std::sync::{Arc, Mutex};

use rand::Rng;
use rfq_core::pipeline::{CommandSpec, FieldType};
use serde_json::{Map, Value};

pub fn random_value<R: Rng>(ty: &FieldType, rng: &mut R) -> Value {
    match ty {
        FieldType::Bool => Value::Bool(rng.random()),
        FieldType::Int { min, max } => Value::from(rng.random_range(*min..=*max)),
        FieldType::Float => {
            let x: f64 = rng.random_range(-1e9..1e9);
            Value::from(if rng.random_bool(0.2) { x.round() } else { x })
        }
        FieldType::Hex => {
            let n = rng.random_range(0..=64);
            Value::from((0..n).map(|_| format!("{:02x}", rng.random::<u8>())).collect::<String>())
        }
        FieldType::Text => {
            let n = rng.random_range(0..24);
            let pool = ['a', 'Z', '0', '^', '$', '.', '*', ' ', '"', '\\', 'é', '\n', '/'];
            Value::from((0..n).map(|_| pool[rng.random_range(0..pool.len())]).collect::<String>())
        }
        FieldType::Enum { values } => Value::from(values[rng.random_range(0..values.len())].clone()),
        FieldType::List { item } => {
            let n = rng.random_range(0..5);
            Value::Array((0..n).map(|_| random_value(item, rng)).collect())
        }
    }
}

/// Random payload valid for `spec`; optional fields are included at random.
pub fn random_payload<R: Rng>(spec: &CommandSpec, rng: &mut R) -> Value {
    if spec.fields.is_empty() && rng.random_bool(0.5) {
        return Value::Null;
    }
    let mut m = Map::new();
    for f in &spec.fields {
        if !f.optional || rng.random_bool(0.5) {
            m.insert(f.name.clone(), random_value(&f.ty, rng));
        }
    }
    Value::Object(m)
}

#[derive(Clone, Default)]
pub struct SharedBuf(pub Arc<Mutex<Vec<u8>>>);

impl SharedBuf {
    pub fn bytes(&self) -> Vec<u8> {
        self.0.lock().unwrap().clone()
    }
}

impl Write for SharedBuf {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        self.0.lock().unwrap().extend_from_slice(buf);
        Ok(buf.len())
    }
    fn flush(&mut self) -> std::io::Result<()> {
        Ok(())
    }
}
