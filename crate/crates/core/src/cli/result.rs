//! Result documents printed by the command-line tool.

use serde_json::{json, Map, Value};

use crate::filtration::SimpleFunction;

/// Round to 12 significant digits; non-finite values become `null`.
pub fn num(v: f64) -> Value {
    if !v.is_finite() {
        return Value::Null;
    }
    let rounded: f64 = format!("{v:.11e}").parse().expect("formatted float parses");
    // avoid printing -0
    json!(if rounded == 0.0 { 0.0 } else { rounded })
}

pub fn nums(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| num(x)).collect())
}

/// Values of a vector-valued simple function, one array per block.
pub fn blocks(f: &SimpleFunction) -> Value {
    Value::Array((0..f.algebra().block_count()).map(|b| nums(f.value(b))).collect())
}

/// A JSON object built up field by field; keys are emitted in sorted order.
#[derive(Debug, Clone, Default)]
pub struct Document {
    fields: Map<String, Value>,
}

impl Document {
    pub fn new(command: &str, kind: &str) -> Self {
        let mut d = Self::default();
        d.set("command", json!(command));
        d.set("kind", json!(kind));
        d
    }

    pub fn set(&mut self, key: &str, value: Value) -> &mut Self {
        self.fields.insert(key.to_string(), value);
        self
    }

    pub fn diagnostic(&mut self, key: &str, value: Value) -> &mut Self {
        let diag = self
            .fields
            .entry("diagnostics")
            .or_insert_with(|| Value::Object(Map::new()));
        if let Value::Object(m) = diag {
            m.insert(key.to_string(), value);
        }
        self
    }

    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(&Value::Object(self.fields.clone())).expect("serializable");
        s.push('\n');
        s
    }
}
