//! JSON report emission with a fixed number format.
//!
//! Integral values print without a fractional part and everything else uses
//! the shortest representation that round-trips, so identical inputs always
//! give byte-identical reports. Non-finite values become `null`.

use serde::Serialize;
use serde_json::{Map, Number, Value};

use crate::error::Result;

pub const SCHEMA_VERSION: &str = "1";

/// Largest magnitude below which every integer is exactly representable.
const EXACT_INT: f64 = 9_007_199_254_740_992.0;

pub fn number(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    if x.fract() == 0.0 && x.abs() < EXACT_INT {
        // -0.0 prints as 0
        return Value::Number(Number::from(x as i64));
    }
    Number::from_f64(x).map_or(Value::Null, Value::Number)
}

fn normalize(v: Value) -> Value {
    match v {
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => number(x),
            _ => Value::Number(n),
        },
        Value::Array(items) => Value::Array(items.into_iter().map(normalize).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, normalize(v))).collect()),
        other => other,
    }
}

/// An ordered report object that always begins with the schema version.
#[derive(Debug, Clone)]
pub struct Report {
    fields: Map<String, Value>,
}

impl Default for Report {
    fn default() -> Self {
        Self::new()
    }
}

impl Report {
    pub fn new() -> Self {
        let mut fields = Map::new();
        fields.insert("schema".into(), Value::String(SCHEMA_VERSION.into()));
        Self { fields }
    }

    pub fn num(mut self, key: &str, x: f64) -> Self {
        self.fields.insert(key.into(), number(x));
        self
    }

    pub fn value<T: Serialize>(mut self, key: &str, v: T) -> Result<Self> {
        let v = serde_json::to_value(v)?;
        self.fields.insert(key.into(), normalize(v));
        Ok(self)
    }

    pub fn raw(mut self, key: &str, v: Value) -> Self {
        self.fields.insert(key.into(), normalize(v));
        self
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.fields.get(key)
    }

    pub fn into_value(self) -> Value {
        Value::Object(self.fields)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.fields).expect("report values are always serializable")
    }
}
