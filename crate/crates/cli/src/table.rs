//! Tabular output: CSV with a `#` header block echoing the resolved
//! configuration, or a JSON mirror of the same content. Emission is fully
//! deterministic so reruns produce byte-identical files.

use serde_json::{Map, Value};

#[derive(Debug, Clone)]
pub enum Cell {
    Text(String),
    Float(f64),
    Int(u64),
}

/// Infinities use the TOML-style tokens; NaN marks an absent value (for
/// example the minus branch at zero temperature).
pub fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v}")
    }
}

impl Cell {
    pub fn csv(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Float(v) => fmt_float(*v),
            Cell::Int(v) => v.to_string(),
        }
    }

    pub fn json(&self) -> Value {
        match self {
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Float(v) => json_float(*v),
            Cell::Int(v) => Value::Number((*v).into()),
        }
    }
}

/// JSON has no non-finite numbers, so those become their CSV tokens.
fn json_float(v: f64) -> Value {
    match serde_json::Number::from_f64(v) {
        Some(n) => Value::Number(n),
        None => Value::String(fmt_float(v)),
    }
}

pub struct Table {
    pub command: String,
    /// TOML echo of the configuration the run actually used.
    pub config_echo: String,
    pub meta: Vec<(String, Cell)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("# command: {}\n", self.command));
        s.push_str("# config:\n");
        for line in self.config_echo.lines() {
            if line.is_empty() {
                s.push_str("#\n");
            } else {
                s.push_str(&format!("#   {line}\n"));
            }
        }
        for (key, value) in &self.meta {
            s.push_str(&format!("# {key} = {}\n", value.csv()));
        }
        s.push_str(&self.columns.join(","));
        s.push('\n');
        for row in &self.rows {
            debug_assert_eq!(row.len(), self.columns.len());
            let line: Vec<String> = row.iter().map(Cell::csv).collect();
            s.push_str(&line.join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> String {
        let mut root = Map::new();
        root.insert("command".into(), Value::String(self.command.clone()));
        root.insert("config".into(), config_json(&self.config_echo));
        let mut meta = Map::new();
        for (key, value) in &self.meta {
            meta.insert(key.clone(), value.json());
        }
        root.insert("meta".into(), Value::Object(meta));
        root.insert(
            "columns".into(),
            Value::Array(
                self.columns
                    .iter()
                    .map(|c| Value::String(c.clone()))
                    .collect(),
            ),
        );
        root.insert(
            "rows".into(),
            Value::Array(
                self.rows
                    .iter()
                    .map(|row| Value::Array(row.iter().map(Cell::json).collect()))
                    .collect(),
            ),
        );
        let mut out = serde_json::to_string_pretty(&Value::Object(root))
            .expect("tables serialize cleanly");
        out.push('\n');
        out
    }
}

fn config_json(echo: &str) -> Value {
    match echo.parse::<toml::Value>() {
        Ok(v) => toml_to_json(&v),
        Err(_) => Value::String(echo.to_string()),
    }
}

fn toml_to_json(v: &toml::Value) -> Value {
    match v {
        toml::Value::String(s) => Value::String(s.clone()),
        toml::Value::Integer(i) => Value::Number((*i).into()),
        toml::Value::Float(f) => json_float(*f),
        toml::Value::Boolean(b) => Value::Bool(*b),
        toml::Value::Datetime(d) => Value::String(d.to_string()),
        toml::Value::Array(items) => Value::Array(items.iter().map(toml_to_json).collect()),
        toml::Value::Table(entries) => {
            let mut map = Map::new();
            for (k, val) in entries {
                map.insert(k.clone(), toml_to_json(val));
            }
            Value::Object(map)
        }
    }
}
