use clap::ValueEnum;
use serde_json::{Map, Number, Value};

use crate::Failure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

fn cell(text: &str) -> Value {
    match text {
        "true" => Value::Bool(true),
        "false" => Value::Bool(false),
        _ => match text.parse::<u64>() {
            Ok(v) => Value::Number(v.into()),
            Err(_) => match text.parse::<f64>() {
                Ok(v) => Number::from_f64(v).map(Value::Number).unwrap_or(Value::Null),
                Err(_) => Value::String(text.to_string()),
            },
        },
    }
}

/// Rewrites header-plus-rows CSV as JSON with the same keys, in column
/// order. A single row becomes an object when `single` is set.
pub fn csv_to_json(csv: &str, single: bool) -> Result<String, Failure> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap_or_default().split(',').collect();
    let rows: Vec<Value> = lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            let mut obj = Map::new();
            for (key, text) in header.iter().zip(line.split(',')) {
                obj.insert((*key).to_string(), cell(text));
            }
            Value::Object(obj)
        })
        .collect();
    let value = if single {
        match <[Value; 1]>::try_from(rows) {
            Ok([row]) => row,
            Err(_) => return Err(Failure::Usage("expected exactly one row".into())),
        }
    } else {
        Value::Array(rows)
    };
    Ok(format!("{}\n", serde_json::to_string_pretty(&value).expect("JSON values serialize")))
}
