//! Tabular output: CSV with a leading effective-configuration comment block,
//! or the same content as a JSON document. Formatting is deterministic so
//! identical scenarios produce byte-identical files.

use std::io::Write;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
}

impl Value {
    fn csv(&self) -> String {
        match self {
            Value::Num(x) => format!("{}", normalize(*x)),
            Value::Int(i) => format!("{i}"),
            Value::Text(s) => s.clone(),
            Value::Bool(b) => format!("{b}"),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Value::Num(x) => serde_json::Value::from(normalize(*x)),
            Value::Int(i) => serde_json::Value::from(*i),
            Value::Text(s) => serde_json::Value::from(s.as_str()),
            Value::Bool(b) => serde_json::Value::from(*b),
        }
    }
}

fn normalize(x: f64) -> f64 {
    if x == 0.0 {
        0.0 // fold -0.0
    } else {
        x
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub config: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn write_csv<W: Write + ?Sized>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "# cvct effective configuration")?;
        for (key, value) in &self.config {
            writeln!(out, "# {key} = {value}")?;
        }
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Value::csv).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn write_json<W: Write + ?Sized>(&self, out: &mut W) -> std::io::Result<()> {
        let config: serde_json::Map<String, serde_json::Value> = self
            .config
            .iter()
            .map(|(k, v)| (k.clone(), serde_json::Value::from(v.as_str())))
            .collect();
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                let object: serde_json::Map<String, serde_json::Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.clone(), v.json()))
                    .collect();
                serde_json::Value::Object(object)
            })
            .collect();
        let document = serde_json::json!({
            "config": serde_json::Value::Object(config),
            "rows": rows,
        });
        writeln!(out, "{}", serde_json::to_string_pretty(&document)?)
    }
}
