//! Report model shared by all commands and its JSON, CSV and text renderings.

use serde_json::{Map, Value};
use std::fmt::Write as _;

/// Scalar fields plus an optional table of rows.
#[derive(Debug, Default)]
pub struct Report {
    pub fields: Map<String, Value>,
    pub table: Option<Table>,
}

#[derive(Debug)]
pub struct Table {
    pub name: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Report {
    pub fn set(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.fields.insert(key.to_string(), value.into());
        self
    }

    pub fn num(&mut self, key: &str, x: f64) -> &mut Self {
        self.set(key, num(x))
    }

    pub fn to_json(&self) -> String {
        let mut obj = self.fields.clone();
        if let Some(t) = &self.table {
            let rows =
                t.rows.iter().map(|r| Value::Object(t.columns.iter().map(|c| c.to_string()).zip(r.iter().cloned()).collect())).collect();
            obj.insert(t.name.to_string(), Value::Array(rows));
        }
        let mut s = serde_json::to_string_pretty(&Value::Object(obj)).expect("values are serializable");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        match &self.table {
            Some(t) => {
                w.write_record(&t.columns)?;
                for r in &t.rows {
                    w.write_record(r.iter().map(cell))?;
                }
            }
            None => {
                w.write_record(["key", "value"])?;
                for (k, v) in &self.fields {
                    w.write_record([k.as_str(), &cell(v)])?;
                }
            }
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let width = self.fields.keys().map(|k| k.chars().count()).max().unwrap_or(0);
        for (k, v) in &self.fields {
            let _ = writeln!(s, "{k:<width$}  {}", cell(v));
        }
        if let Some(t) = &self.table {
            let cells: Vec<Vec<String>> = t.rows.iter().map(|r| r.iter().map(cell).collect()).collect();
            let widths: Vec<usize> = (0..t.columns.len())
                .map(|i| cells.iter().map(|r| r[i].chars().count()).chain([t.columns[i].len()]).max().unwrap_or(0))
                .collect();
            let _ = writeln!(s);
            let line = |items: Vec<String>| {
                items.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect::<Vec<_>>().join("  ").trim_end().to_string()
            };
            let _ = writeln!(s, "{}", line(t.columns.iter().map(|c| c.to_string()).collect()));
            for r in cells {
                let _ = writeln!(s, "{}", line(r));
            }
        }
        s
    }
}

/// JSON number for finite values, `"inf"`/`"-inf"` strings otherwise, `null` for NaN.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
    } else if x.is_nan() {
        Value::Null
    } else if x > 0.0 {
        Value::String("inf".into())
    } else {
        Value::String("-inf".into())
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut r = Report::default();
        r.set("zeta", "last").num("alpha", 2.5).num("big", f64::INFINITY);
        r.table = Some(Table { name: "rows", columns: vec!["j", "value"], rows: vec![vec![0.into(), num(1.0)], vec![1.into(), num(0.5)]] });
        r
    }

    #[test]
    fn json_keys_are_sorted_and_infinities_are_strings() {
        let j = sample().to_json();
        let a = j.find("\"alpha\"").unwrap();
        let b = j.find("\"big\"").unwrap();
        let z = j.find("\"zeta\"").unwrap();
        assert!(a < b && b < z);
        assert!(j.contains("\"big\": \"inf\""));
        let v: Value = serde_json::from_str(&j).unwrap();
        assert_eq!(v["rows"][1]["value"], 0.5);
    }

    #[test]
    fn csv_quotes_per_rfc4180() {
        let mut r = Report::default();
        r.set("clause", "a,b \"c\"");
        assert_eq!(r.to_csv().unwrap(), "key,value\nclause,\"a,b \"\"c\"\"\"\n");
        assert_eq!(sample().to_csv().unwrap(), "j,value\n0,1.0\n1,0.5\n");
    }

    #[test]
    fn text_aligns_keys_and_columns() {
        let t = sample().to_text();
        assert!(t.starts_with("alpha  2.5\nbig    inf\nzeta   last\n"));
        assert!(t.ends_with("j  value\n0  1.0\n1  0.5\n"));
    }
}
