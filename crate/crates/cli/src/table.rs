//! Row-oriented output with a fixed column order, written as CSV or JSON.

use serde_json::{Map, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Bool(bool),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

/// Shortest-free, locale-independent rendering with 17 significant digits.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Table {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match header");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.iter().map(|c| csv_field(c)).collect::<Vec<_>>().join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Num(x) => fmt_num(*x),
                    Cell::Bool(b) => b.to_string(),
                    Cell::Text(s) => csv_field(s),
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// Array of objects; non-finite numbers become strings.
    pub fn to_json(&self) -> Value {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut m = Map::new();
                for (name, cell) in self.columns.iter().zip(row) {
                    let v = match cell {
                        Cell::Num(x) => serde_json::Number::from_f64(*x).map_or(Value::String(x.to_string()), Value::Number),
                        Cell::Bool(b) => Value::Bool(*b),
                        Cell::Text(s) => Value::String(s.clone()),
                    };
                    m.insert(name.clone(), v);
                }
                Value::Object(m)
            })
            .collect();
        Value::Array(rows)
    }
}

/// `prefix_x, prefix_y, prefix_z`
pub fn vec_columns(prefix: &str) -> [String; 3] {
    ["x", "y", "z"].map(|c| format!("{prefix}_{c}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_full_precision() {
        let mut t = Table::new(vec!["a".into(), "b".into(), "c".into()]);
        t.push(vec![Cell::Num(0.1), Cell::Bool(true), Cell::Text("x,y".into())]);
        let csv = t.to_csv();
        assert_eq!(csv, "a,b,c\n1.0000000000000001e-1,true,\"x,y\"\n");
        let back: f64 = "1.0000000000000001e-1".parse().unwrap();
        assert_eq!(back, 0.1);
    }

    #[test]
    fn json_keeps_column_order() {
        let mut t = Table::new(vec!["z".into(), "a".into()]);
        t.push(vec![Cell::Num(1.0), Cell::Num(f64::NAN)]);
        let s = serde_json::to_string(&t.to_json()).unwrap();
        assert_eq!(s, r#"[{"z":1.0,"a":"NaN"}]"#);
    }
}
