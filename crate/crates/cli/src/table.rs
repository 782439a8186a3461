use std::io::Write;
use std::path::Path;

use crate::config::Format;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    /// Floats use 17 significant digits, which round-trips every `f64`.
    fn to_csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => format!("{x:.16e}"),
            Cell::Text(s) => s.clone(),
        }
    }

    fn to_json(&self) -> serde_json::Value {
        match self {
            Cell::Int(i) => (*i).into(),
            Cell::Float(x) => serde_json::Number::from_f64(*x)
                .map(serde_json::Value::Number)
                .unwrap_or_else(|| serde_json::Value::String(x.to_string())),
            Cell::Text(s) => s.clone().into(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Int(x as i64)
    }
}

/// A named output table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len(), "row width in table {}", self.name);
        self.rows.push(row);
    }

    /// Prefix every row with a `column = value` cell.
    pub fn prefixed(&self, column: &str, value: f64) -> Table {
        let mut header = vec![column.to_string()];
        header.extend(self.header.iter().cloned());
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut row = vec![Cell::Float(value)];
                row.extend(r.iter().cloned());
                row
            })
            .collect();
        Table {
            name: self.name.clone(),
            header,
            rows,
        }
    }

    pub fn file_name(&self, format: Format) -> String {
        match format {
            Format::Csv => format!("{}.csv", self.name),
            Format::Json => format!("{}.json", self.name),
        }
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header).expect("write to memory");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_csv)).expect("write to memory");
        }
        w.into_inner().expect("flush to memory")
    }

    pub fn to_json(&self) -> Vec<u8> {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|r| {
                serde_json::Value::Object(
                    self.header
                        .iter()
                        .cloned()
                        .zip(r.iter().map(Cell::to_json))
                        .collect(),
                )
            })
            .collect();
        let mut out = serde_json::to_vec_pretty(&serde_json::json!({
            "columns": self.header,
            "rows": rows,
        }))
        .expect("serialize table");
        out.push(b'\n');
        out
    }

    pub fn write(&self, dir: &Path, format: Format) -> std::io::Result<String> {
        let name = self.file_name(format);
        let bytes = match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        };
        let mut f = std::fs::File::create(dir.join(&name))?;
        f.write_all(&bytes)?;
        Ok(name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_uses_full_precision() {
        let mut t = Table::new("x", &["k", "band", "re"]);
        t.push(vec![0.1.into(), 1usize.into(), (-2.5f64).into()]);
        let s = String::from_utf8(t.to_csv()).unwrap();
        assert_eq!(s, "k,band,re\n1.0000000000000001e-1,1,-2.5000000000000000e0\n");
        let back: f64 = "1.0000000000000001e-1".parse().unwrap();
        assert_eq!(back.to_bits(), 0.1f64.to_bits());
    }

    #[test]
    fn prefix_adds_leading_column() {
        let mut t = Table::new("x", &["a"]);
        t.push(vec![1i64.into()]);
        let p = t.prefixed("value", 2.0);
        assert_eq!(p.header, vec!["value", "a"]);
        assert_eq!(p.rows[0], vec![Cell::Float(2.0), Cell::Int(1)]);
    }

    #[test]
    fn json_rows_are_objects() {
        let mut t = Table::new("x", &["a", "b"]);
        t.push(vec![1i64.into(), "y".into()]);
        let v: serde_json::Value = serde_json::from_slice(&t.to_json()).unwrap();
        assert_eq!(v["rows"][0]["b"], "y");
    }
}
