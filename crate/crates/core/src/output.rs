//! Tabular output helpers shared by the result types.
//!
//! CSV files carry a header row and floats with 12 significant digits.

use std::io::Write;

use crate::error::Result;

/// Formats `x` with 12 significant digits in scientific notation.
pub fn sig12(x: f64) -> String {
    if x == 0.0 {
        // avoid "-0e0" and keep a stable spelling
        return "0.00000000000e0".to_string();
    }
    format!("{:.11e}", x)
}

pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        CsvTable {
            header: header.iter().map(|s| s.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_floats(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|&x| sig12(x)).collect());
    }

    pub fn push_raw(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Appends the rows of a table with the same header.
    pub fn append(&mut self, other: CsvTable) {
        assert_eq!(self.header, other.header, "appending a table with a different header");
        self.rows.extend(other.rows);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.header)?;
        for r in &self.rows {
            out.write_record(r)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn render(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv output is utf-8")
    }
}
