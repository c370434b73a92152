use std::io::Write;

use solenoid_core::charfun::{EquationVerdict, Extraction};
use solenoid_core::rat::format_rational;

/// Rows for `--format csv`.
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn row(&mut self, cells: impl IntoIterator<Item = String>) {
        self.rows.push(cells.into_iter().collect());
    }

    pub fn write<W: Write>(&self, w: W) -> Result<(), csv::Error> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.header)?;
        for r in &self.rows {
            out.write_record(r)?;
        }
        out.flush()?;
        Ok(())
    }
}

pub fn equation_cell(v: Option<&EquationVerdict>) -> String {
    match v {
        None => "not checked".into(),
        Some(EquationVerdict::Holds) => "holds".into(),
        Some(EquationVerdict::Fails { witness, lhs, rhs }) => format!("fails at {witness}: {lhs} vs {rhs}"),
        Some(EquationVerdict::Unknown { reason }) => format!("unknown: {reason}"),
    }
}

pub fn extraction_cell(v: Option<&Extraction>) -> String {
    match v {
        None => "not checked".into(),
        Some(Extraction::Decomposition(d)) => format!(
            "sigma {} shift {} subgroup {}",
            format_rational(&d.sigma),
            format_rational(&d.shift),
            d.subgroup
        ),
        Some(Extraction::NotOfForm { reason }) => format!("not of form: {reason}"),
        Some(Extraction::Unknown { reason }) => format!("unknown: {reason}"),
    }
}
