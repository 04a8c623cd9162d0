//! Report rows and their CSV form.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::HarnessError;

pub const REPORT_HEADER: &str = "scenario,item,quantity,value,resolution,seed,notes";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub scenario: String,
    /// Cube, probe or stage the value belongs to.
    pub item: String,
    pub quantity: String,
    pub value: f64,
    pub resolution: usize,
    pub seed: u64,
    /// Provenance: exclusion radius, shift, failing stage.
    pub notes: String,
}

impl ReportRow {
    pub fn is_error(&self) -> bool {
        self.quantity == "error"
    }
}

pub fn write_report<W: Write>(rows: &[ReportRow], out: W) -> Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(REPORT_HEADER.split(','))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_report(rows: &[ReportRow], path: &Path) -> Result<(), HarnessError> {
    let file = std::fs::File::create(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_report(rows, std::io::BufWriter::new(file)).map_err(|source| HarnessError::Csv {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_report<R: Read>(input: R) -> Result<Vec<ReportRow>, csv::Error> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != REPORT_HEADER {
        return Err(csv::Error::from(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            format!("unexpected header {:?}", header.join(",")),
        )));
    }
    r.deserialize().collect()
}

pub fn load_report(path: &Path) -> Result<Vec<ReportRow>, HarnessError> {
    let file = std::fs::File::open(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_report(file).map_err(|source| HarnessError::Csv {
        path: path.to_path_buf(),
        source,
    })
}
