//! Result tables shared by every experiment.
//!
//! CSV columns: `quantity,lambda,value,std_error,n_samples,seed,schema_version`.
//! `lambda` holds the scan parameter of the row (λ, t or γ); `seed` is printed
//! as `seed/stream`. Missing standard errors are written as empty fields.

use std::io::Write;

use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub quantity: String,
    pub lambda: f64,
    pub value: f64,
    pub std_error: Option<f64>,
    pub n_samples: usize,
    pub seed: String,
    pub schema_version: u32,
}

impl ResultRow {
    pub fn new(quantity: impl Into<String>, lambda: f64, value: f64, std_error: Option<f64>, n_samples: usize, seed: impl ToString) -> Self {
        Self {
            quantity: quantity.into(),
            lambda,
            value,
            std_error,
            n_samples,
            seed: seed.to_string(),
            schema_version: SCHEMA_VERSION,
        }
    }
}

pub fn write_rows<W: Write>(out: W, rows: &[ResultRow]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    if rows.is_empty() {
        w.write_record(["quantity", "lambda", "value", "std_error", "n_samples", "seed", "schema_version"])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows<R: std::io::Read>(input: R) -> Result<Vec<ResultRow>, csv::Error> {
    csv::Reader::from_reader(input).deserialize().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::RngSeed;

    #[test]
    fn round_trip_and_header() {
        let rows = vec![
            ResultRow::new("centered_log_mgf", 0.5, 0.123456789012345, Some(0.01), 1000, RngSeed::new(3)),
            ResultRow::new("herbst_bound", 0.5, 1.5, None, 1000, RngSeed::new(3)),
        ];
        let mut buf = Vec::new();
        write_rows(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("quantity,lambda,value,std_error,n_samples,seed,schema_version\n"));
        assert!(text.contains(",3/0,1\n"));
        assert_eq!(read_rows(&buf[..]).unwrap(), rows);
        let mut empty = Vec::new();
        write_rows(&mut empty, &[]).unwrap();
        assert_eq!(String::from_utf8(empty).unwrap().lines().count(), 1);
    }
}
