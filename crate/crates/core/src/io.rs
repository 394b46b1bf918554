//! CSV and JSON emission.
//!
//! CSV files are UTF-8, comma separated, with a header row preceded by
//! `# key=value` provenance lines. Floats use the shortest representation
//! that round-trips, so identical inputs give byte-identical files.

use std::collections::BTreeMap;
use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};

use crate::ensembles::Spectrum;
use crate::probes::ProbeSeries;
use crate::{Error, Result};

/// A table with provenance metadata.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub meta: BTreeMap<String, String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { meta: BTreeMap::new(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.insert(key.to_string(), value.to_string());
        self
    }

    pub fn push_row(&mut self, row: Vec<String>) -> Result<()> {
        if row.len() != self.header.len() {
            return Err(Error::Shape(format!("row of {} cells for {} columns", row.len(), self.header.len())));
        }
        self.rows.push(row);
        Ok(())
    }

    /// Index of a named column.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Parses one column as floats.
    pub fn column_f64(&self, name: &str) -> Result<Vec<f64>> {
        let j = self.column(name).ok_or_else(|| Error::InvalidArgument(format!("no column '{name}'")))?;
        self.rows
            .iter()
            .map(|r| r[j].parse::<f64>().map_err(|e| Error::InvalidArgument(format!("{name}: {e}"))))
            .collect()
    }

    /// Writes the `# key=value` preamble, header and rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for (k, v) in &self.meta {
            writeln!(w, "# {k}={v}")?;
        }
        let mut cw = csv::Writer::from_writer(w);
        cw.write_record(&self.header)?;
        for r in &self.rows {
            cw.write_record(r)?;
        }
        cw.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::InvalidArgument(e.to_string()))
    }

    /// Reads a table written by [`Table::write_csv`].
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut reader = std::io::BufReader::new(r);
        let mut meta = BTreeMap::new();
        let mut rest = String::new();
        let mut line = String::new();
        loop {
            line.clear();
            if reader.read_line(&mut line)? == 0 {
                break;
            }
            if let Some(m) = line.strip_prefix("# ") {
                if let Some((k, v)) = m.trim_end().split_once('=') {
                    meta.insert(k.to_string(), v.to_string());
                }
            } else {
                rest.push_str(&line);
                reader.read_to_string(&mut rest)?;
                break;
            }
        }
        let mut cr = csv::Reader::from_reader(rest.as_bytes());
        let header = cr.headers()?.iter().map(|s| s.to_string()).collect();
        let rows = cr
            .records()
            .map(|r| r.map(|rec| rec.iter().map(|s| s.to_string()).collect()))
            .collect::<std::result::Result<Vec<Vec<String>>, _>>()?;
        Ok(Self { meta, header, rows })
    }

    /// JSON object with `meta`, `header` and `rows`.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Shortest round-trip formatting.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

/// Columns `t, value, ensemble, d, quantity`, one row per grid point of each series.
pub fn series_table(series: &[ProbeSeries]) -> Result<Table> {
    let mut t = Table::new(&["t", "value", "ensemble", "d", "quantity"]);
    for s in series {
        let ens = s.ensemble.map(|e| e.name().to_string()).unwrap_or_default();
        for &(time, v) in &s.grid {
            t.push_row(vec![fmt_f64(time), fmt_f64(v), ens.clone(), s.d.to_string(), s.quantity.clone()])?;
        }
    }
    Ok(t)
}

/// One energy per row, with `kind`, `d` and `seed` in the preamble.
pub fn spectrum_table(sp: &Spectrum) -> Result<Table> {
    let mut t = Table::new(&["energy"])
        .meta("kind", sp.source.kind)
        .meta("d", sp.d())
        .meta("time_rescale", fmt_f64(sp.time_rescale));
    if let Some(seed) = sp.seed {
        t = t.meta("seed", seed);
    }
    for &e in &sp.energies {
        t.push_row(vec![fmt_f64(e)])?;
    }
    Ok(t)
}

/// Writes any serializable value as pretty JSON.
pub fn write_json<W: Write, T: Serialize>(mut w: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}
