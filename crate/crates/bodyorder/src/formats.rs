//! File formats: configuration JSON, single-column node CSV, two-column
//! Jacobi CSV, residual-history CSV and the commented experiment tables.

use std::fmt::Write as _;
use std::io::{Read, Write};

use bodyorder_core::approx_nonlinear::{JacobiMatrix, JacobiOrigin};
use bodyorder_core::lattice::{Configuration, SiteState};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteRecord {
    pub position: Vec<f64>,
    #[serde(default)]
    pub onsite_potential: f64,
    #[serde(default)]
    pub species: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigurationRecord {
    pub sites: Vec<SiteRecord>,
}

impl From<&Configuration> for ConfigurationRecord {
    fn from(c: &Configuration) -> Self {
        ConfigurationRecord {
            sites: c
                .sites()
                .iter()
                .map(|s| SiteRecord {
                    position: s.position.clone(),
                    onsite_potential: s.onsite_potential,
                    species: s.species,
                })
                .collect(),
        }
    }
}

impl ConfigurationRecord {
    pub fn into_configuration(self) -> CliResult<Configuration> {
        let sites = self
            .sites
            .into_iter()
            .map(|s| SiteState::new(s.position, s.onsite_potential, s.species))
            .collect();
        Configuration::new(sites).map_err(|e| CliError::Config(format!("configuration: {e}")))
    }
}

pub fn read_configuration_json<R: Read>(reader: R) -> CliResult<Configuration> {
    let record: ConfigurationRecord = serde_json::from_reader(reader)?;
    record.into_configuration()
}

pub fn write_configuration_json<W: Write>(config: &Configuration, writer: W) -> CliResult<()> {
    serde_json::to_writer_pretty(writer, &ConfigurationRecord::from(config))?;
    Ok(())
}

/// Floats with 17 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_nodes_csv<W: Write>(nodes: &[f64], writer: W) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["node"])?;
    for &x in nodes {
        w.write_record([fmt_float(x)])?;
    }
    w.flush()?;
    Ok(())
}

fn comment_free_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(reader)
}

pub fn read_nodes_csv<R: Read>(reader: R) -> CliResult<Vec<f64>> {
    let mut r = comment_free_reader(reader);
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        if rec.len() != 1 {
            return Err(CliError::Format(format!("row {}: expected one column", i + 1)));
        }
        out.push(parse_float(&rec[0], i + 1)?);
    }
    Ok(out)
}

fn parse_float(text: &str, row: usize) -> CliResult<f64> {
    text.trim()
        .parse()
        .map_err(|_| CliError::Format(format!("row {row}: `{text}` is not a number")))
}

/// Rows `(a_n, b_n)` with `b_0` left empty.
pub fn write_jacobi_csv<W: Write>(j: &JacobiMatrix, writer: W) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["a", "b"])?;
    for (n, &a) in j.a().iter().enumerate() {
        let b = if n == 0 { String::new() } else { fmt_float(j.b()[n - 1]) };
        w.write_record([fmt_float(a), b])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_jacobi_csv<R: Read>(reader: R) -> CliResult<JacobiMatrix> {
    let mut r = comment_free_reader(reader);
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        if rec.len() != 2 {
            return Err(CliError::Format(format!("row {}: expected two columns", i + 1)));
        }
        a.push(parse_float(&rec[0], i + 1)?);
        if i > 0 {
            b.push(parse_float(&rec[1], i + 1)?);
        } else if !rec[1].trim().is_empty() {
            return Err(CliError::Format("row 1: b_0 must be empty".into()));
        }
    }
    Ok(JacobiMatrix::new(a, b, JacobiOrigin::Moments)?)
}

pub fn write_residual_csv<W: Write>(history: &[f64], writer: W) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["iteration", "residual_inf"])?;
    for (i, &r) in history.iter().enumerate() {
        w.write_record([i.to_string(), fmt_float(r)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_residual_csv<R: Read>(reader: R) -> CliResult<Vec<f64>> {
    let mut r = comment_free_reader(reader);
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        if rec.len() != 2 || rec[0].trim() != i.to_string() {
            return Err(CliError::Format(format!("row {}: expected `{i},<residual>`", i + 1)));
        }
        out.push(parse_float(&rec[1], i + 1)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => fmt_float(*x),
            Cell::Text(s) => s.clone(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(i) => Some(*i as f64),
            Cell::Float(x) => Some(*x),
            Cell::Text(_) => None,
        }
    }
}

/// Result of one experiment: columns, rows and `key=value` notes that end
/// up as comment lines.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub notes: Vec<(String, String)>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            ..Table::default()
        }
    }

    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.notes.push((key.to_string(), value.to_string()));
    }

    pub fn note_float(&mut self, key: &str, value: f64) {
        self.note(key, fmt_float(value));
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx].as_f64().unwrap_or(f64::NAN)).collect())
    }

    pub fn note_value(&self, key: &str) -> Option<&str> {
        self.notes.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        let _ = write!(out, "{b:02x}");
    }
    out
}

/// Header comments (tool version, config hash, seed, notes), then the CSV
/// body.
pub fn write_table<W: Write>(
    table: &Table,
    config_text: &str,
    seed: u64,
    command: &str,
    mut writer: W,
) -> CliResult<()> {
    writeln!(writer, "# bodyorder {VERSION} {command}")?;
    writeln!(writer, "# config-sha256 {}", sha256_hex(config_text.as_bytes()))?;
    writeln!(writer, "# seed {seed}")?;
    for (k, v) in &table.notes {
        writeln!(writer, "# {k}={v}")?;
    }
    let mut w = csv::Writer::from_writer(&mut writer);
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::render))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use bodyorder_core::lattice::make_chain;

    #[test]
    fn configuration_json_round_trip() {
        let c = make_chain(4, 1.3, &[0.25, -0.5]).unwrap();
        let mut buf = Vec::new();
        write_configuration_json(&c, &mut buf).unwrap();
        let back = read_configuration_json(buf.as_slice()).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn configuration_json_validates() {
        let text = r#"{"sites": [{"position": [0.0]}, {"position": [0.0]}]}"#;
        let err = read_configuration_json(text.as_bytes()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(read_configuration_json(r#"{"sites": [], "x": 1}"#.as_bytes()).is_err());
    }

    #[test]
    fn node_csv_round_trip_is_exact() {
        let nodes = vec![-1.0, -(0.5f64).sqrt(), 0.0, 1.0 / 3.0, 1.0];
        let mut buf = Vec::new();
        write_nodes_csv(&nodes, &mut buf).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("node\n"));
        assert_eq!(read_nodes_csv(buf.as_slice()).unwrap(), nodes);
        assert!(read_nodes_csv("node\nabc\n".as_bytes()).is_err());
    }

    #[test]
    fn jacobi_csv_round_trip() {
        let j = JacobiMatrix::new(vec![0.1, -0.2, 0.3], vec![0.5, 1.0 / 7.0], JacobiOrigin::Moments).unwrap();
        let mut buf = Vec::new();
        write_jacobi_csv(&j, &mut buf).unwrap();
        let back = read_jacobi_csv(buf.as_slice()).unwrap();
        assert_eq!(back.a(), j.a());
        assert_eq!(back.b(), j.b());
    }

    #[test]
    fn residual_csv_round_trip() {
        let h = vec![0.4, 1.5e-4, 3.2e-11];
        let mut buf = Vec::new();
        write_residual_csv(&h, &mut buf).unwrap();
        assert_eq!(read_residual_csv(buf.as_slice()).unwrap(), h);
    }

    #[test]
    fn table_header_and_floats() {
        let mut t = Table::new(&["n", "err"]);
        t.note("predicted_rate", 0.25);
        t.rows.push(vec![Cell::Int(3), Cell::Float(0.1)]);
        let mut buf = Vec::new();
        write_table(&t, "a = 1", 7, "converge", &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# bodyorder "));
        assert_eq!(lines[1], format!("# config-sha256 {}", sha256_hex(b"a = 1")));
        assert_eq!(lines[2], "# seed 7");
        assert_eq!(lines[3], "# predicted_rate=0.25");
        assert_eq!(lines[4], "n,err");
        assert_eq!(lines[5], "3,1.0000000000000001e-1");
    }

    #[test]
    fn sha256_known_vector() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
