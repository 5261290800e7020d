//! Numeric CSV tables and the JSON/DOT artifact formats.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{BackgroundKnowledge, GraphJson, KnowledgeJson, MixedGraph};
use crate::scm::{LinearScm, ScmJson};
use crate::stats::{Dataset, NormalizationRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CsvOptions {
    pub delimiter: u8,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self { delimiter: b',' }
    }
}

/// Header row of names, every other cell a finite number. Parse errors carry
/// 1-based data-row and column positions (the header is not counted).
pub fn read_csv<R: Read>(reader: R, opts: &CsvOptions) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.is_empty() || (header.len() == 1 && header[0].trim().is_empty()) {
        return Err(Error::EmptyFile);
    }
    let names: Vec<String> = header.iter().map(|h| h.trim().to_string()).collect();
    let mut seen = BTreeSet::new();
    for name in &names {
        if name.is_empty() {
            return Err(Error::InvalidData("empty column name in header".into()));
        }
        if !seen.insert(name.as_str()) {
            return Err(Error::DuplicateHeader(name.clone()));
        }
    }

    let mut columns = vec![Vec::new(); names.len()];
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row = i + 1;
        if record.len() == 1 && record[0].trim().is_empty() && names.len() > 1 {
            continue;
        }
        if record.len() != names.len() {
            return Err(Error::Parse {
                row,
                column: record.len().min(names.len()) + 1,
                message: format!("expected {} fields, found {}", names.len(), record.len()),
            });
        }
        for (j, cell) in record.iter().enumerate() {
            let cell = cell.trim();
            let parse_err = |message: String| Error::Parse {
                row,
                column: j + 1,
                message,
            };
            if cell.is_empty() {
                return Err(parse_err("missing value".into()));
            }
            let v: f64 = cell
                .parse()
                .map_err(|_| parse_err(format!("`{cell}` is not a number")))?;
            if !v.is_finite() {
                return Err(parse_err(format!("`{cell}` is not finite")));
            }
            columns[j].push(v);
        }
    }
    if columns[0].is_empty() {
        return Err(Error::EmptyFile);
    }
    Dataset::new(names, columns)
}

pub fn load_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<Dataset> {
    let file = File::open(path)?;
    if file.metadata()?.len() == 0 {
        return Err(Error::EmptyFile);
    }
    read_csv(BufReader::new(file), opts)
}

/// Shortest round-trip decimal for every value.
pub fn write_csv<W: Write>(d: &Dataset, writer: W, opts: &CsvOptions) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .delimiter(opts.delimiter)
        .from_writer(writer);
    w.write_record(d.names())?;
    let mut cells = Vec::with_capacity(d.ncols());
    for i in 0..d.nrows() {
        cells.clear();
        cells.extend(d.columns().iter().map(|c| c[i].to_string()));
        w.write_record(&cells)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_csv(d: &Dataset, path: impl AsRef<Path>, opts: &CsvOptions) -> Result<()> {
    write_csv(d, BufWriter::new(File::create(path)?), opts)
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    if text.trim().is_empty() {
        return Err(Error::EmptyFile);
    }
    Ok(serde_json::from_str(&text)?)
}

pub fn write_json<T: Serialize + ?Sized>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphFormat {
    Json,
    Dot,
}

impl std::str::FromStr for GraphFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(GraphFormat::Json),
            "dot" => Ok(GraphFormat::Dot),
            other => Err(Error::InvalidConfig(format!(
                "unknown graph format `{other}`"
            ))),
        }
    }
}

pub fn save_graph(g: &MixedGraph, format: GraphFormat, path: impl AsRef<Path>) -> Result<()> {
    match format {
        GraphFormat::Json => write_json(&g.to_json(), path),
        GraphFormat::Dot => Ok(std::fs::write(path, g.to_dot())?),
    }
}

/// JSON only; DOT is an export format.
pub fn load_graph(path: impl AsRef<Path>) -> Result<MixedGraph> {
    MixedGraph::from_json(&read_json::<GraphJson>(path)?)
}

/// Names resolved against `columns`.
pub fn load_knowledge(path: impl AsRef<Path>, columns: &[String]) -> Result<BackgroundKnowledge> {
    BackgroundKnowledge::from_named(&read_json::<KnowledgeJson>(path)?, columns)
}

pub fn save_scm(scm: &LinearScm, path: impl AsRef<Path>) -> Result<()> {
    write_json(&scm.to_json(), path)
}

pub fn load_scm(path: impl AsRef<Path>) -> Result<LinearScm> {
    LinearScm::from_json(&read_json::<ScmJson>(path)?)
}

pub fn save_normalization(rec: &NormalizationRecord, path: impl AsRef<Path>) -> Result<()> {
    write_json(rec, path)
}

pub fn load_normalization(path: impl AsRef<Path>) -> Result<NormalizationRecord> {
    let rec: NormalizationRecord = read_json(path)?;
    rec.validate()?;
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Dataset> {
        read_csv(text.as_bytes(), &CsvOptions::default())
    }

    #[test]
    fn happy_path() {
        let d = parse("a,b\n1,2\n3.5,-4e-3\n5,6\n").unwrap();
        assert_eq!(d.shape(), (3, 2));
        assert_eq!(d.column(1), &[2.0, -0.004, 6.0]);
        let d = read_csv("a;b\n1;2\n".as_bytes(), &CsvOptions { delimiter: b';' }).unwrap();
        assert_eq!(d.shape(), (1, 2));
    }

    #[test]
    fn malformed_cell_location() {
        let text = "a,b\n1,2\n1,2\n1,2\n1,2\n1,abc\n";
        match parse(text) {
            Err(Error::Parse { row, column, .. }) => assert_eq!((row, column), (5, 2)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse("a,b\n1,\n"),
            Err(Error::Parse {
                row: 1,
                column: 2,
                ..
            })
        ));
        assert!(matches!(parse("a,b\n1,NaN\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse("a,b\n1,2,3\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn header_errors() {
        assert!(matches!(parse(""), Err(Error::EmptyFile)));
        assert!(matches!(parse("a,b\n"), Err(Error::EmptyFile)));
        assert!(matches!(parse("a,a\n1,2\n"), Err(Error::DuplicateHeader(h)) if h == "a"));
    }

    #[test]
    fn round_trip_is_exact() {
        let d = Dataset::new(
            vec!["x".into(), "y".into()],
            vec![
                vec![0.1 + 0.2, 1e-300, -7.0],
                vec![std::f64::consts::PI, 123456.789, 5e17],
            ],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_csv(&d, &mut buf, &CsvOptions::default()).unwrap();
        assert_eq!(parse(std::str::from_utf8(&buf).unwrap()).unwrap(), d);
    }

    #[test]
    fn graph_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.json");
        let g = MixedGraph::new(["a", "b"]);
        save_graph(&g, GraphFormat::Json, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let compact: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(
            compact.to_string(),
            r#"{"directed":[],"nodes":["a","b"],"undirected":[]}"#
        );
        assert_eq!(load_graph(&path).unwrap(), g);
        assert!("dot".parse::<GraphFormat>().is_ok());
        assert!("png".parse::<GraphFormat>().is_err());
    }
}
