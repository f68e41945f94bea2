//! Feature tables on disk and number formatting.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use crate::document::EducationLevel;
use crate::error::{Error, Result};

/// Formats like C's `%.12g`: 12 significant digits, trailing zeros removed,
/// scientific notation below 1e-4 and from 1e12 up.
pub fn format_g12(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= DIGITS {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub doc_id: String,
    pub level: Option<EducationLevel>,
    pub values: Vec<f64>,
}

/// Named feature columns keyed by document.
///
/// CSV layout: `doc_id,level,<names...>`; `level` is empty when unknown.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureTable {
    pub names: Vec<String>,
    pub rows: Vec<FeatureRow>,
}

impl FeatureTable {
    pub fn new(names: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Self {
            names: names.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, doc_id: impl Into<String>, level: Option<EducationLevel>, values: Vec<f64>) -> Result<()> {
        if values.len() != self.names.len() {
            return Err(Error::Shape {
                expected: self.names.len(),
                got: values.len(),
            });
        }
        self.rows.push(FeatureRow {
            doc_id: doc_id.into(),
            level,
            values,
        });
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["doc_id".to_string(), "level".to_string()];
        header.extend(self.names.iter().cloned());
        w.write_record(&header)?;
        for row in &self.rows {
            let mut rec = vec![row.doc_id.clone(), row.level.map_or(String::new(), |l| l.to_string())];
            rec.extend(row.values.iter().map(|&v| format_g12(v)));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<csv output>", e))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("CSV output is UTF-8")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn read_csv(input: impl Read) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers()?.clone();
        if header.len() < 2 || &header[0] != "doc_id" || &header[1] != "level" {
            return Err(Error::Format {
                record: "header".into(),
                message: "expected doc_id,level,<features...>".into(),
            });
        }
        let mut table = Self::new(header.iter().skip(2));
        for rec in r.records() {
            let rec = rec?;
            let doc_id = rec[0].to_string();
            let bad = |message: String| Error::Format {
                record: doc_id.clone(),
                message,
            };
            let level = match rec[1].trim() {
                "" => None,
                s => Some(s.parse().map_err(|e: Error| bad(e.to_string()))?),
            };
            let values = rec
                .iter()
                .skip(2)
                .map(|s| s.trim().parse::<f64>().map_err(|e| bad(format!("'{s}': {e}"))))
                .collect::<Result<Vec<_>>>()?;
            table.push(doc_id.clone(), level, values).map_err(|e| bad(e.to_string()))?;
        }
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(std::io::BufReader::new(file))
    }

    /// Column-wise concatenation joined on doc_id, in this table's row order.
    pub fn join(&self, other: &Self) -> Result<Self> {
        let index: HashMap<&str, &FeatureRow> = other.rows.iter().map(|r| (r.doc_id.as_str(), r)).collect();
        let mut names = self.names.clone();
        names.extend(other.names.iter().cloned());
        let mut out = Self::new(names);
        for row in &self.rows {
            let o = index.get(row.doc_id.as_str()).ok_or_else(|| Error::Format {
                record: row.doc_id.clone(),
                message: "missing from the table being joined".into(),
            })?;
            let mut values = row.values.clone();
            values.extend(&o.values);
            out.push(row.doc_id.clone(), row.level.or(o.level), values)?;
        }
        Ok(out)
    }
}
