//! Delimited and sparse `label idx:val` text formats.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::matcore::DenseMatrix;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DelimitedOptions {
    /// Zero-based label column; `None` means the last column.
    pub label_column: Option<usize>,
    pub delimiter: u8,
    pub header: bool,
    /// Label text mapped to `+1`. Any single other value maps to `-1`. When
    /// unset, labels must be integers: `+1/-1` or class indices `1..=k`.
    pub positive_label: Option<String>,
}

impl Default for DelimitedOptions {
    fn default() -> Self {
        Self {
            label_column: None,
            delimiter: b',',
            header: true,
            positive_label: None,
        }
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => parse_err(line, format!("{other:?}")),
    }
}

struct LabelMap<'a> {
    positive: Option<&'a str>,
    negative: Option<String>,
}

impl LabelMap<'_> {
    fn map(&mut self, raw: &str, line: usize) -> Result<i32> {
        let raw = raw.trim();
        match self.positive {
            Some(pos) if raw == pos => Ok(1),
            Some(_) => match &self.negative {
                None => {
                    self.negative = Some(raw.to_string());
                    Ok(-1)
                }
                Some(neg) if neg == raw => Ok(-1),
                Some(neg) => Err(parse_err(
                    line,
                    format!("unknown label {raw:?}; binary labels seen so far are the positive label and {neg:?}"),
                )),
            },
            None => parse_integer_label(raw, line),
        }
    }
}

fn parse_integer_label(raw: &str, line: usize) -> Result<i32> {
    let v: i32 = raw.trim_start_matches('+').parse().map_err(|_| {
        parse_err(
            line,
            format!("unknown label {raw:?}; pass a positive label name for text labels"),
        )
    })?;
    if v == 0 || v < -1 {
        return Err(parse_err(
            line,
            format!("unknown label {v}; integer labels must be -1/+1 or class indices 1..=k"),
        ));
    }
    Ok(v)
}

/// Checks that integer labels are either all `+-1` or all class indices.
fn check_label_set(y: &[i32]) -> Result<()> {
    let binary = y.iter().all(|&l| l == 1 || l == -1);
    let classes = y.iter().all(|&l| l >= 1);
    if binary || classes {
        Ok(())
    } else {
        Err(Error::Data("labels mix -1 with class indices above 1".into()))
    }
}

/// Reads a delimited file whose rows hold features plus one label column.
pub fn load_delimited(path: &Path, opts: &DelimitedOptions) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_error)?;
    let mut labels = LabelMap {
        positive: opts.positive_label.as_deref(),
        negative: None,
    };
    let mut width = None;
    let mut header: Option<Vec<String>> = None;
    let mut data = Vec::new();
    let mut y = Vec::new();
    let mut record = csv::StringRecord::new();
    let mut first = true;
    while reader.read_record(&mut record).map_err(csv_error)? {
        if first && opts.header {
            first = false;
            header = Some(record.iter().map(str::to_string).collect());
            continue;
        }
        first = false;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(parse_err(
                line,
                format!("ragged row: {} fields, expected {w}", record.len()),
            ));
        }
        if w < 2 {
            return Err(parse_err(line, "need at least one feature and a label column"));
        }
        let label_col = opts.label_column.unwrap_or(w - 1);
        if label_col >= w {
            return Err(parse_err(line, format!("label column {label_col} out of range")));
        }
        for (j, cell) in record.iter().enumerate() {
            if j == label_col {
                y.push(labels.map(cell, line)?);
            } else {
                let v: f64 = cell
                    .parse()
                    .map_err(|_| parse_err(line, format!("non-numeric feature value {cell:?} in column {}", j + 1)))?;
                if !v.is_finite() {
                    return Err(parse_err(line, format!("non-finite feature value in column {}", j + 1)));
                }
                data.push(v);
            }
        }
    }
    // a header whose width differs from the data (e.g. a metadata line) gives no names
    let names = match (header, width) {
        (Some(h), Some(w)) if h.len() == w => {
            let label_col = opts.label_column.unwrap_or(w - 1);
            Some(
                h.into_iter()
                    .enumerate()
                    .filter(|(j, _)| *j != label_col)
                    .map(|(_, s)| s)
                    .collect::<Vec<_>>(),
            )
        }
        _ => None,
    };
    if y.is_empty() {
        return Err(Error::Data(format!("{} has no data rows", path.display())));
    }
    check_label_set(&y)?;
    let p = data.len() / y.len();
    let mut d = Dataset::new(DenseMatrix::new(y.len(), p, data)?, y)?;
    d.feature_names = names;
    Ok(d)
}

/// Writes features then the label, comma separated, with a header row.
/// Floats use the shortest representation that parses back exactly.
pub fn save_delimited(dataset: &Dataset, path: &Path) -> Result<()> {
    let file = File::create(path)?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    let mut header: Vec<String> = match &dataset.feature_names {
        Some(n) if n.len() == dataset.n_features() => n.clone(),
        _ => (1..=dataset.n_features()).map(|j| format!("x{j}")).collect(),
    };
    header.push("label".into());
    w.write_record(&header).map_err(csv_error)?;
    for i in 0..dataset.n_samples() {
        let mut rec: Vec<String> = dataset.row(i).iter().map(|v| format!("{v}")).collect();
        rec.push(dataset.y[i].to_string());
        w.write_record(&rec).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `label idx:val ...` lines with 1-based, strictly increasing
/// indices. The feature count is the largest index seen unless
/// `n_features` is given.
pub fn load_sparse_text(path: &Path, n_features: Option<usize>) -> Result<Dataset> {
    let reader = BufReader::new(File::open(path)?);
    let mut rows: Vec<BTreeMap<usize, f64>> = Vec::new();
    let mut y = Vec::new();
    let mut max_index = 0usize;
    for (no, line) in reader.lines().enumerate() {
        let line_no = no + 1;
        let line = line?;
        let text = line.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let mut tokens = text.split_whitespace();
        let label = tokens.next().expect("nonempty line has a token");
        y.push(parse_integer_label(label, line_no)?);
        let mut row = BTreeMap::new();
        let mut last = 0usize;
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| parse_err(line_no, format!("expected idx:val, got {tok:?}")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| parse_err(line_no, format!("bad index {idx:?}")))?;
            if idx == 0 {
                return Err(parse_err(line_no, "indices are 1-based; found 0"));
            }
            if idx <= last {
                return Err(parse_err(
                    line_no,
                    format!("index {idx} does not increase (previous {last})"),
                ));
            }
            let v: f64 = val
                .parse()
                .map_err(|_| parse_err(line_no, format!("non-numeric value {val:?}")))?;
            if !v.is_finite() {
                return Err(parse_err(line_no, "non-finite value"));
            }
            last = idx;
            row.insert(idx, v);
        }
        max_index = max_index.max(last);
        rows.push(row);
    }
    if y.is_empty() {
        return Err(Error::Data(format!("{} has no data rows", path.display())));
    }
    check_label_set(&y)?;
    let p = match n_features {
        Some(p) if p < max_index => {
            return Err(Error::Data(format!(
                "index {max_index} exceeds the declared {p} features"
            )))
        }
        Some(p) => p,
        None => max_index,
    };
    let mut x = DenseMatrix::zeros(rows.len(), p);
    for (i, row) in rows.iter().enumerate() {
        for (&j, &v) in row {
            x.set(i, j - 1, v);
        }
    }
    Dataset::new(x, y)
}

/// Writes a dataset in the sparse format, skipping exact zeros.
pub fn save_sparse_text(dataset: &Dataset, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for i in 0..dataset.n_samples() {
        write!(w, "{}", dataset.y[i])?;
        for (j, v) in dataset.row(i).iter().enumerate() {
            if *v != 0.0 {
                write!(w, " {}:{v}", j + 1)?;
            }
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}
