//! CSV ingestion and export.

use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::numerics::DataMatrix;

/// Which column, if any, carries the row labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Name(String),
    Index(usize),
    /// The named column when the header has it, otherwise no labels.
    IfPresent(String),
}

impl LabelColumn {
    /// Parses a command-line value: a bare integer is a 0-based index unless a
    /// header column carries that exact name.
    pub fn parse(s: &str) -> Self {
        match s.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvOptions {
    pub has_header: bool,
    pub label_column: Option<LabelColumn>,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            has_header: true,
            label_column: None,
        }
    }
}

pub fn read_csv_path(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<DataMatrix> {
    let file = std::fs::File::open(path.as_ref())
        .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    read_csv(file, opts)
}

/// Reads one observation per line. Every non-label cell must parse as a
/// decimal number; the first failure is reported with its 1-based data row
/// and its column name (or index).
pub fn read_csv<R: Read>(reader: R, opts: &CsvOptions) -> Result<DataMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(opts.has_header)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Option<Vec<String>> = if opts.has_header {
        Some(rdr.headers()?.iter().map(str::to_string).collect())
    } else {
        None
    };

    let label_idx = match (&opts.label_column, &header) {
        (None, _) => None,
        (Some(LabelColumn::Name(name)), Some(h)) => Some(
            h.iter()
                .position(|c| c == name)
                .ok_or_else(|| Error::ConfigInvalid(format!("no column named {name:?}")))?,
        ),
        (Some(LabelColumn::IfPresent(name)), Some(h)) => h.iter().position(|c| c == name),
        (Some(LabelColumn::IfPresent(_)), None) => None,
        (Some(LabelColumn::Name(name)), None) => {
            return Err(Error::ConfigInvalid(format!(
                "label column {name:?} given by name but the file has no header"
            )))
        }
        (Some(LabelColumn::Index(i)), Some(h)) => {
            // A header cell spelled like the index wins over the position.
            Some(h.iter().position(|c| c == &i.to_string()).unwrap_or(*i))
        }
        (Some(LabelColumn::Index(i)), None) => Some(*i),
    };

    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut width: Option<usize> = None;
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if let Some(li) = label_idx {
            if li >= rec.len() {
                return Err(Error::ConfigInvalid(format!(
                    "label column {li} out of range for {} columns",
                    rec.len()
                )));
            }
        }
        let mut count = 0;
        for (col, cell) in rec.iter().enumerate() {
            if Some(col) == label_idx {
                labels.push(cell.to_string());
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row: row + 1,
                column: column_name(header.as_deref(), col),
                message: format!("{cell:?} is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row: row + 1,
                    column: column_name(header.as_deref(), col),
                    message: format!("{cell:?} is not finite"),
                });
            }
            values.push(v);
            count += 1;
        }
        match width {
            None => width = Some(count),
            Some(w) if w != count => {
                return Err(Error::Parse {
                    row: row + 1,
                    column: "*".into(),
                    message: format!("expected {w} numeric cells, found {count}"),
                })
            }
            _ => {}
        }
    }
    let p = width.unwrap_or(0);
    let n = if p == 0 { 0 } else { values.len() / p };
    let m = Array2::from_shape_vec((n, p), values)
        .map_err(|e| Error::DegenerateInput(e.to_string()))?;
    let mut dm = DataMatrix::new(m)?;
    if let Some(h) = header {
        let names: Vec<String> = h
            .into_iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != label_idx)
            .map(|(_, s)| s)
            .collect();
        if names.len() == dm.p() {
            dm = dm.with_col_names(names)?;
        }
    }
    if label_idx.is_some() {
        dm = dm.with_labels(labels)?;
    }
    Ok(dm)
}

fn column_name(header: Option<&[String]>, col: usize) -> String {
    header
        .and_then(|h| h.get(col).cloned())
        .unwrap_or_else(|| col.to_string())
}

/// Writes an `n × d` layout with columns `dim1..dimd` and an optional trailing
/// `label` column.
pub fn write_layout<W: Write>(
    writer: W,
    layout: ArrayView2<'_, f64>,
    labels: Option<&[String]>,
) -> Result<()> {
    let names: Vec<String> = (1..=layout.ncols()).map(|k| format!("dim{k}")).collect();
    write_table(writer, &names, layout, labels.map(|l| ("label", l)))
}

/// Writes a numeric table with the given column names, optionally followed by
/// one string column.
pub fn write_table<W: Write>(
    writer: W,
    names: &[String],
    values: ArrayView2<'_, f64>,
    extra: Option<(&str, &[String])>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut head: Vec<&str> = names.iter().map(String::as_str).collect();
    if let Some((name, _)) = extra {
        head.push(name);
    }
    w.write_record(&head)?;
    for (i, row) in values.outer_iter().enumerate() {
        let mut rec: Vec<String> = row.iter().map(|v| format_float(*v)).collect();
        if let Some((_, col)) = extra {
            rec.push(col[i].clone());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Shortest representation that parses back to the same `f64`.
pub fn format_float(v: f64) -> String {
    let s = format!("{v}");
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}
