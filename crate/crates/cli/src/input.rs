use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Serialize;
use tourlens::io::{read_csv_path, CsvOptions, LabelColumn};
use tourlens::DataMatrix;

use crate::error::CliResult;

#[derive(Debug, Clone, Args)]
pub struct CsvArgs {
    /// Column holding row labels, by name or 0-based index [default: `label` if present]
    #[arg(long)]
    pub label_column: Option<String>,
    /// The input has no header row.
    #[arg(long)]
    pub no_header: bool,
}

impl CsvArgs {
    pub fn options(&self) -> CsvOptions {
        CsvOptions {
            has_header: !self.no_header,
            label_column: Some(match &self.label_column {
                Some(c) => LabelColumn::parse(c),
                None => LabelColumn::IfPresent("label".into()),
            }),
        }
    }

    pub fn read(&self, path: &Path) -> CliResult<DataMatrix> {
        Ok(read_csv_path(path, &self.options())?)
    }

    /// Flags reproducing these options.
    pub fn to_args(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Some(c) = &self.label_column {
            out.extend(["--label-column".into(), c.clone()]);
        }
        if self.no_header {
            out.push("--no-header".into());
        }
        out
    }
}

pub fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("must be positive, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

pub fn non_negative(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("must be non-negative, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

/// A value in `(0, 1]`.
pub fn fraction(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v <= 1.0 => Ok(v),
        Ok(v) => Err(format!("must be in (0, 1], got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

/// A value in `[0, 1]`.
pub fn unit(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if (0.0..=1.0).contains(&v) => Ok(v),
        Ok(v) => Err(format!("must be in [0, 1], got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

pub fn momentum(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if (0.0..1.0).contains(&v) => Ok(v),
        Ok(v) => Err(format!("must be in [0, 1), got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

/// `data.csv` → `data.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("json")
}

/// `layout.csv` → `layout.<suffix>.csv`.
pub fn companion_path(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.{suffix}.csv"))
}

pub fn create(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let f = File::create(path).map_err(|e| tourlens::Error::Io(format!("{}: {e}", path.display())))?;
    Ok(BufWriter::new(f))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| tourlens::Error::Io(format!("{}: {e}", path.display())))?;
    Ok(())
}

pub fn display(path: &Path) -> String {
    path.display().to_string()
}

/// Principal component scores of `x` used as tour input, keeping at most
/// `min(p, n − 1)` components. Row labels carry over.
pub fn tour_input(
    x: &DataMatrix,
    pcs: usize,
    whiten: bool,
) -> CliResult<(DataMatrix, tourlens::PcaResult)> {
    let k = pcs.min(x.p()).min(x.n().saturating_sub(1)).max(1);
    let fit = tourlens::numerics::pca(x, k)?;
    let scores = if whiten { fit.whitened_scores() } else { fit.scores.clone() };
    let names = (1..=k).map(|j| format!("pc{j}")).collect();
    let mut data = DataMatrix::new(scores)?.with_col_names(names)?;
    if let Some(l) = x.labels() {
        data = data.with_labels(l.to_vec())?;
    }
    Ok((data, fit))
}
