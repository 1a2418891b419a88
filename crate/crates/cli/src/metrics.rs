use std::collections::HashMap;
use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use serde_json::json;
use tourlens::diagnostics::{cluster_geometry, neighborhood_preservation, rank_preservation, DEFAULT_K};
use tourlens::Error;

use crate::error::{CliError, CliResult};
use crate::input::{display, write_json, CsvArgs};

#[derive(Debug, Args)]
pub struct MetricsArgs {
    /// Reference table, usually the original data.
    x: PathBuf,
    /// Table to audit, usually a layout.
    y: PathBuf,
    #[arg(long, default_value_t = DEFAULT_K as u64, value_parser = clap::value_parser!(u64).range(1..))]
    k: u64,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    csv: CsvArgs,
}

#[derive(Debug, Serialize)]
struct Summary {
    mean: f64,
    median: f64,
    min: f64,
    max: f64,
}

fn summarize(v: &[f64]) -> Summary {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    let median = if n % 2 == 1 { s[n / 2] } else { 0.5 * (s[n / 2 - 1] + s[n / 2]) };
    Summary {
        mean: s.iter().sum::<f64>() / n as f64,
        median,
        min: s[0],
        max: s[n - 1],
    }
}

/// Labels as dense codes in order of first appearance.
fn codes(labels: &[String]) -> (Vec<usize>, Vec<String>) {
    let mut seen: HashMap<&str, usize> = HashMap::new();
    let mut names = Vec::new();
    let codes = labels
        .iter()
        .map(|l| {
            *seen.entry(l).or_insert_with(|| {
                names.push(l.clone());
                names.len() - 1
            })
        })
        .collect();
    (codes, names)
}

pub fn run(a: MetricsArgs) -> CliResult {
    let x = a.csv.read(&a.x)?;
    let y = a.csv.read(&a.y)?;
    if x.n() != y.n() {
        return Err(CliError::Usage(format!(
            "{} has {} rows but {} has {}",
            display(&a.x),
            x.n(),
            display(&a.y),
            y.n()
        )));
    }
    if a.k as usize >= x.n() {
        return Err(CliError::Usage(format!("--k {} must be smaller than n = {}", a.k, x.n())));
    }
    let report = neighborhood_preservation(x.values(), y.values(), a.k as usize)?;
    let ranks = rank_preservation(x.values(), y.values(), a.k as usize)?;
    let geometry = match x.labels().or(y.labels()) {
        None => None,
        Some(l) => {
            let (c, names) = codes(l);
            match cluster_geometry(x.values(), y.values(), &c) {
                Ok(g) => Some((g, names)),
                Err(Error::SingleClass) => None,
                Err(e) => return Err(e.into()),
            }
        }
    };
    let geometry = geometry.map(|(g, names)| {
        json!({
            "classes": g.classes.iter().map(|&c| &names[c]).collect::<Vec<_>>(),
            "pairs": g.pairs.iter().map(|p| json!({
                "a": names[p.a],
                "b": names[p.b],
                "dist_x": p.dist_x,
                "dist_y": p.dist_y,
            })).collect::<Vec<_>>(),
            "rank_correlation": g.rank_correlation,
            "degenerate": g.degenerate,
        })
    });
    let out = json!({
        "x": display(&a.x),
        "y": display(&a.y),
        "n": x.n(),
        "k": a.k,
        "mean_overlap": report.mean_overlap,
        "overlap": summarize(&report.per_point_overlap),
        "distortion": summarize(&report.distortion_score),
        "diffusion": summarize(&report.diffusion_score),
        "rank_displacement": summarize(&ranks),
        "cluster_geometry": geometry,
    });
    match &a.out {
        Some(path) => write_json(path, &out),
        None => {
            let mut stdout = std::io::stdout().lock();
            serde_json::to_writer_pretty(&mut stdout, &out)?;
            writeln!(stdout)?;
            Ok(())
        }
    }
}
