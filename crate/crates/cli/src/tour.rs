use std::path::PathBuf;

use clap::Args;
use ndarray::Array2;
use serde_json::json;
use tourlens::io::write_table;
use tourlens::numerics::project;
use tourlens::tour::{random_basis, DEFAULT_STEP_ANGLE};
use tourlens::TourPath;

use crate::error::{CliError, CliResult};
use crate::input::{create, display, positive, tour_input, write_json, CsvArgs};

#[derive(Debug, Args)]
pub struct TourArgs {
    /// Input CSV.
    input: PathBuf,
    /// Principal components to tour, capped at min(p, n − 1).
    #[arg(long, default_value_t = 5)]
    pcs: usize,
    /// Number of frames to write, counting the initial one; 0 writes only the initial frame.
    #[arg(long, default_value_t = 100)]
    frames: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
    /// Projection dimension.
    #[arg(long, default_value_t = 2)]
    dims: usize,
    /// Largest principal angle travelled per frame, in radians.
    #[arg(long, default_value_t = DEFAULT_STEP_ANGLE, value_parser = positive, allow_negative_numbers = true)]
    step_angle: f64,
    /// Sphere the principal component scores.
    #[arg(long)]
    whiten: bool,
    #[command(flatten)]
    csv: CsvArgs,
}

pub fn run(a: TourArgs) -> CliResult {
    if a.pcs == 0 {
        return Err(CliError::Usage("--pcs must be at least 1".into()));
    }
    let x = a.csv.read(&a.input)?;
    let (data, fit) = tour_input(&x, a.pcs, a.whiten)?;
    let k = data.p();
    if a.dims == 0 || a.dims > k {
        return Err(CliError::Usage(format!("--dims must be in 1..={k}, got {}", a.dims)));
    }
    let frames = a.frames.max(1);
    let initial = random_basis(k, a.dims, a.seed)?;
    let mut path = TourPath::new(initial, a.step_angle, a.seed)?;

    let proj_names: Vec<String> = (1..=a.dims).map(|j| format!("proj{j}")).collect();
    let pc_names: Vec<String> = data.col_names().expect("named").to_vec();
    let labels = data.labels().map(|l| ("label", l));
    let mut max_error = 0.0f64;
    for f in 0..frames {
        let basis = if f == 0 { path.current_basis().clone() } else { path.next_frame()? };
        max_error = max_error.max(basis.orthonormality_error());
        let points = project(&data, &basis)?;
        write_table(
            create(&a.out_dir.join(format!("frame_{f:05}.csv")))?,
            &proj_names,
            points.view(),
            labels,
        )?;
        let rows: Array2<f64> = basis.matrix().t().to_owned();
        write_table(
            create(&a.out_dir.join(format!("basis_{f:05}.csv")))?,
            &pc_names,
            rows.view(),
            None,
        )?;
    }

    let mut args = vec![
        "tour".to_string(),
        display(&a.input),
        "--pcs".into(),
        a.pcs.to_string(),
        "--frames".into(),
        a.frames.to_string(),
        "--seed".into(),
        a.seed.to_string(),
        "--out-dir".into(),
        display(&a.out_dir),
        "--dims".into(),
        a.dims.to_string(),
        "--step-angle".into(),
        a.step_angle.to_string(),
    ];
    if a.whiten {
        args.push("--whiten".into());
    }
    args.extend(a.csv.to_args());
    let manifest = json!({
        "input": display(&a.input),
        "n": data.n(),
        "p": x.p(),
        "pcs": k,
        "frames": frames,
        "dims": a.dims,
        "seed": a.seed,
        "step_angle": a.step_angle,
        "whiten": a.whiten,
        "explained_ratio": fit.explained_ratio.iter().take(k).copied().collect::<Vec<_>>(),
        "max_orthonormality_error": max_error,
        "args": args,
    });
    write_json(&a.out_dir.join("manifest.json"), &manifest)
}
