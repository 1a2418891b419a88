use std::path::{Path, PathBuf};

use clap::{Args, Subcommand, ValueEnum};
use ndarray::Array2;
use serde_json::{json, Value};
use tourlens::embed::{correspondence_analysis, pca_embed, run_tsne, TsneConfig, TsneInit};
use tourlens::io::{write_layout, write_table};
use tourlens::DataMatrix;

use crate::error::CliResult;
use crate::input::{
    companion_path, create, display, momentum, positive, sidecar_path, unit, write_json, CsvArgs,
};

#[derive(Debug, Args)]
pub struct EmbedArgs {
    #[command(subcommand)]
    method: Method,
}

#[derive(Debug, Args)]
struct Io {
    /// Input CSV, one row per observation.
    input: PathBuf,
    /// Layout CSV; the manifest is written next to it with a .json extension.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    csv: CsvArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Init {
    Random,
    Pca,
}

#[derive(Debug, Args)]
struct TsneArgs {
    #[command(flatten)]
    io: Io,
    #[arg(long, default_value_t = 30.0, value_parser = positive, allow_negative_numbers = true)]
    perplexity: f64,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    dims: u64,
    #[arg(long, default_value_t = 1000)]
    iterations: usize,
    #[arg(long, default_value_t = 200.0, value_parser = positive, allow_negative_numbers = true)]
    learning_rate: f64,
    #[arg(long, default_value_t = 12.0, value_parser = positive, allow_negative_numbers = true)]
    exaggeration: f64,
    #[arg(long, default_value_t = 250)]
    exaggeration_iters: usize,
    #[arg(long, default_value_t = 0.5, value_parser = momentum, allow_negative_numbers = true)]
    momentum: f64,
    #[arg(long, default_value_t = 0.8, value_parser = momentum, allow_negative_numbers = true)]
    final_momentum: f64,
    #[arg(long, default_value_t = 250)]
    momentum_switch: usize,
    #[arg(long, value_enum, default_value_t = Init::Random)]
    init: Init,
    /// Standard deviation of the initial layout.
    #[arg(long, default_value_t = 1e-4, value_parser = positive, allow_negative_numbers = true)]
    init_sd: f64,
    /// Principal components kept before computing affinities; 0 keeps all columns.
    #[arg(long, default_value_t = 50)]
    pca_dims: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Debug, Subcommand)]
enum Method {
    /// Exact t-SNE.
    Tsne(TsneArgs),
    /// Leading principal component scores.
    Pca {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
        dims: u64,
    },
    /// Correspondence analysis of a table of counts.
    Ca {
        #[command(flatten)]
        io: Io,
        /// 1 gives row principal coordinates, 0 column principal, 0.5 symmetric.
        #[arg(long, default_value_t = 1.0, value_parser = unit, allow_negative_numbers = true)]
        alpha: f64,
    },
}

fn command(method: &str, io: &Io, flags: Vec<(&str, String)>) -> Vec<String> {
    let mut cmd = vec!["embed".to_string(), method.to_string(), display(&io.input)];
    for (k, v) in flags {
        cmd.push(format!("--{k}"));
        cmd.push(v);
    }
    cmd.extend(io.csv.to_args());
    cmd.extend(["--out".into(), display(&io.out)]);
    cmd
}

pub fn run(args: EmbedArgs) -> CliResult {
    match args.method {
        Method::Tsne(a) => tsne(a),
        Method::Pca { io, dims } => {
            let x = io.csv.read(&io.input)?;
            let y = pca_embed(&x, dims as usize)?;
            write_output(&io.out, &y, &x)?;
            let manifest = json!({
                "method": "pca",
                "input": display(&io.input),
                "n": x.n(),
                "p": x.p(),
                "params": { "dims": dims },
                "args": command("pca", &io, vec![("dims", dims.to_string())]),
            });
            write_json(&sidecar_path(&io.out), &manifest)
        }
        Method::Ca { io, alpha } => {
            let x = io.csv.read(&io.input)?;
            let fit = correspondence_analysis(x.values(), alpha)?;
            write_output(&io.out, &fit.r, &x)?;
            write_ca_extras(&io.out, &fit, &x)?;
            let manifest = json!({
                "method": "ca",
                "input": display(&io.input),
                "n": x.n(),
                "p": x.p(),
                "params": { "alpha": alpha },
                "dims": fit.dims(),
                "singular_values": fit.sing_val.to_vec(),
                "args": command("ca", &io, vec![("alpha", alpha.to_string())]),
            });
            write_json(&sidecar_path(&io.out), &manifest)
        }
    }
}

fn tsne(a: TsneArgs) -> CliResult {
    let x = a.io.csv.read(&a.io.input)?;
    let config = TsneConfig {
        perplexity: a.perplexity,
        output_dim: a.dims as usize,
        n_iter: a.iterations,
        learning_rate: a.learning_rate,
        early_exaggeration: a.exaggeration,
        exaggeration_iters: a.exaggeration_iters,
        initial_momentum: a.momentum,
        final_momentum: a.final_momentum,
        momentum_switch_iter: a.momentum_switch,
        init: match a.init {
            Init::Random => TsneInit::Random { sd: a.init_sd },
            Init::Pca => TsneInit::Pca { sd: a.init_sd },
        },
        pca_dims: (a.pca_dims > 0).then_some(a.pca_dims),
        seed: a.seed,
    };
    let model = run_tsne(&x, &config)?;
    write_output(&a.io.out, &model.y, &x)?;

    let init = if a.init == Init::Pca { "pca" } else { "random" };
    let flags = vec![
        ("perplexity", a.perplexity.to_string()),
        ("dims", a.dims.to_string()),
        ("iterations", a.iterations.to_string()),
        ("learning-rate", a.learning_rate.to_string()),
        ("exaggeration", a.exaggeration.to_string()),
        ("exaggeration-iters", a.exaggeration_iters.to_string()),
        ("momentum", a.momentum.to_string()),
        ("final-momentum", a.final_momentum.to_string()),
        ("momentum-switch", a.momentum_switch.to_string()),
        ("init", init.to_string()),
        ("init-sd", a.init_sd.to_string()),
        ("pca-dims", a.pca_dims.to_string()),
        ("seed", a.seed.to_string()),
    ];
    let params: serde_json::Map<String, Value> = flags
        .iter()
        .map(|(k, v)| (k.replace('-', "_"), raw_value(v)))
        .collect();
    let manifest = json!({
        "method": "tsne",
        "input": display(&a.io.input),
        "n": x.n(),
        "p": x.p(),
        "params": params,
        "initial_loss": model.initial_loss(),
        "final_loss": model.final_loss(),
        "loss_trace": model.loss_trace,
        "args": command("tsne", &a.io, flags),
    });
    write_json(&sidecar_path(&a.io.out), &manifest)
}

fn raw_value(v: &str) -> Value {
    serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()))
}

fn write_output(out: &Path, y: &Array2<f64>, x: &DataMatrix) -> CliResult {
    write_layout(create(out)?, y.view(), x.labels())?;
    Ok(())
}

fn write_ca_extras(out: &Path, fit: &tourlens::embed::CaResult, x: &DataMatrix) -> CliResult {
    let dims: Vec<String> = (1..=fit.dims()).map(|k| format!("dim{k}")).collect();
    let col_names: Vec<String> = x
        .col_names()
        .map(<[String]>::to_vec)
        .unwrap_or_else(|| (1..=x.p()).map(|j| format!("x{j}")).collect());
    write_table(
        create(&companion_path(out, "columns"))?,
        &dims,
        fit.c.view(),
        Some(("column", &col_names)),
    )?;

    let inertia = fit.inertia();
    let total: f64 = inertia.sum();
    let table = Array2::from_shape_fn((fit.dims(), 3), |(k, j)| match j {
        0 => fit.sing_val[k],
        1 => inertia[k],
        _ => inertia[k] / total,
    });
    let names = ["singular_value", "inertia", "ratio"].map(String::from);
    write_table(create(&companion_path(out, "inertia"))?, &names, table.view(), None)?;

    write_table(
        create(&companion_path(out, "row_inertia"))?,
        &dims,
        fit.row_inert.view(),
        x.labels().map(|l| ("label", l)),
    )?;
    write_table(
        create(&companion_path(out, "col_inertia"))?,
        &dims,
        fit.col_inert.view(),
        Some(("column", &col_names)),
    )?;
    Ok(())
}
