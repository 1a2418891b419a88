use std::path::PathBuf;

use clap::{Args, Subcommand};
use serde_json::json;
use tourlens::io::write_table;
use tourlens::simulate::{
    gen_dla_tree, gen_gaussian_clusters, gen_hierarchical_clusters, GaussianClusterParams,
    HierarchicalParams, LabeledDataset, TreeParams,
};

use crate::error::CliResult;
use crate::input::{create, display, non_negative, positive, sidecar_path, write_json};

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(subcommand)]
    kind: Kind,
}

#[derive(Debug, Args)]
struct Common {
    /// Output CSV; the sidecar goes next to it with a .json extension.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Kind {
    /// Spherical Gaussian clusters padded into a larger space.
    Gaussian {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(usize))]
        k: usize,
        #[arg(long, default_value_t = 5)]
        signal_dim: usize,
        #[arg(long, default_value_t = 10)]
        ambient_dim: usize,
        #[arg(long, default_value_t = 100)]
        n_per_cluster: usize,
        #[arg(long, default_value_t = 1.0, value_parser = non_negative, allow_negative_numbers = true)]
        spread: f64,
        #[arg(long, default_value_t = 10.0, value_parser = non_negative, allow_negative_numbers = true)]
        separation: f64,
    },
    /// Two clusters plus a third with nested sub-clusters.
    Hierarchical {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10)]
        ambient_dim: usize,
        #[arg(long, default_value_t = 100)]
        n_top: usize,
        #[arg(long, default_value_t = 100)]
        n_sub: usize,
        #[arg(long, default_value_t = 50)]
        n_leaf: usize,
        #[arg(long, default_value_t = 12.0, value_parser = positive, allow_negative_numbers = true)]
        top_separation: f64,
        #[arg(long, default_value_t = 1.0, value_parser = non_negative, allow_negative_numbers = true)]
        top_spread: f64,
        #[arg(long, default_value_t = 6.0, value_parser = positive, allow_negative_numbers = true)]
        sub_separation: f64,
        #[arg(long, default_value_t = 0.5, value_parser = non_negative, allow_negative_numbers = true)]
        sub_spread: f64,
        #[arg(long, default_value_t = 2.0, value_parser = positive, allow_negative_numbers = true)]
        leaf_separation: f64,
        #[arg(long, default_value_t = 0.25, value_parser = non_negative, allow_negative_numbers = true)]
        leaf_spread: f64,
    },
    /// A noisy branching random walk.
    Tree {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3000)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        p: usize,
        #[arg(long, default_value_t = 10)]
        branches: usize,
        #[arg(long, default_value_t = TreeParams::default().noise_sd, value_parser = non_negative, allow_negative_numbers = true)]
        noise_sd: f64,
        #[arg(long, default_value_t = 1.0, value_parser = non_negative, allow_negative_numbers = true)]
        step: f64,
    },
}

fn flag(name: &str, v: impl ToString) -> [String; 2] {
    [format!("--{name}"), v.to_string()]
}

pub fn run(args: SimulateArgs) -> CliResult {
    let (kind, common, ds, params, extra_args) = match args.kind {
        Kind::Gaussian {
            common,
            k,
            signal_dim,
            ambient_dim,
            n_per_cluster,
            spread,
            separation,
        } => {
            let p = GaussianClusterParams {
                k,
                signal_dim,
                ambient_dim,
                n_per_cluster,
                spread,
                separation,
                seed: common.seed.unwrap_or(GaussianClusterParams::default().seed),
            };
            let extra = [
                flag("k", k),
                flag("signal-dim", signal_dim),
                flag("ambient-dim", ambient_dim),
                flag("n-per-cluster", n_per_cluster),
                flag("spread", spread),
                flag("separation", separation),
                flag("seed", p.seed),
            ];
            let ds = gen_gaussian_clusters(&p)?;
            ("gaussian", common, ds, serde_json::to_value(&p)?, extra.concat())
        }
        Kind::Hierarchical {
            common,
            ambient_dim,
            n_top,
            n_sub,
            n_leaf,
            top_separation,
            top_spread,
            sub_separation,
            sub_spread,
            leaf_separation,
            leaf_spread,
        } => {
            let p = HierarchicalParams {
                ambient_dim,
                n_top,
                n_sub,
                n_leaf,
                top_separation,
                top_spread,
                sub_separation,
                sub_spread,
                leaf_separation,
                leaf_spread,
                seed: common.seed.unwrap_or(HierarchicalParams::default().seed),
                ..Default::default()
            };
            let extra = [
                flag("ambient-dim", ambient_dim),
                flag("n-top", n_top),
                flag("n-sub", n_sub),
                flag("n-leaf", n_leaf),
                flag("top-separation", top_separation),
                flag("top-spread", top_spread),
                flag("sub-separation", sub_separation),
                flag("sub-spread", sub_spread),
                flag("leaf-separation", leaf_separation),
                flag("leaf-spread", leaf_spread),
                flag("seed", p.seed),
            ];
            let ds = gen_hierarchical_clusters(&p)?;
            ("hierarchical", common, ds, serde_json::to_value(&p)?, extra.concat())
        }
        Kind::Tree {
            common,
            n,
            p,
            branches,
            noise_sd,
            step,
        } => {
            let params = TreeParams {
                n,
                p,
                branches,
                noise_sd,
                step,
                seed: common.seed.unwrap_or(TreeParams::default().seed),
            };
            let extra = [
                flag("n", n),
                flag("p", p),
                flag("branches", branches),
                flag("noise-sd", noise_sd),
                flag("step", step),
                flag("seed", params.seed),
            ];
            let ds = gen_dla_tree(&params)?;
            ("tree", common, ds, serde_json::to_value(&params)?, extra.concat())
        }
    };
    write_dataset(&common.out, &ds)?;
    let mut cmd = vec!["simulate".to_string(), kind.to_string()];
    cmd.extend(extra_args);
    cmd.extend(["--out".into(), display(&common.out)]);
    let sidecar = json!({
        "kind": kind,
        "params": params,
        "n": ds.n(),
        "p": ds.data.p(),
        "classes": ds.class_count(),
        "coarse_labels": ds.coarse_labels,
        "args": cmd,
    });
    write_json(&sidecar_path(&common.out), &sidecar)?;
    Ok(())
}

fn write_dataset(path: &std::path::Path, ds: &LabeledDataset) -> CliResult {
    let names: Vec<String> = (1..=ds.data.p()).map(|j| format!("x{j}")).collect();
    let labels: Vec<String> = ds.labels.iter().map(usize::to_string).collect();
    write_table(create(path)?, &names, ds.data.values(), Some(("label", &labels)))?;
    Ok(())
}
