mod embed;
mod error;
mod input;
mod metrics;
mod serve;
mod simulate;
mod tour;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Audit dimension-reduction embeddings against a grand tour of the data.
#[derive(Debug, Parser)]
#[command(name = "tourlens", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a benchmark dataset as CSV plus a JSON sidecar.
    Simulate(simulate::SimulateArgs),
    /// Compute a t-SNE, PCA or correspondence analysis layout.
    Embed(embed::EmbedArgs),
    /// Write tour frames and their bases without a display.
    Tour(tour::TourArgs),
    /// Serve an interactive session over a websocket.
    Serve(serve::ServeArgs),
    /// Compare the neighborhoods of two tables.
    Metrics(metrics::MetricsArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate::run(a),
        Command::Embed(a) => embed::run(a),
        Command::Tour(a) => tour::run(a),
        Command::Serve(a) => serve::run(a),
        Command::Metrics(a) => metrics::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
