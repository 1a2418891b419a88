use std::io::Write;
use std::net::SocketAddr;
use std::path::PathBuf;

use clap::Args;
use futures_util::{SinkExt, StreamExt};
use serde_json::json;
use tokio::net::{TcpListener, TcpStream};
use tokio::sync::mpsc;
use tokio_tungstenite::tungstenite::Message;
use tourlens::embed::pca_embed;
use tourlens::io::{read_csv_path, CsvOptions, LabelColumn};
use tourlens::session::{ClientMessage, ServerMessage, DEFAULT_PORT};
use tourlens::simulate::SubsampleParams;
use tourlens::tour::{DEFAULT_FPS, DEFAULT_STEP_ANGLE};
use tourlens::{Error, Session, SessionConfig};

use crate::error::{CliError, CliResult};
use crate::input::{create, fraction, positive, tour_input, CsvArgs};

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Input CSV.
    input: PathBuf,
    /// Layout CSV for the embedding view [default: first two principal components]
    #[arg(long)]
    embedding: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_PORT)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    /// Keep roughly this fraction of rows, weighted by label.
    #[arg(long, value_parser = fraction, allow_negative_numbers = true)]
    subsample: Option<f64>,
    #[arg(long, default_value_t = 0)]
    subsample_seed: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Principal components to tour.
    #[arg(long, default_value_t = 5)]
    pcs: usize,
    #[arg(long, default_value_t = 2)]
    dims: usize,
    #[arg(long, default_value_t = DEFAULT_STEP_ANGLE, value_parser = positive, allow_negative_numbers = true)]
    step_angle: f64,
    #[arg(long, default_value_t = DEFAULT_FPS, value_parser = positive, allow_negative_numbers = true)]
    fps: f64,
    /// Default neighbor count for the k-NN brush.
    #[arg(long, default_value_t = 10)]
    knn_k: usize,
    #[arg(long)]
    whiten: bool,
    /// Where the final basis and selection are written once the client sends done.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    csv: CsvArgs,
}

struct Finished {
    done: ServerMessage,
    rows: Vec<usize>,
    frame: u64,
}

fn config(a: &ServeArgs) -> CliResult<SessionConfig> {
    if a.pcs == 0 {
        return Err(CliError::Usage("--pcs must be at least 1".into()));
    }
    let x = a.csv.read(&a.input)?;
    let (data, _) = tour_input(&x, a.pcs, a.whiten)?;
    let embedding = match &a.embedding {
        Some(path) => {
            let opts = CsvOptions {
                has_header: true,
                label_column: Some(LabelColumn::IfPresent("label".into())),
            };
            read_csv_path(path, &opts)?.into_values()
        }
        None => pca_embed(&x, 2.min(x.p()))?,
    };
    if embedding.nrows() != x.n() {
        return Err(CliError::Usage(format!(
            "embedding has {} rows but the input has {}",
            embedding.nrows(),
            x.n()
        )));
    }
    let mut cfg = SessionConfig::new(data, embedding);
    cfg.projection_dim = a.dims;
    cfg.step_angle = a.step_angle;
    cfg.frames_per_second = a.fps;
    cfg.subsample = a.subsample.map(|f| SubsampleParams::new(f, a.subsample_seed));
    cfg.seed = a.seed;
    cfg.knn_k = a.knn_k;
    cfg.validate()?;
    Ok(cfg)
}

pub fn run(a: ServeArgs) -> CliResult {
    let cfg = config(&a)?;
    // Surface subsampling and basis errors before accepting connections.
    let probe = Session::new(cfg.clone())?;
    let n = probe.n();
    drop(probe);

    let rt = tokio::runtime::Runtime::new()?;
    let finished = rt.block_on(async {
        let listener = TcpListener::bind((a.host.as_str(), a.port))
            .await
            .map_err(|e| Error::Io(format!("cannot listen on {}:{}: {e}", a.host, a.port)))?;
        let addr = listener.local_addr()?;
        {
            let mut out = std::io::stdout().lock();
            writeln!(out, "listening on ws://{addr} ({n} rows)")?;
            out.flush()?;
        }
        serve(listener, cfg).await
    })?;

    if let Some(path) = &a.out {
        let ServerMessage::Done { basis, selection, highlight } = finished.done else {
            unreachable!("sessions finish with a done payload");
        };
        let selection_rows: Vec<usize> = selection.iter().map(|&i| finished.rows[i]).collect();
        let report = json!({
            "frame": finished.frame,
            "basis": basis,
            "selection": selection,
            "selection_rows": selection_rows,
            "highlight": highlight,
        });
        let mut w = create(path)?;
        serde_json::to_writer_pretty(&mut w, &report)?;
        writeln!(w)?;
        w.flush()?;
    }
    Ok(())
}

async fn serve(listener: TcpListener, cfg: SessionConfig) -> CliResult<Finished> {
    let (tx, mut rx) = mpsc::unbounded_channel();
    loop {
        tokio::select! {
            accepted = listener.accept() => {
                let (stream, peer) = accepted?;
                let (cfg, tx) = (cfg.clone(), tx.clone());
                tokio::spawn(async move {
                    if let Err(e) = connection(stream, peer, cfg, tx).await {
                        eprintln!("{peer}: {e}");
                    }
                });
            }
            Some(finished) = rx.recv() => return Ok(finished),
        }
    }
}

async fn connection(
    stream: TcpStream,
    peer: SocketAddr,
    cfg: SessionConfig,
    finished: mpsc::UnboundedSender<Finished>,
) -> CliResult {
    let ws = tokio_tungstenite::accept_async(stream)
        .await
        .map_err(|e| Error::Io(format!("{peer}: handshake failed: {e}")))?;
    let (mut sink, mut source) = ws.split();
    let mut session = Session::new(cfg)?;
    let send_err = |e: tokio_tungstenite::tungstenite::Error| Error::Io(e.to_string());

    for msg in session.start() {
        sink.send(Message::text(msg.to_json())).await.map_err(send_err)?;
    }
    let mut clock = tokio::time::interval(session.tick_interval());
    clock.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
    clock.tick().await;

    loop {
        let replies = tokio::select! {
            _ = clock.tick() => match session.tick() {
                Ok(frame) => frame.into_iter().collect(),
                Err(e) => vec![ServerMessage::error(&e)],
            },
            inbound = source.next() => match inbound {
                None | Some(Ok(Message::Close(_))) => return Ok(()),
                Some(Err(e)) => return Err(Error::Io(e.to_string()).into()),
                Some(Ok(Message::Text(text))) => {
                    match ClientMessage::parse(&text).and_then(|m| session.handle(&m)) {
                        Ok(r) => r,
                        Err(e) => vec![ServerMessage::error(&e)],
                    }
                }
                Some(Ok(_)) => Vec::new(),
            },
        };
        for msg in replies {
            let is_done = matches!(msg, ServerMessage::Done { .. });
            sink.send(Message::text(msg.to_json())).await.map_err(send_err)?;
            if is_done {
                let _ = finished.send(Finished {
                    done: msg,
                    rows: session.rows().to_vec(),
                    frame: session.state().tour.frame_index,
                });
            }
        }
    }
}
