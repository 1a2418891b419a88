//! JSON messages exchanged with a client, one object per text message.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum View {
    Tour,
    Embedding,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Play,
    Pause,
    Reset,
    Done,
}

/// Client to server.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClientMessage {
    Control { action: Action },
    /// `rect` is `[x0, y0, x1, y1]` in the view's own coordinates.
    Brush { view: View, rect: [f64; 4] },
    BrushClear { view: View },
    Legend { label: String },
    Zoom { factor: f64 },
    KnnBrush {
        enabled: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        k: Option<usize>,
    },
}

impl ClientMessage {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::ConfigInvalid(format!("bad message: {e}")))
    }
}

/// Server to client.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Meta {
        n: usize,
        d: usize,
        /// Per-row index into `label_names`.
        labels: Vec<usize>,
        label_names: Vec<String>,
        embedding: Vec<Vec<f64>>,
        half_range: f64,
    },
    Frame {
        frame: u64,
        /// `d` rows of `p` loadings.
        basis: Vec<Vec<f64>>,
        /// Projected rows divided by the current half range.
        points: Vec<Vec<f64>>,
        selection: Vec<usize>,
        highlight: Vec<String>,
    },
    Done {
        basis: Vec<Vec<f64>>,
        selection: Vec<usize>,
        highlight: Vec<String>,
    },
    /// A rejected client message; the session itself is unchanged.
    Error { error: String, message: String },
}

impl ServerMessage {
    pub fn error(e: &Error) -> Self {
        ServerMessage::Error {
            error: e.name().to_string(),
            message: e.to_string(),
        }
    }

    /// Compact JSON with every float rounded to nine significant digits.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.rounded()).expect("messages always serialize")
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::ConfigInvalid(format!("bad message: {e}")))
    }

    fn rounded(&self) -> Self {
        let rows = |m: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            m.iter().map(|r| r.iter().map(|&v| round_sig9(v)).collect()).collect()
        };
        match self {
            ServerMessage::Meta {
                n,
                d,
                labels,
                label_names,
                embedding,
                half_range,
            } => ServerMessage::Meta {
                n: *n,
                d: *d,
                labels: labels.clone(),
                label_names: label_names.clone(),
                embedding: rows(embedding),
                half_range: round_sig9(*half_range),
            },
            ServerMessage::Frame {
                frame,
                basis,
                points,
                selection,
                highlight,
            } => ServerMessage::Frame {
                frame: *frame,
                basis: rows(basis),
                points: rows(points),
                selection: selection.clone(),
                highlight: highlight.clone(),
            },
            ServerMessage::Done {
                basis,
                selection,
                highlight,
            } => ServerMessage::Done {
                basis: rows(basis),
                selection: selection.clone(),
                highlight: highlight.clone(),
            },
            other => other.clone(),
        }
    }
}

/// Nearest value with at most nine significant decimal digits; `-0` becomes `0`.
pub fn round_sig9(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return if v == 0.0 { 0.0 } else { v };
    }
    format!("{v:.8e}").parse().expect("formatted float parses")
}
