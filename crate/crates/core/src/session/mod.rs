//! Interactive session: a tour frame stream linked to an embedding view,
//! driven by clock ticks and client messages.

mod protocol;
mod state;
mod transcript;

pub use protocol::{round_sig9, Action, ClientMessage, ServerMessage, View};
pub use state::{
    points_in_rect, SelectionSource, Session, SessionConfig, SessionState, ZOOM_MAX, ZOOM_MIN,
};
pub use transcript::{parse_script, run_transcript, to_jsonl, ScriptedEvent};

/// Port the server listens on unless told otherwise.
pub const DEFAULT_PORT: u16 = 9147;
