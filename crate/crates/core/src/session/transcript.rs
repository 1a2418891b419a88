//! Replays a scripted session without a clock, for golden-file tests and
//! headless runs.

use serde::{Deserialize, Serialize};

use super::protocol::{ClientMessage, ServerMessage};
use super::state::{Session, SessionConfig};
use crate::error::Result;

/// A client message delivered just before the given tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptedEvent {
    pub tick: u64,
    pub event: ClientMessage,
}

/// Runs `ticks` clock ticks. Events scheduled for tick `t` are handled in
/// order before tick `t` fires; events scheduled at or after `ticks` are
/// handled after the last tick. Rejected events appear as error messages.
pub fn run_transcript(
    config: SessionConfig,
    ticks: u64,
    events: &[ScriptedEvent],
) -> Result<Vec<ServerMessage>> {
    let mut session = Session::new(config)?;
    let mut out = session.start();
    let mut pending = events.to_vec();
    pending.sort_by_key(|e| e.tick);
    let mut pending = pending.into_iter().peekable();
    for t in 0..ticks {
        while let Some(e) = pending.next_if(|e| e.tick <= t) {
            deliver(&mut session, &e.event, &mut out);
        }
        if let Some(frame) = session.tick()? {
            out.push(frame);
        }
    }
    for e in pending {
        deliver(&mut session, &e.event, &mut out);
    }
    Ok(out)
}

fn deliver(session: &mut Session, event: &ClientMessage, out: &mut Vec<ServerMessage>) {
    match session.handle(event) {
        Ok(msgs) => out.extend(msgs),
        Err(e) => out.push(ServerMessage::error(&e)),
    }
}

/// One JSON message per line, newline-terminated.
pub fn to_jsonl(messages: &[ServerMessage]) -> String {
    messages.iter().map(|m| m.to_json() + "\n").collect()
}

/// Reads a script of `{"tick": t, "event": {...}}` lines; blank lines are
/// skipped.
pub fn parse_script(text: &str) -> Result<Vec<ScriptedEvent>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            serde_json::from_str(l)
                .map_err(|e| crate::Error::ConfigInvalid(format!("bad script line {l:?}: {e}")))
        })
        .collect()
}
