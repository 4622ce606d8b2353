//! Dialogue transcripts as JSON Lines, one turn per line.

use super::dialogue::DialogueTurn;
use std::io::{BufRead, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TranscriptError {
    #[error("transcript io: {0}")]
    Io(#[from] std::io::Error),
    #[error("transcript line {line}: {message}")]
    Malformed { line: usize, message: String },
}

pub fn write_transcript<W: Write>(mut out: W, turns: &[DialogueTurn]) -> Result<(), TranscriptError> {
    for turn in turns {
        let line = serde_json::to_string(turn).map_err(|e| TranscriptError::Malformed {
            line: 0,
            message: e.to_string(),
        })?;
        out.write_all(line.as_bytes())?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Blank lines are skipped; anything else must be a turn.
pub fn read_transcript<R: BufRead>(input: R) -> Result<Vec<DialogueTurn>, TranscriptError> {
    let mut turns = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let turn = serde_json::from_str(&line).map_err(|e| TranscriptError::Malformed {
            line: i + 1,
            message: e.to_string(),
        })?;
        turns.push(turn);
    }
    Ok(turns)
}
