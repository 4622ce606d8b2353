use crate::text;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SegmentError {
    #[error("segment text is empty")]
    EmptyText,
    #[error("position {index} is outside a module of {total} segments")]
    Position { index: usize, total: usize },
    #[error("segment statistics do not match its text")]
    Statistics,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentPosition {
    pub index: usize,
    pub total: usize,
}

impl SegmentPosition {
    pub fn is_first(&self) -> bool {
        self.index == 0
    }

    pub fn is_last(&self) -> bool {
        self.index + 1 == self.total
    }
}

/// One unit of standardized course material.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContentSegment {
    pub segment_id: String,
    pub course_id: String,
    pub module_id: String,
    #[serde(default)]
    pub title: String,
    pub position: SegmentPosition,
    pub text: String,
    pub word_count: usize,
    pub sentence_count: usize,
    /// Marked elementary in the course metadata.
    #[serde(default)]
    pub elementary: bool,
}

impl ContentSegment {
    pub fn new(
        course_id: &str,
        module_id: &str,
        position: SegmentPosition,
        title: &str,
        body: &str,
    ) -> Result<Self, SegmentError> {
        let body = body.trim();
        if body.is_empty() {
            return Err(SegmentError::EmptyText);
        }
        if position.index >= position.total {
            return Err(SegmentError::Position {
                index: position.index,
                total: position.total,
            });
        }
        Ok(Self {
            segment_id: format!("{module_id}-{:03}", position.index),
            course_id: course_id.to_string(),
            module_id: module_id.to_string(),
            title: title.trim().to_string(),
            position,
            text: body.to_string(),
            word_count: text::word_count(body),
            sentence_count: text::sentence_count(body),
            elementary: false,
        })
    }

    pub fn validate(&self) -> Result<(), SegmentError> {
        if self.text.trim().is_empty() {
            return Err(SegmentError::EmptyText);
        }
        if self.position.index >= self.position.total {
            return Err(SegmentError::Position {
                index: self.position.index,
                total: self.position.total,
            });
        }
        if self.word_count != text::word_count(&self.text)
            || self.sentence_count != text::sentence_count(&self.text)
        {
            return Err(SegmentError::Statistics);
        }
        Ok(())
    }

    /// Title, or the first few words when the segment has none.
    pub fn topic(&self) -> String {
        if !self.title.is_empty() {
            return self.title.clone();
        }
        text::word_tokens(&self.text)
            .into_iter()
            .take(6)
            .collect::<Vec<_>>()
            .join(" ")
            .trim_end_matches(|c: char| !c.is_alphanumeric())
            .to_string()
    }
}
