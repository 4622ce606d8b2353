//! Course ingestion.
//!
//! A course is a directory holding one plain-text file per module. Segments
//! inside a module file are separated by lines containing only `---`; a
//! segment whose first line starts with `#` uses the rest of that line as its
//! title. An optional `course.json` names the course and marks elementary
//! segments:
//!
//! ```json
//! { "course_id": "tagi", "elementary": { "multimodality": [2] } }
//! ```

use crate::retrieval::{ContentSegment, SegmentError, SegmentPosition};
use crate::storage::validate_id;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CourseError {
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
    #[error("{path}: segment {index}: {source}")]
    Segment {
        path: PathBuf,
        index: usize,
        #[source]
        source: SegmentError,
    },
    #[error("{0}: {1}")]
    Io(PathBuf, #[source] std::io::Error),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CourseMeta {
    pub course_id: Option<String>,
    pub title: Option<String>,
    /// Module id to 0-based indices of elementary segments.
    pub elementary: BTreeMap<String, Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Module {
    pub course_id: String,
    pub module_id: String,
    pub segments: Vec<ContentSegment>,
}

impl Module {
    pub fn segment(&self, segment_id: &str) -> Option<&ContentSegment> {
        self.segments.iter().find(|s| s.segment_id == segment_id)
    }

    pub fn word_count(&self) -> usize {
        self.segments.iter().map(|s| s.word_count).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Course {
    pub course_id: String,
    pub title: Option<String>,
    pub modules: Vec<Module>,
}

/// Splits raw module text into `(title, body)` pairs, dropping blank segments.
pub fn split_segments(raw: &str) -> Vec<(String, String)> {
    let mut out = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    let mut push = |lines: &mut Vec<&str>| {
        let first = lines.iter().position(|l| !l.trim().is_empty());
        if let Some(first) = first {
            let mut title = String::new();
            let mut body_lines = &lines[first..];
            if let Some(t) = body_lines[0].trim_start().strip_prefix('#') {
                title = t.trim_start_matches('#').trim().to_string();
                body_lines = &body_lines[1..];
            }
            let body = body_lines.join("\n").trim().to_string();
            if !body.is_empty() {
                out.push((title, body));
            }
        }
        lines.clear();
    };
    for line in raw.lines() {
        if line.trim() == "---" {
            push(&mut current);
        } else {
            current.push(line);
        }
    }
    push(&mut current);
    out
}

pub fn parse_module(
    course_id: &str,
    module_id: &str,
    raw: &str,
    elementary: &[usize],
    path: &Path,
) -> Result<Module, CourseError> {
    let parts = split_segments(raw);
    if parts.is_empty() {
        return Err(CourseError::Invalid {
            path: path.to_path_buf(),
            message: "module has no segments".into(),
        });
    }
    let total = parts.len();
    let mut segments = Vec::with_capacity(total);
    for (index, (title, body)) in parts.into_iter().enumerate() {
        let mut seg = ContentSegment::new(course_id, module_id, SegmentPosition { index, total }, &title, &body)
            .map_err(|source| CourseError::Segment {
                path: path.to_path_buf(),
                index,
                source,
            })?;
        seg.elementary = elementary.contains(&index);
        segments.push(seg);
    }
    Ok(Module {
        course_id: course_id.to_string(),
        module_id: module_id.to_string(),
        segments,
    })
}

/// Reads every `*.txt` module in `dir`, in file-name order.
pub fn ingest_course_dir(dir: &Path) -> Result<Course, CourseError> {
    let io = |e| CourseError::Io(dir.to_path_buf(), e);
    let meta_path = dir.join("course.json");
    let meta: CourseMeta = if meta_path.is_file() {
        let raw = std::fs::read_to_string(&meta_path).map_err(|e| CourseError::Io(meta_path.clone(), e))?;
        serde_json::from_str(&raw).map_err(|e| CourseError::Invalid {
            path: meta_path.clone(),
            message: e.to_string(),
        })?
    } else {
        CourseMeta::default()
    };
    let course_id = match &meta.course_id {
        Some(id) => id.clone(),
        None => dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
    };
    validate_id(&course_id).map_err(|e| CourseError::Invalid {
        path: dir.to_path_buf(),
        message: e.to_string(),
    })?;

    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "txt"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CourseError::Invalid {
            path: dir.to_path_buf(),
            message: "no module files (*.txt)".into(),
        });
    }
    let mut modules = Vec::with_capacity(files.len());
    for path in files {
        let module_id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        validate_id(&module_id).map_err(|e| CourseError::Invalid {
            path: path.clone(),
            message: e.to_string(),
        })?;
        let raw = std::fs::read_to_string(&path).map_err(|e| CourseError::Io(path.clone(), e))?;
        let elementary = meta.elementary.get(&module_id).map(Vec::as_slice).unwrap_or(&[]);
        modules.push(parse_module(&course_id, &module_id, &raw, elementary, &path)?);
    }
    for key in meta.elementary.keys() {
        if !modules.iter().any(|m| &m.module_id == key) {
            return Err(CourseError::Invalid {
                path: meta_path.clone(),
                message: format!("elementary list names unknown module {key:?}"),
            });
        }
    }
    Ok(Course {
        course_id,
        title: meta.title,
        modules,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_titles_and_blanks() {
        let raw = "# Intro\nHello there.\n---\n\nBody only.\n---\n   \n---\n## Deep\nMore.\n";
        assert_eq!(
            split_segments(raw),
            vec![
                ("Intro".into(), "Hello there.".into()),
                (String::new(), "Body only.".into()),
                ("Deep".into(), "More.".into()),
            ]
        );
    }

    #[test]
    fn ingest_dir() {
        let dir = tempfile::tempdir().unwrap();
        let course = dir.path().join("bio");
        std::fs::create_dir(&course).unwrap();
        std::fs::write(course.join("cells.txt"), "# A\nOne.\n---\nTwo.\n---\nThree.").unwrap();
        std::fs::write(course.join("course.json"), r#"{"elementary": {"cells": [1]}}"#).unwrap();
        let c = ingest_course_dir(&course).unwrap();
        assert_eq!(c.course_id, "bio");
        let m = &c.modules[0];
        assert_eq!(m.segments.len(), 3);
        assert_eq!(m.segments[1].segment_id, "cells-001");
        assert!(m.segments[1].elementary && !m.segments[0].elementary);
        assert_eq!(m.segments[2].position, SegmentPosition { index: 2, total: 3 });
    }
}
