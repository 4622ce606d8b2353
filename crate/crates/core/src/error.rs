//! Crate-level error with a coarse category used for CLI exit codes and
//! HTTP status mapping.

use crate::adaptation::AdaptationError;
use crate::config::ConfigError;
use crate::course::CourseError;
use crate::evaluation::EvalError;
use crate::profile::{DialogueError, ProfileError, SummarizeError};
use crate::providers::ProviderError;
use crate::retrieval::{ChunkError, KbError, QueryError, SearchError, SegmentError};
use crate::storage::StorageError;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorCategory {
    NotFound,
    Validation,
    Provider,
    Configuration,
    Conflict,
    Internal,
}

impl ErrorCategory {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCategory::NotFound => 2,
            ErrorCategory::Provider => 3,
            ErrorCategory::Validation => 4,
            ErrorCategory::Configuration => 5,
            ErrorCategory::Conflict => 6,
            ErrorCategory::Internal => 1,
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            ErrorCategory::NotFound => "not_found",
            ErrorCategory::Validation => "validation_failed",
            ErrorCategory::Provider => "provider_unavailable",
            ErrorCategory::Configuration => "configuration_error",
            ErrorCategory::Conflict => "conflict",
            ErrorCategory::Internal => "internal_error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Error {
    pub category: ErrorCategory,
    pub message: String,
}

impl Error {
    pub fn new(category: ErrorCategory, message: impl Into<String>) -> Self {
        Self {
            category,
            message: message.into(),
        }
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(ErrorCategory::NotFound, message)
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Self::new(ErrorCategory::Validation, message)
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new(ErrorCategory::Configuration, message)
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.category.code(), self.message)
    }
}

impl std::error::Error for Error {}

macro_rules! categorized {
    ($ty:ty, |$e:ident| $cat:expr) => {
        impl From<$ty> for Error {
            fn from($e: $ty) -> Self {
                let category = $cat;
                Error::new(category, $e.to_string())
            }
        }
    };
}

categorized!(ProviderError, |e| match e {
    ProviderError::InvalidRequest(_) | ProviderError::EmptyText => ErrorCategory::Validation,
    ProviderError::Config(_) | ProviderError::MissingCredential(_) => ErrorCategory::Configuration,
    _ => ErrorCategory::Provider,
});
categorized!(StorageError, |e| match e {
    StorageError::NotFound { .. } => ErrorCategory::NotFound,
    StorageError::InvalidId(_) | StorageError::Invalid { .. } => ErrorCategory::Validation,
    StorageError::SchemaVersion { .. } | StorageError::Corrupt { .. } => ErrorCategory::Validation,
    StorageError::Kb(KbError::DimensionMismatch { .. }) => ErrorCategory::Configuration,
    StorageError::Kb(KbError::Corrupt(_) | KbError::SchemaVersion { .. }) => ErrorCategory::Validation,
    _ => ErrorCategory::Internal,
});
categorized!(KbError, |e| match e {
    KbError::DimensionMismatch { .. } => ErrorCategory::Configuration,
    KbError::Embedding { .. } => ErrorCategory::Provider,
    KbError::Io(_) => ErrorCategory::Internal,
    _ => ErrorCategory::Validation,
});
categorized!(QueryError, |e| match e {
    QueryError::Provider(_) => ErrorCategory::Provider,
    _ => ErrorCategory::Validation,
});
categorized!(SearchError, |e| match e {
    SearchError::RetrievalUnavailable { .. } => ErrorCategory::Provider,
    SearchError::EmptyQueries => ErrorCategory::Validation,
});
categorized!(AdaptationError, |e| match e {
    AdaptationError::Provider(_) => ErrorCategory::Provider,
    AdaptationError::MalformedGeneration(_) => ErrorCategory::Validation,
    _ => ErrorCategory::Configuration,
});
categorized!(DialogueError, |e| match e {
    DialogueError::Terminal(_) => ErrorCategory::Conflict,
    DialogueError::Provider(_) => ErrorCategory::Provider,
    _ => ErrorCategory::Validation,
});
categorized!(SummarizeError, |e| match e {
    SummarizeError::Provider(_) => ErrorCategory::Provider,
    _ => ErrorCategory::Validation,
});
categorized!(EvalError, |e| match e {
    EvalError::Config(_) => ErrorCategory::Configuration,
    _ => ErrorCategory::Validation,
});
categorized!(ConfigError, |_e| ErrorCategory::Configuration);
categorized!(CourseError, |e| match e {
    CourseError::Io(..) => ErrorCategory::NotFound,
    _ => ErrorCategory::Validation,
});
categorized!(ProfileError, |_e| ErrorCategory::Validation);
categorized!(SegmentError, |_e| ErrorCategory::Validation);
categorized!(ChunkError, |_e| ErrorCategory::Configuration);
categorized!(std::io::Error, |_e| ErrorCategory::Internal);
