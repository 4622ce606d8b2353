//! Personalized educational content generation.
//!
//! The crate is organised along the three stages of the pipeline plus the
//! plumbing around them:
//!
//! * [`profile`] elicits a student profile through a host-enforced dialogue
//!   state machine and summarizes the transcript into a [`profile::StudentProfile`].
//! * [`retrieval`] turns a profile and a module of standardized content into a
//!   per-student knowledge base of embedded chunks, queried by cosine top-k.
//! * [`adaptation`] decides which segments to personalize, builds the generation
//!   prompt, and validates the model output before anything is served.
//! * [`evaluation`] is the expert-ranking and questionnaire harness.
//! * [`providers`] abstracts the LLM, embedding and search backends, each with an
//!   HTTP implementation and a deterministic offline stub.
//! * [`storage`] is the file-backed document store used by the CLI and service.
//!
//! All stubs are pure, so every stage can be replayed byte-for-byte in tests.

pub mod adaptation;
pub mod clock;
pub mod config;
pub mod course;
pub mod error;
pub mod evaluation;
pub mod pipeline;
pub mod profile;
pub mod providers;
pub mod retrieval;
pub mod storage;
pub mod text;

mod par;

pub use error::{Error, ErrorCategory};
