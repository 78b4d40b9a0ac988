//! Software citations that live inside a version-controlled repository.
//!
//! A repository carries a citation file at its root mapping paths to
//! citation records. Any file or directory without its own entry inherits
//! the citation of its closest cited ancestor, and the root is always
//! cited, so every path resolves. Citations follow the code through
//! commits, renames, copies between repositories, merges and forks.
//!
//! - [`model`]: paths, records, trees, resolution and validation.
//! - [`ops`]: add/delete/modify/generate citations, default root citations.
//! - [`store`]: an in-memory version DAG with citation-aware commit, copy,
//!   merge and fork; the reference the git adapter is checked against.
//! - [`git`]: the same operations on real git working trees.
//! - [`cli`]: the `gitcite` command line.

pub mod cli;
pub mod conflict;
pub mod document;
pub mod error;
pub mod git;
pub mod model;
pub mod ops;
pub mod store;

pub use error::{Error, Result};
