//! Citation domain model: canonical paths, records, version trees, the
//! citation file, and closest-ancestor resolution.

mod citation_file;
mod path;
mod record;
mod tree;

use std::fmt;

pub use citation_file::CitationFile;
pub use path::{canonicalize, CanonicalPath, KindHint, PathKind};
pub use record::{split_authors, CitationRecord, RECORD_FIELDS};
pub use tree::{Digest, Directory, Node, TreeSnapshot};

use crate::error::{Error, Result};

/// Resolved citation of `path`: its own record if it has one, otherwise the
/// record of its closest cited ancestor directory. Total whenever the root
/// is cited.
pub fn resolve<'a>(cf: &'a CitationFile, tree: &TreeSnapshot, path: &CanonicalPath) -> Result<&'a CitationRecord> {
    if !tree.contains(path) {
        return Err(Error::PathNotInTree(path.clone()));
    }
    cf.closest_entry(path).map(|(_, r)| r).ok_or(Error::MissingRoot)
}

/// One way a citation file disagrees with a tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Inconsistency {
    MissingRoot,
    /// The key names nothing in the tree.
    DanglingKey(CanonicalPath),
    /// The key names a node of the other kind (a file keyed as a
    /// directory or vice versa).
    KindMismatch {
        key: CanonicalPath,
        actual: PathKind,
    },
}

impl fmt::Display for Inconsistency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Inconsistency::MissingRoot => f.write_str("missing root entry \"/\""),
            Inconsistency::DanglingKey(k) => write!(f, "dangling key {k}: no such path in the tree"),
            Inconsistency::KindMismatch { key, actual } => {
                write!(f, "kind mismatch at {key}: the tree has a {actual:?} there")
            }
        }
    }
}

/// Reports every way `cf` fails to be consistent with `tree`. Empty means
/// consistent.
pub fn validate(cf: &CitationFile, tree: &TreeSnapshot) -> Vec<Inconsistency> {
    let mut out = Vec::new();
    if cf.root_record().is_none() {
        out.push(Inconsistency::MissingRoot);
    }
    for key in cf.keys() {
        if tree.contains(key) {
            continue;
        }
        let segments: Vec<&str> = key.segments().collect();
        match tree.kind_of(&segments) {
            Some(actual) => out.push(Inconsistency::KindMismatch { key: key.clone(), actual }),
            None => out.push(Inconsistency::DanglingKey(key.clone())),
        }
    }
    out
}
