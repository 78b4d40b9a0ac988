use std::fmt;

use crate::model::CanonicalPath;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Where in a citation document a parse failure happened (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.column)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid path {raw:?}: {reason}")]
    InvalidPath { raw: String, reason: &'static str },
    #[error("cannot tell whether {0:?} is a file or a directory")]
    UnknownKind(String),
    #[error("path {0} is not in the tree")]
    PathNotInTree(CanonicalPath),
    #[error("invalid citation record: {0}")]
    InvalidRecord(String),

    #[error("citation updates are only allowed on the latest version of a branch")]
    NotLatestVersion,
    #[error("{0} already has a citation; use modify instead")]
    AlreadyCited(CanonicalPath),
    #[error("{0} has no explicit citation")]
    NotCited(CanonicalPath),
    #[error("the root citation cannot be deleted")]
    RootUndeletable,
    #[error("role {role} may not {action}")]
    RoleForbidden { role: &'static str, action: &'static str },
    #[error("missing repository metadata: {0}")]
    MissingMetadata(&'static str),

    #[error("unknown version {0}")]
    UnknownVersion(String),
    #[error("unknown branch {0}")]
    UnknownBranch(String),
    #[error("branch {0} already exists")]
    BranchExists(String),
    #[error("tree edit conflict at {path}: {reason}")]
    EditConflict { path: CanonicalPath, reason: &'static str },
    #[error("internal invariant broken: {0}")]
    InvariantBroken(String),
    #[error("source subtree {0} does not exist")]
    SubtreeMissing(CanonicalPath),
    #[error("destination {0} already exists or has no parent directory")]
    DestinationCollision(CanonicalPath),
    #[error("source version {0} is unknown")]
    SourceVersionUnknown(String),
    #[error("branches {0} and {1} share no common ancestor")]
    NoCommonAncestor(String, String),
    #[error("citation conflict at {0} was not resolved")]
    UnresolvedConflict(CanonicalPath),

    #[error("citation file {0} is missing")]
    FileMissing(String),
    #[error("malformed citation document at {position}: {message}")]
    MalformedDocument { position: Position, message: String },
    #[error("citation file has no root (\"/\") entry")]
    MissingRoot,
    #[error("citation file already exists at {0}")]
    AlreadyInitialized(String),
    #[error("{0} is not inside a git working tree")]
    NotARepository(String),
    #[error("git {command} failed: {stderr}")]
    Git { command: String, stderr: String },
    #[error("I/O failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("network failure: {0}")]
    NetworkFailure(String),
    #[error("HTTP status {0}")]
    HttpStatus(u16),
    #[error("trace line {line}: {message}")]
    Trace { line: usize, message: String },
}

impl Error {
    /// True for failures of the environment (filesystem, network, git
    /// subprocess) rather than of the citation domain itself.
    pub fn is_environmental(&self) -> bool {
        matches!(
            self,
            Error::Io(_)
                | Error::Git { .. }
                | Error::NetworkFailure(_)
                | Error::HttpStatus(_)
                | Error::NotARepository(_)
                | Error::FileMissing(_)
        )
    }
}
