//! A line-oriented text format for scripted repository scenarios.
//!
//! One operation per line; `#` starts a comment line. Paths are canonical
//! (`/dir/`, `/dir/file`). Records are one-line JSON objects and always
//! come last on their line.
//!
//! ```text
//! init main {"owner":"Bob",...}
//! write main /src/a.c content-a
//! commit main
//! branch alice main
//! add alice /src/ {"owner":"Alice",...}
//! commit alice
//! merge main alice ours
//! ```
//!
//! | op | arguments |
//! |----|-----------|
//! | `init` | branch record |
//! | `branch` | new-branch from-branch |
//! | `write` | branch path content (creates or overwrites a file) |
//! | `rm` | branch path |
//! | `mv` | branch from to |
//! | `add` / `modify` | branch path record |
//! | `del` | branch path |
//! | `commit` | branch |
//! | `merge` | into from `ours`\|`theirs` |
//! | `copy` | branch source-branch source-dir destination-dir |
//!
//! Within one commit, citation edits refer to paths of the last committed
//! tree, so list them before the file moves of the same commit.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::conflict::{ConflictResolver, KeepLeft, KeepRight};
use crate::document;
use crate::error::{Error, Result};
use crate::model::{CanonicalPath, CitationFile, CitationRecord, Digest, TreeSnapshot};
use crate::ops::{self, RoleContext};
use crate::store::{copy_cite, Repository, Revision, TreeEdit};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Ours,
    Theirs,
}

impl Side {
    pub fn resolver(self) -> Box<dyn ConflictResolver> {
        match self {
            Side::Ours => Box::new(KeepLeft),
            Side::Theirs => Box::new(KeepRight),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceOp {
    Init { branch: String, root: CitationRecord },
    Branch { name: String, from: String },
    Write { branch: String, path: CanonicalPath, content: String },
    Remove { branch: String, path: CanonicalPath },
    Move { branch: String, from: CanonicalPath, to: CanonicalPath },
    Add { branch: String, path: CanonicalPath, record: CitationRecord },
    Del { branch: String, path: CanonicalPath },
    Modify { branch: String, path: CanonicalPath, record: CitationRecord },
    Commit { branch: String },
    Merge { into: String, from: String, prefer: Side },
    Copy { branch: String, src_branch: String, src_subtree: CanonicalPath, dst: CanonicalPath },
}

impl TraceOp {
    /// The branch whose working state the operation touches.
    pub fn branch(&self) -> &str {
        match self {
            TraceOp::Init { branch, .. }
            | TraceOp::Write { branch, .. }
            | TraceOp::Remove { branch, .. }
            | TraceOp::Move { branch, .. }
            | TraceOp::Add { branch, .. }
            | TraceOp::Del { branch, .. }
            | TraceOp::Modify { branch, .. }
            | TraceOp::Commit { branch }
            | TraceOp::Copy { branch, .. } => branch,
            TraceOp::Branch { name, .. } => name,
            TraceOp::Merge { into, .. } => into,
        }
    }

    /// Whether the operation records a new version.
    pub fn is_commit_point(&self) -> bool {
        matches!(self, TraceOp::Init { .. } | TraceOp::Commit { .. } | TraceOp::Merge { .. } | TraceOp::Copy { .. })
    }
}

impl fmt::Display for TraceOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let line = document::record_to_line;
        match self {
            TraceOp::Init { branch, root } => write!(f, "init {branch} {}", line(root)),
            TraceOp::Branch { name, from } => write!(f, "branch {name} {from}"),
            TraceOp::Write { branch, path, content } => write!(f, "write {branch} {path} {content}"),
            TraceOp::Remove { branch, path } => write!(f, "rm {branch} {path}"),
            TraceOp::Move { branch, from, to } => write!(f, "mv {branch} {from} {to}"),
            TraceOp::Add { branch, path, record } => write!(f, "add {branch} {path} {}", line(record)),
            TraceOp::Del { branch, path } => write!(f, "del {branch} {path}"),
            TraceOp::Modify { branch, path, record } => write!(f, "modify {branch} {path} {}", line(record)),
            TraceOp::Commit { branch } => write!(f, "commit {branch}"),
            TraceOp::Merge { into, from, prefer } => {
                let side = match prefer {
                    Side::Ours => "ours",
                    Side::Theirs => "theirs",
                };
                write!(f, "merge {into} {from} {side}")
            }
            TraceOp::Copy { branch, src_branch, src_subtree, dst } => {
                write!(f, "copy {branch} {src_branch} {src_subtree} {dst}")
            }
        }
    }
}

/// A parsed scenario.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    pub ops: Vec<TraceOp>,
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for op in &self.ops {
            writeln!(f, "{op}")?;
        }
        Ok(())
    }
}

impl FromStr for Trace {
    type Err = Error;

    fn from_str(text: &str) -> Result<Trace> {
        let mut ops = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            ops.push(parse_op(line).map_err(|message| Error::Trace { line: i + 1, message })?);
        }
        Ok(Trace { ops })
    }
}

fn parse_op(line: &str) -> std::result::Result<TraceOp, String> {
    let (verb, rest) = line.split_once(' ').unwrap_or((line, ""));
    let path = |s: &str| CanonicalPath::parse_rendered(s).map_err(|e| e.to_string());
    let record = |s: &str| document::parse_record(s).map_err(|e| e.to_string());
    let words = |n: usize| -> std::result::Result<Vec<&str>, String> {
        let parts: Vec<&str> = rest.splitn(n, ' ').collect();
        if parts.len() != n || parts.iter().any(|p| p.is_empty()) {
            return Err(format!("{verb} takes {n} arguments"));
        }
        Ok(parts)
    };
    let op = match verb {
        "init" => {
            let w = words(2)?;
            TraceOp::Init { branch: w[0].into(), root: record(w[1])? }
        }
        "branch" => {
            let w = words(2)?;
            TraceOp::Branch { name: w[0].into(), from: w[1].into() }
        }
        "write" => {
            let w = words(3)?;
            if w[2].contains(char::is_whitespace) {
                return Err("file content must be a single token".into());
            }
            TraceOp::Write { branch: w[0].into(), path: path(w[1])?, content: w[2].into() }
        }
        "rm" => {
            let w = words(2)?;
            TraceOp::Remove { branch: w[0].into(), path: path(w[1])? }
        }
        "mv" => {
            let w = words(3)?;
            TraceOp::Move { branch: w[0].into(), from: path(w[1])?, to: path(w[2])? }
        }
        "add" => {
            let w = words(3)?;
            TraceOp::Add { branch: w[0].into(), path: path(w[1])?, record: record(w[2])? }
        }
        "modify" => {
            let w = words(3)?;
            TraceOp::Modify { branch: w[0].into(), path: path(w[1])?, record: record(w[2])? }
        }
        "del" => {
            let w = words(2)?;
            TraceOp::Del { branch: w[0].into(), path: path(w[1])? }
        }
        "commit" => {
            let w = words(1)?;
            TraceOp::Commit { branch: w[0].into() }
        }
        "merge" => {
            let w = words(3)?;
            let prefer = match w[2] {
                "ours" => Side::Ours,
                "theirs" => Side::Theirs,
                other => return Err(format!("merge side must be ours or theirs, not {other:?}")),
            };
            TraceOp::Merge { into: w[0].into(), from: w[1].into(), prefer }
        }
        "copy" => {
            let w = words(4)?;
            TraceOp::Copy { branch: w[0].into(), src_branch: w[1].into(), src_subtree: path(w[2])?, dst: path(w[3])? }
        }
        other => return Err(format!("unknown operation {other:?}")),
    };
    Ok(op)
}

/// State observed after an operation that records a version.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommitPoint {
    /// Index of the operation in the trace.
    pub op_index: usize,
    pub branch: String,
    pub cf: CitationFile,
    pub files: BTreeMap<CanonicalPath, Digest>,
}

type Pending = BTreeMap<String, (TreeSnapshot, Vec<TreeEdit>)>;

/// Uncommitted file edits of `branch` and the tree they produce.
fn pending_entry<'a>(
    pending: &'a mut Pending,
    repo: &Repository,
    branch: &str,
) -> Result<&'a mut (TreeSnapshot, Vec<TreeEdit>)> {
    if !pending.contains_key(branch) {
        let tree = repo.head(branch)?.tree.clone();
        pending.insert(branch.to_owned(), (tree, Vec::new()));
    }
    Ok(pending.get_mut(branch).expect("inserted above"))
}

/// Runs a trace against the in-memory store, returning the repository and
/// the state at every commit point.
pub fn replay(trace: &Trace, repo_id: &str) -> Result<(Repository, Vec<CommitPoint>)> {
    let ctx = RoleContext::member("trace");
    let mut repo: Option<Repository> = None;
    let mut pending = Pending::new();
    let mut points = Vec::new();

    for (i, op) in trace.ops.iter().enumerate() {
        let fail = |message: String| Error::Trace { line: i + 1, message };
        if let TraceOp::Init { branch, root } = op {
            if repo.is_some() {
                return Err(fail("init must come first and only once".into()));
            }
            repo = Some(Repository::init(repo_id, branch.as_str(), TreeSnapshot::new(), root.clone())?);
        }
        let r = repo.as_mut().ok_or_else(|| fail("trace must start with init".into()))?;
        let branch = op.branch().to_owned();

        match op {
            TraceOp::Init { .. } => {}
            TraceOp::Branch { name, from } => {
                let head = r.head_id(from)?.clone();
                r.create_branch(name, &head)?;
            }
            TraceOp::Write { path, content, .. } => {
                let (tree, edits) = pending_entry(&mut pending, r, &branch)?;
                if tree.contains(path) {
                    tree.set_digest(path, content.clone())?;
                    edits.push(TreeEdit::ModifyContent { path: path.clone(), digest: content.clone() });
                } else {
                    tree.insert_file(path, content.clone())?;
                    edits.push(TreeEdit::CreateFile { path: path.clone(), digest: content.clone() });
                }
            }
            TraceOp::Remove { path, .. } => {
                let (tree, edits) = pending_entry(&mut pending, r, &branch)?;
                tree.remove(path)?;
                edits.push(TreeEdit::Delete { path: path.clone() });
            }
            TraceOp::Move { from, to, .. } => {
                let (tree, edits) = pending_entry(&mut pending, r, &branch)?;
                tree.rename(from, to)?;
                edits.push(TreeEdit::Rename { from: from.clone(), to: to.clone() });
            }
            TraceOp::Add { path, record, .. } => {
                ops::add_cite(r, &ctx, &Revision::Branch(branch.clone()), path, record.clone())?;
            }
            TraceOp::Del { path, .. } => {
                ops::del_cite(r, &ctx, &Revision::Branch(branch.clone()), path)?;
            }
            TraceOp::Modify { path, record, .. } => {
                ops::modify_cite(r, &ctx, &Revision::Branch(branch.clone()), path, record.clone())?;
            }
            TraceOp::Commit { .. } => {
                let edits = pending.remove(&branch).map(|(_, e)| e).unwrap_or_default();
                r.commit(&branch, &edits, &[])?;
            }
            TraceOp::Merge { from, prefer, .. } => {
                if pending.get(&branch).is_some_and(|(_, e)| !e.is_empty()) {
                    return Err(fail("commit file edits before merging".into()));
                }
                r.merge_cite(&branch, from, prefer.resolver().as_mut())?;
            }
            TraceOp::Copy { src_branch, src_subtree, dst, .. } => {
                if pending.get(&branch).is_some_and(|(_, e)| !e.is_empty()) {
                    return Err(fail("commit file edits before copying".into()));
                }
                let src = r.clone();
                let src_head = src.head_id(src_branch)?.clone();
                copy_cite(&src, &src_head, src_subtree, r, &branch, dst)?;
            }
        }

        if op.is_commit_point() {
            pending.remove(&branch);
            let head = r.head(&branch)?;
            points.push(CommitPoint { op_index: i, branch, cf: head.cf.clone(), files: head.tree.files() });
        }
    }
    let repo = repo.ok_or_else(|| Error::Trace { line: 0, message: "empty trace".into() })?;
    Ok((repo, points))
}
