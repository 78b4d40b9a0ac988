//! Runs a [`Trace`] against a real git repository, one linked worktree per
//! branch, so its commit points can be compared with the in-memory store.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;

use crate::document;
use crate::error::{Error, Result};
use crate::model::{CanonicalPath, CitationFile};
use crate::ops::{CiteEdit, RoleContext};
use crate::store::trace::{CommitPoint, Trace, TraceOp};

use super::{CopySource, GitWorktree, MergeOptions};

fn git_in(dir: &Path, args: &[&str]) -> Result<()> {
    let out = Command::new("git").arg("-C").arg(dir).args(args).output()?;
    if !out.status.success() {
        return Err(Error::Git {
            command: args.join(" "),
            stderr: String::from_utf8_lossy(&out.stderr).trim().to_owned(),
        });
    }
    Ok(())
}

struct Worktrees {
    base: PathBuf,
    file_name: String,
    trees: BTreeMap<String, GitWorktree>,
}

impl Worktrees {
    fn get(&self, branch: &str) -> Result<&GitWorktree> {
        self.trees.get(branch).ok_or_else(|| Error::UnknownBranch(branch.to_owned()))
    }

    fn add(&mut self, name: &str, from: &str) -> Result<()> {
        if self.trees.contains_key(name) {
            return Err(Error::BranchExists(name.to_owned()));
        }
        let origin = self.get(from)?.root().to_path_buf();
        let dir = self.base.join(format!("wt-{}", name.replace('/', "-")));
        let dir_arg = dir.to_string_lossy().into_owned();
        git_in(&origin, &["worktree", "add", "-q", "-b", name, &dir_arg, from])?;
        self.trees.insert(name.to_owned(), GitWorktree::open(dir).with_file_name(self.file_name.as_str()));
        Ok(())
    }
}

fn committed_files(wt: &GitWorktree) -> Result<BTreeMap<CanonicalPath, String>> {
    let tree = wt.tree_at("HEAD")?;
    let mut out = BTreeMap::new();
    for path in tree.files().into_keys() {
        let content = wt.show_file("HEAD", path.to_relative())?.unwrap_or_default();
        out.insert(path, String::from_utf8_lossy(&content).into_owned());
    }
    Ok(out)
}

/// Replays `trace` in a fresh repository created under `base` (which must
/// be an empty or missing directory). File contents are written verbatim,
/// and a commit point's files map each committed path to its content, matching the
/// digests the store replay records.
///
/// Merges prefer the current branch for file contents and run without
/// rename detection, like the store's tree merge.
pub fn replay(trace: &Trace, base: &Path) -> Result<Vec<CommitPoint>> {
    let ctx = RoleContext::member("trace");
    let mut wts: Option<Worktrees> = None;
    let mut points = Vec::new();

    for (i, op) in trace.ops.iter().enumerate() {
        let fail = |message: &str| Error::Trace { line: i + 1, message: message.to_owned() };
        if let TraceOp::Init { branch, root } = op {
            if wts.is_some() {
                return Err(fail("init must come first and only once"));
            }
            let dir = base.join("repo");
            std::fs::create_dir_all(&dir)?;
            git_in(&dir, &["init", "-q", "-b", branch])?;
            git_in(&dir, &["config", "user.name", "trace"])?;
            git_in(&dir, &["config", "user.email", "trace@example.org"])?;
            git_in(&dir, &["config", "commit.gpgsign", "false"])?;
            let wt = GitWorktree::open(&dir);
            std::fs::write(wt.citation_path(), document::serialize(&CitationFile::new(root.clone())))?;
            wt.git(["add", "--", wt.file_name()])?;
            wt.git(["commit", "-q", "-m", "init"])?;
            wts = Some(Worktrees {
                base: base.to_path_buf(),
                file_name: wt.file_name().to_owned(),
                trees: BTreeMap::from([(branch.clone(), wt)]),
            });
        }
        let w = wts.as_mut().ok_or_else(|| fail("trace must start with init"))?;

        match op {
            TraceOp::Init { .. } => {}
            TraceOp::Branch { name, from } => w.add(name, from)?,
            TraceOp::Write { branch, path, content } => {
                let file = w.get(branch)?.root().join(path.to_relative());
                if let Some(dir) = file.parent() {
                    std::fs::create_dir_all(dir)?;
                }
                std::fs::write(file, content)?;
            }
            TraceOp::Remove { branch, path } => {
                let target = w.get(branch)?.root().join(path.to_relative());
                if path.is_container() {
                    std::fs::remove_dir_all(target)?;
                } else {
                    std::fs::remove_file(target)?;
                }
            }
            TraceOp::Move { branch, from, to } => {
                let wt = w.get(branch)?;
                let target = wt.root().join(to.to_relative());
                if let Some(dir) = target.parent() {
                    std::fs::create_dir_all(dir)?;
                }
                let (from, to) = (from.to_relative().trim_end_matches('/'), to.to_relative().trim_end_matches('/'));
                wt.git(["add", "-A"])?;
                wt.git(["mv", from, to])?;
            }
            TraceOp::Add { branch, path, record } => {
                w.get(branch)?.edit(&ctx, &CiteEdit::Add { path: path.clone(), record: record.clone() })?;
            }
            TraceOp::Del { branch, path } => {
                w.get(branch)?.edit(&ctx, &CiteEdit::Delete { path: path.clone() })?;
            }
            TraceOp::Modify { branch, path, record } => {
                w.get(branch)?.edit(&ctx, &CiteEdit::Modify { path: path.clone(), record: record.clone() })?;
            }
            TraceOp::Commit { branch } => {
                let wt = w.get(branch)?;
                wt.git(["add", "-A"])?;
                wt.commit("commit", true)?;
            }
            TraceOp::Merge { into, from, prefer } => {
                let opts = MergeOptions { prefer_ours_for_files: true, commit: true, no_renames: true };
                w.get(into)?.merge(from, prefer.resolver().as_mut(), opts)?;
            }
            TraceOp::Copy { branch, src_branch, src_subtree, dst } => {
                let wt = w.get(branch)?;
                wt.copy_from(&CopySource::Revision(src_branch.clone()), src_subtree, dst)?;
                wt.commit("copy", true)?;
            }
        }

        if op.is_commit_point() {
            let wt = w.get(op.branch())?;
            points.push(CommitPoint {
                op_index: i,
                branch: op.branch().to_owned(),
                cf: wt.citation_file_at("HEAD")?.ok_or_else(|| fail("citation file missing at HEAD"))?,
                files: committed_files(wt)?,
            });
        }
    }
    Ok(points)
}
