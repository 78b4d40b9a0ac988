//! Citation files in real git working trees.
//!
//! Everything goes through the `git` executable as a subprocess. The
//! commands used are:
//!
//! | purpose | command |
//! |---------|---------|
//! | locate the working tree | `git rev-parse --show-toplevel` |
//! | current branch / head | `git symbolic-ref -q --short HEAD`, `git rev-parse -q --verify HEAD` |
//! | files of the working tree | `git ls-files -z -c -o --exclude-standard` |
//! | files of the index | `git ls-files -z -s` |
//! | files of a revision | `git ls-tree -r -z <rev>` |
//! | a file at a revision | `git show <rev>:<path>` |
//! | staged renames and deletions | `git diff --cached -M --name-status -z HEAD` |
//! | merge state | `git rev-parse -q --verify MERGE_HEAD`, `git ls-files -u -z` |
//! | ancestry | `git merge-base <a> <b>`, `git merge-base --is-ancestor <a> <b>` |
//! | merge | `git merge --no-ff --no-commit -q [-X ours] [-s recursive -X no-renames] <rev>` |
//! | settle unmerged paths | `git checkout --ours/--theirs -- <path>`, `git add`, `git rm -q --cached` |
//! | give up a merge | `git merge --abort` |
//! | stage and record | `git add -- <path>`, `git commit -q -m <msg>`, `git commit -q --no-edit` |
//! | copy from a remote | `git clone -q <url> <tmp>` |
//! | metadata | `git remote get-url origin`, `git config user.name`, `git log --format=...` |
//!
//! During a merge the citation file is protected from textual merging by a
//! merge driver that keeps the current side (`merge.gitcite-keep.driver =
//! true` plus a `.git/info/attributes` line); the merged citation file is
//! then computed by [`merge_citation_files`] and written back.

mod copy;
mod merge;
mod metadata;
mod remote;
pub mod replay;
mod sync;

use std::ffi::OsStr;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use crate::document::{self, CITATION_FILE_NAME};
use crate::error::{Error, Result};
use crate::model::{self, CanonicalPath, CitationFile, CitationRecord, Inconsistency, PathKind, TreeSnapshot};
use crate::ops::{self, CiteEdit, RoleContext};

pub use copy::{CopySource, CopySummary};
pub use merge::{merge_citation_files, MergeOptions, MergeReport};
pub use metadata::parse_remote_url;
pub use remote::{fetch_remote_bytes, fetch_remote_citation_file};
pub use sync::{infer_changes, sync_citation_file, sync_on_commit, ChangeSet, SyncReport};

/// Environment variable that overrides the citation file name.
pub const FILE_NAME_ENV: &str = "GITCITE_FILE";

/// The citation file name in effect: `$GITCITE_FILE` or `citation.cite`.
pub fn citation_file_name() -> String {
    std::env::var(FILE_NAME_ENV).ok().filter(|s| !s.trim().is_empty()).unwrap_or_else(|| CITATION_FILE_NAME.to_owned())
}

pub fn load_citation_file_at(file: &Path) -> Result<CitationFile> {
    let text = match std::fs::read_to_string(file) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(Error::FileMissing(file.display().to_string()))
        }
        Err(e) => return Err(e.into()),
    };
    document::parse(&text)
}

pub fn store_citation_file_at(file: &Path, cf: &CitationFile) -> Result<()> {
    std::fs::write(file, document::serialize(cf))?;
    Ok(())
}

/// Reads the citation file at the root of a working tree.
pub fn load_citation_file(worktree_root: &Path) -> Result<CitationFile> {
    load_citation_file_at(&worktree_root.join(citation_file_name()))
}

/// Writes `cf` in canonical form at the root of a working tree.
pub fn store_citation_file(worktree_root: &Path, cf: &CitationFile) -> Result<()> {
    store_citation_file_at(&worktree_root.join(citation_file_name()), cf)
}

fn path_from_git(rel: &str, kind: PathKind) -> Result<CanonicalPath> {
    let segments: Vec<&str> = rel.split('/').filter(|s| !s.is_empty()).collect();
    CanonicalPath::from_segments(&segments, kind)
}

/// A git working tree holding a citation file at its root.
#[derive(Debug, Clone)]
pub struct GitWorktree {
    root: PathBuf,
    file_name: String,
}

impl GitWorktree {
    /// The working tree containing `dir`.
    pub fn discover(dir: &Path) -> Result<Self> {
        let out = Command::new("git")
            .arg("-C")
            .arg(dir)
            .args(["rev-parse", "--show-toplevel"])
            .output()
            .map_err(|e| Error::Git { command: "rev-parse".into(), stderr: e.to_string() })?;
        if !out.status.success() {
            return Err(Error::NotARepository(dir.display().to_string()));
        }
        let root = String::from_utf8_lossy(&out.stdout).trim().to_owned();
        Ok(Self::open(root))
    }

    /// Wraps a directory already known to be a working tree root.
    pub fn open(root: impl Into<PathBuf>) -> Self {
        GitWorktree { root: root.into(), file_name: citation_file_name() }
    }

    pub fn with_file_name(mut self, name: impl Into<String>) -> Self {
        self.file_name = name.into();
        self
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn file_name(&self) -> &str {
        &self.file_name
    }

    pub fn citation_path(&self) -> PathBuf {
        self.root.join(&self.file_name)
    }

    pub fn has_citation_file(&self) -> bool {
        self.citation_path().is_file()
    }

    pub(crate) fn run<I, S>(&self, args: I) -> Result<Output>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<OsStr>,
    {
        let args: Vec<S> = args.into_iter().collect();
        Command::new("git")
            .arg("-C")
            .arg(&self.root)
            .args(&args)
            .env("GIT_TERMINAL_PROMPT", "0")
            .output()
            .map_err(|e| Error::Git { command: describe(&args), stderr: e.to_string() })
    }

    /// Runs git and returns stdout, failing on a nonzero exit.
    pub(crate) fn git<I, S>(&self, args: I) -> Result<String>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<OsStr>,
    {
        let args: Vec<S> = args.into_iter().collect();
        let out = self.run(&args)?;
        if !out.status.success() {
            return Err(Error::Git {
                command: describe(&args),
                stderr: String::from_utf8_lossy(&out.stderr).trim().to_owned(),
            });
        }
        Ok(String::from_utf8_lossy(&out.stdout).into_owned())
    }

    pub fn load(&self) -> Result<CitationFile> {
        load_citation_file_at(&self.citation_path())
    }

    pub fn store(&self, cf: &CitationFile) -> Result<()> {
        store_citation_file_at(&self.citation_path(), cf)
    }

    /// False when the file parses but is not byte-canonical, which means
    /// it was edited by hand.
    pub fn citation_file_is_canonical(&self) -> Result<bool> {
        let text = std::fs::read_to_string(self.citation_path())?;
        Ok(document::is_canonical(&text))
    }

    pub fn head_commit(&self) -> Result<Option<String>> {
        let out = self.run(["rev-parse", "-q", "--verify", "HEAD"])?;
        Ok(out.status.success().then(|| String::from_utf8_lossy(&out.stdout).trim().to_owned()))
    }

    /// The checked-out branch, or `None` on a detached HEAD.
    pub fn current_branch(&self) -> Result<Option<String>> {
        let out = self.run(["symbolic-ref", "-q", "--short", "HEAD"])?;
        Ok(out.status.success().then(|| String::from_utf8_lossy(&out.stdout).trim().to_owned()))
    }

    pub fn rev_parse(&self, rev: &str) -> Result<String> {
        let spec = format!("{rev}^{{commit}}");
        let out = self.run(["rev-parse", "-q", "--verify", spec.as_str()])?;
        if !out.status.success() {
            return Err(Error::UnknownVersion(rev.to_owned()));
        }
        Ok(String::from_utf8_lossy(&out.stdout).trim().to_owned())
    }

    fn is_citation_file(&self, rel: &str) -> bool {
        rel == self.file_name
    }

    fn tree_from_listing<'a>(&self, entries: impl Iterator<Item = (&'a str, String)>) -> Result<TreeSnapshot> {
        let mut tree = TreeSnapshot::new();
        for (rel, digest) in entries {
            if rel.is_empty() || self.is_citation_file(rel) {
                continue;
            }
            let path = path_from_git(rel, PathKind::File)?;
            if !tree.contains(&path) {
                tree.insert_file(&path, digest)?;
            }
        }
        Ok(tree)
    }

    /// Files present in the working tree that git tracks or would track.
    /// Digests are left empty.
    pub fn working_tree(&self) -> Result<TreeSnapshot> {
        let out = self.git(["ls-files", "-z", "-c", "-o", "--exclude-standard"])?;
        let present: Vec<&str> = out.split('\0').filter(|rel| self.root.join(rel).is_file()).collect();
        self.tree_from_listing(present.into_iter().map(|rel| (rel, String::new())))
    }

    /// Files in the index (every merge stage), keyed by blob id.
    pub fn index_tree(&self) -> Result<TreeSnapshot> {
        let out = self.git(["ls-files", "-z", "-s"])?;
        let entries = out.split('\0').filter_map(|line| {
            let (meta, rel) = line.split_once('\t')?;
            let blob = meta.split(' ').nth(1)?.to_owned();
            Some((rel, blob))
        });
        self.tree_from_listing(entries)
    }

    /// Files of a committed revision, keyed by blob id.
    pub fn tree_at(&self, rev: &str) -> Result<TreeSnapshot> {
        let commit = self.rev_parse(rev)?;
        let out = self.git(["ls-tree", "-r", "-z", commit.as_str()])?;
        let entries = out.split('\0').filter_map(|line| {
            let (meta, rel) = line.split_once('\t')?;
            let mut parts = meta.split(' ');
            let kind = parts.nth(1)?;
            let blob = parts.next()?.to_owned();
            (kind == "blob").then_some((rel, blob))
        });
        self.tree_from_listing(entries)
    }

    /// Raw bytes of `rel` at `rev`, or `None` if absent there.
    pub fn show_file(&self, rev: &str, rel: &str) -> Result<Option<Vec<u8>>> {
        let spec = format!("{rev}:{rel}");
        let out = self.run(["show", spec.as_str()])?;
        Ok(out.status.success().then_some(out.stdout))
    }

    /// The citation file as committed at `rev`, if it has one.
    pub fn citation_file_at(&self, rev: &str) -> Result<Option<CitationFile>> {
        let commit = self.rev_parse(rev)?;
        match self.show_file(&commit, &self.file_name)? {
            None => Ok(None),
            Some(bytes) => {
                let text = String::from_utf8(bytes).map_err(|e| Error::MalformedDocument {
                    position: crate::error::Position { line: 1, column: 1 },
                    message: e.to_string(),
                })?;
                document::parse(&text).map(Some)
            }
        }
    }

    /// Canonicalizes a user path given relative to `cwd` (which must lie in
    /// this working tree); a leading `/` means relative to the root. A
    /// trailing `/` marks a directory. Otherwise the kind comes from `tree`,
    /// or the path is taken as a file when there is no tree.
    pub fn canonicalize_user_path(&self, raw: &str, cwd: &Path, tree: Option<&TreeSnapshot>) -> Result<CanonicalPath> {
        let joined = if raw.starts_with('/') {
            raw.to_owned()
        } else {
            let cwd = cwd.canonicalize()?;
            let root = self.root.canonicalize()?;
            let rel = cwd.strip_prefix(&root).map_err(|_| Error::NotARepository(cwd.display().to_string()))?;
            let mut prefix: String =
                rel.components().map(|c| format!("{}/", c.as_os_str().to_string_lossy())).collect();
            if raw != "." {
                prefix.push_str(raw);
            }
            prefix
        };
        let hint = if joined.ends_with('/') || joined.is_empty() {
            model::KindHint::Directory
        } else if tree.is_none() {
            model::KindHint::File
        } else {
            model::KindHint::Unknown
        };
        match model::canonicalize(&joined, hint, tree) {
            Err(Error::UnknownKind(_)) => {
                Err(Error::PathNotInTree(model::canonicalize(&joined, model::KindHint::File, None)?))
            }
            other => other,
        }
    }

    /// Applies a citation edit to the working tree's citation file.
    ///
    /// Only project members may edit, and only on a checked-out branch: a
    /// detached HEAD is not the latest version of any branch.
    pub fn edit(&self, ctx: &RoleContext, edit: &CiteEdit) -> Result<CitationFile> {
        ctx.require_member("edit citations")?;
        if self.current_branch()?.is_none() {
            return Err(Error::NotLatestVersion);
        }
        let tree = self.working_tree()?;
        let mut cf = self.load()?;
        ops::apply_edit(&mut cf, &tree, edit)?;
        self.store(&cf)?;
        Ok(cf)
    }

    /// GenCite against the working tree, or against a committed revision.
    pub fn gen(&self, path: &CanonicalPath, rev: Option<&str>) -> Result<CitationRecord> {
        let (cf, tree) = match rev {
            None => (self.load()?, self.working_tree()?),
            Some(rev) => {
                let cf = self
                    .citation_file_at(rev)?
                    .ok_or_else(|| Error::FileMissing(format!("{rev}:{}", self.file_name)))?;
                (cf, self.tree_at(rev)?)
            }
        };
        model::resolve(&cf, &tree, path).cloned()
    }

    pub fn validate(&self) -> Result<Vec<Inconsistency>> {
        Ok(model::validate(&self.load()?, &self.working_tree()?))
    }

    /// Creates the citation file with a default root citation drafted from
    /// repository metadata.
    pub fn init_citation_file(&self, meta: &ops::RepoMetadata) -> Result<CitationFile> {
        if self.has_citation_file() {
            return Err(Error::AlreadyInitialized(self.citation_path().display().to_string()));
        }
        let cf = CitationFile::new(ops::default_root_citation(meta)?);
        self.store(&cf)?;
        Ok(cf)
    }

    pub fn merge_in_progress(&self) -> Result<bool> {
        Ok(self.run(["rev-parse", "-q", "--verify", "MERGE_HEAD"])?.status.success())
    }

    /// Paths with unresolved merge stages.
    pub fn unmerged_paths(&self) -> Result<Vec<String>> {
        let out = self.git(["ls-files", "-u", "-z"])?;
        let mut paths: Vec<String> =
            out.split('\0').filter_map(|l| l.split_once('\t')).map(|(_, p)| p.to_owned()).collect();
        paths.dedup();
        Ok(paths)
    }
}

fn describe<S: AsRef<OsStr>>(args: &[S]) -> String {
    args.iter().map(|a| a.as_ref().to_string_lossy()).collect::<Vec<_>>().join(" ")
}
