//! In-memory reference implementation of a versioned repository whose
//! versions carry citation files.
//!
//! History is append-only: every operation creates new versions (or a new
//! repository) and never touches an existing [`Version`]. Version ids are
//! content hashes and timestamps are a logical counter, so identical
//! operation sequences produce identical repositories.

mod merge;
pub mod trace;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use sha2::{Digest as _, Sha256};

use crate::conflict::{ConflictReport, ConflictResolver};
use crate::document;
use crate::error::{Error, Result};
use crate::model::{self, CanonicalPath, CitationFile, CitationRecord, Digest, Node, PathKind, TreeSnapshot};
use crate::ops::{self, CiteEdit};

pub use merge::{merge_trees, TreeMerge};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VersionId(String);

impl VersionId {
    pub fn new(id: impl Into<String>) -> Self {
        VersionId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for VersionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Version {
    pub id: VersionId,
    /// Empty for a root version, two entries for a merge.
    pub parents: Vec<VersionId>,
    pub tree: TreeSnapshot,
    pub cf: CitationFile,
    pub timestamp: u64,
}

impl Version {
    fn build(parents: Vec<VersionId>, tree: TreeSnapshot, cf: CitationFile, timestamp: u64) -> Result<Version> {
        let problems = model::validate(&cf, &tree);
        if !problems.is_empty() {
            let list: Vec<String> = problems.iter().map(ToString::to_string).collect();
            return Err(Error::InvariantBroken(list.join("; ")));
        }
        let mut h = Sha256::new();
        h.update(timestamp.to_be_bytes());
        for p in &parents {
            h.update(p.as_str());
            h.update([0]);
        }
        for (path, digest) in tree.files() {
            h.update(path.as_str());
            h.update([0]);
            h.update(digest.as_bytes());
            h.update([0]);
        }
        h.update(document::serialize(&cf));
        let hex: String = h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect();
        Ok(Version { id: VersionId(hex), parents, tree, cf, timestamp })
    }

    pub fn is_merge(&self) -> bool {
        self.parents.len() == 2
    }
}

/// A change to the file tree, applied at commit time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeEdit {
    CreateFile { path: CanonicalPath, digest: Digest },
    Delete { path: CanonicalPath },
    Rename { from: CanonicalPath, to: CanonicalPath },
    ModifyContent { path: CanonicalPath, digest: Digest },
}

/// Where a citation edit is aimed: the head of a named branch, or a
/// specific version (which must be some branch's head).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Revision {
    Branch(String),
    Version(VersionId),
}

impl Revision {
    pub fn branch(name: impl Into<String>) -> Self {
        Revision::Branch(name.into())
    }
}

#[derive(Debug, Clone)]
pub struct MergeOutcome {
    pub version: Arc<Version>,
    pub conflicts: Vec<ConflictReport>,
    /// Keys dropped because their path is absent from the merged tree.
    pub pruned: Vec<CanonicalPath>,
    pub warnings: Vec<String>,
    /// Nothing to merge: the incoming head was already in history.
    pub up_to_date: bool,
}

#[derive(Debug, Clone)]
pub struct CopyOutcome {
    pub version: Arc<Version>,
    /// Citation keys the copy added at the destination.
    pub added: Vec<CanonicalPath>,
}

#[derive(Debug, Clone)]
pub struct Repository {
    id: String,
    default_branch: String,
    versions: BTreeMap<VersionId, Arc<Version>>,
    branches: BTreeMap<String, VersionId>,
    staged: BTreeMap<String, Vec<CiteEdit>>,
    clock: u64,
}

impl Repository {
    /// A repository whose first version holds `tree` and only a root citation.
    pub fn init(
        id: impl Into<String>,
        branch: impl Into<String>,
        tree: TreeSnapshot,
        root: CitationRecord,
    ) -> Result<Self> {
        root.check()?;
        Self::with_citations(id, branch, tree, CitationFile::new(root))
    }

    pub fn with_citations(
        id: impl Into<String>,
        branch: impl Into<String>,
        tree: TreeSnapshot,
        cf: CitationFile,
    ) -> Result<Self> {
        let version = Version::build(Vec::new(), tree, cf, 1)?;
        let branch = branch.into();
        let mut repo = Repository {
            id: id.into(),
            default_branch: branch.clone(),
            versions: BTreeMap::new(),
            branches: BTreeMap::new(),
            staged: BTreeMap::new(),
            clock: 1,
        };
        repo.branches.insert(branch, version.id.clone());
        repo.versions.insert(version.id.clone(), Arc::new(version));
        Ok(repo)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn default_branch(&self) -> &str {
        &self.default_branch
    }

    pub fn branches(&self) -> impl Iterator<Item = (&str, &VersionId)> {
        self.branches.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn versions(&self) -> impl Iterator<Item = &Arc<Version>> {
        self.versions.values()
    }

    pub fn version(&self, id: &VersionId) -> Result<&Arc<Version>> {
        self.versions.get(id).ok_or_else(|| Error::UnknownVersion(id.to_string()))
    }

    pub fn head_id(&self, branch: &str) -> Result<&VersionId> {
        self.branches.get(branch).ok_or_else(|| Error::UnknownBranch(branch.to_owned()))
    }

    pub fn head(&self, branch: &str) -> Result<&Arc<Version>> {
        self.version(self.head_id(branch)?)
    }

    /// The branch an edit at `at` would land on, enforcing that citation
    /// updates only happen at the latest version of a branch. A version
    /// that heads several branches picks the first by name.
    pub fn latest_branch(&self, at: &Revision) -> Result<String> {
        match at {
            Revision::Branch(name) => {
                self.head_id(name)?;
                Ok(name.clone())
            }
            Revision::Version(id) => {
                self.version(id)?;
                self.branches
                    .iter()
                    .find(|(_, head)| *head == id)
                    .map(|(name, _)| name.clone())
                    .ok_or(Error::NotLatestVersion)
            }
        }
    }

    pub fn staged(&self, branch: &str) -> &[CiteEdit] {
        self.staged.get(branch).map(Vec::as_slice).unwrap_or_default()
    }

    /// The branch head's citation file with all staged edits applied.
    pub fn staged_citation_file(&self, branch: &str) -> Result<CitationFile> {
        let head = self.head(branch)?;
        let mut cf = head.cf.clone();
        for edit in self.staged(branch) {
            ops::apply_edit(&mut cf, &head.tree, edit)?;
        }
        Ok(cf)
    }

    pub(crate) fn push_staged(&mut self, branch: &str, edit: CiteEdit) {
        self.staged.entry(branch.to_owned()).or_default().push(edit);
    }

    fn append(
        &mut self,
        branch: &str,
        parents: Vec<VersionId>,
        tree: TreeSnapshot,
        cf: CitationFile,
    ) -> Result<Arc<Version>> {
        let version = Arc::new(Version::build(parents, tree, cf, self.clock + 1)?);
        self.clock += 1;
        self.versions.insert(version.id.clone(), Arc::clone(&version));
        self.branches.insert(branch.to_owned(), version.id.clone());
        self.staged.remove(branch);
        Ok(version)
    }

    /// Records a new version on `branch`.
    ///
    /// The citation file of the new version is the head's with, in order:
    /// staged and `cite_edits` applied; keys under renamed paths re-keyed by
    /// prefix substitution; keys of deleted paths dropped. Directories left
    /// without files disappear, as in git.
    pub fn commit(&mut self, branch: &str, tree_edits: &[TreeEdit], cite_edits: &[CiteEdit]) -> Result<Arc<Version>> {
        let head = Arc::clone(self.head(branch)?);
        let mut cf = self.staged_citation_file(branch)?;
        for edit in cite_edits {
            ops::apply_edit(&mut cf, &head.tree, edit)?;
        }

        let mut tree = head.tree.clone();
        for edit in tree_edits {
            match edit {
                TreeEdit::CreateFile { path, digest } => tree.insert_file(path, digest.clone())?,
                TreeEdit::ModifyContent { path, digest } => tree.set_digest(path, digest.clone())?,
                TreeEdit::Delete { path } => {
                    tree.remove(path)?;
                    cf.retain(|k, _| !path.covers(k));
                }
                TreeEdit::Rename { from, to } => {
                    tree.rename(from, to)?;
                    let moved: Vec<(CanonicalPath, CitationRecord)> =
                        cf.entries().filter(|(k, _)| from.covers(k)).map(|(k, v)| (k.clone(), v.clone())).collect();
                    for (key, record) in moved {
                        cf.remove(&key)?;
                        cf.set(key.rebase(from, to).expect("covered key rebases"), record);
                    }
                }
            }
        }
        tree.prune_empty_dirs();
        cf.retain(|k, _| tree.contains(k));

        self.append(branch, vec![head.id.clone()], tree, cf)
    }

    /// Creates `name` pointing at an existing version.
    pub fn create_branch(&mut self, name: &str, from: &VersionId) -> Result<()> {
        if self.branches.contains_key(name) {
            return Err(Error::BranchExists(name.to_owned()));
        }
        self.version(from)?;
        self.branches.insert(name.to_owned(), from.clone());
        Ok(())
    }

    /// Starts a branch with a fresh root version unrelated to any history.
    pub fn create_orphan_branch(&mut self, name: &str, tree: TreeSnapshot, cf: CitationFile) -> Result<Arc<Version>> {
        if self.branches.contains_key(name) {
            return Err(Error::BranchExists(name.to_owned()));
        }
        self.append(name, Vec::new(), tree, cf)
    }

    /// `id` and all of its ancestors.
    pub fn ancestry(&self, id: &VersionId) -> Result<BTreeSet<VersionId>> {
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([id.clone()]);
        while let Some(v) = queue.pop_front() {
            if !seen.insert(v.clone()) {
                continue;
            }
            queue.extend(self.version(&v)?.parents.iter().cloned());
        }
        Ok(seen)
    }

    /// Best common ancestor: the most recent version reachable from both.
    pub fn merge_base(&self, a: &VersionId, b: &VersionId) -> Result<Option<VersionId>> {
        let left = self.ancestry(a)?;
        let right = self.ancestry(b)?;
        Ok(left.intersection(&right).max_by_key(|id| (self.versions[*id].timestamp, (*id).clone())).cloned())
    }

    /// MergeCite: merges `from` into `into`.
    ///
    /// Files merge by simplified three-way rules (see [`merge_trees`]).
    /// Citation files merge by union: a key on one side only is kept; equal
    /// records merge silently; when the records differ and one side still
    /// has the merge-base record, the other side's change wins; otherwise
    /// `resolver` decides. Keys whose path is absent from the merged tree
    /// are dropped first and never reported as conflicts.
    pub fn merge_cite(&mut self, into: &str, from: &str, resolver: &mut dyn ConflictResolver) -> Result<MergeOutcome> {
        let left = Arc::clone(self.head(into)?);
        let right = Arc::clone(self.head(from)?);
        if self.ancestry(&left.id)?.contains(&right.id) {
            return Ok(MergeOutcome {
                version: left,
                conflicts: Vec::new(),
                pruned: Vec::new(),
                warnings: Vec::new(),
                up_to_date: true,
            });
        }
        let base_id = self
            .merge_base(&left.id, &right.id)?
            .ok_or_else(|| Error::NoCommonAncestor(into.to_owned(), from.to_owned()))?;
        let base = Arc::clone(self.version(&base_id)?);

        let TreeMerge { tree, warnings } = merge_trees(&base.tree, &left.tree, &right.tree);
        let left_cf = self.staged_citation_file(into)?;

        let mut keys: BTreeSet<&CanonicalPath> = left_cf.keys().collect();
        keys.extend(right.cf.keys());

        let mut merged = BTreeMap::new();
        let mut conflicts = Vec::new();
        let mut pruned = Vec::new();
        for key in keys {
            if !tree.contains(key) {
                pruned.push(key.clone());
                continue;
            }
            let record = match (left_cf.get(key), right.cf.get(key)) {
                (Some(l), None) => l.clone(),
                (None, Some(r)) => r.clone(),
                (Some(l), Some(r)) if l == r => l.clone(),
                (Some(l), Some(r)) => match base.cf.get(key) {
                    Some(b) if b == l => r.clone(),
                    Some(b) if b == r => l.clone(),
                    _ => {
                        let mut report = ConflictReport::new(key.clone(), l.clone(), r.clone());
                        report.resolution = resolver.resolve(&report);
                        let chosen = report.chosen().cloned().ok_or_else(|| Error::UnresolvedConflict(key.clone()))?;
                        chosen.check()?;
                        conflicts.push(report);
                        chosen
                    }
                },
                (None, None) => unreachable!("key came from one of the sides"),
            };
            merged.insert(key.clone(), record);
        }
        let cf = CitationFile::from_entries(merged)?;
        let version = self.append(into, vec![left.id.clone(), right.id.clone()], tree, cf)?;
        Ok(MergeOutcome { version, conflicts, pruned, warnings, up_to_date: false })
    }

    /// ForkCite: a new repository holding `version` (default: the default
    /// branch head) and all its ancestors verbatim, with one branch of the
    /// same name as this repository's default branch.
    pub fn fork(&self, version: Option<&VersionId>, fork_id: impl Into<String>) -> Result<Repository> {
        let head = match version {
            Some(v) => self.version(v)?.id.clone(),
            None => self.head_id(&self.default_branch)?.clone(),
        };
        let ancestry = self.ancestry(&head)?;
        let versions: BTreeMap<VersionId, Arc<Version>> =
            ancestry.into_iter().map(|id| (id.clone(), Arc::clone(&self.versions[&id]))).collect();
        let clock = versions.values().map(|v| v.timestamp).max().unwrap_or(0);
        Ok(Repository {
            id: fork_id.into(),
            default_branch: self.default_branch.clone(),
            versions,
            branches: BTreeMap::from([(self.default_branch.clone(), head)]),
            staged: BTreeMap::new(),
            clock,
        })
    }
}

/// CopyCite: copies the directory `src_subtree` of `src_version` in `src`
/// into `dst` at `dst_path` on `dst_branch`, migrating its citations.
///
/// Explicit entries inside the subtree are re-keyed under `dst_path`, and
/// `dst_path` is explicitly cited with whatever `src_subtree` resolved to,
/// so every copied node resolves to the same record it had in the source.
pub fn copy_cite(
    src: &Repository,
    src_version: &VersionId,
    src_subtree: &CanonicalPath,
    dst: &mut Repository,
    dst_branch: &str,
    dst_path: &CanonicalPath,
) -> Result<CopyOutcome> {
    let source = src.versions.get(src_version).ok_or_else(|| Error::SourceVersionUnknown(src_version.to_string()))?;
    if !src_subtree.is_container() || !source.tree.contains(src_subtree) {
        return Err(Error::SubtreeMissing(src_subtree.clone()));
    }
    let head = Arc::clone(dst.head(dst_branch)?);
    if dst_path.kind() != PathKind::Directory {
        return Err(Error::DestinationCollision(dst_path.clone()));
    }
    let parent = dst_path.parent().expect("directories have parents");
    let segments: Vec<&str> = dst_path.segments().collect();
    if !head.tree.contains(&parent) || head.tree.kind_of(&segments).is_some() {
        return Err(Error::DestinationCollision(dst_path.clone()));
    }

    let subtree = source.tree.subtree(src_subtree).expect("checked container");
    let mut tree = head.tree.clone();
    tree.insert_node(dst_path, Node::Dir(subtree.root().clone()))?;

    let mut cf = dst.staged_citation_file(dst_branch)?;
    let added = ops::migrate_subtree_citations(&source.cf, &source.tree, src_subtree, &mut cf, dst_path)?;
    let version = dst.append(dst_branch, vec![head.id.clone()], tree, cf)?;
    Ok(CopyOutcome { version, added })
}
