use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::document;
use crate::error::Result;
use crate::model::{CanonicalPath, CitationFile, PathKind, TreeSnapshot};

use super::{load_citation_file, path_from_git, store_citation_file, GitWorktree};

/// Renames and deletions between two trees, at file and directory level.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ChangeSet {
    pub renames: Vec<(CanonicalPath, CanonicalPath)>,
    pub deleted: Vec<CanonicalPath>,
}

/// What a commit-time sync did to the citation file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SyncReport {
    pub cf: CitationFile,
    /// Keys moved to follow a rename, as (old, new).
    pub rekeyed: Vec<(CanonicalPath, CanonicalPath)>,
    /// Keys dropped because their path is gone.
    pub dropped: Vec<CanonicalPath>,
}

/// Rewrites citation keys for renamed paths and drops keys of deleted ones.
///
/// Each key follows the most specific rename or deletion that covers it: a
/// rename rewrites the key by prefix substitution, a deletion drops it.
/// Both lists are in terms of the old tree. The root is never touched.
pub fn sync_citation_file(cf: &CitationFile, changes: &ChangeSet) -> SyncReport {
    let mut out = BTreeMap::new();
    let mut report = SyncReport::default();
    for (key, record) in cf.entries() {
        let rename = changes
            .renames
            .iter()
            .filter(|(from, _)| !key.is_root() && from.covers(key))
            .max_by_key(|(from, _)| from.as_str().len());
        let deleted =
            changes.deleted.iter().filter(|d| !key.is_root() && d.covers(key)).map(|d| d.as_str().len()).max();
        if deleted.is_some_and(|len| rename.is_none_or(|(from, _)| from.as_str().len() < len)) {
            report.dropped.push(key.clone());
            continue;
        }
        let new_key = match rename {
            Some((from, to)) => match key.rebase(from, to) {
                Some(moved) => {
                    report.rekeyed.push((key.clone(), moved.clone()));
                    moved
                }
                None => key.clone(),
            },
            None => key.clone(),
        };
        // A renamed entry replaces whatever stale key sat at its target.
        if rename.is_some() || !out.contains_key(&new_key) {
            out.insert(new_key, record.clone());
        }
    }
    report.cf = CitationFile::from_entries_unchecked(out);
    report
}

/// Applies renames and deletions to the citation file at the root of a
/// working tree and rewrites it. With nothing to change the file is left
/// untouched on disk.
pub fn sync_on_commit(
    worktree_root: &Path,
    rename_map: &[(CanonicalPath, CanonicalPath)],
    deleted: &[CanonicalPath],
) -> Result<CitationFile> {
    let cf = load_citation_file(worktree_root)?;
    let changes = ChangeSet { renames: rename_map.to_vec(), deleted: deleted.to_vec() };
    let report = sync_citation_file(&cf, &changes);
    if report.cf != cf {
        store_citation_file(worktree_root, &report.cf)?;
    }
    Ok(report.cf)
}

/// Lifts file-level renames and deletions to directories.
///
/// A directory of `old` missing from `new` counts as renamed to `P` when
/// `P` is a directory new in `new` and every file under the old directory
/// was renamed to `P` plus the same relative path; otherwise it counts as
/// deleted.
pub fn infer_changes(
    old: &TreeSnapshot,
    new: &TreeSnapshot,
    file_renames: &[(CanonicalPath, CanonicalPath)],
    file_deletes: &[CanonicalPath],
) -> ChangeSet {
    let by_source: BTreeMap<&CanonicalPath, &CanonicalPath> = file_renames.iter().map(|(a, b)| (a, b)).collect();
    let old_files: BTreeSet<CanonicalPath> = old.files().into_keys().collect();
    let mut changes = ChangeSet { renames: file_renames.to_vec(), deleted: file_deletes.to_vec() };

    for dir in old.paths().into_iter().filter(|p| p.kind() == PathKind::Directory) {
        if new.contains(&dir) {
            continue;
        }
        let mut target: Option<String> = None;
        let mut consistent = true;
        for file in old_files.iter().filter(|f| dir.is_ancestor_of(f)) {
            let suffix = &file.as_str()[dir.as_str().len()..];
            let candidate = by_source
                .get(file)
                .and_then(|to| to.as_str().strip_suffix(suffix))
                .filter(|prefix| prefix.ends_with('/') && prefix.len() > 1);
            match (candidate, &target) {
                (Some(c), None) => target = Some(c.to_owned()),
                (Some(c), Some(t)) if c == t => {}
                _ => {
                    consistent = false;
                    break;
                }
            }
        }
        let renamed_to = target
            .filter(|_| consistent)
            .and_then(|t| CanonicalPath::parse_rendered(&t).ok())
            .filter(|t| new.contains(t) && !old.contains(t));
        match renamed_to {
            Some(to) => changes.renames.push((dir, to)),
            None => changes.deleted.push(dir),
        }
    }
    changes
}

impl GitWorktree {
    /// Renames and deletions staged relative to HEAD, as git detects them,
    /// lifted to directories.
    pub fn staged_changes(&self) -> Result<ChangeSet> {
        let Some(head) = self.head_commit()? else {
            return Ok(ChangeSet::default());
        };
        let out = self.git(["diff", "--cached", "-M", "--name-status", "-z", head.as_str()])?;
        let mut fields = out.split('\0').filter(|s| !s.is_empty());
        let mut renames = Vec::new();
        let mut deletes = Vec::new();
        while let Some(status) = fields.next() {
            let first = fields.next().unwrap_or_default();
            match status.chars().next() {
                Some('R') => {
                    let second = fields.next().unwrap_or_default();
                    if !self.is_citation_file(first) && !self.is_citation_file(second) {
                        renames.push((path_from_git(first, PathKind::File)?, path_from_git(second, PathKind::File)?));
                    }
                }
                Some('C') => {
                    fields.next();
                }
                Some('D') if !self.is_citation_file(first) => deletes.push(path_from_git(first, PathKind::File)?),
                _ => {}
            }
        }
        let old = self.tree_at(&head)?;
        let new = self.index_tree()?;
        Ok(infer_changes(&old, &new, &renames, &deletes))
    }

    /// Brings the citation file in line with the staged tree: follows
    /// renames, drops keys of deleted paths, and finally drops any key the
    /// staged tree no longer contains. Stages the citation file.
    pub fn sync(&self) -> Result<SyncReport> {
        let changes = self.staged_changes()?;
        let cf = self.load()?;
        let mut report = sync_citation_file(&cf, &changes);
        let index = self.index_tree()?;
        let stale: Vec<CanonicalPath> = report.cf.keys().filter(|k| !index.contains(k)).cloned().collect();
        for key in stale {
            report.cf.remove(&key)?;
            report.dropped.push(key);
        }
        report.dropped.sort();
        if report.cf != cf || !document::is_canonical(&std::fs::read_to_string(self.citation_path())?) {
            self.store(&report.cf)?;
        }
        self.git(["add", "--", self.file_name()])?;
        Ok(report)
    }

    /// Syncs the citation file and commits the index.
    pub fn commit(&self, message: &str, allow_empty: bool) -> Result<SyncReport> {
        let report = self.sync()?;
        let mut args = vec!["commit", "-q", "-m", message];
        if allow_empty {
            args.push("--allow-empty");
        }
        self.git(args)?;
        Ok(report)
    }
}
