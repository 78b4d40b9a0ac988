use std::collections::BTreeMap;

use crate::conflict::{ConflictReport, ConflictResolver};
use crate::error::{Error, Result};
use crate::model::{CanonicalPath, CitationFile, CitationRecord, TreeSnapshot};

use super::GitWorktree;

const DRIVER: &str = "gitcite-keep";

/// Merges two citation files against the merged tree.
///
/// The result holds every key of either side. Where both sides hold
/// different records the side that left the `base` record alone yields to
/// the other; the rest go to `resolver`, in key order. Keys that name
/// nothing in `merged_tree` are dropped before any of that and returned as
/// pruned.
pub fn merge_citation_files(
    base: Option<&CitationFile>,
    left: &CitationFile,
    right: &CitationFile,
    merged_tree: &TreeSnapshot,
    resolver: &mut dyn ConflictResolver,
) -> Result<(CitationFile, Vec<ConflictReport>, Vec<CanonicalPath>)> {
    let mut out: BTreeMap<CanonicalPath, CitationRecord> = left.as_map().clone();
    let mut contested: Vec<(CanonicalPath, CitationRecord)> = Vec::new();
    for (key, theirs) in right.entries() {
        match out.get(key) {
            None => {
                out.insert(key.clone(), theirs.clone());
            }
            Some(ours) if ours == theirs => {}
            Some(_) => contested.push((key.clone(), theirs.clone())),
        }
    }

    let mut pruned: Vec<CanonicalPath> = out.keys().filter(|k| !merged_tree.contains(k)).cloned().collect();
    for key in &pruned {
        out.remove(key);
    }
    contested.retain(|(key, _)| merged_tree.contains(key));

    let mut conflicts = Vec::new();
    for (key, theirs) in contested {
        let ours = out[&key].clone();
        let base_record = base.and_then(|b| b.get(&key));
        if base_record == Some(&ours) {
            out.insert(key, theirs);
            continue;
        }
        if base_record == Some(&theirs) {
            continue;
        }
        let mut report = ConflictReport::new(key.clone(), ours, theirs);
        report.resolution = resolver.resolve(&report);
        let chosen = match report.chosen() {
            Some(r) => r.clone(),
            None => return Err(Error::UnresolvedConflict(key)),
        };
        chosen.check()?;
        out.insert(key, chosen);
        conflicts.push(report);
    }
    pruned.sort();
    Ok((CitationFile::from_entries(out)?, conflicts, pruned))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MergeOptions {
    /// Resolve conflicting file contents in favour of the current branch.
    pub prefer_ours_for_files: bool,
    /// Commit the merge once the citation file is merged.
    pub commit: bool,
    /// Turn off git's rename detection, so that a move on one side is a
    /// deletion plus an addition.
    pub no_renames: bool,
}

#[derive(Debug, Clone, Default)]
pub struct MergeReport {
    pub cf: CitationFile,
    pub conflicts: Vec<ConflictReport>,
    pub pruned: Vec<CanonicalPath>,
    pub committed: bool,
    /// The other branch was already merged.
    pub up_to_date: bool,
}

impl GitWorktree {
    fn install_keep_driver(&self) -> Result<()> {
        self.git(["config", &format!("merge.{DRIVER}.name"), "keep the current citation file"])?;
        self.git(["config", &format!("merge.{DRIVER}.driver"), "true"])?;
        let info = self.git(["rev-parse", "--git-path", "info"])?;
        let info = self.root().join(info.trim());
        std::fs::create_dir_all(&info)?;
        let attributes = info.join("attributes");
        let line = format!("/{} merge={DRIVER}", self.file_name());
        let existing = std::fs::read_to_string(&attributes).unwrap_or_default();
        if !existing.lines().any(|l| l == line) {
            let mut text = existing;
            if !text.is_empty() && !text.ends_with('\n') {
                text.push('\n');
            }
            text.push_str(&line);
            text.push('\n');
            std::fs::write(&attributes, text)?;
        }
        Ok(())
    }

    /// Merges branch or revision `other` into the current branch, merging
    /// the citation file with [`merge_citation_files`].
    ///
    /// Files git cannot merge are settled in favour of whichever side still
    /// has them, the current side first. On an unresolved citation conflict
    /// the merge is aborted and the working tree restored.
    pub fn merge(&self, other: &str, resolver: &mut dyn ConflictResolver, opts: MergeOptions) -> Result<MergeReport> {
        if self.current_branch()?.is_none() {
            return Err(Error::NotLatestVersion);
        }
        let theirs = self.rev_parse(other)?;
        let ours = self.head_commit()?.ok_or(Error::UnknownVersion("HEAD".into()))?;
        if self.run(["merge-base", "--is-ancestor", theirs.as_str(), ours.as_str()])?.status.success() {
            return Ok(MergeReport { cf: self.load()?, up_to_date: true, ..Default::default() });
        }
        let base = self.run(["merge-base", ours.as_str(), theirs.as_str()])?;
        if !base.status.success() {
            return Err(Error::NoCommonAncestor("HEAD".into(), other.to_owned()));
        }
        let base = String::from_utf8_lossy(&base.stdout).trim().to_owned();

        // Uncommitted citation edits take part in the merge as the current
        // side; git itself only ever sees the committed file.
        let left = self.load()?;
        let saved = std::fs::read(self.citation_path())?;
        if let Some(committed) = self.show_file("HEAD", self.file_name())? {
            if committed != saved {
                std::fs::write(self.citation_path(), committed)?;
            }
        }
        let restore = || std::fs::write(self.citation_path(), &saved);

        self.install_keep_driver()?;
        let mut args = vec!["merge", "--no-ff", "--no-commit", "-q"];
        if opts.prefer_ours_for_files {
            args.extend(["-X", "ours"]);
        }
        if opts.no_renames {
            // ort keeps detecting renames despite the option
            args.extend(["-s", "recursive", "-X", "no-renames"]);
        }
        args.push(other);
        let out = self.run(&args)?;
        if !out.status.success() && !self.merge_in_progress()? {
            restore()?;
            return Err(Error::Git {
                command: args.join(" "),
                stderr: String::from_utf8_lossy(&out.stderr).trim().to_owned(),
            });
        }

        match self.finish_merge(&base, &theirs, other, &left, resolver, opts) {
            Ok(report) => Ok(report),
            Err(e) => {
                let _ = self.run(["merge", "--abort"]);
                restore()?;
                Err(e)
            }
        }
    }

    fn finish_merge(
        &self,
        base: &str,
        theirs: &str,
        other: &str,
        left: &CitationFile,
        resolver: &mut dyn ConflictResolver,
        opts: MergeOptions,
    ) -> Result<MergeReport> {
        self.settle_unmerged()?;
        let merged_tree = self.index_tree()?;
        let base_cf = self.citation_file_at(base)?;
        let right = self
            .citation_file_at(theirs)?
            .ok_or_else(|| Error::FileMissing(format!("{other}:{}", self.file_name())))?;
        let (cf, conflicts, pruned) = merge_citation_files(base_cf.as_ref(), left, &right, &merged_tree, resolver)?;
        self.store(&cf)?;
        self.git(["add", "--", self.file_name()])?;
        let mut committed = false;
        if opts.commit {
            self.git(["commit", "-q", "--no-edit"])?;
            committed = true;
        }
        Ok(MergeReport { cf, conflicts, pruned, committed, up_to_date: false })
    }

    /// Settles each unmerged path by taking stage 2 (ours) if present,
    /// else stage 3 (theirs); a path both sides deleted is removed.
    fn settle_unmerged(&self) -> Result<()> {
        let out = self.git(["ls-files", "-u", "-z"])?;
        let mut stages: BTreeMap<String, Vec<u8>> = BTreeMap::new();
        for line in out.split('\0').filter(|l| !l.is_empty()) {
            let Some((meta, rel)) = line.split_once('\t') else { continue };
            let stage = meta.rsplit(' ').next().and_then(|s| s.parse().ok()).unwrap_or(0u8);
            stages.entry(rel.to_owned()).or_default().push(stage);
        }
        for (rel, present) in stages {
            if rel == self.file_name() {
                continue;
            }
            if present.contains(&2) {
                self.git(["checkout", "--ours", "--", rel.as_str()])?;
                self.git(["add", "--", rel.as_str()])?;
            } else if present.contains(&3) {
                self.git(["checkout", "--theirs", "--", rel.as_str()])?;
                self.git(["add", "--", rel.as_str()])?;
            } else {
                self.git(["rm", "-q", "--cached", "--", rel.as_str()])?;
            }
        }
        Ok(())
    }
}
