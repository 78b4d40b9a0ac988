use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::model::{CanonicalPath, CitationFile, PathKind, TreeSnapshot};
use crate::ops;

use super::GitWorktree;

/// Where copied code comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CopySource {
    /// The working tree of another local repository.
    Local(PathBuf),
    /// A committed revision of the destination repository itself.
    Revision(String),
    /// A remote repository, cloned into a temporary directory. `rev`
    /// defaults to its HEAD.
    Remote { url: String, rev: Option<String> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CopySummary {
    /// Citation keys added at the destination.
    pub added: Vec<CanonicalPath>,
    /// Number of files written.
    pub files: usize,
}

struct Snapshot {
    cf: CitationFile,
    tree: TreeSnapshot,
    repo: GitWorktree,
    rev: Option<String>,
}

impl Snapshot {
    fn read(&self, rel: &str) -> Result<Vec<u8>> {
        match &self.rev {
            None => Ok(std::fs::read(self.repo.root().join(rel))?),
            Some(rev) => self.repo.show_file(rev, rel)?.ok_or_else(|| Error::FileMissing(format!("{rev}:{rel}"))),
        }
    }
}

/// The source's citation file, or a default root citation drafted from its
/// metadata when it has none.
fn source_citations(repo: &GitWorktree, rev: Option<&str>) -> Result<CitationFile> {
    let found = match rev {
        Some(rev) => repo.citation_file_at(rev)?,
        None if repo.has_citation_file() => Some(repo.load()?),
        None => None,
    };
    match found {
        Some(cf) => Ok(cf),
        None => Ok(CitationFile::new(ops::default_root_citation(&repo.metadata()?)?)),
    }
}

impl GitWorktree {
    /// Copies directory `src_subtree` of `source` to directory `dst_path`
    /// of this working tree, stages the copied files, and migrates their
    /// citations into this tree's citation file.
    pub fn copy_from(
        &self,
        source: &CopySource,
        src_subtree: &CanonicalPath,
        dst_path: &CanonicalPath,
    ) -> Result<CopySummary> {
        if self.current_branch()?.is_none() {
            return Err(Error::NotLatestVersion);
        }
        let _clone;
        let snapshot = match source {
            CopySource::Local(dir) => {
                let repo = GitWorktree::discover(dir)?.with_file_name(self.file_name());
                Snapshot { cf: source_citations(&repo, None)?, tree: repo.working_tree()?, repo, rev: None }
            }
            CopySource::Revision(rev) => {
                let commit = self.rev_parse(rev).map_err(|_| Error::SourceVersionUnknown(rev.clone()))?;
                let repo = self.clone();
                Snapshot {
                    cf: source_citations(&repo, Some(&commit))?,
                    tree: repo.tree_at(&commit)?,
                    repo,
                    rev: Some(commit),
                }
            }
            CopySource::Remote { url, rev } => {
                _clone = tempfile::tempdir()?;
                let dir = _clone.path().join("src");
                let dir_arg = dir.to_string_lossy().into_owned();
                let out = self.run(["clone", "-q", url.as_str(), dir_arg.as_str()])?;
                if !out.status.success() {
                    return Err(Error::NetworkFailure(String::from_utf8_lossy(&out.stderr).trim().to_owned()));
                }
                let repo = GitWorktree::open(&dir).with_file_name(self.file_name());
                let rev = rev.clone().unwrap_or_else(|| "HEAD".to_owned());
                let commit = repo.rev_parse(&rev).map_err(|_| Error::SourceVersionUnknown(rev.clone()))?;
                Snapshot {
                    cf: source_citations(&repo, Some(&commit))?,
                    tree: repo.tree_at(&commit)?,
                    repo,
                    rev: Some(commit),
                }
            }
        };

        if !src_subtree.is_container() || !snapshot.tree.contains(src_subtree) {
            return Err(Error::SubtreeMissing(src_subtree.clone()));
        }
        let here = self.working_tree()?;
        let parent = dst_path.parent().ok_or_else(|| Error::DestinationCollision(dst_path.clone()))?;
        if dst_path.kind() != PathKind::Directory
            || !here.contains(&parent)
            || self.root().join(dst_path.to_relative()).exists()
        {
            return Err(Error::DestinationCollision(dst_path.clone()));
        }

        let files: Vec<CanonicalPath> =
            snapshot.tree.files().into_keys().filter(|f| src_subtree.is_ancestor_of(f)).collect();
        if files.is_empty() {
            return Err(Error::SubtreeMissing(src_subtree.clone()));
        }
        for file in &files {
            let target = file.rebase(src_subtree, dst_path).expect("file lies under the subtree");
            let bytes = snapshot.read(file.to_relative())?;
            let out = self.root().join(target.to_relative());
            if let Some(dir) = out.parent() {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(out, bytes)?;
        }
        self.git(["add", "--", dst_path.to_relative()])?;

        let mut cf = self.load()?;
        let added = ops::migrate_subtree_citations(&snapshot.cf, &snapshot.tree, src_subtree, &mut cf, dst_path)?;
        self.store(&cf)?;
        Ok(CopySummary { added, files: files.len() })
    }
}
