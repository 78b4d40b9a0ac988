//! Project-member and citer operations on citation functions.
//!
//! The pure functions here work on a [`CitationFile`] and the tree it
//! describes. The repository-level wrappers add the role check and the
//! latest-version guard, and stage edits on a branch of a
//! [`Repository`] until the next commit.

use crate::error::{Error, Result};
use crate::model::{self, CanonicalPath, CitationFile, CitationRecord, TreeSnapshot};
use crate::store::{Repository, Revision, VersionId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    ProjectMember,
    Citer,
}

impl Role {
    fn name(self) -> &'static str {
        match self {
            Role::ProjectMember => "project member",
            Role::Citer => "citer",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoleContext {
    pub role: Role,
    pub actor: String,
}

impl RoleContext {
    pub fn member(actor: impl Into<String>) -> Self {
        RoleContext { role: Role::ProjectMember, actor: actor.into() }
    }

    pub fn citer(actor: impl Into<String>) -> Self {
        RoleContext { role: Role::Citer, actor: actor.into() }
    }

    pub fn require_member(&self, action: &'static str) -> Result<()> {
        match self.role {
            Role::ProjectMember => Ok(()),
            role => Err(Error::RoleForbidden { role: role.name(), action }),
        }
    }
}

/// One change to a citation function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CiteEdit {
    Add { path: CanonicalPath, record: CitationRecord },
    Delete { path: CanonicalPath },
    Modify { path: CanonicalPath, record: CitationRecord },
}

impl CiteEdit {
    pub fn path(&self) -> &CanonicalPath {
        match self {
            CiteEdit::Add { path, .. } | CiteEdit::Delete { path } | CiteEdit::Modify { path, .. } => path,
        }
    }
}

/// Applies one edit to `cf` after checking its preconditions against
/// `tree`. On error `cf` is unchanged.
pub fn apply_edit(cf: &mut CitationFile, tree: &TreeSnapshot, edit: &CiteEdit) -> Result<()> {
    match edit {
        CiteEdit::Add { path, record } => {
            record.check()?;
            if !tree.contains(path) {
                return Err(Error::PathNotInTree(path.clone()));
            }
            if cf.contains(path) {
                return Err(Error::AlreadyCited(path.clone()));
            }
            cf.set(path.clone(), record.clone());
        }
        CiteEdit::Delete { path } => {
            if path.is_root() {
                return Err(Error::RootUndeletable);
            }
            if cf.remove(path)?.is_none() {
                return Err(Error::NotCited(path.clone()));
            }
        }
        CiteEdit::Modify { path, record } => {
            record.check()?;
            if !cf.contains(path) {
                return Err(Error::NotCited(path.clone()));
            }
            cf.set(path.clone(), record.clone());
        }
    }
    Ok(())
}

fn stage(
    repo: &mut Repository,
    ctx: &RoleContext,
    at: &Revision,
    edit: CiteEdit,
    action: &'static str,
) -> Result<CitationFile> {
    ctx.require_member(action)?;
    let branch = repo.latest_branch(at)?;
    let mut cf = repo.staged_citation_file(&branch)?;
    let head = repo.head(&branch)?;
    apply_edit(&mut cf, &head.tree, &edit)?;
    repo.push_staged(&branch, edit);
    Ok(cf)
}

/// AddCite: attaches `record` to an uncited `path` of the latest version.
pub fn add_cite(
    repo: &mut Repository,
    ctx: &RoleContext,
    at: &Revision,
    path: &CanonicalPath,
    record: CitationRecord,
) -> Result<CitationFile> {
    let edit = CiteEdit::Add { path: path.clone(), record };
    stage(repo, ctx, at, edit, "add citations")
}

/// DelCite: removes the explicit citation of `path`; its subtree falls back
/// to the next cited ancestor.
pub fn del_cite(repo: &mut Repository, ctx: &RoleContext, at: &Revision, path: &CanonicalPath) -> Result<CitationFile> {
    stage(repo, ctx, at, CiteEdit::Delete { path: path.clone() }, "delete citations")
}

/// ModifyCite: replaces the record of an already cited `path`.
pub fn modify_cite(
    repo: &mut Repository,
    ctx: &RoleContext,
    at: &Revision,
    path: &CanonicalPath,
    record: CitationRecord,
) -> Result<CitationFile> {
    let edit = CiteEdit::Modify { path: path.clone(), record };
    stage(repo, ctx, at, edit, "modify citations")
}

/// GenCite: the resolved citation of `path` in any committed version.
pub fn gen_cite(repo: &Repository, version: &VersionId, path: &CanonicalPath) -> Result<CitationRecord> {
    let v = repo.version(version)?;
    model::resolve(&v.cf, &v.tree, path).cloned()
}

/// Repository metadata a default root citation is synthesized from.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RepoMetadata {
    pub owner: String,
    pub repo_name: String,
    pub locator: String,
    pub head_commit: String,
    pub head_date: String,
    pub contributors: Vec<String>,
}

/// Draft root citation for a repository that has none yet.
pub fn default_root_citation(meta: &RepoMetadata) -> Result<CitationRecord> {
    if meta.owner.trim().is_empty() {
        return Err(Error::MissingMetadata("owner"));
    }
    if meta.repo_name.trim().is_empty() {
        return Err(Error::MissingMetadata("repository name"));
    }
    if meta.locator.trim().is_empty() {
        return Err(Error::MissingMetadata("locator"));
    }
    let authors = if meta.contributors.is_empty() { vec![meta.owner.clone()] } else { meta.contributors.clone() };
    Ok(CitationRecord::new(
        meta.owner.clone(),
        meta.repo_name.clone(),
        meta.locator.clone(),
        meta.head_commit.clone(),
        meta.head_date.clone(),
        authors,
    ))
}

/// Citation migration for a subtree copy.
///
/// Every explicit entry of `src_cf` inside `src_subtree` is re-keyed under
/// `dst_path`, and `dst_path` itself is explicitly cited with the record
/// `src_subtree` resolved to in the source, so nodes that inherited their
/// citation keep it after the move. Returns the keys added to `dst_cf`.
pub fn migrate_subtree_citations(
    src_cf: &CitationFile,
    src_tree: &TreeSnapshot,
    src_subtree: &CanonicalPath,
    dst_cf: &mut CitationFile,
    dst_path: &CanonicalPath,
) -> Result<Vec<CanonicalPath>> {
    let inherited = model::resolve(src_cf, src_tree, src_subtree)?.clone();
    let mut added = vec![dst_path.clone()];
    dst_cf.set(dst_path.clone(), inherited);
    for (key, record) in src_cf.entries() {
        if !src_subtree.is_ancestor_of(key) {
            continue;
        }
        let moved = key.rebase(src_subtree, dst_path).expect("key lies under the subtree");
        dst_cf.set(moved.clone(), record.clone());
        added.push(moved);
    }
    added.sort();
    Ok(added)
}
