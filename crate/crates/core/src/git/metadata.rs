use crate::error::Result;
use crate::ops::RepoMetadata;

use super::GitWorktree;

/// Splits a remote URL into `(owner, repo_name, web_locator)`.
///
/// Understands `https://host/owner/repo(.git)`, `ssh://git@host/owner/repo`
/// and scp-like `git@host:owner/repo.git`. The locator is the https form.
pub fn parse_remote_url(url: &str) -> Option<(String, String, String)> {
    let url = url.trim();
    let (host, path) = if let Some(rest) = url.split_once("://").map(|(_, r)| r) {
        let rest = rest.rsplit_once('@').map_or(rest, |(_, r)| r);
        let (host, path) = rest.split_once('/')?;
        (host.split(':').next()?, path)
    } else {
        let rest = url.rsplit_once('@').map_or(url, |(_, r)| r);
        rest.split_once(':')?
    };
    let path = path.trim_end_matches('/');
    let path = path.strip_suffix(".git").unwrap_or(path);
    let (owner, repo) = path.rsplit_once('/')?;
    let owner = owner.rsplit('/').next()?;
    if host.is_empty() || owner.is_empty() || repo.is_empty() {
        return None;
    }
    Some((owner.to_owned(), repo.to_owned(), format!("https://{host}/{path}")))
}

impl GitWorktree {
    /// Repository metadata for a default root citation.
    ///
    /// Owner, name and locator come from the `origin` remote when it has a
    /// recognizable URL; otherwise from `user.name`, the directory name and
    /// a `file://` URL. Version and date are those of HEAD, and the authors
    /// are the commit authors in order of first commit; before the first
    /// commit these are left empty.
    pub fn metadata(&self) -> Result<RepoMetadata> {
        let head = self.head_commit()?;
        let origin = self.run(["remote", "get-url", "origin"])?;
        let parsed =
            origin.status.success().then(|| parse_remote_url(&String::from_utf8_lossy(&origin.stdout))).flatten();
        let (owner, repo_name, locator) = match parsed {
            Some(p) => p,
            None => {
                let user = self.run(["config", "user.name"])?;
                let owner = String::from_utf8_lossy(&user.stdout).trim().to_owned();
                let root = self.root().canonicalize()?;
                let name = root.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
                (owner, name, format!("file://{}", root.display()))
            }
        };
        let Some(head) = head else {
            return Ok(RepoMetadata { owner, repo_name, locator, ..Default::default() });
        };
        let date = self.git(["log", "-1", "--format=%cI", head.as_str()])?.trim().to_owned();
        let mut contributors: Vec<String> = Vec::new();
        for name in self.git(["log", "--reverse", "--format=%an", head.as_str()])?.lines() {
            let name = name.trim();
            if !name.is_empty() && !contributors.iter().any(|c| c == name) {
                contributors.push(name.to_owned());
            }
        }
        Ok(RepoMetadata { owner, repo_name, locator, head_commit: head, head_date: date, contributors })
    }
}
