use std::fmt;

use crate::error::{Error, Result};
use crate::model::TreeSnapshot;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PathKind {
    Root,
    Directory,
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KindHint {
    File,
    Directory,
    Unknown,
}

/// A repository path in canonical rendered form.
///
/// The rendered string is the whole representation: it starts with `/`,
/// directories end with `/`, and the root is exactly `/`. Equality and
/// ordering are byte comparisons of that string, which is the order used
/// by citation files on disk.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalPath(String);

impl CanonicalPath {
    pub fn root() -> Self {
        CanonicalPath("/".to_owned())
    }

    /// Builds a path from already-validated segments.
    pub fn from_segments<S: AsRef<str>>(segments: &[S], kind: PathKind) -> Result<Self> {
        let mut rendered = String::from("/");
        for (i, seg) in segments.iter().enumerate() {
            let seg = seg.as_ref();
            check_segment(seg, seg)?;
            if i > 0 {
                rendered.push('/');
            }
            rendered.push_str(seg);
        }
        match (segments.is_empty(), kind) {
            (true, _) => Ok(Self::root()),
            (false, PathKind::Root) => {
                Err(Error::InvalidPath { raw: rendered, reason: "only the empty segment list is the root" })
            }
            (false, PathKind::Directory) => {
                rendered.push('/');
                Ok(CanonicalPath(rendered))
            }
            (false, PathKind::File) => Ok(CanonicalPath(rendered)),
        }
    }

    /// Parses an already-rendered canonical string, as found in citation
    /// file keys. Anything not in canonical form is rejected.
    pub fn parse_rendered(rendered: &str) -> Result<Self> {
        let invalid = |reason| Error::InvalidPath { raw: rendered.to_owned(), reason };
        let Some(body) = rendered.strip_prefix('/') else {
            return Err(invalid("canonical paths start with '/'"));
        };
        if body.is_empty() {
            return Ok(Self::root());
        }
        let (body, kind) = match body.strip_suffix('/') {
            Some(b) => (b, PathKind::Directory),
            None => (body, PathKind::File),
        };
        let segments: Vec<&str> = body.split('/').collect();
        for seg in &segments {
            check_segment(seg, rendered)?;
        }
        Self::from_segments(&segments, kind)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn kind(&self) -> PathKind {
        if self.0.len() == 1 {
            PathKind::Root
        } else if self.0.ends_with('/') {
            PathKind::Directory
        } else {
            PathKind::File
        }
    }

    pub fn is_root(&self) -> bool {
        self.kind() == PathKind::Root
    }

    /// Directories and the root can contain other paths.
    pub fn is_container(&self) -> bool {
        self.kind() != PathKind::File
    }

    pub fn segments(&self) -> impl Iterator<Item = &str> {
        self.0.split('/').filter(|s| !s.is_empty())
    }

    pub fn depth(&self) -> usize {
        self.segments().count()
    }

    pub fn name(&self) -> Option<&str> {
        self.segments().last()
    }

    /// The containing directory; `None` for the root.
    pub fn parent(&self) -> Option<CanonicalPath> {
        if self.is_root() {
            return None;
        }
        let trimmed = self.0.trim_end_matches('/');
        let cut = trimmed.rfind('/').expect("rendered paths start with '/'");
        Some(CanonicalPath(trimmed[..=cut].to_owned()))
    }

    /// Proper containment: `self` is a directory strictly above `other`.
    pub fn is_ancestor_of(&self, other: &CanonicalPath) -> bool {
        self.is_container() && other.0.len() > self.0.len() && other.0.starts_with(&self.0)
    }

    /// `self == other` or `self` is an ancestor of `other`.
    pub fn covers(&self, other: &CanonicalPath) -> bool {
        self == other || self.is_ancestor_of(other)
    }

    /// Appends a child segment. `self` must be a container.
    pub fn join(&self, name: &str, kind: PathKind) -> Result<CanonicalPath> {
        if !self.is_container() {
            return Err(Error::InvalidPath { raw: format!("{}{}", self.0, name), reason: "files have no children" });
        }
        let mut segments: Vec<&str> = self.segments().collect();
        segments.push(name);
        Self::from_segments(&segments, kind)
    }

    /// Replaces the prefix `from` of this path with `to`.
    ///
    /// Returns `None` when `from` does not cover `self`. Both endpoints must
    /// have the same kind unless `from == self`.
    pub fn rebase(&self, from: &CanonicalPath, to: &CanonicalPath) -> Option<CanonicalPath> {
        if self == from {
            return Some(to.clone());
        }
        if !from.is_ancestor_of(self) || !to.is_container() {
            return None;
        }
        Some(CanonicalPath(format!("{}{}", to.0, &self.0[from.0.len()..])))
    }

    /// All proper ancestors, nearest first, ending with the root.
    pub fn ancestors(&self) -> impl Iterator<Item = CanonicalPath> {
        std::iter::successors(self.parent(), |p| p.parent())
    }

    /// The path relative to the root, without leading slash, as used by git.
    pub fn to_relative(&self) -> &str {
        self.0.trim_start_matches('/').trim_end_matches('/')
    }
}

impl fmt::Display for CanonicalPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for CanonicalPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

fn check_segment(seg: &str, raw: &str) -> Result<()> {
    let invalid = |reason| Err(Error::InvalidPath { raw: raw.to_owned(), reason });
    if seg.is_empty() {
        return invalid("empty path segment");
    }
    if seg == "." || seg == ".." {
        return invalid("'.' and '..' segments are not allowed");
    }
    if seg.contains('\\') {
        return invalid("backslash separators are not allowed");
    }
    if seg.contains('/') {
        return invalid("segment contains '/'");
    }
    Ok(())
}

/// Normalizes a user-supplied path into canonical form.
///
/// `raw` may be relative (`src/main.c`) or root-anchored (`/src/main.c`).
/// A trailing `/` marks a directory. `.` segments are dropped; `..` is
/// rejected outright so nothing can escape the root. When `kind_hint` is
/// `Unknown` the kind is looked up in `tree`.
pub fn canonicalize(raw: &str, kind_hint: KindHint, tree: Option<&TreeSnapshot>) -> Result<CanonicalPath> {
    let invalid = |reason| Error::InvalidPath { raw: raw.to_owned(), reason };
    if raw.contains('\\') {
        return Err(invalid("backslash separators are not allowed"));
    }
    let body = raw.strip_prefix('/').unwrap_or(raw);
    let trailing_slash = body.ends_with('/');
    let body = body.strip_suffix('/').unwrap_or(body);

    let mut segments = Vec::new();
    if !body.is_empty() {
        for seg in body.split('/') {
            match seg {
                "" => return Err(invalid("empty path segment")),
                "." => {}
                ".." => return Err(invalid("'..' would leave the repository root")),
                s => segments.push(s),
            }
        }
    }
    if segments.is_empty() {
        return Ok(CanonicalPath::root());
    }

    let kind = match (kind_hint, trailing_slash) {
        (KindHint::File, true) => return Err(invalid("trailing '/' on a file path")),
        (KindHint::File, false) => PathKind::File,
        (KindHint::Directory, _) | (KindHint::Unknown, true) => PathKind::Directory,
        (KindHint::Unknown, false) => {
            let tree = tree.ok_or_else(|| Error::UnknownKind(raw.to_owned()))?;
            tree.kind_of(&segments).ok_or_else(|| Error::UnknownKind(raw.to_owned()))?
        }
    };
    CanonicalPath::from_segments(&segments, kind)
}
