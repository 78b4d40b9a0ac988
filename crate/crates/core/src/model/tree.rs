use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{CanonicalPath, PathKind};

/// File content identity. The model never looks inside it.
pub type Digest = String;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    File(Digest),
    Dir(Directory),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Directory {
    children: BTreeMap<String, Node>,
}

impl Directory {
    pub fn children(&self) -> impl Iterator<Item = (&str, &Node)> {
        self.children.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn is_empty(&self) -> bool {
        self.children.is_empty()
    }
}

/// The directory/file tree of one version. Interior nodes are directories,
/// leaves are files (or empty directories).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TreeSnapshot {
    root: Directory,
}

fn conflict(path: &CanonicalPath, reason: &'static str) -> Error {
    Error::EditConflict { path: path.clone(), reason }
}

impl TreeSnapshot {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a tree holding exactly the given files (directories implied).
    pub fn from_files<I>(files: I) -> Result<Self>
    where
        I: IntoIterator<Item = (CanonicalPath, Digest)>,
    {
        let mut tree = Self::new();
        for (path, digest) in files {
            tree.insert_file(&path, digest)?;
        }
        Ok(tree)
    }

    pub fn root(&self) -> &Directory {
        &self.root
    }

    pub fn kind_of(&self, segments: &[&str]) -> Option<PathKind> {
        if segments.is_empty() {
            return Some(PathKind::Root);
        }
        let mut dir = &self.root;
        for (i, seg) in segments.iter().enumerate() {
            match dir.children.get(*seg)? {
                Node::Dir(d) if i + 1 < segments.len() => dir = d,
                Node::Dir(_) => return Some(PathKind::Directory),
                Node::File(_) if i + 1 == segments.len() => return Some(PathKind::File),
                Node::File(_) => return None,
            }
        }
        unreachable!("loop returns on the last segment")
    }

    pub fn get(&self, path: &CanonicalPath) -> Option<&Node> {
        let segs: Vec<&str> = path.segments().collect();
        let (last, init) = segs.split_last()?;
        let dir = self.dir_at(init)?;
        let node = dir.children.get(*last)?;
        match (node, path.kind()) {
            (Node::File(_), PathKind::File) | (Node::Dir(_), PathKind::Directory) => Some(node),
            _ => None,
        }
    }

    /// Whether `path` names a node of the matching kind. The root is always
    /// contained.
    pub fn contains(&self, path: &CanonicalPath) -> bool {
        path.is_root() || self.get(path).is_some()
    }

    pub fn digest(&self, path: &CanonicalPath) -> Option<&str> {
        match self.get(path)? {
            Node::File(d) => Some(d),
            Node::Dir(_) => None,
        }
    }

    fn dir_at(&self, segments: &[&str]) -> Option<&Directory> {
        let mut dir = &self.root;
        for seg in segments {
            match dir.children.get(*seg)? {
                Node::Dir(d) => dir = d,
                Node::File(_) => return None,
            }
        }
        Some(dir)
    }

    /// Directory at `path` (or the root), creating missing directories.
    fn dir_mut_creating(&mut self, path: &CanonicalPath) -> Result<&mut Directory> {
        let mut dir = &mut self.root;
        for seg in path.segments() {
            let node = dir.children.entry(seg.to_owned()).or_insert_with(|| Node::Dir(Directory::default()));
            dir = match node {
                Node::Dir(d) => d,
                Node::File(_) => return Err(conflict(path, "a file is in the way of a directory")),
            };
        }
        Ok(dir)
    }

    fn dir_mut(&mut self, path: &CanonicalPath) -> Option<&mut Directory> {
        let mut dir = &mut self.root;
        for seg in path.segments() {
            dir = match dir.children.get_mut(seg)? {
                Node::Dir(d) => d,
                Node::File(_) => return None,
            };
        }
        Some(dir)
    }

    /// Adds a new file, creating parent directories.
    pub fn insert_file(&mut self, path: &CanonicalPath, digest: impl Into<Digest>) -> Result<()> {
        if path.kind() != PathKind::File {
            return Err(conflict(path, "not a file path"));
        }
        self.insert_node(path, Node::File(digest.into()))
    }

    /// Adds an empty directory, creating parents.
    pub fn insert_dir(&mut self, path: &CanonicalPath) -> Result<()> {
        if path.kind() != PathKind::Directory {
            return Err(conflict(path, "not a directory path"));
        }
        self.insert_node(path, Node::Dir(Directory::default()))
    }

    /// Grafts `node` at `path`. Fails if anything already lives there.
    pub fn insert_node(&mut self, path: &CanonicalPath, node: Node) -> Result<()> {
        let parent = path.parent().ok_or_else(|| conflict(path, "the root already exists"))?;
        let name = path.name().expect("non-root path has a name").to_owned();
        match (&node, path.kind()) {
            (Node::File(_), PathKind::File) | (Node::Dir(_), PathKind::Directory) => {}
            _ => return Err(conflict(path, "node kind does not match path kind")),
        }
        let dir = self.dir_mut_creating(&parent)?;
        if dir.children.contains_key(&name) {
            return Err(conflict(path, "path already exists"));
        }
        dir.children.insert(name, node);
        Ok(())
    }

    /// Replaces the digest of an existing file.
    pub fn set_digest(&mut self, path: &CanonicalPath, digest: impl Into<Digest>) -> Result<()> {
        let parent = path.parent().ok_or_else(|| conflict(path, "the root is not a file"))?;
        let name = path.name().unwrap_or_default();
        match self.dir_mut(&parent).and_then(|d| d.children.get_mut(name)) {
            Some(Node::File(d)) if path.kind() == PathKind::File => {
                *d = digest.into();
                Ok(())
            }
            _ => Err(conflict(path, "no such file")),
        }
    }

    /// Detaches and returns the node at `path`.
    pub fn remove(&mut self, path: &CanonicalPath) -> Result<Node> {
        if !self.contains(path) {
            return Err(conflict(path, "no such path"));
        }
        let parent = path.parent().ok_or_else(|| conflict(path, "the root cannot be removed"))?;
        let name = path.name().unwrap_or_default();
        let dir = self.dir_mut(&parent).expect("contained path has a parent directory");
        Ok(dir.children.remove(name).expect("contained path is a child of its parent"))
    }

    /// Moves the node at `from` to `to`, creating parents of `to`.
    pub fn rename(&mut self, from: &CanonicalPath, to: &CanonicalPath) -> Result<()> {
        if from.kind() != to.kind() {
            return Err(conflict(to, "rename endpoints differ in kind"));
        }
        if from.is_ancestor_of(to) {
            return Err(conflict(to, "cannot move a directory inside itself"));
        }
        if self.contains(to) {
            return Err(conflict(to, "rename target already exists"));
        }
        let node = self.remove(from)?;
        self.insert_node(to, node)
    }

    /// A copy of the subtree under the directory `path`, re-rooted.
    pub fn subtree(&self, path: &CanonicalPath) -> Option<TreeSnapshot> {
        if path.is_root() {
            return Some(self.clone());
        }
        match self.get(path)? {
            Node::Dir(d) => Some(TreeSnapshot { root: d.clone() }),
            Node::File(_) => None,
        }
    }

    /// Drops directories that contain no files (never the root).
    pub fn prune_empty_dirs(&mut self) {
        fn prune(dir: &mut Directory) {
            dir.children.retain(|_, node| match node {
                Node::File(_) => true,
                Node::Dir(d) => {
                    prune(d);
                    !d.children.is_empty()
                }
            });
        }
        prune(&mut self.root);
    }

    /// Every node path, root included, in byte order.
    pub fn paths(&self) -> Vec<CanonicalPath> {
        let mut out = vec![CanonicalPath::root()];
        walk(&self.root, &CanonicalPath::root(), &mut |p, _| out.push(p.clone()));
        out.sort();
        out
    }

    /// All files with their digests.
    pub fn files(&self) -> BTreeMap<CanonicalPath, Digest> {
        let mut out = BTreeMap::new();
        walk(&self.root, &CanonicalPath::root(), &mut |p, n| {
            if let Node::File(d) = n {
                out.insert(p.clone(), d.clone());
            }
        });
        out
    }

    /// Number of nodes including the root.
    pub fn node_count(&self) -> usize {
        let mut n = 1;
        walk(&self.root, &CanonicalPath::root(), &mut |_, _| n += 1);
        n
    }
}

fn walk(dir: &Directory, at: &CanonicalPath, f: &mut dyn FnMut(&CanonicalPath, &Node)) {
    for (name, node) in &dir.children {
        let kind = match node {
            Node::File(_) => PathKind::File,
            Node::Dir(_) => PathKind::Directory,
        };
        let path = at.join(name, kind).expect("tree names are valid segments");
        f(&path, node);
        if let Node::Dir(d) = node {
            walk(d, &path, f);
        }
    }
}
