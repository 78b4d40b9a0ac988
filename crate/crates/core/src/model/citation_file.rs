use std::borrow::Borrow;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{CanonicalPath, CitationRecord};

impl Borrow<str> for CanonicalPath {
    fn borrow(&self) -> &str {
        self.as_str()
    }
}

/// The explicit citations of one version: a partial map from paths to
/// records whose defined keys form the active domain. Iteration is in
/// byte order of the rendered keys.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CitationFile {
    entries: BTreeMap<CanonicalPath, CitationRecord>,
}

impl CitationFile {
    /// A citation file holding only the root citation.
    pub fn new(root: CitationRecord) -> Self {
        let mut entries = BTreeMap::new();
        entries.insert(CanonicalPath::root(), root);
        CitationFile { entries }
    }

    pub fn from_entries(entries: BTreeMap<CanonicalPath, CitationRecord>) -> Result<Self> {
        if !entries.contains_key("/") {
            return Err(Error::MissingRoot);
        }
        Ok(CitationFile { entries })
    }

    /// Accepts a map without checking for the root entry, for reporting and
    /// repair paths that must be able to represent a broken file.
    pub fn from_entries_unchecked(entries: BTreeMap<CanonicalPath, CitationRecord>) -> Self {
        CitationFile { entries }
    }

    pub fn get(&self, path: &CanonicalPath) -> Option<&CitationRecord> {
        self.entries.get(path)
    }

    pub fn get_str(&self, rendered: &str) -> Option<&CitationRecord> {
        self.entries.get(rendered)
    }

    pub fn contains(&self, path: &CanonicalPath) -> bool {
        self.entries.contains_key(path)
    }

    pub fn root_record(&self) -> Option<&CitationRecord> {
        self.entries.get("/")
    }

    pub fn entries(&self) -> impl Iterator<Item = (&CanonicalPath, &CitationRecord)> {
        self.entries.iter()
    }

    pub fn keys(&self) -> impl Iterator<Item = &CanonicalPath> {
        self.entries.keys()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn as_map(&self) -> &BTreeMap<CanonicalPath, CitationRecord> {
        &self.entries
    }

    pub fn into_map(self) -> BTreeMap<CanonicalPath, CitationRecord> {
        self.entries
    }

    /// Inserts or replaces an entry, returning the previous record.
    pub fn set(&mut self, path: CanonicalPath, record: CitationRecord) -> Option<CitationRecord> {
        self.entries.insert(path, record)
    }

    /// Removes a non-root entry.
    pub fn remove(&mut self, path: &CanonicalPath) -> Result<Option<CitationRecord>> {
        if path.is_root() {
            return Err(Error::RootUndeletable);
        }
        Ok(self.entries.remove(path))
    }

    /// Keeps only the entries for which `keep` holds. The root is always kept.
    pub fn retain(&mut self, mut keep: impl FnMut(&CanonicalPath, &CitationRecord) -> bool) {
        self.entries.retain(|k, v| k.is_root() || keep(k, v));
    }

    /// The entry that governs `path`: its own, else that of the nearest
    /// enclosing directory that has one. Consults only the file, not a tree.
    pub fn closest_entry(&self, path: &CanonicalPath) -> Option<(&CanonicalPath, &CitationRecord)> {
        let rendered = path.as_str();
        if let Some(hit) = self.entries.get_key_value(rendered) {
            return Some(hit);
        }
        // Every ancestor's rendered form is a prefix of ours ending at a '/'.
        // Scan those cut points right to left; for directories skip the
        // trailing slash, which is the path itself.
        let search = rendered.strip_suffix('/').unwrap_or(rendered);
        search.rmatch_indices('/').find_map(|(i, _)| self.entries.get_key_value(&rendered[..=i]))
    }
}
