//! Same-key citation conflicts raised while merging two citation files.

use crate::model::{CanonicalPath, CitationRecord};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Resolution {
    Pending,
    ChoseLeft,
    ChoseRight,
    Replaced(CitationRecord),
}

/// Both sides of a merge cite `key` with different records.
///
/// `left` is the branch being merged into, `right` the incoming branch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictReport {
    pub key: CanonicalPath,
    pub left: CitationRecord,
    pub right: CitationRecord,
    pub resolution: Resolution,
}

impl ConflictReport {
    pub fn new(key: CanonicalPath, left: CitationRecord, right: CitationRecord) -> Self {
        debug_assert_ne!(left, right);
        ConflictReport { key, left, right, resolution: Resolution::Pending }
    }

    /// The record the resolution selects, if any.
    pub fn chosen(&self) -> Option<&CitationRecord> {
        match &self.resolution {
            Resolution::Pending => None,
            Resolution::ChoseLeft => Some(&self.left),
            Resolution::ChoseRight => Some(&self.right),
            Resolution::Replaced(r) => Some(r),
        }
    }
}

/// Decides conflicts one at a time, in key order. Returning
/// [`Resolution::Pending`] declines and aborts the merge.
pub trait ConflictResolver {
    fn resolve(&mut self, report: &ConflictReport) -> Resolution;
}

impl<F: FnMut(&ConflictReport) -> Resolution> ConflictResolver for F {
    fn resolve(&mut self, report: &ConflictReport) -> Resolution {
        self(report)
    }
}

/// Always keeps the branch being merged into.
#[derive(Debug, Clone, Copy, Default)]
pub struct KeepLeft;

impl ConflictResolver for KeepLeft {
    fn resolve(&mut self, _: &ConflictReport) -> Resolution {
        Resolution::ChoseLeft
    }
}

/// Always takes the incoming branch.
#[derive(Debug, Clone, Copy, Default)]
pub struct KeepRight;

impl ConflictResolver for KeepRight {
    fn resolve(&mut self, _: &ConflictReport) -> Resolution {
        Resolution::ChoseRight
    }
}

/// Declines every conflict.
#[derive(Debug, Clone, Copy, Default)]
pub struct Decline;

impl ConflictResolver for Decline {
    fn resolve(&mut self, _: &ConflictReport) -> Resolution {
        Resolution::Pending
    }
}

/// Replays a fixed list of answers; declines once they run out.
#[derive(Debug, Clone, Default)]
pub struct Scripted {
    answers: std::collections::VecDeque<Resolution>,
}

impl Scripted {
    pub fn new(answers: impl IntoIterator<Item = Resolution>) -> Self {
        Scripted { answers: answers.into_iter().collect() }
    }
}

impl ConflictResolver for Scripted {
    fn resolve(&mut self, _: &ConflictReport) -> Resolution {
        self.answers.pop_front().unwrap_or(Resolution::Pending)
    }
}
