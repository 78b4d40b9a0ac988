use std::collections::BTreeSet;

use crate::model::{CanonicalPath, TreeSnapshot};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeMerge {
    pub tree: TreeSnapshot,
    pub warnings: Vec<String>,
}

/// File-level three-way merge of two trees against their common base.
///
/// Per file: if both sides agree, take it; if one side is unchanged from
/// base, take the other side (so a deletion against an unmodified file
/// deletes it). When both changed it differently the `left` (into) side
/// wins, except that a modified file survives a deletion on the other side.
/// Content is never merged.
pub fn merge_trees(base: &TreeSnapshot, left: &TreeSnapshot, right: &TreeSnapshot) -> TreeMerge {
    let (b, l, r) = (base.files(), left.files(), right.files());
    let paths: BTreeSet<&CanonicalPath> = b.keys().chain(l.keys()).chain(r.keys()).collect();

    let mut tree = TreeSnapshot::new();
    let mut warnings = Vec::new();
    for path in paths {
        let (bd, ld, rd) = (b.get(path), l.get(path), r.get(path));
        let chosen = if ld == rd || rd == bd {
            ld
        } else if ld == bd {
            rd
        } else {
            match (ld, rd) {
                (Some(_), Some(_)) => {
                    warnings.push(format!("{path}: changed on both sides, keeping the branch merged into"));
                    ld
                }
                (Some(_), None) | (None, Some(_)) => {
                    warnings.push(format!("{path}: modified on one side and deleted on the other, keeping it"));
                    ld.or(rd)
                }
                (None, None) => None,
            }
        };
        if let Some(digest) = chosen {
            if tree.insert_file(path, digest.clone()).is_err() {
                warnings.push(format!("{path}: clashes with a directory of the same name, dropped"));
            }
        }
    }
    TreeMerge { tree, warnings }
}
