//! MergeCite with a one-sided change, a true conflict and a pruned key.

use gitcite::conflict::{ConflictReport, Resolution};
use gitcite::model::{CanonicalPath, CitationRecord, TreeSnapshot};
use gitcite::ops::CiteEdit;
use gitcite::store::{Repository, TreeEdit};

fn p(s: &str) -> CanonicalPath {
    CanonicalPath::parse_rendered(s).unwrap()
}

fn rec(owner: &str) -> CitationRecord {
    CitationRecord::new(owner, "proj", "https://example.org/proj", "1", "2023-02-02", vec![owner.into()])
}

fn main() -> gitcite::Result<()> {
    let tree = TreeSnapshot::from_files([
        (p("/a/x.c"), "x".to_owned()),
        (p("/b/y.c"), "y".to_owned()),
        (p("/c.c"), "c".to_owned()),
    ])?;
    let mut repo = Repository::init("P", "main", tree, rec("root"))?;
    let base = repo.head_id("main")?.clone();
    repo.create_branch("feature", &base)?;

    repo.commit(
        "main",
        &[],
        &[
            CiteEdit::Add { path: p("/a/"), record: rec("Alice") },
            CiteEdit::Add { path: p("/c.c"), record: rec("Carol") },
        ],
    )?;
    repo.commit(
        "feature",
        &[TreeEdit::Delete { path: p("/c.c") }],
        &[CiteEdit::Add { path: p("/a/"), record: rec("Ana") }, CiteEdit::Add { path: p("/b/"), record: rec("Ben") }],
    )?;

    let mut ask = |c: &ConflictReport| {
        println!("conflict at {}: {} vs {}", c.key, c.left.owner, c.right.owner);
        Resolution::ChoseRight
    };
    let out = repo.merge_cite("main", "feature", &mut ask)?;
    println!("pruned: {:?}", out.pruned);
    for (key, r) in out.version.cf.entries() {
        println!("{:<6} {}", key.as_str(), r.owner);
    }
    Ok(())
}
