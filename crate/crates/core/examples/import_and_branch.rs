//! Bob's project imports Carlos's code and merges Alice's branch; each
//! part stays credited to its author.

use gitcite::conflict::Decline;
use gitcite::model::{CanonicalPath, CitationRecord, TreeSnapshot};
use gitcite::ops::{self, RoleContext};
use gitcite::store::{copy_cite, Repository, Revision, TreeEdit};

fn p(s: &str) -> CanonicalPath {
    CanonicalPath::parse_rendered(s).unwrap()
}

fn rec(owner: &str, repo: &str) -> CitationRecord {
    CitationRecord::new(
        owner,
        repo,
        format!("https://example.org/{owner}/{repo}"),
        "1",
        "2021-01-01",
        vec![owner.into()],
    )
}

fn main() -> gitcite::Result<()> {
    let c = Repository::init(
        "C",
        "main",
        TreeSnapshot::from_files([(p("/CC/cc.c"), "c".to_owned())])?,
        rec("Carlos", "C"),
    )?;
    let mut b =
        Repository::init("B", "main", TreeSnapshot::from_files([(p("/main.c"), "m".to_owned())])?, rec("Bob", "B"))?;

    copy_cite(&c, c.head_id("main")?, &p("/CC/"), &mut b, "main", &p("/CC/"))?;
    b.commit("main", &[TreeEdit::ModifyContent { path: p("/CC/cc.c"), digest: "adapted".into() }], &[])?;

    let at = b.head_id("main")?.clone();
    b.create_branch("alice", &at)?;
    b.commit("alice", &[TreeEdit::CreateFile { path: p("/GUI/app.js"), digest: "g".into() }], &[])?;
    ops::add_cite(&mut b, &RoleContext::member("Bob"), &Revision::branch("alice"), &p("/GUI/"), rec("Alice", "B-gui"))?;
    b.commit("alice", &[], &[])?;
    let merged = b.merge_cite("main", "alice", &mut Decline)?;

    for path in ["/", "/main.c", "/CC/", "/CC/cc.c", "/GUI/", "/GUI/app.js"] {
        let r = ops::gen_cite(&b, &merged.version.id, &p(path))?;
        println!("{path:<12} {}", r.owner);
    }
    Ok(())
}
