//! ForkCite: the fork carries every citation verbatim.

use gitcite::model::{CanonicalPath, CitationRecord, TreeSnapshot};
use gitcite::ops::{self, RoleContext};
use gitcite::store::{Repository, Revision};

fn p(s: &str) -> CanonicalPath {
    CanonicalPath::parse_rendered(s).unwrap()
}

fn main() -> gitcite::Result<()> {
    let tree = TreeSnapshot::from_files([(p("/src/lib.rs"), "1".to_owned())])?;
    let upstream =
        CitationRecord::new("ada", "engine", "https://example.org/ada/engine", "0.9", "2019-09-09", vec!["Ada".into()]);
    let mut repo = Repository::init("engine", "main", tree, upstream)?;
    let member = RoleContext::member("ada");
    let lib = CitationRecord::new(
        "ada",
        "engine-lib",
        "https://example.org/ada/engine",
        "0.9",
        "2019-09-09",
        vec!["Ada".into(), "Lin".into()],
    );
    ops::add_cite(&mut repo, &member, &Revision::branch("main"), &p("/src/"), lib)?;
    repo.commit("main", &[], &[])?;

    let fork = repo.fork(None, "engine-fork")?;
    println!("fork has {} versions", fork.versions().count());
    let head = fork.head(fork.default_branch())?;
    println!("citation files equal: {}", head.cf == repo.head("main")?.cf);

    // Crediting the new owner is an ordinary edit on the fork.
    let mut fork = fork;
    let mine = CitationRecord::new(
        "grace",
        "engine-fork",
        "https://example.org/grace/engine-fork",
        "1.0",
        "2024-01-01",
        vec!["Grace".into()],
    );
    ops::modify_cite(
        &mut fork,
        &RoleContext::member("grace"),
        &Revision::branch("main"),
        &CanonicalPath::root(),
        mine,
    )?;
    let v = fork.commit("main", &[], &[])?;
    println!("/src/lib.rs -> {}", ops::gen_cite(&fork, &v.id, &p("/src/lib.rs"))?.owner);
    println!("/ -> {}", ops::gen_cite(&fork, &v.id, &CanonicalPath::root())?.owner);
    Ok(())
}
