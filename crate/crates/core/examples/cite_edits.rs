//! AddCite, ModifyCite and DelCite staged on a branch, then committed.

use gitcite::model::{CanonicalPath, CitationRecord, TreeSnapshot};
use gitcite::ops::{self, RoleContext};
use gitcite::store::{Repository, Revision};

fn p(s: &str) -> CanonicalPath {
    CanonicalPath::parse_rendered(s).unwrap()
}

fn rec(owner: &str, version: &str) -> CitationRecord {
    CitationRecord::new(owner, "tools", "https://example.org/tools", version, "2022-05-01", vec![owner.into()])
}

fn main() -> gitcite::Result<()> {
    let tree = TreeSnapshot::from_files([(p("/lib/a.c"), "a".to_owned()), (p("/lib/b.c"), "b".to_owned())])?;
    let mut repo = Repository::init("tools", "main", tree, rec("root", "1"))?;
    let member = RoleContext::member("maintainer");
    let head = Revision::branch("main");

    ops::add_cite(&mut repo, &member, &head, &p("/lib/"), rec("Dana", "1"))?;
    ops::add_cite(&mut repo, &member, &head, &p("/lib/a.c"), rec("Eve", "1"))?;
    ops::modify_cite(&mut repo, &member, &head, &p("/lib/"), rec("Dana", "2"))?;
    ops::del_cite(&mut repo, &member, &head, &p("/lib/a.c"))?;
    let v = repo.commit("main", &[], &[])?;
    println!("committed {}", v.id);
    for path in ["/lib/a.c", "/lib/b.c"] {
        let r = ops::gen_cite(&repo, &v.id, &p(path))?;
        println!("{path}: {} version {}", r.owner, r.version_id);
    }

    let citer = RoleContext::citer("reader");
    if let Err(e) = ops::add_cite(&mut repo, &citer, &head, &p("/lib/b.c"), rec("Mallory", "1")) {
        println!("citer refused: {e}");
    }
    if let Err(e) = ops::del_cite(&mut repo, &member, &head, &CanonicalPath::root()) {
        println!("root refused: {e}");
    }
    Ok(())
}
